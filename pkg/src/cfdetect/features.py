"""Named, ordered feature containers shared by both modalities."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np


class FeatureGroup(Enum):
    TFIDF = "TFIDF"
    SENTIMENT = "Sentiment"
    NER = "NER"
    WORD_SHAPE = "WordShape"
    READABILITY = "Readability"
    APPEARANCE = "Appearance"
    OBJECTS = "Objects"
    IMAGE_EMOTION = "ImageEmotion"
    FACES = "Faces"


# Prefixes partition every assembled feature name into exactly one group.
_GROUP_PREFIXES = (
    ("tfidf:", FeatureGroup.TFIDF),
    ("senti:", FeatureGroup.SENTIMENT),
    ("ner:", FeatureGroup.NER),
    ("form:", FeatureGroup.WORD_SHAPE),
    ("read:", FeatureGroup.READABILITY),
    ("img_app:", FeatureGroup.APPEARANCE),
    ("img_sem:", FeatureGroup.OBJECTS),
    ("img_emo:", FeatureGroup.IMAGE_EMOTION),
    ("img_face:", FeatureGroup.FACES),
)


def group_of(feature_name: str) -> FeatureGroup:
    for prefix, group in _GROUP_PREFIXES:
        if feature_name.startswith(prefix):
            return group
    raise ValueError(f"feature name {feature_name!r} belongs to no group")


def schema_hash(names: Sequence[str]) -> str:
    digest = hashlib.sha256("\n".join(names).encode("utf-8")).hexdigest()
    return digest


@dataclass(frozen=True)
class FeatureVector:
    names: tuple[str, ...]
    values: np.ndarray  # float64, 1-D

    def __post_init__(self):
        if len(self.names) != self.values.shape[0]:
            raise ValueError("names and values lengths differ")
        if len(set(self.names)) != len(self.names):
            raise ValueError("feature names must be unique")

    def __len__(self) -> int:
        return len(self.names)


@dataclass(frozen=True)
class FeatureMatrix:
    """Rows are campaigns (by id), columns are named features."""

    names: tuple[str, ...]
    ids: tuple[str, ...]
    values: np.ndarray  # float64, shape (len(ids), len(names))

    def __post_init__(self):
        if self.values.shape != (len(self.ids), len(self.names)):
            raise ValueError(
                f"matrix shape {self.values.shape} does not match "
                f"{len(self.ids)} ids x {len(self.names)} names")
        if len(set(self.names)) != len(self.names):
            raise ValueError("feature names must be unique")
        if len(set(self.ids)) != len(self.ids):
            raise ValueError("row ids must be unique")
        object.__setattr__(self, "_row_index", {cid: i for i, cid in enumerate(self.ids)})

    @property
    def n_features(self) -> int:
        return len(self.names)

    def row(self, campaign_id: str) -> FeatureVector:
        return FeatureVector(self.names, self.values[self._row_index[campaign_id]])

    def take_rows(self, ids: Iterable[str]) -> "FeatureMatrix":
        wanted = tuple(ids)
        idx = [self._row_index[cid] for cid in wanted]
        return FeatureMatrix(self.names, wanted, self.values[idx])

    def take_columns(self, column_indices: Sequence[int]) -> "FeatureMatrix":
        idx = list(column_indices)
        return FeatureMatrix(tuple(self.names[i] for i in idx), self.ids,
                             self.values[:, idx])

    def drop_group(self, group: FeatureGroup) -> "FeatureMatrix":
        keep = [i for i, n in enumerate(self.names) if group_of(n) is not group]
        return self.take_columns(keep)

    def schema_hash(self) -> str:
        return schema_hash(self.names)


def stack_vectors(ids: Sequence[str], vectors: Sequence[FeatureVector]) -> FeatureMatrix:
    if not vectors:
        raise ValueError("no vectors to stack")
    names = vectors[0].names
    for v in vectors[1:]:
        if v.names != names:
            raise ValueError("cannot stack vectors with differing schemas")
    return FeatureMatrix(names, tuple(ids), np.vstack([v.values for v in vectors]))
