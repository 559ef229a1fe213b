"""Image-modality features from per-image sidecar files.

The deep-model inference lives in a separate extractor component; this
module only ingests its sidecar vectors (one JSON file per image) and
aggregates them into a fixed 3,057-dimension campaign vector:
emotion (8) | appearance (2048) | semantic (1000) | faces (1).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .corpus import Campaign, Corpus
from .features import FeatureMatrix, FeatureVector

EMOTION_CATEGORIES = ("amusement", "anger", "awe", "contentment",
                      "disgust", "excitement", "fear", "sadness")
EMOTION_DIM = 8
APPEARANCE_DIM = 2048
SEMANTIC_DIM = 1000
TOTAL_DIM = EMOTION_DIM + APPEARANCE_DIM + SEMANTIC_DIM + 1  # 3,057

SIDECAR_SUFFIX = ".feat.json"


class SidecarError(Exception):
    """A sidecar file is missing, malformed, or dimensionally wrong."""


class SidecarDimensionError(SidecarError):
    def __init__(self, block: str, expected: int, got: int, path=None):
        where = f" in {path}" if path else ""
        super().__init__(f"block {block!r}{where} has {got} values, expected {expected}")
        self.block = block
        self.expected = expected
        self.got = got


class MissingSidecarError(SidecarError):
    def __init__(self, path):
        super().__init__(f"no sidecar file for image: {path}")
        self.path = path


@dataclass(frozen=True)
class ImageFeatures:
    emotion_logits: np.ndarray   # float32, 8
    appearance: np.ndarray       # float32, 2048
    semantic_logits: np.ndarray  # float32, 1000
    face_count: int

    def __post_init__(self):
        for block, arr, dim in (("emotion", self.emotion_logits, EMOTION_DIM),
                                ("appearance", self.appearance, APPEARANCE_DIM),
                                ("semantic", self.semantic_logits, SEMANTIC_DIM)):
            if arr.shape != (dim,):
                raise SidecarDimensionError(block, dim, int(np.prod(arr.shape)))
            if not np.all(np.isfinite(arr)):
                raise SidecarError(f"non-finite value in block {block!r}")
        if self.face_count < 0:
            raise SidecarError(f"face_count must be >= 0, got {self.face_count}")


@dataclass(frozen=True)
class CampaignImageVector:
    values: np.ndarray | None  # float64, 3057; None when the campaign has no images
    image_count: int

    @property
    def missing(self) -> bool:
        return self.image_count == 0

    def __post_init__(self):
        if self.missing:
            if self.values is not None:
                raise ValueError("missing vector must carry no values")
        else:
            if self.values is None or self.values.shape != (TOTAL_DIM,):
                raise ValueError(f"campaign image vector must have exactly {TOTAL_DIM} values")


def image_feature_names() -> tuple[str, ...]:
    names = [f"img_emo:{c}" for c in EMOTION_CATEGORIES]
    names += [f"img_app:{i:04d}" for i in range(APPEARANCE_DIM)]
    names += [f"img_sem:{i:04d}" for i in range(SEMANTIC_DIM)]
    names.append("img_face:count")
    assert len(names) == TOTAL_DIM
    return tuple(names)


def _read_block(payload: dict, key: str, dim: int, path) -> np.ndarray:
    if key not in payload:
        raise SidecarError(f"sidecar {path} missing key {key!r}")
    raw = payload[key]
    if not isinstance(raw, list) or len(raw) != dim:
        got = len(raw) if isinstance(raw, list) else -1
        raise SidecarDimensionError(key, dim, got, path)
    arr = np.asarray(raw, dtype=np.float32)
    if not np.all(np.isfinite(arr)):
        raise SidecarError(f"non-finite value in block {key!r} of {path}")
    return arr


def load_sidecar(path) -> ImageFeatures:
    """Read one image's feature file; floats are read at 32-bit precision."""
    path = Path(path)
    if not path.exists():
        raise MissingSidecarError(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SidecarError(f"sidecar {path} is not valid JSON: {exc}") from None
    emotion = _read_block(payload, "emotion", EMOTION_DIM, path)
    appearance = _read_block(payload, "appearance", APPEARANCE_DIM, path)
    semantic = _read_block(payload, "semantic", SEMANTIC_DIM, path)
    faces = payload.get("faces")
    if not isinstance(faces, int) or isinstance(faces, bool) or faces < 0:
        raise SidecarError(f"sidecar {path} key 'faces' must be a non-negative integer")
    return ImageFeatures(emotion, appearance, semantic, faces)


def sidecar_path_for(image_ref: str, sidecar_dir) -> Path:
    stem = Path(image_ref).stem
    return Path(sidecar_dir) / f"{stem}{SIDECAR_SUFFIX}"


def aggregate_campaign_images(features: Sequence[ImageFeatures]) -> CampaignImageVector:
    """Element-wise mean over a campaign's images; empty input is flagged missing."""
    if not features:
        return CampaignImageVector(values=None, image_count=0)
    emotion = np.mean([f.emotion_logits for f in features], axis=0, dtype=np.float64)
    appearance = np.mean([f.appearance for f in features], axis=0, dtype=np.float64)
    semantic = np.mean([f.semantic_logits for f in features], axis=0, dtype=np.float64)
    faces = float(np.mean([f.face_count for f in features]))
    values = np.concatenate([emotion, appearance, semantic, [faces]])
    assert values.shape == (TOTAL_DIM,)
    return CampaignImageVector(values=values, image_count=len(features))


def assemble_image_features(campaign: Campaign, sidecar_dir) -> CampaignImageVector:
    """Aggregate a campaign's image sidecars; every referenced image must have one."""
    loaded = []
    for ref in campaign.images:
        path = sidecar_path_for(ref, sidecar_dir)
        if not path.exists():
            raise MissingSidecarError(path)
        loaded.append(load_sidecar(path))
    return aggregate_campaign_images(loaded)


def assemble_image_matrix(corpus: Corpus, sidecar_dir) -> tuple[FeatureMatrix, tuple[str, ...]]:
    """Feature matrix over campaigns that have images, plus ids of those without."""
    names = image_feature_names()
    ids: list[str] = []
    rows: list[np.ndarray] = []
    missing: list[str] = []
    for campaign in corpus:
        vector = assemble_image_features(campaign, sidecar_dir)
        if vector.missing:
            missing.append(campaign.id)
        else:
            ids.append(campaign.id)
            rows.append(vector.values)
    values = np.vstack(rows) if rows else np.empty((0, TOTAL_DIM))
    return FeatureMatrix(names, tuple(ids), values), tuple(missing)


def write_sidecar(features: ImageFeatures, path, extractor_version: str = "offline") -> Path:
    """Serialize one image's features; floats are truncated to 32-bit first."""
    path = Path(path)
    payload = {
        "emotion": [float(v) for v in features.emotion_logits.astype(np.float32)],
        "appearance": [float(v) for v in features.appearance.astype(np.float32)],
        "semantic": [float(v) for v in features.semantic_logits.astype(np.float32)],
        "faces": int(features.face_count),
        "extractor_version": extractor_version,
    }
    tmp = path.with_suffix(".tmp")
    tmp.write_text(json.dumps(payload), encoding="utf-8")
    tmp.replace(path)
    return path
