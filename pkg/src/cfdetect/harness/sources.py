"""Fold-aware feature providers for the experiment protocols.

In leak-free mode the TF-IDF vocabulary must be refit on each training
fold, so the text source keeps the fold-independent feature blocks
(sentiment, readability, form, NER) precomputed and re-derives only the
TF-IDF block per fold. The image source is a plain matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from ..corpus import Corpus
from ..features import FeatureGroup, FeatureMatrix, group_of
from ..imagefeat import assemble_image_matrix
from ..text import TextProviders, text_feature_names
from ..text import assemble_text_features  # noqa: F401  (re-exported convenience)
from ..text.tfidf import (TfidfVocabulary, tfidf_feature_names,
                          tfidf_fit_tokenized, tfidf_transform_tokens,
                          tokenize_for_tfidf)


@dataclass(frozen=True)
class StaticFeatureSource:
    """A fixed matrix; folds see the same columns (image modality)."""

    matrix: FeatureMatrix

    @property
    def ids(self) -> tuple[str, ...]:
        return self.matrix.ids

    def fold_matrix(self, train_ids: Sequence[str]) -> FeatureMatrix:
        return self.matrix

    def full_matrix(self) -> FeatureMatrix:
        return self.matrix

    def drop_group(self, group: FeatureGroup) -> "StaticFeatureSource":
        return StaticFeatureSource(self.matrix.drop_group(group))


@dataclass(frozen=True)
class TextFeatureSource:
    """Static text blocks plus per-fold TF-IDF."""

    static: FeatureMatrix
    tokens: dict[str, tuple[str, ...]] | None  # None once TFIDF is ablated
    min_df: int = 2

    @property
    def ids(self) -> tuple[str, ...]:
        return self.static.ids

    def _with_vocab(self, vocab: TfidfVocabulary) -> FeatureMatrix:
        names = self.static.names + tuple(
            f"tfidf:{n}" for n in tfidf_feature_names(vocab))
        block = np.vstack([
            tfidf_transform_tokens(vocab, self.tokens[cid]) for cid in self.static.ids
        ]) if len(vocab) else np.zeros((len(self.static.ids), 0))
        return FeatureMatrix(names, self.static.ids,
                             np.hstack([self.static.values, block]))

    def fold_matrix(self, train_ids: Sequence[str]) -> FeatureMatrix:
        if self.tokens is None:
            return self.static
        vocab = tfidf_fit_tokenized([self.tokens[cid] for cid in train_ids],
                                    min_df=self.min_df)
        return self._with_vocab(vocab)

    def full_matrix(self) -> FeatureMatrix:
        if self.tokens is None:
            return self.static
        vocab = tfidf_fit_tokenized([self.tokens[cid] for cid in self.static.ids],
                                    min_df=self.min_df)
        return self._with_vocab(vocab)

    def drop_group(self, group: FeatureGroup) -> "TextFeatureSource":
        if group is FeatureGroup.TFIDF:
            return replace(self, tokens=None)
        return replace(self, static=self.static.drop_group(group))


def build_text_source(
    corpus: Corpus,
    providers: TextProviders | None = None,
    min_df: int = 2,
) -> TextFeatureSource:
    """Precompute the fold-independent text blocks and tokenized documents."""
    providers = providers or TextProviders()
    empty_vocab_names = text_feature_names(
        TfidfVocabulary(terms=(), document_frequency=(), n_documents=1))
    rows = []
    tokens: dict[str, tuple[str, ...]] = {}
    for campaign in corpus:
        vector = assemble_text_features(campaign, providers, _EMPTY_VOCAB)
        rows.append(vector.values)
        tokens[campaign.id] = tuple(tokenize_for_tfidf(campaign.description))
    static = FeatureMatrix(empty_vocab_names, tuple(c.id for c in corpus),
                           np.vstack(rows) if rows else np.zeros((0, len(empty_vocab_names))))
    return TextFeatureSource(static=static, tokens=tokens, min_df=min_df)


_EMPTY_VOCAB = TfidfVocabulary(terms=(), document_frequency=(), n_documents=1)


def build_image_source(corpus: Corpus, sidecar_dir) -> tuple[StaticFeatureSource, tuple[str, ...]]:
    """Image matrix over campaigns with images; also returns imageless ids."""
    matrix, missing = assemble_image_matrix(corpus, sidecar_dir)
    return StaticFeatureSource(matrix), missing
