"""Word-importance vectors: raw tf, smoothed idf, L2 normalization.

weight(t, d) = tf(t, d) * (ln((1 + N) / (1 + df(t))) + 1), then the vector
is L2-normalized when nonzero. The vocabulary is fitted on training
descriptions only; out-of-vocabulary terms are ignored at transform time.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .tokenize import word_tokens


@dataclass(frozen=True)
class TfidfVocabulary:
    terms: tuple[str, ...]           # sorted, unique
    document_frequency: tuple[int, ...]
    n_documents: int

    def __post_init__(self):
        if len(self.terms) != len(set(self.terms)):
            raise ValueError("vocabulary terms must be unique")
        for df in self.document_frequency:
            if not (1 <= df <= self.n_documents):
                raise ValueError(f"document frequency {df} outside [1, {self.n_documents}]")
        n = self.n_documents
        idf = np.array(
            [math.log((1 + n) / (1 + df)) + 1.0 for df in self.document_frequency],
            dtype=np.float64,
        )
        # Cached lookups (not part of identity/equality).
        object.__setattr__(self, "_idf", idf)
        object.__setattr__(self, "_index", {t: i for i, t in enumerate(self.terms)})

    def __len__(self) -> int:
        return len(self.terms)

    def idf(self) -> np.ndarray:
        return self._idf.copy()


def tokenize_for_tfidf(text: str) -> list[str]:
    return [t.lower() for t in word_tokens(text)]


def tfidf_fit(documents: Sequence[str], min_df: int = 1) -> TfidfVocabulary:
    """Fit vocabulary and document frequencies; terms below min_df are dropped."""
    docs = list(documents)
    if not docs:
        raise ValueError("cannot fit a vocabulary on an empty corpus")
    df: Counter = Counter()
    for doc in docs:
        df.update(set(tokenize_for_tfidf(doc)))
    terms = tuple(sorted(t for t, c in df.items() if c >= min_df))
    return TfidfVocabulary(
        terms=terms,
        document_frequency=tuple(df[t] for t in terms),
        n_documents=len(docs),
    )


def tfidf_fit_tokenized(token_lists: Sequence[Sequence[str]], min_df: int = 1) -> TfidfVocabulary:
    """tfidf_fit over pre-tokenized (already lowercased) documents."""
    if not token_lists:
        raise ValueError("cannot fit a vocabulary on an empty corpus")
    df: Counter = Counter()
    for tokens in token_lists:
        df.update(set(tokens))
    terms = tuple(sorted(t for t, c in df.items() if c >= min_df))
    return TfidfVocabulary(
        terms=terms,
        document_frequency=tuple(df[t] for t in terms),
        n_documents=len(token_lists),
    )


def tfidf_transform(vocab: TfidfVocabulary, text: str) -> np.ndarray:
    """Weight vector over the fitted vocabulary, L2-normalized when nonzero."""
    return tfidf_transform_tokens(vocab, tokenize_for_tfidf(text))


def tfidf_transform_tokens(vocab: TfidfVocabulary, tokens: Sequence[str]) -> np.ndarray:
    weights = np.zeros(len(vocab), dtype=np.float64)
    index = vocab._index
    idf = vocab._idf
    for term, count in Counter(tokens).items():
        i = index.get(term)
        if i is not None:
            weights[i] = count * idf[i]
    norm = float(np.linalg.norm(weights))
    if norm > 0.0:
        weights /= norm
    return weights


def tfidf_feature_names(vocab: TfidfVocabulary) -> tuple[str, ...]:
    return tuple(f"term:{t}" for t in vocab.terms)
