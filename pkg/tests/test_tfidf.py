"""TF-IDF vocabulary fitting, transform weights, and text assembly layout."""

from __future__ import annotations

import math

import numpy as np
import pytest

from cfdetect.corpus import load_corpus
from cfdetect.features import group_of
from cfdetect.text import (TextProviders, assemble_text_features,
                           text_feature_names)
from cfdetect.text.tfidf import (TfidfVocabulary, tfidf_fit, tfidf_transform,
                                 tokenize_for_tfidf)
from conftest import make_record


class TestFit:
    def test_two_document_vocabulary_and_df(self):
        vocab = tfidf_fit(["a b", "a c"])
        assert vocab.terms == ("a", "b", "c")
        assert dict(zip(vocab.terms, vocab.document_frequency)) == {"a": 2, "b": 1, "c": 1}
        assert vocab.n_documents == 2

    def test_min_df_threshold(self):
        vocab = tfidf_fit(["a b", "a c"], min_df=2)
        assert vocab.terms == ("a",)

    def test_df_matches_brute_force_recount_on_synthetic_corpus(self):
        # Oracle: an independent hash-map recount over token sets.
        rng = np.random.default_rng(123)
        words = [f"w{i}" for i in range(40)]
        docs = [" ".join(rng.choice(words, size=rng.integers(3, 15)))
                for _ in range(100)]
        vocab = tfidf_fit(docs)

        recount: dict[str, int] = {}
        for doc in docs:
            for term in set(tokenize_for_tfidf(doc)):
                recount[term] = recount.get(term, 0) + 1
        assert dict(zip(vocab.terms, vocab.document_frequency)) == recount

    def test_empty_corpus_rejected(self):
        with pytest.raises(ValueError):
            tfidf_fit([])


class TestTransform:
    def test_oov_only_document_gives_zero_vector(self):
        vocab = tfidf_fit(["a b", "a c"])
        assert (tfidf_transform(vocab, "z y x") == 0).all()

    def test_smoothing_formula_hand_value(self):
        # weight(a) = tf * (ln((1+N)/(1+df)) + 1) = 1 * (ln(3/3) + 1) = 1,
        # and the single nonzero entry normalizes to exactly 1.
        vocab = tfidf_fit(["a b", "a c"])
        weights = tfidf_transform(vocab, "a")
        assert weights[vocab.terms.index("a")] == pytest.approx(1.0)
        assert np.count_nonzero(weights) == 1

    def test_nonzero_output_is_l2_normalized(self):
        vocab = tfidf_fit(["a b c", "a d e", "b d f"])
        weights = tfidf_transform(vocab, "a b b f f f unknown")
        assert np.linalg.norm(weights) == pytest.approx(1.0, abs=1e-9)

    def test_transform_depends_on_corpus_only_through_n_and_df(self):
        docs = ["a b c", "c d", "a a e", "b e f"]
        permuted = [docs[2], docs[0], docs[3], docs[1]]
        v1, v2 = tfidf_fit(docs), tfidf_fit(permuted)
        doc = "a b e unknown"
        assert (tfidf_transform(v1, doc) == tfidf_transform(v2, doc)).all()

    def test_idf_values(self):
        vocab = tfidf_fit(["a b", "a c", "a d"])
        idf = dict(zip(vocab.terms, vocab.idf()))
        assert idf["a"] == pytest.approx(math.log(4 / 4) + 1)
        assert idf["b"] == pytest.approx(math.log(4 / 2) + 1)


class TestAssembly:
    def _corpus(self, write_corpus):
        records = [
            make_record("one", description="John raised $500 on Monday. "
                                           "Please help our happy family!"),
            make_record("two", description="URGENT help needed... the hospital "
                                           "bills keep coming every single day."),
        ]
        return load_corpus(write_corpus(records))

    def test_identical_dimension_names_across_campaigns(self, write_corpus):
        corpus = self._corpus(write_corpus)
        vocab = tfidf_fit([c.description for c in corpus])
        providers = TextProviders()
        va = assemble_text_features(corpus.campaigns[0], providers, vocab)
        vb = assemble_text_features(corpus.campaigns[1], providers, vocab)
        assert va.names == vb.names

    def test_dimension_count_arithmetic(self, write_corpus):
        corpus = self._corpus(write_corpus)
        vocab = tfidf_fit([c.description for c in corpus])
        vector = assemble_text_features(corpus.campaigns[0], TextProviders(), vocab)
        assert len(vector) == 12 + 14 + 255 + 18 + len(vocab)

    def test_family_prefixes_partition_names(self, write_corpus):
        corpus = self._corpus(write_corpus)
        vocab = tfidf_fit([c.description for c in corpus])
        names = text_feature_names(vocab)
        assert len(set(names)) == len(names)
        for name in names:
            group_of(name)  # raises if any name escapes the partition

    def test_total_reaches_8341_by_construction(self):
        # 12 + 14 + 255 + 18 = 299 fixed dimensions, so a vocabulary of
        # 8,042 terms lands the text modality on 8,341 total.
        n_terms = 8341 - 299
        terms = " ".join(f"t{i:05d}" for i in range(n_terms))
        vocab = tfidf_fit([terms, terms], min_df=2)
        assert len(vocab) == n_terms
        names = text_feature_names(vocab)
        assert len(names) == 8341

    def test_extractors_are_pure(self, write_corpus):
        corpus = self._corpus(write_corpus)
        vocab = tfidf_fit([c.description for c in corpus])
        providers = TextProviders()
        a = assemble_text_features(corpus.campaigns[0], providers, vocab)
        b = assemble_text_features(corpus.campaigns[0], providers, vocab)
        assert (a.values == b.values).all()
