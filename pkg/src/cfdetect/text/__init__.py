"""Text-modality feature families and their assembly into one vector.

Assembly order is fixed: sentiment+tone (12), readability, form (255),
NER (18), then TF-IDF over the fitted vocabulary. Every dimension carries
a stable family-prefixed name.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from ..features import FeatureMatrix, FeatureVector, stack_vectors

if TYPE_CHECKING:  # avoid a cycle: corpus uses the shared tokenizer
    from ..corpus import Campaign, Corpus
from .form import FORM_DIMENSIONS, form_descriptors, form_feature_names
from .ner import ENTITY_TYPES, EntityTagger, NerCountVector, RuleTagger, ner_counts, ner_feature_names
from .readability import FIELD_ORDER as READABILITY_FIELDS
from .readability import ReadabilityProfile, readability_profile
from .sentiment import (EMOTIONS, TONES, LexiconSentimentProvider, ProviderError,
                        SentimentProvider, SentimentToneProfile, sentiment_tone)
from .tfidf import (TfidfVocabulary, tfidf_feature_names, tfidf_fit,
                    tfidf_fit_tokenized, tfidf_transform, tfidf_transform_tokens,
                    tokenize_for_tfidf)

__all__ = [
    "EMOTIONS", "TONES", "ENTITY_TYPES", "READABILITY_FIELDS", "FORM_DIMENSIONS",
    "SentimentProvider", "LexiconSentimentProvider", "SentimentToneProfile",
    "ProviderError", "EntityTagger", "RuleTagger", "NerCountVector",
    "ReadabilityProfile", "TfidfVocabulary", "TextProviders",
    "sentiment_tone", "readability_profile", "form_descriptors", "ner_counts",
    "tfidf_fit", "tfidf_transform", "assemble_text_features",
    "text_feature_names", "assemble_text_matrix",
]

# TF-IDF terms below this document frequency are dropped in the pipeline.
PIPELINE_MIN_DF = 2


@dataclass
class TextProviders:
    """Extractor backends; defaults are the deterministic offline ones."""

    sentiment: SentimentProvider = field(default_factory=LexiconSentimentProvider)
    tagger: EntityTagger = field(default_factory=RuleTagger)


def text_feature_names(vocab: TfidfVocabulary) -> tuple[str, ...]:
    names = [f"senti:emotion:{e}" for e in EMOTIONS]
    names += [f"senti:tone:{t}" for t in TONES]
    names += [f"read:{f}" for f in READABILITY_FIELDS]
    names += [f"form:{n}" for n in form_feature_names()]
    names += [f"ner:{t}" for t in ner_feature_names()]
    names += [f"tfidf:{n}" for n in tfidf_feature_names(vocab)]
    return tuple(names)


def assemble_text_features(
    campaign: Campaign,
    providers: TextProviders,
    vocab: TfidfVocabulary,
) -> FeatureVector:
    """Concatenated text-modality features for one campaign."""
    text = campaign.description
    profile = sentiment_tone(text, providers.sentiment)
    readability = readability_profile(text)
    form = form_descriptors(text)
    ner = ner_counts(text, providers.tagger)
    tfidf = tfidf_transform(vocab, text)

    values = np.concatenate([
        np.array(profile.emotions, dtype=np.float64),
        np.array(profile.tones, dtype=np.float64),
        np.array([readability.as_dict()[f] for f in READABILITY_FIELDS], dtype=np.float64),
        form.counts.astype(np.float64),
        ner.counts.astype(np.float64),
        tfidf,
    ])
    return FeatureVector(text_feature_names(vocab), values)


def assemble_text_matrix(
    corpus: Corpus,
    providers: TextProviders | None = None,
    vocab: TfidfVocabulary | None = None,
    min_df: int = PIPELINE_MIN_DF,
) -> FeatureMatrix:
    """Fit the vocabulary (unless given) and assemble all campaigns."""
    providers = providers or TextProviders()
    if vocab is None:
        vocab = tfidf_fit([c.description for c in corpus], min_df=min_df)
    vectors = [assemble_text_features(c, providers, vocab) for c in corpus]
    return stack_vectors([c.id for c in corpus], vectors)
