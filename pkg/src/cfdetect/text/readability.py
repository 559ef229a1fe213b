"""Complexity and language-choice profile of a description.

All indices are computed from the shared tokenizer so the same word and
sentence counts feed every formula. Character counts are alphanumeric only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .resources import load_data
from .tokenize import alnum_char_count, count_syllables, sentences, word_tokens

# Fixed catalog order; feature assembly relies on it.
FIELD_ORDER = (
    "chars", "words", "sentences", "syllables", "avg_syllables_per_word",
    "function_words", "personal_pronouns",
    "ari", "flesch_reading_ease", "flesch_kincaid_grade", "gunning_fog",
    "coleman_liau", "smog", "dale_chall",
)


@dataclass(frozen=True)
class ReadabilityProfile:
    chars: int
    words: int
    sentences: int
    syllables: int
    avg_syllables_per_word: float
    function_words: int
    personal_pronouns: int
    ari: float
    flesch_reading_ease: float
    flesch_kincaid_grade: float
    gunning_fog: float
    coleman_liau: float
    smog: float
    dale_chall: float

    def as_dict(self) -> dict[str, float]:
        return {name: float(getattr(self, name)) for name in FIELD_ORDER}


def readability_profile(text: str) -> ReadabilityProfile:
    words = word_tokens(text)
    sents = sentences(text)
    if not words:
        raise ValueError("no word tokens; text should have been rejected at ingestion")
    if not sents:
        raise ValueError("no sentences; text should have been rejected at ingestion")

    n_words = len(words)
    n_sents = len(sents)
    n_chars = alnum_char_count(text)
    syllable_counts = [count_syllables(w) for w in words]
    n_syll = sum(syllable_counts)
    polysyllables = sum(1 for c in syllable_counts if c >= 3)

    lists = load_data("function_words.json")
    function_set = frozenset(lists["function_words"])
    pronoun_set = frozenset(lists["personal_pronouns"])
    lowered = [w.lower() for w in words]
    n_function = sum(1 for w in lowered if w in function_set)
    n_pronoun = sum(1 for w in lowered if w in pronoun_set)

    easy_set = frozenset(load_data("easy_words.json")["easy_words"])
    difficult = sum(1 for w in lowered if w not in easy_set)
    difficult_share = difficult / n_words

    words_per_sentence = n_words / n_sents
    syllables_per_word = n_syll / n_words

    ari = 4.71 * (n_chars / n_words) + 0.5 * words_per_sentence - 21.43
    flesch = 206.835 - 1.015 * words_per_sentence - 84.6 * syllables_per_word
    fk_grade = 0.39 * words_per_sentence + 11.8 * syllables_per_word - 15.59
    fog = 0.4 * (words_per_sentence + 100.0 * polysyllables / n_words)
    letters_per_100 = 100.0 * n_chars / n_words
    sents_per_100 = 100.0 * n_sents / n_words
    coleman_liau = 0.0588 * letters_per_100 - 0.296 * sents_per_100 - 15.8
    smog = 1.0430 * math.sqrt(polysyllables * 30.0 / n_sents) + 3.1291
    dale_chall = 0.1579 * (100.0 * difficult_share) + 0.0496 * words_per_sentence
    if difficult_share > 0.05:
        dale_chall += 3.6365

    return ReadabilityProfile(
        chars=n_chars,
        words=n_words,
        sentences=n_sents,
        syllables=n_syll,
        avg_syllables_per_word=syllables_per_word,
        function_words=n_function,
        personal_pronouns=n_pronoun,
        ari=ari,
        flesch_reading_ease=flesch,
        flesch_kincaid_grade=fk_grade,
        gunning_fog=fog,
        coleman_liau=coleman_liau,
        smog=smog,
        dale_chall=dale_chall,
    )
