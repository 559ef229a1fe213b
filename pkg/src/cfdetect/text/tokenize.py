"""Shared tokenizer, sentence splitter, and syllable counter.

Every text-feature family counts through these functions so that word and
sentence totals never drift between families.
"""

from __future__ import annotations

import re

# Unicode word tokens; internal apostrophes and hyphens stay inside one token
# ("don't", "well-known").
_WORD_RE = re.compile(r"\w+(?:['’-]\w+)*", re.UNICODE)

# Sentence boundaries: runs of terminators, or a newline.
_SENTENCE_SPLIT_RE = re.compile(r"[.!?]+|\n+")

_VOWEL_GROUP_RE = re.compile(r"[aeiouy]+")


def word_tokens(text: str) -> list[str]:
    """Word tokens in order, original casing preserved."""
    return _WORD_RE.findall(text)


def raw_tokens(text: str) -> list[str]:
    """Whitespace-delimited tokens with punctuation attached (for shape analysis)."""
    return text.split()


def sentences(text: str) -> list[str]:
    """Segments containing at least one word token."""
    parts = _SENTENCE_SPLIT_RE.split(text)
    return [p for p in parts if _WORD_RE.search(p)]


def count_syllables(word: str) -> int:
    """Vowel-group heuristic with a silent-e correction; always >= 1.

    Known-good words: cat=1, hello=2, beautiful=3, mate=1, table=2.
    """
    w = word.lower()
    w = re.sub(r"[^a-z]", "", w)
    if not w:
        return 1
    groups = _VOWEL_GROUP_RE.findall(w)
    count = len(groups)
    # Silent trailing e ("mate"), but not "-le" after a consonant ("table").
    if w.endswith("e") and not w.endswith("le") and count > 1 and not w.endswith("ee"):
        count -= 1
    if count == 0:
        count = 1
    return count


def alnum_char_count(text: str) -> int:
    """Alphanumeric characters only (conventional for ARI / Coleman-Liau)."""
    return sum(1 for ch in text if ch.isalnum())
