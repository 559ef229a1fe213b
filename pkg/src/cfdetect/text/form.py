"""Orthographic form descriptors: 255 counts over token shapes and patterns.

20 named counters plus a frozen 235-slot word-shape catalog; shapes outside
the catalog fall into the catch-all counter so the vector length never moves.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .resources import load_data
from .tokenize import raw_tokens

NAMED_COUNTERS = (
    "all_lower", "all_upper", "capitalized", "emoji", "exclamation_word",
    "apostrophe_word", "all_digit", "mixed_alnum", "quoted", "parenthesized",
    "ellipsis", "repeated_punct", "url_like", "hashtag", "mention",
    "currency_marked", "percent_marked", "hyphenated", "elongated", "catch_all_shape",
)

FORM_DIMENSIONS = 255

_QUOTES = "\"'“”‘’"
_CURRENCY = "$€£¥"
_APOSTROPHES = "'’"

_EMOJI_RE = re.compile(
    "["
    "\U0001f300-\U0001faff"
    "\U0001f000-\U0001f2ff"
    "☀-➿"
    "⬀-⯿"
    "️"
    "]"
)
_ELONGATED_RE = re.compile(r"([A-Za-z])\1\1")
_REPEATED_PUNCT_RE = re.compile(r"([!?.,;:*-])\1")


@dataclass(frozen=True)
class FormDescriptorVector:
    names: tuple[str, ...]
    counts: np.ndarray  # int64, length 255

    def as_dict(self) -> dict[str, int]:
        return {n: int(c) for n, c in zip(self.names, self.counts)}


def word_shape(token: str) -> str:
    """Map uppercase->X, lowercase->x, digit->9, keep punctuation, collapse runs."""
    out: list[str] = []
    for ch in token:
        if ch.isalpha():
            mapped = "X" if ch.isupper() else "x"
        elif ch.isdigit():
            mapped = "9"
        else:
            mapped = ch
        if not out or out[-1] != mapped:
            out.append(mapped)
    return "".join(out)


def _catalog() -> tuple[str, ...]:
    return tuple(load_data("shape_catalog.json")["shapes"])


def form_feature_names() -> tuple[str, ...]:
    return NAMED_COUNTERS + tuple(f"shape:{s}" for s in _catalog())


def form_descriptors(text: str) -> FormDescriptorVector:
    names = form_feature_names()
    counts = np.zeros(len(names), dtype=np.int64)
    assert len(names) == FORM_DIMENSIONS
    slot = {name: i for i, name in enumerate(names)}

    for token in raw_tokens(text):
        letters = [ch for ch in token if ch.isalpha()]
        alnum = [ch for ch in token if ch.isalnum()]
        if letters and all(ch.islower() for ch in letters):
            counts[slot["all_lower"]] += 1
        if len(letters) >= 2 and all(ch.isupper() for ch in letters):
            counts[slot["all_upper"]] += 1
        if letters and letters[0].isupper() and all(ch.islower() for ch in letters[1:]):
            counts[slot["capitalized"]] += 1
        if _EMOJI_RE.search(token):
            counts[slot["emoji"]] += 1
        if token.rstrip(_QUOTES + ")]").endswith("!"):
            counts[slot["exclamation_word"]] += 1
        if any(a in token for a in _APOSTROPHES):
            counts[slot["apostrophe_word"]] += 1
        if alnum and all(ch.isdigit() for ch in alnum):
            counts[slot["all_digit"]] += 1
        if any(ch.isdigit() for ch in alnum) and letters:
            counts[slot["mixed_alnum"]] += 1
        if len(token) >= 2 and token[0] in _QUOTES and token[-1] in _QUOTES:
            counts[slot["quoted"]] += 1
        if len(token) >= 2 and token[0] == "(" and token.rstrip(".,;:!?")[-1:] == ")":
            counts[slot["parenthesized"]] += 1
        if "..." in token or "…" in token:
            counts[slot["ellipsis"]] += 1
        if _REPEATED_PUNCT_RE.search(token) and "..." not in token:
            counts[slot["repeated_punct"]] += 1
        lower = token.lower()
        if "://" in lower or lower.startswith("www."):
            counts[slot["url_like"]] += 1
        if token.startswith("#") and len(token) > 1:
            counts[slot["hashtag"]] += 1
        if token.startswith("@") and len(token) > 1:
            counts[slot["mention"]] += 1
        if any(c in token for c in _CURRENCY):
            counts[slot["currency_marked"]] += 1
        if "%" in token:
            counts[slot["percent_marked"]] += 1
        core = token.strip("".join(_QUOTES) + "().,;:!?")
        if "-" in core[1:-1] and any(ch.isalnum() for ch in core):
            counts[slot["hyphenated"]] += 1
        if _ELONGATED_RE.search(token):
            counts[slot["elongated"]] += 1

        shape_key = f"shape:{word_shape(token)}"
        if shape_key in slot:
            counts[slot[shape_key]] += 1
        else:
            counts[slot["catch_all_shape"]] += 1

    return FormDescriptorVector(names, counts)
