"""Named-entity counts over the 18-type OntoNotes inventory.

The default tagger is rule-based (gazetteers + regexes): deterministic and
offline. An HTTP adapter mirrors the sentiment one for external taggers.
Overlapping candidate spans are resolved longest-first.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

import numpy as np

from .resources import load_data
from .sentiment import ProviderError

ENTITY_TYPES = (
    "PERSON", "NORP", "FAC", "ORG", "GPE", "LOC", "PRODUCT", "EVENT",
    "WORK_OF_ART", "LAW", "LANGUAGE", "DATE", "TIME", "PERCENT", "MONEY",
    "QUANTITY", "ORDINAL", "CARDINAL",
)

_MONEY_RE = re.compile(r"[$€£¥]\s?\d[\d,]*(?:\.\d+)?|\b\d[\d,]*(?:\.\d+)?\s?(?:dollars|usd|euros|pounds|bucks)\b", re.IGNORECASE)
_YEAR_RE = re.compile(r"\b(?:19|20)\d\d\b")
_PERCENT_RE = re.compile(r"\b\d+(?:\.\d+)?\s?(?:%|percent)\b|\d+(?:\.\d+)?%")
_TIME_RE = re.compile(r"\b\d{1,2}:\d{2}\s?(?:am|pm)?\b|\b\d{1,2}\s?(?:am|pm)\b", re.IGNORECASE)
_ORDINAL_RE = re.compile(r"\b\d+(?:st|nd|rd|th)\b|\b(?:first|second|third|fourth|fifth|sixth|seventh|eighth|ninth|tenth)\b", re.IGNORECASE)
_NUMBER_RE = re.compile(r"\b\d[\d,]*(?:\.\d+)?\b")


@dataclass(frozen=True)
class EntitySpan:
    start: int  # character offsets into the text
    end: int
    label: str

    def __post_init__(self):
        if self.label not in ENTITY_TYPES:
            raise ValueError(f"unknown entity type {self.label!r}")
        if self.end <= self.start:
            raise ValueError("span must be nonempty")


@dataclass(frozen=True)
class NerCountVector:
    names: tuple[str, ...]
    counts: np.ndarray  # int64, length 18

    def as_dict(self) -> dict[str, int]:
        return {n: int(c) for n, c in zip(self.names, self.counts)}


class EntityTagger(Protocol):
    def spans(self, text: str) -> list[EntitySpan]: ...


def _resolve_longest_first(spans: list[EntitySpan]) -> list[EntitySpan]:
    chosen: list[EntitySpan] = []
    for span in sorted(spans, key=lambda s: (-(s.end - s.start), s.start)):
        if all(span.end <= c.start or span.start >= c.end for c in chosen):
            chosen.append(span)
    return sorted(chosen, key=lambda s: s.start)


class RuleTagger:
    """Gazetteer and regex rules; position-independent so counts stay additive."""

    def __init__(self):
        gaz = load_data("gazetteer.json")
        self._first_names = frozenset(gaz["first_names"])
        self._org_keywords = frozenset(gaz["org_keywords"])
        self._places = frozenset(gaz["places"])
        self._dates = frozenset(gaz["weekdays"]) | frozenset(gaz["months"])
        self._number_words = frozenset(gaz["number_words"])

    def spans(self, text: str) -> list[EntitySpan]:
        candidates: list[EntitySpan] = []
        for regex, label in ((_MONEY_RE, "MONEY"), (_PERCENT_RE, "PERCENT"),
                             (_TIME_RE, "TIME"), (_ORDINAL_RE, "ORDINAL")):
            for m in regex.finditer(text):
                candidates.append(EntitySpan(m.start(), m.end(), label))
        for m in _YEAR_RE.finditer(text):
            candidates.append(EntitySpan(m.start(), m.end(), "DATE"))

        tokens = [(m.group(), m.start(), m.end()) for m in re.finditer(r"\w+(?:['’-]\w+)*", text)]

        def capitalized(w: str) -> bool:
            return w[0].isupper() and (w[1:].islower() if len(w) > 1 else w != "I")

        # Maximal runs of Capitalized tokens (never across a sentence
        # boundary, which keeps counts additive over concatenation),
        # classified by gazetteer lookup.
        i = 0
        while i < len(tokens):
            word, start, _ = tokens[i]
            if capitalized(word):
                j = i
                while j + 1 < len(tokens):
                    gap = text[tokens[j][2]:tokens[j + 1][1]]
                    if capitalized(tokens[j + 1][0]) and not any(t in gap for t in ".!?\n"):
                        j += 1
                    else:
                        break
                run = [t[0] for t in tokens[i:j + 1]]
                span = (tokens[i][1], tokens[j][2])
                phrase = " ".join(run)
                label = None
                if any(w in self._dates for w in run):
                    label = "DATE"
                elif any(w in self._org_keywords for w in run):
                    label = "ORG"
                elif phrase in self._places or any(w in self._places for w in run):
                    label = "GPE"
                elif run[0] in self._first_names:
                    label = "PERSON"
                if label is not None:
                    candidates.append(EntitySpan(span[0], span[1], label))
                i = j + 1
            else:
                if word.lower() in self._dates:
                    candidates.append(EntitySpan(tokens[i][1], tokens[i][2], "DATE"))
                i += 1

        for word, start, end in tokens:
            if word.lower() in self._number_words:
                candidates.append(EntitySpan(start, end, "CARDINAL"))
        for m in _NUMBER_RE.finditer(text):
            candidates.append(EntitySpan(m.start(), m.end(), "CARDINAL"))

        return _resolve_longest_first(candidates)


class HttpTagger:
    """External tagger adapter with the same content-hash disk cache."""

    def __init__(self, base_url: str, api_key_env: str = "CFDETECT_NER_KEY",
                 cache_dir=None, session=None):
        if session is None:
            import requests

            session = requests.Session()
        self._session = session
        self._base_url = base_url.rstrip("/")
        self._api_key_env = api_key_env
        self._cache_dir = Path(cache_dir) if cache_dir else None

    def spans(self, text: str) -> list[EntitySpan]:
        cache_path = None
        if self._cache_dir is not None:
            digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
            cache_path = self._cache_dir / f"ner-{digest}.json"
        if cache_path is not None and cache_path.exists():
            payload = json.loads(cache_path.read_text(encoding="utf-8"))
        else:
            key = os.environ.get(self._api_key_env)
            if not key:
                raise ProviderError(f"missing credential env var {self._api_key_env}")
            try:
                response = self._session.post(
                    f"{self._base_url}/spans",
                    json={"text": text},
                    headers={"Authorization": f"Bearer {key}"},
                    timeout=30,
                )
            except Exception as exc:
                raise ProviderError(f"NER service unreachable: {exc}") from exc
            if getattr(response, "status_code", 500) != 200:
                raise ProviderError(f"NER service returned {response.status_code}")
            payload = response.json()
            if cache_path is not None:
                cache_path.parent.mkdir(parents=True, exist_ok=True)
                cache_path.write_text(json.dumps(payload, sort_keys=True), encoding="utf-8")
        try:
            spans = [EntitySpan(int(s["start"]), int(s["end"]), str(s["label"]))
                     for s in payload["spans"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise ProviderError(f"malformed NER response: {exc}") from exc
        return _resolve_longest_first(spans)


def ner_feature_names() -> tuple[str, ...]:
    return ENTITY_TYPES


def ner_counts(text: str, tagger: EntityTagger) -> NerCountVector:
    """Per-type span counts after longest-first overlap resolution."""
    counts = np.zeros(len(ENTITY_TYPES), dtype=np.int64)
    index = {label: i for i, label in enumerate(ENTITY_TYPES)}
    for span in _resolve_longest_first(list(tagger.spans(text))):
        counts[index[span.label]] += 1
    return NerCountVector(ENTITY_TYPES, counts)
