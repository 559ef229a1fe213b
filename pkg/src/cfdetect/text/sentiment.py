"""Emotion and tone scoring with pluggable providers.

The default provider is an offline lexicon: deterministic, no credentials.
An HTTP adapter is available for external scoring services; its responses
are cached on disk by content hash so reruns stay deterministic.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

from .resources import load_data
from .tokenize import word_tokens

EMOTIONS = ("sadness", "joy", "fear", "disgust", "anger")
TONES = ("frustration", "satisfaction", "excitement", "politeness",
         "impoliteness", "sadness", "sympathy")


class ProviderError(Exception):
    """A sentiment/NER provider failed; never silently zero-filled."""


@dataclass(frozen=True)
class SentimentToneProfile:
    emotions: tuple[float, ...]  # aligned with EMOTIONS
    tones: tuple[float, ...]     # aligned with TONES

    def __post_init__(self):
        if len(self.emotions) != len(EMOTIONS) or len(self.tones) != len(TONES):
            raise ValueError("profile must carry 5 emotion and 7 tone scores")
        for v in (*self.emotions, *self.tones):
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"scores must lie in [0, 1], got {v}")

    def as_dict(self) -> dict[str, float]:
        out = {f"emotion:{n}": v for n, v in zip(EMOTIONS, self.emotions)}
        out.update({f"tone:{n}": v for n, v in zip(TONES, self.tones)})
        return out


class SentimentProvider(Protocol):
    def score(self, text: str) -> SentimentToneProfile: ...


class LexiconSentimentProvider:
    """Bundled word lists; score = lexicon hits / total tokens, clipped to [0, 1]."""

    def __init__(self):
        data = load_data("sentiment_lexicon.json")
        self._emotion_words = {k: frozenset(w.lower() for w in v)
                               for k, v in data["emotions"].items()}
        self._tone_words = {k: frozenset(w.lower() for w in v)
                            for k, v in data["tones"].items()}

    def score(self, text: str) -> SentimentToneProfile:
        tokens = [t.lower() for t in word_tokens(text)]
        total = len(tokens)

        def ratio(words: frozenset) -> float:
            if total == 0:
                return 0.0
            hits = sum(1 for t in tokens if t in words)
            return min(1.0, hits / total)

        return SentimentToneProfile(
            emotions=tuple(ratio(self._emotion_words[e]) for e in EMOTIONS),
            tones=tuple(ratio(self._tone_words[t]) for t in TONES),
        )


class HttpSentimentProvider:
    """Adapter for an external scoring service.

    POSTs {"text": ...} to `base_url` with a bearer token read from
    `api_key_env`; expects {"emotions": {...}, "tones": {...}} back.
    Responses are cached under `cache_dir`, keyed by the SHA-256 of the
    text, so repeated runs never re-contact the service.
    """

    def __init__(self, base_url: str, api_key_env: str = "CFDETECT_SENTIMENT_KEY",
                 cache_dir=None, session=None):
        if session is None:
            import requests

            session = requests.Session()
        self._session = session
        self._base_url = base_url.rstrip("/")
        self._api_key_env = api_key_env
        self._cache_dir = Path(cache_dir) if cache_dir else None

    def _cache_path(self, text: str) -> Path | None:
        if self._cache_dir is None:
            return None
        digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
        return self._cache_dir / f"sentiment-{digest}.json"

    def score(self, text: str) -> SentimentToneProfile:
        cache_path = self._cache_path(text)
        if cache_path is not None and cache_path.exists():
            payload = json.loads(cache_path.read_text(encoding="utf-8"))
        else:
            key = os.environ.get(self._api_key_env)
            if not key:
                raise ProviderError(f"missing credential env var {self._api_key_env}")
            try:
                response = self._session.post(
                    f"{self._base_url}/score",
                    json={"text": text},
                    headers={"Authorization": f"Bearer {key}"},
                    timeout=30,
                )
            except Exception as exc:
                raise ProviderError(f"sentiment service unreachable: {exc}") from exc
            if getattr(response, "status_code", 500) != 200:
                raise ProviderError(f"sentiment service returned {response.status_code}")
            payload = response.json()
            if cache_path is not None:
                cache_path.parent.mkdir(parents=True, exist_ok=True)
                cache_path.write_text(json.dumps(payload, sort_keys=True), encoding="utf-8")
        try:
            return SentimentToneProfile(
                emotions=tuple(float(payload["emotions"][e]) for e in EMOTIONS),
                tones=tuple(float(payload["tones"][t]) for t in TONES),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ProviderError(f"malformed sentiment response: {exc}") from exc


def sentiment_tone(text: str, provider: SentimentProvider) -> SentimentToneProfile:
    """Score a description's 5 emotions and 7 tones through `provider`."""
    return provider.score(text)
