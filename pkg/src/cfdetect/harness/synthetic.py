"""Seeded synthetic corpora with planted class differences.

Fraudulent campaigns differ from legitimate ones in five text markers
(counts drawn from Gaussians whose means sit a configurable number of
standard deviations apart) and five image-sidecar coordinates. Everything
else is label-independent noise, so expected classifier behavior is known
by construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..corpus import Corpus, LabeledSet, load_corpus
from ..features import FeatureMatrix
from ..imagefeat import (APPEARANCE_DIM, EMOTION_DIM, SEMANTIC_DIM,
                         ImageFeatures, write_sidecar)

# Text markers: each is one literal token whose per-description count is
# drawn from a class-dependent Gaussian (rounded, clipped at zero).
TEXT_MARKERS = ("wow!", "URGENT", "$500", "my", "#help")

# Image coordinates carrying signal: (block, index within block).
IMAGE_SIGNAL_COORDS = (("emotion", 2), ("appearance", 100),
                       ("appearance", 200), ("semantic", 300))

_FILLER = (
    "the campaign supports local families through a difficult season and "
    "every contribution goes directly to care costs. friends organised this "
    "appeal after medical bills started growing faster than savings. the "
    "community has always looked after its members and this time the need "
    "is real and documented. updates will be posted every week with "
    "receipts and progress reports. doctors expect treatment to continue "
    "for several months and transport adds further expense. thank you for "
    "reading and for sharing this story with people who might help."
).split()


@dataclass(frozen=True)
class SyntheticCorpusSpec:
    n_fraud: int = 200
    n_not_fraud: int = 200
    n_probably_fraud: int = 0   # annotation score 2
    n_probably_not: int = 0     # annotation score 4
    marker_mean: float = 4.0    # not-fraud marker-count mean
    marker_sigma: float = 2.0
    marker_shift_sigmas: float = 3.0
    image_sigma: float = 1.0
    image_shift_sigmas: float = 3.0
    weak_noise_multiplier: float = 2.0  # widens score 2/4 distributions
    seed: int = 20240101


@dataclass(frozen=True)
class SyntheticPaths:
    corpus_path: Path
    sidecar_dir: Path


def _marker_counts(rng: np.random.Generator, mean: float, sigma: float) -> list[int]:
    draws = rng.normal(mean, sigma, size=len(TEXT_MARKERS))
    return [max(0, int(round(v))) for v in draws]


def _description(rng: np.random.Generator, counts: list[int]) -> str:
    tokens: list[str] = []
    n_sentences = int(rng.integers(4, 8))
    for _ in range(n_sentences):
        length = int(rng.integers(8, 13))
        tokens.extend(rng.choice(_FILLER, size=length).tolist())
    for marker, count in zip(TEXT_MARKERS, counts):
        for _ in range(count):
            tokens.insert(int(rng.integers(0, len(tokens) + 1)), marker)
    # Sentence terminators go on filler tokens only, so the planted marker
    # tokens keep their exact surface form (and so their exact counts).
    out: list[str] = []
    per_sentence = max(1, len(tokens) // n_sentences)
    for i, token in enumerate(tokens):
        out.append(token)
        if ((i + 1) % per_sentence == 0 or i == len(tokens) - 1) and token not in TEXT_MARKERS:
            out[-1] = out[-1] + "."
    if not any(t.endswith(".") for t in out):
        out.append("thanks.")
    return " ".join(out)


def _image_features(rng: np.random.Generator, fraudulent: bool,
                    spec: SyntheticCorpusSpec, sigma: float) -> ImageFeatures:
    emotion = rng.normal(0.0, sigma, size=EMOTION_DIM)
    appearance = rng.normal(0.0, sigma, size=APPEARANCE_DIM)
    semantic = rng.normal(0.0, sigma, size=SEMANTIC_DIM)
    shift = spec.image_shift_sigmas * spec.image_sigma if fraudulent else 0.0
    blocks = {"emotion": emotion, "appearance": appearance, "semantic": semantic}
    for block, index in IMAGE_SIGNAL_COORDS:
        blocks[block][index] += shift
    # Faces: legitimate campaigns average more faces; also a 3-sigma gap.
    face_mean = 1.0 if fraudulent else 1.0 + spec.image_shift_sigmas * spec.image_sigma
    faces = max(0, int(round(rng.normal(face_mean, sigma))))
    return ImageFeatures(
        emotion_logits=emotion.astype(np.float32),
        appearance=appearance.astype(np.float32),
        semantic_logits=semantic.astype(np.float32),
        face_count=faces,
    )


def generate_synthetic_corpus(out_dir, spec: SyntheticCorpusSpec | None = None) -> SyntheticPaths:
    """Write corpus.jsonl plus one sidecar per campaign under out_dir."""
    spec = spec or SyntheticCorpusSpec()
    out_dir = Path(out_dir)
    sidecar_dir = out_dir / "sidecars"
    sidecar_dir.mkdir(parents=True, exist_ok=True)
    corpus_path = out_dir / "corpus.jsonl"

    rng = np.random.default_rng(np.random.SeedSequence(spec.seed))
    marker_shift = spec.marker_shift_sigmas * spec.marker_sigma

    groups = (
        ("f", 1, spec.n_fraud, True, 1.0),
        ("n", 5, spec.n_not_fraud, False, 1.0),
        ("pf", 2, spec.n_probably_fraud, True, spec.weak_noise_multiplier),
        ("pn", 4, spec.n_probably_not, False, spec.weak_noise_multiplier),
    )

    import json

    with open(corpus_path, "w", encoding="utf-8") as fh:
        for prefix, score, count, fraudulent, widen in groups:
            for i in range(count):
                cid = f"{prefix}{i:04d}"
                mean = spec.marker_mean + (marker_shift if fraudulent else 0.0)
                counts = _marker_counts(rng, mean, spec.marker_sigma * widen)
                description = _description(rng, counts)
                features = _image_features(rng, fraudulent, spec,
                                           spec.image_sigma * widen)
                write_sidecar(features, sidecar_dir / f"{cid}.feat.json",
                              extractor_version="synthetic")
                record = {
                    "id": cid,
                    "platform": "GoFundMe",
                    "title": f"Synthetic appeal {cid}",
                    "description": description,
                    "category": "Medical",
                    "created_at": "2020-01-01T12:00:00+00:00",
                    "score": score,
                    "images": [f"{cid}.jpg"],
                }
                fh.write(json.dumps(record, sort_keys=True) + "\n")
    return SyntheticPaths(corpus_path=corpus_path, sidecar_dir=sidecar_dir)


def load_synthetic(paths: SyntheticPaths) -> Corpus:
    return load_corpus(paths.corpus_path)


def generate_noise_matrix(
    n_per_class: int,
    n_features: int,
    seed: int,
) -> tuple[FeatureMatrix, LabeledSet]:
    """Label-independent features: every classifier should sit at chance."""
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    n = 2 * n_per_class
    values = rng.normal(0.0, 1.0, size=(n, n_features))
    ids = tuple(f"c{i:05d}" for i in range(n))
    labels = tuple((cid, 1 if i < n_per_class else 0) for i, cid in enumerate(ids))
    names = tuple(f"noise:{j:04d}" for j in range(n_features))
    return FeatureMatrix(names, ids, values), LabeledSet(labels)
