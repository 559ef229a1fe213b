"""Experiment protocols: balanced resampling iterations, per-modality runs,
probability-averaging ensemble, train-strong/test-weak transfer, ablation,
and figure/report export.

Every iteration derives its randomness from (master_seed, iteration index),
so results are independent of execution order and reruns are bit-identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Mapping, Sequence

import numpy as np

from ..corpus import LabeledSet, LabelSetupKind
from ..features import FeatureGroup, FeatureMatrix
from ..learn import (ClassifierKind, ClassifierSpec, Metrics, evaluate_metrics,
                     fit_classifier, predict_proba_batch)
from ..select import SelectionMask, SelectionTest, select_significant
from .sources import StaticFeatureSource, TextFeatureSource, build_image_source, build_text_source

__all__ = [
    "Modality", "SelectionMode", "ExperimentConfig", "MetricsDistribution",
    "EnsembleDistributions", "AblationRow", "balanced_split", "ensemble_combine",
    "run_modality_experiment", "run_ensemble_experiment", "run_label3",
    "run_ablation", "build_text_source", "build_image_source",
    "StaticFeatureSource", "TextFeatureSource", "iteration_seed_sequence",
]

CLASSICAL_ITERATIONS = 2000
MLP_ITERATIONS = 1000


class Modality(Enum):
    TEXT = "text"
    IMAGE = "image"
    ENSEMBLE = "ensemble"


class SelectionMode(Enum):
    # Fit the significance mask (and vocabulary) on training folds only.
    LEAK_FREE = "leak-free"
    # Fit once on the full dataset, as the original protocol appears to.
    FULL_DATASET = "paper"


@dataclass(frozen=True)
class ExperimentConfig:
    classifier: ClassifierSpec
    label_setup: LabelSetupKind = LabelSetupKind.LABEL_II
    modality: Modality = Modality.TEXT
    iterations: int | None = None  # default: 2000 classical, 1000 MLP
    train_fraction: float = 0.7
    master_seed: int = 0
    selection_mode: SelectionMode = SelectionMode.LEAK_FREE
    selection_test: SelectionTest = SelectionTest.KS
    alpha: float = 0.05
    ablation_groups: tuple[FeatureGroup, ...] = ()

    def __post_init__(self):
        if self.iterations is not None and self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not (0.0 < self.train_fraction < 1.0):
            raise ValueError("train_fraction must lie in (0, 1)")

    def resolved_iterations(self) -> int:
        if self.iterations is not None:
            return self.iterations
        if self.classifier.kind is ClassifierKind.MLP:
            return MLP_ITERATIONS
        return CLASSICAL_ITERATIONS


@dataclass(frozen=True)
class MetricsDistribution:
    """Per-iteration metric samples with recomputable summaries."""

    samples: tuple[Metrics, ...]

    def __post_init__(self):
        if not self.samples:
            raise ValueError("a distribution needs at least one sample")

    def __len__(self) -> int:
        return len(self.samples)

    def values(self, metric: str) -> np.ndarray:
        return np.array([getattr(m, metric) for m in self.samples], dtype=np.float64)

    def mean(self, metric: str) -> float:
        return float(self.values(metric).mean())

    def std(self, metric: str) -> float:
        return float(self.values(metric).std())

    def quartiles(self, metric: str) -> tuple[float, float, float, float, float]:
        vals = self.values(metric)
        q1, med, q3 = np.percentile(vals, [25.0, 50.0, 75.0])
        return float(vals.min()), float(q1), float(med), float(q3), float(vals.max())

    def summary(self) -> dict[str, tuple[float, float]]:
        return {name: (self.mean(name), self.std(name)) for name in Metrics.METRIC_NAMES}


@dataclass(frozen=True)
class EnsembleDistributions:
    text: MetricsDistribution
    image: MetricsDistribution
    ensemble: MetricsDistribution


@dataclass(frozen=True)
class AblationRow:
    left_out: FeatureGroup | None  # None marks the full-model row
    distribution: MetricsDistribution
    delta_mean_auc: float


def iteration_seed_sequence(master_seed: int, iteration: int) -> list[np.random.SeedSequence]:
    """Three child seed sequences per iteration: split, text model, image model."""
    return np.random.SeedSequence((master_seed, iteration)).spawn(3)


def _seed_int(seq: np.random.SeedSequence) -> int:
    return int(seq.generate_state(1, np.uint64)[0])


def balanced_split(
    labeled: LabeledSet,
    train_fraction: float,
    rng: np.random.Generator,
) -> tuple[tuple[str, ...], tuple[str, ...]]:
    """Under-sample the majority class, then split stratified by class.

    The minority class is kept whole; the majority class is down-sampled
    uniformly without replacement to the minority size. The balanced pool
    is split train/test per class, so train and test stay balanced too.
    """
    fraud = list(labeled.ids_with_label(1))
    clean = list(labeled.ids_with_label(0))
    if len(fraud) < 2 or len(clean) < 2:
        raise ValueError("both classes need at least 2 members to split")
    m = min(len(fraud), len(clean))
    n_train = int(round(train_fraction * m))
    n_train = min(max(n_train, 1), m - 1)

    train: list[str] = []
    test: list[str] = []
    for pool in (fraud, clean):
        chosen = rng.permutation(len(pool))[:m]
        members = [pool[i] for i in chosen]
        train.extend(members[:n_train])
        test.extend(members[n_train:])
    return tuple(train), tuple(test)


def balanced_pool(labeled: LabeledSet, rng: np.random.Generator) -> tuple[str, ...]:
    """Under-sampled, class-balanced pool (no train/test split)."""
    fraud = list(labeled.ids_with_label(1))
    clean = list(labeled.ids_with_label(0))
    if not fraud or not clean:
        raise ValueError("both classes must be nonempty")
    m = min(len(fraud), len(clean))
    out: list[str] = []
    for pool in (fraud, clean):
        chosen = rng.permutation(len(pool))[:m]
        out.extend(pool[i] for i in chosen)
    return tuple(out)


def ensemble_combine(text_prob: float | None, image_prob: float | None) -> float:
    """Arithmetic mean of the modality scores; falls back to the one present."""
    if text_prob is None and image_prob is None:
        raise ValueError("at least one modality probability is required")
    if text_prob is None:
        return float(image_prob)
    if image_prob is None:
        return float(text_prob)
    return 0.5 * (float(text_prob) + float(image_prob))


def _select_columns(matrix: FeatureMatrix, train_ids: Sequence[str],
                    labeled: LabeledSet, config: ExperimentConfig) -> FeatureMatrix:
    train_matrix = matrix.take_rows(train_ids)
    mask = select_significant(train_matrix, labeled, config.selection_test, config.alpha)
    kept = mask.kept_indices()
    if not kept:
        # Nothing significant: keep the single smallest-p feature so the
        # classifier still has an input. Deterministic and label-blind
        # beyond the training fold.
        kept = [int(np.argmin([r.p_value for r in mask.records]))]
    return matrix.take_columns(kept)


def _full_dataset_selection(source, labeled: LabeledSet,
                            config: ExperimentConfig) -> FeatureMatrix:
    matrix = source.full_matrix().take_rows([cid for cid in source.ids
                                             if cid in set(labeled.ids())])
    mask = select_significant(matrix, labeled, config.selection_test, config.alpha)
    kept = mask.kept_indices()
    if not kept:
        kept = [int(np.argmin([r.p_value for r in mask.records]))]
    return source.full_matrix().take_columns(kept)


def _restrict(labeled: LabeledSet, ids: Sequence[str]) -> LabeledSet:
    wanted = set(ids)
    return LabeledSet(tuple((cid, lab) for cid, lab in labeled.entries if cid in wanted))


def _iteration_scores(
    source,
    labeled: LabeledSet,
    train_ids: Sequence[str],
    test_ids: Sequence[str],
    config: ExperimentConfig,
    model_seed: int,
    precomputed: FeatureMatrix | None,
) -> dict[str, float] | None:
    """Fit on the training fold and score the test fold; None when unfittable."""
    present = set(source.ids)
    fold_train = [cid for cid in train_ids if cid in present]
    fold_test = [cid for cid in test_ids if cid in present]
    if not fold_train or not fold_test:
        return None
    label_map = labeled.labels()
    if len({label_map[cid] for cid in fold_train}) < 2:
        return None

    if precomputed is not None:
        matrix = precomputed
    else:
        fold = source.fold_matrix(fold_train)
        matrix = _select_columns(fold, fold_train, _restrict(labeled, fold_train), config)

    spec = config.classifier.with_seed(model_seed)
    model = fit_classifier(spec, matrix.take_rows(fold_train), labeled)
    scores = predict_proba_batch(model, matrix.take_rows(fold_test))
    return dict(zip(fold_test, (float(s) for s in scores)))


def _metrics_from_scores(labeled: LabeledSet, scores: Mapping[str, float]) -> Metrics:
    label_map = labeled.labels()
    pairs = [(label_map[cid], p) for cid, p in scores.items()]
    return evaluate_metrics(pairs)


def run_modality_experiment(
    source,
    labeled: LabeledSet,
    config: ExperimentConfig,
) -> MetricsDistribution:
    """Balanced-iteration protocol for one modality.

    Per iteration: balanced split, (leak-free) selection fit on the training
    fold, classifier fit, test scoring, metrics. The labeled set is
    restricted to campaigns the source can featurize.
    """
    labeled = _restrict(labeled, source.ids)
    precomputed = None
    if config.selection_mode is SelectionMode.FULL_DATASET:
        precomputed = _full_dataset_selection(source, labeled, config)

    samples: list[Metrics] = []
    for iteration in range(config.resolved_iterations()):
        split_seq, model_seq, _ = iteration_seed_sequence(config.master_seed, iteration)
        rng = np.random.default_rng(split_seq)
        train_ids, test_ids = balanced_split(labeled, config.train_fraction, rng)
        scores = _iteration_scores(source, labeled, train_ids, test_ids, config,
                                   _seed_int(model_seq), precomputed)
        if scores is None:
            raise ValueError("iteration produced no fittable training fold")
        samples.append(_metrics_from_scores(labeled, scores))
    return MetricsDistribution(tuple(samples))


def run_ensemble_experiment(
    text_source,
    image_source,
    labeled: LabeledSet,
    config: ExperimentConfig,
) -> EnsembleDistributions:
    """Shared-split ensemble protocol.

    Text and image models train independently on the same balanced split;
    test campaigns are scored by the probability average, falling back to
    the text score when a campaign has no images. Per-modality metrics on
    the shared splits are reported alongside.
    """
    labeled_text = _restrict(labeled, text_source.ids)
    pre_text = pre_image = None
    if config.selection_mode is SelectionMode.FULL_DATASET:
        pre_text = _full_dataset_selection(text_source, labeled_text, config)
        image_labeled = _restrict(labeled, image_source.ids)
        if image_labeled.entries:
            pre_image = _full_dataset_selection(image_source, image_labeled, config)

    text_samples: list[Metrics] = []
    image_samples: list[Metrics] = []
    ensemble_samples: list[Metrics] = []
    label_map = labeled.labels()

    for iteration in range(config.resolved_iterations()):
        split_seq, text_seq, image_seq = iteration_seed_sequence(config.master_seed, iteration)
        rng = np.random.default_rng(split_seq)
        train_ids, test_ids = balanced_split(labeled_text, config.train_fraction, rng)

        text_scores = _iteration_scores(text_source, labeled, train_ids, test_ids,
                                        config, _seed_int(text_seq), pre_text)
        if text_scores is None:
            raise ValueError("text modality produced no fittable training fold")
        image_scores = _iteration_scores(image_source, labeled, train_ids, test_ids,
                                         config, _seed_int(image_seq), pre_image)

        combined = {
            cid: ensemble_combine(text_scores.get(cid),
                                  (image_scores or {}).get(cid))
            for cid in test_ids
        }
        text_samples.append(_metrics_from_scores(labeled, text_scores))
        ensemble_samples.append(_metrics_from_scores(labeled, combined))
        if image_scores:
            image_pairs = [(label_map[cid], p) for cid, p in image_scores.items()]
            if len({lab for lab, _ in image_pairs}) == 2:
                image_samples.append(evaluate_metrics(image_pairs))

    if not image_samples:
        raise ValueError("image modality never produced a scorable test fold")
    return EnsembleDistributions(
        text=MetricsDistribution(tuple(text_samples)),
        image=MetricsDistribution(tuple(image_samples)),
        ensemble=MetricsDistribution(tuple(ensemble_samples)),
    )


def run_label3(
    source,
    train_pool: LabeledSet,
    test_set: LabeledSet,
    config: ExperimentConfig,
    image_source=None,
) -> MetricsDistribution:
    """Train on the strong-signal pool, test on the held-out weak-score set.

    Per iteration the training pool is re-balanced by under-sampling; the
    test set is fixed and never overlaps training by construction.
    """
    if not test_set.entries:
        raise ValueError("the held-out test set is empty")
    overlap = set(train_pool.ids()) & set(test_set.ids())
    if overlap:
        raise ValueError(f"train pool and test set overlap: {sorted(overlap)[:3]}")

    ensemble_mode = config.modality is Modality.ENSEMBLE
    if ensemble_mode and image_source is None:
        raise ValueError("ensemble runs need an image source")

    train_pool = _restrict(train_pool, source.ids)
    test_ids = [cid for cid in test_set.ids() if cid in set(source.ids)]
    samples: list[Metrics] = []
    for iteration in range(config.resolved_iterations()):
        split_seq, model_seq, image_seq = iteration_seed_sequence(config.master_seed, iteration)
        rng = np.random.default_rng(split_seq)
        train_ids = balanced_pool(train_pool, rng)

        merged = LabeledSet(train_pool.entries + test_set.entries)
        scores = _iteration_scores(source, merged, train_ids, test_ids, config,
                                   _seed_int(model_seq), None)
        if scores is None:
            raise ValueError("label-III iteration produced no fittable fold")
        if ensemble_mode:
            image_scores = _iteration_scores(image_source, merged, train_ids, test_ids,
                                             config, _seed_int(image_seq), None)
            scores = {cid: ensemble_combine(scores.get(cid), (image_scores or {}).get(cid))
                      for cid in scores}
        samples.append(_metrics_from_scores(test_set, scores))
    return MetricsDistribution(tuple(samples))


def run_ablation(
    text_source,
    image_source,
    labeled: LabeledSet,
    config: ExperimentConfig,
    groups: Sequence[FeatureGroup],
) -> list[AblationRow]:
    """Re-run the ensemble with each feature group removed in turn.

    Returns the full-model row first, then one row per requested group with
    the change in mean ensemble AUC relative to the full model.
    """
    groups = list(groups)
    if not groups:
        raise ValueError("ablation needs at least one group")
    all_groups = set(FeatureGroup)
    if set(groups) == all_groups:
        raise ValueError("removing every feature group leaves nothing to train on")

    full = run_ensemble_experiment(text_source, image_source, labeled, config)
    full_auc = full.ensemble.mean("auc")
    rows = [AblationRow(None, full.ensemble, 0.0)]
    for group in groups:
        text_s = text_source.drop_group(group)
        image_s = image_source.drop_group(group)
        result = run_ensemble_experiment(text_s, image_s, labeled, config)
        rows.append(AblationRow(group, result.ensemble,
                                result.ensemble.mean("auc") - full_auc))
    return rows
