"""CSV reports and the JSON run manifest.

Floats are written with repr (shortest round-trip form) and the manifest
carries no timestamps, so identical runs produce byte-identical files.
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path
from typing import Mapping

from ..learn.metrics import Metrics
from . import ExperimentConfig, MetricsDistribution


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_samples_csv(distribution: MetricsDistribution, path) -> Path:
    """All per-iteration samples, so box plots stay recomputable."""
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", *Metrics.METRIC_NAMES, "tp", "fp", "tn", "fn"])
        for i, m in enumerate(distribution.samples):
            writer.writerow([i, *(_fmt(getattr(m, name)) for name in Metrics.METRIC_NAMES),
                             m.tp, m.fp, m.tn, m.fn])
    return path


def write_summary_csv(rows: Mapping[str, MetricsDistribution], path) -> Path:
    """Table-shaped summary: one row per run, mean and std per metric."""
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        header = ["run"]
        for name in Metrics.METRIC_NAMES:
            header += [f"{name}_mean", f"{name}_std"]
        writer.writerow(header)
        for run_name, dist in rows.items():
            row = [run_name]
            for name in Metrics.METRIC_NAMES:
                row += [_fmt(dist.mean(name)), _fmt(dist.std(name))]
            writer.writerow(row)
    return path


def file_sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def config_payload(config: ExperimentConfig) -> dict:
    classifier = config.classifier
    return {
        "label_setup": config.label_setup.value,
        "modality": config.modality.value,
        "iterations": config.resolved_iterations(),
        "train_fraction": config.train_fraction,
        "master_seed": config.master_seed,
        "selection_mode": config.selection_mode.value,
        "selection_test": config.selection_test.value,
        "alpha": config.alpha,
        "classifier": {
            "kind": classifier.kind.value,
            "seed": classifier.seed,
            "k": classifier.k,
            "max_depth": classifier.max_depth,
            "min_leaf": classifier.min_leaf,
            "n_trees": classifier.n_trees,
            "max_features": classifier.max_features,
            "bootstrap": classifier.bootstrap,
            "n_rounds": classifier.n_rounds,
            "epochs": classifier.epochs,
            "learning_rate": classifier.learning_rate,
            "momentum": classifier.momentum,
            "weight_decay": classifier.weight_decay,
            "batch_size": classifier.batch_size,
            "noise_std": classifier.noise_std,
        },
    }


def write_manifest(config: ExperimentConfig, data_hashes: Mapping[str, str], path) -> Path:
    from .. import __version__

    payload = {
        "config": config_payload(config),
        "data_hashes": dict(sorted(data_hashes.items())),
        "package_version": __version__,
    }
    path = Path(path)
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return path
