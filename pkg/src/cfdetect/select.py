"""Significance filtering of features against the binary label.

The workhorse is the non-parametric two-sample KS test: D is the supremum
absolute ECDF difference, evaluated over the pooled sample points (exact
for step functions), and the p-value comes from the asymptotic Kolmogorov
distribution at sqrt(n1*n2/(n1+n2)) * D. A Welch t-test is available as
the parametric alternative.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.special import stdtr

from .corpus import LabeledSet
from .features import FeatureMatrix


class SelectionTest(Enum):
    KS = "ks"
    WELCH = "welch"


@dataclass(frozen=True)
class KsResult:
    d_statistic: float
    p_value: float
    n1: int
    n2: int


@dataclass(frozen=True)
class FeatureTestRecord:
    name: str
    statistic: float
    p_value: float
    kept: bool


@dataclass(frozen=True)
class SelectionMask:
    records: tuple[FeatureTestRecord, ...]
    alpha: float

    def __post_init__(self):
        for rec in self.records:
            if rec.kept != (rec.p_value < self.alpha):
                raise ValueError(f"record {rec.name!r} violates kept iff p < alpha")

    def __len__(self) -> int:
        return len(self.records)

    def kept_indices(self) -> list[int]:
        return [i for i, r in enumerate(self.records) if r.kept]

    def kept_names(self) -> tuple[str, ...]:
        return tuple(r.name for r in self.records if r.kept)

    def apply(self, matrix: FeatureMatrix) -> FeatureMatrix:
        if tuple(r.name for r in self.records) != matrix.names:
            raise ValueError("selection mask was fitted on a different schema")
        return matrix.take_columns(self.kept_indices())


def _validate_sample(x: np.ndarray, who: str) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"{who} sample must be a nonempty 1-D array")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{who} sample contains non-finite values")
    return arr


def kolmogorov_sf(t: float) -> float:
    """Survival function of the Kolmogorov distribution.

    2 * sum_{j>=1} (-1)^(j-1) exp(-2 j^2 t^2), truncated once terms drop
    below 1e-10; exact limits at t <= 0.
    """
    if t <= 0.0:
        return 1.0
    total = 0.0
    sign = 1.0
    for j in range(1, 100000):
        term = math.exp(-2.0 * j * j * t * t)
        total += sign * term
        sign = -sign
        if term < 1e-10:
            break
    return min(1.0, max(0.0, 2.0 * total))


def _ks_d(x_sorted: np.ndarray, y_sorted: np.ndarray) -> float:
    pooled = np.concatenate([x_sorted, y_sorted])
    cdf_x = np.searchsorted(x_sorted, pooled, side="right") / x_sorted.size
    cdf_y = np.searchsorted(y_sorted, pooled, side="right") / y_sorted.size
    return float(np.max(np.abs(cdf_x - cdf_y)))


def ks_two_sample(x: Sequence[float], y: Sequence[float]) -> KsResult:
    """Two-sample KS test; D is exact, p is the asymptotic Kolmogorov tail."""
    xa = _validate_sample(np.asarray(x), "first")
    ya = _validate_sample(np.asarray(y), "second")
    xs = np.sort(xa)
    ys = np.sort(ya)
    d = _ks_d(xs, ys)
    n1, n2 = xs.size, ys.size
    effective_n = n1 * n2 / (n1 + n2)
    p = kolmogorov_sf(math.sqrt(effective_n) * d)
    return KsResult(d_statistic=d, p_value=p, n1=n1, n2=n2)


def welch_t_test(x: Sequence[float], y: Sequence[float]) -> tuple[float, float]:
    """Welch's unequal-variance t statistic with a two-sided p-value.

    Degrees of freedom follow Welch-Satterthwaite. Two constant, equal
    samples carry no evidence and return (0, 1) by convention.
    """
    xa = _validate_sample(np.asarray(x), "first")
    ya = _validate_sample(np.asarray(y), "second")
    n1, n2 = xa.size, ya.size
    if n1 < 2 or n2 < 2:
        raise ValueError("welch_t_test needs at least 2 observations per sample")
    m1, m2 = float(np.mean(xa)), float(np.mean(ya))
    v1 = float(np.var(xa, ddof=1))
    v2 = float(np.var(ya, ddof=1))
    se_sq = v1 / n1 + v2 / n2
    if se_sq == 0.0:
        # Degenerate: both samples constant.
        return (0.0, 1.0) if m1 == m2 else (math.copysign(math.inf, m1 - m2), 0.0)
    t = (m1 - m2) / math.sqrt(se_sq)
    df = se_sq ** 2 / ((v1 / n1) ** 2 / (n1 - 1) + (v2 / n2) ** 2 / (n2 - 1))
    p = 2.0 * float(stdtr(df, -abs(t)))
    return t, min(1.0, max(0.0, p))


def batch_ks_d(values: np.ndarray, fraud_rows: np.ndarray) -> np.ndarray:
    """Column-wise KS D statistics for a (rows x features) matrix.

    Equivalent to calling ks_two_sample per column (the ECDF difference is
    evaluated after absorbing tied values), but vectorized across columns.
    """
    n1 = int(fraud_rows.sum())
    n2 = int((~fraud_rows).sum())
    order = np.argsort(values, axis=0, kind="stable")
    sorted_vals = np.take_along_axis(values, order, axis=0)
    z = fraud_rows.astype(np.float64)[order]
    cdf_x = np.cumsum(z, axis=0) / n1
    cdf_y = np.cumsum(1.0 - z, axis=0) / n2
    diff = np.abs(cdf_x - cdf_y)
    # Within a run of equal values only the last position is a real
    # evaluation point of the pooled-step ECDFs.
    if sorted_vals.shape[0] > 1:
        diff[:-1][sorted_vals[:-1] == sorted_vals[1:]] = 0.0
    return diff.max(axis=0)


def select_significant(
    matrix: FeatureMatrix,
    labels: LabeledSet,
    test: SelectionTest = SelectionTest.KS,
    alpha: float = 0.05,
) -> SelectionMask:
    """Per-feature two-sample test of fraud vs not-fraud values.

    A feature is kept iff its p-value is below alpha. Deterministic given
    inputs; both classes must be present.
    """
    label_by_id = labels.labels()
    row_labels = np.array([label_by_id[cid] for cid in matrix.ids])
    fraud_rows = row_labels == 1
    clean_rows = row_labels == 0
    if not fraud_rows.any() or not clean_rows.any():
        raise ValueError("selection needs observations from both classes")

    records = []
    if test is SelectionTest.KS:
        n1 = int(fraud_rows.sum())
        n2 = int(clean_rows.sum())
        scale = math.sqrt(n1 * n2 / (n1 + n2))
        d_values = batch_ks_d(matrix.values, fraud_rows)
        for name, d in zip(matrix.names, d_values):
            p = kolmogorov_sf(scale * float(d))
            records.append(FeatureTestRecord(name, float(d), p, p < alpha))
    else:
        for j, name in enumerate(matrix.names):
            col = matrix.values[:, j]
            stat, p = welch_t_test(col[fraud_rows], col[clean_rows])
            records.append(FeatureTestRecord(name, stat, p, p < alpha))
    return SelectionMask(tuple(records), alpha)


def export_mask_csv(mask: SelectionMask, path) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["name", "statistic", "p_value", "kept"])
        for rec in mask.records:
            writer.writerow([rec.name, repr(rec.statistic), repr(rec.p_value),
                             "true" if rec.kept else "false"])
    return path
