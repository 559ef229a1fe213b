"""Figure-data export: the numbers behind the analysis plots, as CSV."""

from __future__ import annotations

import csv
from enum import Enum
from pathlib import Path
from typing import Mapping

import numpy as np

from ..corpus import LabeledSet
from ..features import FeatureMatrix
from ..learn.metrics import Metrics
from . import MetricsDistribution

_LABEL_NAMES = {1: "fraud", 0: "not_fraud"}


class FigureKind(Enum):
    TEXT_EMOTIONS = "TextEmotions"
    IMAGE_EMOTIONS = "ImageEmotions"
    WORD_IMPORTANCE = "WordImportance"
    OBJECT_PREVALENCE = "ObjectPrevalence"
    FACE_HISTOGRAM = "FaceHistogram"
    METRICS_BOXES = "MetricsBoxes"


def _rows_by_label(matrix: FeatureMatrix, labeled: LabeledSet):
    label_map = labeled.labels()
    ids = [cid for cid in matrix.ids if cid in label_map]
    sub = matrix.take_rows(ids)
    y = np.array([label_map[cid] for cid in ids])
    return sub, y


def _per_label_means(matrix: FeatureMatrix, labeled: LabeledSet, prefix: str):
    sub, y = _rows_by_label(matrix, labeled)
    cols = [(i, name[len(prefix):]) for i, name in enumerate(sub.names)
            if name.startswith(prefix)]
    rows = []
    for label in (1, 0):
        values = sub.values[y == label]
        for i, short in cols:
            rows.append([_LABEL_NAMES[label], short, repr(float(values[:, i].mean()))])
    return ["label", "name", "mean"], rows


def _difference_ranking(matrix: FeatureMatrix, labeled: LabeledSet, prefix: str):
    """Columns ranked by decreasing (fraud mean - not-fraud mean)."""
    sub, y = _rows_by_label(matrix, labeled)
    cols = [(i, name[len(prefix):]) for i, name in enumerate(sub.names)
            if name.startswith(prefix)]
    fraud = sub.values[y == 1]
    clean = sub.values[y == 0]
    entries = []
    for i, short in cols:
        mean_f = float(fraud[:, i].mean())
        mean_n = float(clean[:, i].mean())
        entries.append((short, mean_f, mean_n, mean_f - mean_n))
    entries.sort(key=lambda e: (-e[3], e[0]))
    rows = [[name, repr(mf), repr(mn), repr(diff)] for name, mf, mn, diff in entries]
    return ["name", "mean_fraud", "mean_not_fraud", "difference"], rows


def _face_histogram(matrix: FeatureMatrix, labeled: LabeledSet):
    sub, y = _rows_by_label(matrix, labeled)
    col = sub.names.index("img_face:count")
    rows = []
    for label in (1, 0):
        values = sub.values[y == label, col]
        mean = float(values.mean())
        median = float(np.median(values))
        binned = np.rint(values).astype(int)
        for face_count in sorted(set(binned.tolist())):
            rows.append([_LABEL_NAMES[label], face_count,
                         int((binned == face_count).sum()), repr(mean), repr(median)])
    return ["label", "face_count", "campaigns", "label_mean", "label_median"], rows


def _metrics_boxes(distributions: Mapping[str, MetricsDistribution]):
    rows = []
    for run_name, dist in distributions.items():
        for metric in Metrics.METRIC_NAMES:
            lo, q1, med, q3, hi = dist.quartiles(metric)
            rows.append([run_name, metric, repr(lo), repr(q1), repr(med),
                         repr(q3), repr(hi), repr(dist.mean(metric)), repr(dist.std(metric))])
    return ["run", "metric", "min", "q1", "median", "q3", "max", "mean", "std"], rows


def export_figure_data(
    kind: FigureKind,
    path,
    *,
    labeled: LabeledSet | None = None,
    text_matrix: FeatureMatrix | None = None,
    image_matrix: FeatureMatrix | None = None,
    distributions: Mapping[str, MetricsDistribution] | None = None,
) -> Path:
    """Write the CSV table behind one figure kind."""
    if kind is FigureKind.TEXT_EMOTIONS:
        header, rows = _per_label_means(_need(text_matrix, "text"), _need(labeled, "labels"),
                                        "senti:emotion:")
    elif kind is FigureKind.IMAGE_EMOTIONS:
        header, rows = _per_label_means(_need(image_matrix, "image"), _need(labeled, "labels"),
                                        "img_emo:")
    elif kind is FigureKind.WORD_IMPORTANCE:
        header, rows = _difference_ranking(_need(text_matrix, "text"), _need(labeled, "labels"),
                                           "tfidf:term:")
    elif kind is FigureKind.OBJECT_PREVALENCE:
        header, rows = _difference_ranking(_need(image_matrix, "image"), _need(labeled, "labels"),
                                           "img_sem:")
    elif kind is FigureKind.FACE_HISTOGRAM:
        header, rows = _face_histogram(_need(image_matrix, "image"), _need(labeled, "labels"))
    elif kind is FigureKind.METRICS_BOXES:
        header, rows = _metrics_boxes(_need(distributions, "distributions"))
    else:
        raise ValueError(f"unknown figure kind {kind!r}")

    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    return path


def _need(value, what):
    if value is None:
        raise ValueError(f"this figure kind needs {what}")
    return value
