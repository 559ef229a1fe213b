"""From-scratch classifiers behind one fit/predict surface.

Six kinds: k-NN, Gaussian Naive Bayes, Gini decision tree, random forest,
AdaBoost over depth-1 stumps (SAMME updates), and the fixed-recipe MLP.
Fitting is deterministic given (spec, data, seed); fitted models are
immutable and safe to share across threads for prediction.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from ..corpus import LabeledSet
from ..features import FeatureMatrix, FeatureVector, schema_hash
from . import mlp as _mlp
from ._tree import TreeArrays, TreeBuilder, predict_tree
from .metrics import Metrics, evaluate_metrics, roc_auc, roc_auc_trapezoid, roc_curve

__all__ = [
    "ClassifierKind", "ClassifierSpec", "Model", "SchemaMismatchError",
    "fit_classifier", "predict_proba", "predict_proba_batch",
    "save_model", "load_model", "model_payload", "model_from_payload",
    "Metrics", "evaluate_metrics", "roc_auc", "roc_auc_trapezoid", "roc_curve",
]

SERIALIZATION_VERSION = 1


class SchemaMismatchError(Exception):
    """Prediction input schema differs from the training schema."""


class ClassifierKind(Enum):
    KNN = "knn"
    GAUSSIAN_NB = "naive_bayes"
    DECISION_TREE = "decision_tree"
    RANDOM_FOREST = "random_forest"
    ADABOOST_STUMPS = "adaboost"
    MLP = "mlp"


@dataclass(frozen=True)
class ClassifierSpec:
    kind: ClassifierKind
    seed: int = 0
    # k-NN
    k: int = 5
    # tree / forest
    max_depth: int | None = None
    min_leaf: int = 1
    n_trees: int = 200
    max_features: int | str | None = "sqrt"  # per-split subsample for forests
    bootstrap: bool = True
    # AdaBoost
    n_rounds: int = 100
    # MLP recipe (hidden width is set to the input dimension at fit time)
    epochs: int = 50
    learning_rate: float = 0.001
    momentum: float = 0.9
    weight_decay: float = 5e-4
    batch_size: int = 1
    noise_std: float = math.sqrt(0.1)

    def with_seed(self, seed: int) -> "ClassifierSpec":
        return replace(self, seed=seed)


@dataclass(frozen=True)
class Standardizer:
    mean: np.ndarray
    std: np.ndarray  # floored so constant features stay harmless

    @classmethod
    def fit(cls, values: np.ndarray) -> "Standardizer":
        mean = values.mean(axis=0)
        std = values.std(axis=0)
        return cls(mean, np.where(std < 1e-8, 1.0, std))

    def transform(self, values: np.ndarray) -> np.ndarray:
        return (values - self.mean) / self.std


@dataclass(frozen=True)
class Model:
    kind: ClassifierKind
    feature_names: tuple[str, ...]

    def predict_values(self, values: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def schema_hash(self) -> str:
        return schema_hash(self.feature_names)


@dataclass(frozen=True)
class KnnModel(Model):
    k: int
    train_values: np.ndarray  # standardized, rows sorted by campaign id
    train_labels: np.ndarray
    standardizer: Standardizer

    def predict_values(self, values: np.ndarray) -> np.ndarray:
        X = self.standardizer.transform(values)
        out = np.empty(X.shape[0])
        k = min(self.k, self.train_values.shape[0])
        for i, x in enumerate(X):
            dist = np.sum((self.train_values - x) ** 2, axis=1)
            # Stable sort + id-ordered training rows: distance ties break
            # toward the lower campaign id.
            nearest = np.argsort(dist, kind="stable")[:k]
            out[i] = self.train_labels[nearest].mean()
        return out


@dataclass(frozen=True)
class GaussianNbModel(Model):
    log_prior: np.ndarray   # (2,)
    means: np.ndarray       # (2, d)
    variances: np.ndarray   # (2, d), floored

    def predict_values(self, values: np.ndarray) -> np.ndarray:
        joint = np.empty((values.shape[0], 2))
        for c in (0, 1):
            log_det = np.sum(np.log(2.0 * np.pi * self.variances[c]))
            sq = ((values - self.means[c]) ** 2 / self.variances[c]).sum(axis=1)
            joint[:, c] = self.log_prior[c] - 0.5 * (log_det + sq)
        shifted = joint - joint.max(axis=1, keepdims=True)
        e = np.exp(shifted)
        return e[:, 1] / e.sum(axis=1)


@dataclass(frozen=True)
class DecisionTreeModel(Model):
    tree: TreeArrays

    def predict_values(self, values: np.ndarray) -> np.ndarray:
        return predict_tree(self.tree, values)


@dataclass(frozen=True)
class RandomForestModel(Model):
    trees: tuple[TreeArrays, ...]

    def predict_values(self, values: np.ndarray) -> np.ndarray:
        total = np.zeros(values.shape[0])
        for tree in self.trees:
            total += predict_tree(tree, values)
        return total / len(self.trees)


@dataclass(frozen=True)
class AdaBoostModel(Model):
    stump_feature: np.ndarray
    stump_threshold: np.ndarray
    stump_left: np.ndarray   # label predicted when x <= threshold
    stump_right: np.ndarray
    alphas: np.ndarray

    def margins(self, values: np.ndarray) -> np.ndarray:
        if self.stump_feature.size == 0:
            return np.zeros(values.shape[0])
        margin = np.zeros(values.shape[0])
        for f, thr, lab_l, lab_r, alpha in zip(
                self.stump_feature, self.stump_threshold,
                self.stump_left, self.stump_right, self.alphas):
            votes = np.where(values[:, f] <= thr, lab_l, lab_r)
            margin += alpha * (2.0 * votes - 1.0)
        return margin

    def predict_values(self, values: np.ndarray) -> np.ndarray:
        return 1.0 / (1.0 + np.exp(-self.margins(values)))


@dataclass(frozen=True)
class MlpModel(Model):
    params: dict[str, np.ndarray]
    standardizer: Standardizer
    epoch_losses: tuple[float, ...]

    def predict_values(self, values: np.ndarray) -> np.ndarray:
        return _mlp.forward_proba(self.params, self.standardizer.transform(values))


def _labels_vector(matrix: FeatureMatrix, labels) -> np.ndarray:
    if isinstance(labels, LabeledSet):
        mapping: Mapping[str, int] = labels.labels()
    else:
        mapping = labels
    y = np.array([int(mapping[cid]) for cid in matrix.ids])
    if not np.isin(y, (0, 1)).all():
        raise ValueError("labels must be binary (1 fraud, 0 not-fraud)")
    return y


def _fit_stumps(X: np.ndarray, y: np.ndarray, n_rounds: int):
    """Weighted exhaustive stump search with SAMME reweighting."""
    n, n_feat = X.shape
    order = np.argsort(X, axis=0, kind="stable")
    svals = np.take_along_axis(X, order, axis=0)
    sy = y[order]
    distinct = svals[:-1] != svals[1:]
    if not distinct.any():
        return [], [], [], [], []

    w = np.full(n, 1.0 / n)
    feats: list[int] = []
    thresholds: list[float] = []
    lefts: list[int] = []
    rights: list[int] = []
    alphas: list[float] = []
    for _ in range(n_rounds):
        sw = w[order]
        lp = np.cumsum(sw * sy, axis=0)[:-1]
        lt = np.cumsum(sw, axis=0)[:-1]
        ln = lt - lp
        total_pos = float((w * y).sum())
        total = 1.0
        rp = total_pos - lp
        rn = (total - total_pos) - ln
        err = np.minimum(lp, ln) + np.minimum(rp, rn)
        err = np.where(distinct, err, np.inf)
        flat = int(np.argmin(err.T))
        col, pos = divmod(flat, err.shape[0])
        best_err = float(err[pos, col])
        if not np.isfinite(best_err):
            break
        left_label = 1 if ln[pos, col] <= lp[pos, col] else 0
        right_label = 1 if rn[pos, col] <= rp[pos, col] else 0
        threshold = 0.5 * (svals[pos, col] + svals[pos + 1, col])

        if best_err >= 0.5:
            break
        clipped = max(best_err, 1e-12)
        alpha = math.log((1.0 - clipped) / clipped)
        feats.append(col)
        thresholds.append(float(threshold))
        lefts.append(left_label)
        rights.append(right_label)
        alphas.append(alpha)

        predicted = np.where(X[:, col] <= threshold, left_label, right_label)
        wrong = predicted != y
        w = w * np.exp(alpha * wrong)
        w /= w.sum()
        if best_err <= 1e-12:
            break
    return feats, thresholds, lefts, rights, alphas


def _resolve_max_features(setting, n_features: int) -> int | None:
    if setting is None or setting == "all":
        return None
    if setting == "sqrt":
        return max(1, int(math.sqrt(n_features)))
    value = int(setting)
    if value < 1:
        raise ValueError("max_features must be >= 1")
    return min(value, n_features)


def fit_classifier(spec: ClassifierSpec, matrix: FeatureMatrix, labels) -> Model:
    """Fit `spec` on the rows of `matrix`; labels are aligned by campaign id."""
    y = _labels_vector(matrix, labels)
    if not np.all(np.isfinite(matrix.values)):
        raise ValueError("feature matrix contains non-finite values")
    if y.min() == y.max():
        raise ValueError("training data must contain both classes")
    X = matrix.values
    names = matrix.names

    if spec.kind is ClassifierKind.KNN:
        if spec.k < 1:
            raise ValueError("k must be >= 1")
        standardizer = Standardizer.fit(X)
        by_id = np.argsort(np.asarray(matrix.ids))
        return KnnModel(spec.kind, names, spec.k,
                        standardizer.transform(X)[by_id], y[by_id], standardizer)

    if spec.kind is ClassifierKind.GAUSSIAN_NB:
        means = np.empty((2, X.shape[1]))
        variances = np.empty((2, X.shape[1]))
        log_prior = np.empty(2)
        pooled_max_var = float(np.var(X, axis=0).max())
        floor = 1e-9 * (pooled_max_var if pooled_max_var > 0 else 1.0)
        for c in (0, 1):
            rows = X[y == c]
            means[c] = rows.mean(axis=0)
            variances[c] = rows.var(axis=0) + floor
            log_prior[c] = math.log(rows.shape[0] / X.shape[0])
        return GaussianNbModel(spec.kind, names, log_prior, means, variances)

    if spec.kind is ClassifierKind.DECISION_TREE:
        builder = TreeBuilder(spec.max_depth, spec.min_leaf, None, None)
        return DecisionTreeModel(spec.kind, names, builder.build(X, y))

    if spec.kind is ClassifierKind.RANDOM_FOREST:
        if spec.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        max_features = _resolve_max_features(spec.max_features, X.shape[1])
        trees = []
        # Per-tree seeds derive from the spec seed, so results are
        # independent of any training-order scheduling.
        for child in np.random.SeedSequence(spec.seed).spawn(spec.n_trees):
            rng = np.random.default_rng(child)
            if spec.bootstrap:
                rows = rng.integers(0, X.shape[0], size=X.shape[0])
                Xb, yb = X[rows], y[rows]
                if yb.min() == yb.max():  # degenerate resample; fall back
                    Xb, yb = X, y
            else:
                Xb, yb = X, y
            builder = TreeBuilder(spec.max_depth, spec.min_leaf, max_features, rng)
            trees.append(builder.build(Xb, yb))
        return RandomForestModel(spec.kind, names, tuple(trees))

    if spec.kind is ClassifierKind.ADABOOST_STUMPS:
        if spec.n_rounds < 1:
            raise ValueError("n_rounds must be >= 1")
        feats, thresholds, lefts, rights, alphas = _fit_stumps(X, y, spec.n_rounds)
        return AdaBoostModel(spec.kind, names,
                             np.asarray(feats, dtype=np.int32),
                             np.asarray(thresholds, dtype=np.float64),
                             np.asarray(lefts, dtype=np.int32),
                             np.asarray(rights, dtype=np.int32),
                             np.asarray(alphas, dtype=np.float64))

    if spec.kind is ClassifierKind.MLP:
        standardizer = Standardizer.fit(X)
        net = _mlp.train_mlp(
            standardizer.transform(X), y,
            seed=spec.seed,
            epochs=spec.epochs,
            learning_rate=spec.learning_rate,
            momentum=spec.momentum,
            weight_decay=spec.weight_decay,
            noise_std=spec.noise_std,
        )
        return MlpModel(spec.kind, names, net.params, standardizer,
                        tuple(net.epoch_losses))

    raise ValueError(f"unknown classifier kind {spec.kind}")


def predict_proba(model: Model, x: FeatureVector) -> float:
    """Fraud probability for one campaign; refuses schema mismatches."""
    if x.names != model.feature_names:
        raise SchemaMismatchError(
            f"model was trained on {len(model.feature_names)} features; "
            f"input carries a different schema")
    p = float(model.predict_values(x.values[None, :])[0])
    return min(1.0, max(0.0, p))


def predict_proba_batch(model: Model, matrix: FeatureMatrix) -> np.ndarray:
    if matrix.names != model.feature_names:
        raise SchemaMismatchError("feature matrix schema differs from training schema")
    return np.clip(model.predict_values(matrix.values), 0.0, 1.0)


# --- serialization ----------------------------------------------------------


def _tree_payload(tree: TreeArrays) -> dict:
    return {
        "feature": tree.feature.tolist(),
        "threshold": tree.threshold.tolist(),
        "left": tree.left.tolist(),
        "right": tree.right.tolist(),
        "value": tree.value.tolist(),
    }


def _tree_from_payload(payload: dict) -> TreeArrays:
    return TreeArrays(
        feature=np.asarray(payload["feature"], dtype=np.int32),
        threshold=np.asarray(payload["threshold"], dtype=np.float64),
        left=np.asarray(payload["left"], dtype=np.int32),
        right=np.asarray(payload["right"], dtype=np.int32),
        value=np.asarray(payload["value"], dtype=np.float64),
    )


def model_payload(model: Model) -> dict:
    payload: dict = {
        "format_version": SERIALIZATION_VERSION,
        "kind": model.kind.value,
        "feature_names": list(model.feature_names),
        "schema_hash": model.schema_hash(),
    }
    if isinstance(model, KnnModel):
        payload["params"] = {
            "k": model.k,
            "train_values": model.train_values.tolist(),
            "train_labels": model.train_labels.tolist(),
            "mean": model.standardizer.mean.tolist(),
            "std": model.standardizer.std.tolist(),
        }
    elif isinstance(model, GaussianNbModel):
        payload["params"] = {
            "log_prior": model.log_prior.tolist(),
            "means": model.means.tolist(),
            "variances": model.variances.tolist(),
        }
    elif isinstance(model, DecisionTreeModel):
        payload["params"] = {"tree": _tree_payload(model.tree)}
    elif isinstance(model, RandomForestModel):
        payload["params"] = {"trees": [_tree_payload(t) for t in model.trees]}
    elif isinstance(model, AdaBoostModel):
        payload["params"] = {
            "feature": model.stump_feature.tolist(),
            "threshold": model.stump_threshold.tolist(),
            "left": model.stump_left.tolist(),
            "right": model.stump_right.tolist(),
            "alphas": model.alphas.tolist(),
        }
    elif isinstance(model, MlpModel):
        payload["params"] = {
            "weights": {k: v.tolist() for k, v in model.params.items()},
            "mean": model.standardizer.mean.tolist(),
            "std": model.standardizer.std.tolist(),
            "epoch_losses": list(model.epoch_losses),
        }
    else:
        raise ValueError(f"cannot serialize model kind {model.kind}")
    return payload


def save_model(model: Model, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(model_payload(model), sort_keys=True), encoding="utf-8")
    return path


def model_from_payload(payload: dict) -> Model:
    if payload.get("format_version") != SERIALIZATION_VERSION:
        raise ValueError(f"unsupported model format {payload.get('format_version')!r}")
    kind = ClassifierKind(payload["kind"])
    names = tuple(payload["feature_names"])
    if schema_hash(names) != payload["schema_hash"]:
        raise SchemaMismatchError("stored schema hash does not match feature names")
    params = payload["params"]
    if kind is ClassifierKind.KNN:
        return KnnModel(kind, names, int(params["k"]),
                        np.asarray(params["train_values"], dtype=np.float64),
                        np.asarray(params["train_labels"]),
                        Standardizer(np.asarray(params["mean"]), np.asarray(params["std"])))
    if kind is ClassifierKind.GAUSSIAN_NB:
        return GaussianNbModel(kind, names,
                               np.asarray(params["log_prior"]),
                               np.asarray(params["means"]),
                               np.asarray(params["variances"]))
    if kind is ClassifierKind.DECISION_TREE:
        return DecisionTreeModel(kind, names, _tree_from_payload(params["tree"]))
    if kind is ClassifierKind.RANDOM_FOREST:
        return RandomForestModel(kind, names,
                                 tuple(_tree_from_payload(t) for t in params["trees"]))
    if kind is ClassifierKind.ADABOOST_STUMPS:
        return AdaBoostModel(kind, names,
                             np.asarray(params["feature"], dtype=np.int32),
                             np.asarray(params["threshold"], dtype=np.float64),
                             np.asarray(params["left"], dtype=np.int32),
                             np.asarray(params["right"], dtype=np.int32),
                             np.asarray(params["alphas"], dtype=np.float64))
    if kind is ClassifierKind.MLP:
        weights = {k: np.asarray(v, dtype=np.float64) for k, v in params["weights"].items()}
        return MlpModel(kind, names, weights,
                        Standardizer(np.asarray(params["mean"]), np.asarray(params["std"])),
                        tuple(params["epoch_losses"]))
    raise ValueError(f"unknown model kind {kind}")


def load_model(path) -> Model:
    return model_from_payload(json.loads(Path(path).read_text(encoding="utf-8")))
