"""Binary classification tree grown on Gini gain; shared by tree and forest.

Split search is vectorized: candidate columns are sorted together and all
thresholds scored from prefix sums. Ties in impurity break toward the
lower feature index, then the lower threshold position, so growth is
deterministic for a given sample order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_LEAF = -1


@dataclass
class TreeArrays:
    feature: np.ndarray    # int32; _LEAF marks a leaf
    threshold: np.ndarray  # float64
    left: np.ndarray       # int32 child index
    right: np.ndarray      # int32 child index
    value: np.ndarray      # float64 fraud fraction at the node


def _find_split(X: np.ndarray, y: np.ndarray, columns: np.ndarray, min_leaf: int):
    """Best (original column, threshold) by weighted Gini, or None."""
    n = X.shape[0]
    sub = X[:, columns]
    order = np.argsort(sub, axis=0, kind="stable")
    svals = np.take_along_axis(sub, order, axis=0)
    sy = y[order]

    left_pos = np.cumsum(sy, axis=0)[:-1]
    total_pos = float(y.sum())
    left_n = np.arange(1, n, dtype=np.float64)[:, None]
    right_n = n - left_n
    right_pos = total_pos - left_pos

    pl = left_pos / left_n
    pr = right_pos / right_n
    weighted = (left_n * 2.0 * pl * (1.0 - pl) + right_n * 2.0 * pr * (1.0 - pr)) / n

    valid = svals[:-1] != svals[1:]
    if min_leaf > 1:
        sizes_ok = (left_n >= min_leaf) & (right_n >= min_leaf)
        valid = valid & sizes_ok
    if not valid.any():
        return None
    weighted = np.where(valid, weighted, np.inf)

    # argmin over the transpose scans column-by-column: lower feature index
    # wins ties, then the lower threshold position. Zero-gain splits are
    # accepted (recursion is bounded by the purity and size checks), which
    # lets the tree shatter XOR-like configurations.
    flat = int(np.argmin(weighted.T))
    col, pos = divmod(flat, weighted.shape[0])
    threshold = 0.5 * (svals[pos, col] + svals[pos + 1, col])
    return int(columns[col]), float(threshold)


class TreeBuilder:
    def __init__(self, max_depth: int | None, min_leaf: int,
                 max_features: int | None, rng: np.random.Generator | None):
        self.max_depth = max_depth
        self.min_leaf = max(1, min_leaf)
        self.max_features = max_features
        self.rng = rng
        self._feature: list[int] = []
        self._threshold: list[float] = []
        self._left: list[int] = []
        self._right: list[int] = []
        self._value: list[float] = []

    def _new_node(self, value: float) -> int:
        self._feature.append(_LEAF)
        self._threshold.append(0.0)
        self._left.append(_LEAF)
        self._right.append(_LEAF)
        self._value.append(value)
        return len(self._feature) - 1

    def build(self, X: np.ndarray, y: np.ndarray) -> TreeArrays:
        self._grow(X, y, depth=0)
        return TreeArrays(
            feature=np.asarray(self._feature, dtype=np.int32),
            threshold=np.asarray(self._threshold, dtype=np.float64),
            left=np.asarray(self._left, dtype=np.int32),
            right=np.asarray(self._right, dtype=np.int32),
            value=np.asarray(self._value, dtype=np.float64),
        )

    def _grow(self, X: np.ndarray, y: np.ndarray, depth: int) -> int:
        n = X.shape[0]
        fraction = float(y.mean())
        node = self._new_node(fraction)
        if fraction in (0.0, 1.0) or n < 2 * self.min_leaf:
            return node
        if self.max_depth is not None and depth >= self.max_depth:
            return node

        n_features = X.shape[1]
        if self.max_features is not None and self.max_features < n_features:
            columns = np.sort(self.rng.choice(n_features, size=self.max_features,
                                              replace=False))
        else:
            columns = np.arange(n_features)

        found = _find_split(X, y, columns, self.min_leaf)
        if found is None:
            return node
        column, threshold = found
        goes_left = X[:, column] <= threshold
        if not goes_left.any() or goes_left.all():
            return node
        self._feature[node] = column
        self._threshold[node] = threshold
        self._left[node] = self._grow(X[goes_left], y[goes_left], depth + 1)
        self._right[node] = self._grow(X[~goes_left], y[~goes_left], depth + 1)
        return node


def predict_tree(tree: TreeArrays, X: np.ndarray) -> np.ndarray:
    """Fraud fraction of the leaf each row lands in."""
    node = np.zeros(X.shape[0], dtype=np.int64)
    while True:
        feat = tree.feature[node]
        active = feat != _LEAF
        if not active.any():
            break
        rows = np.nonzero(active)[0]
        cur = node[rows]
        vals = X[rows, feat[rows]]
        node[rows] = np.where(vals <= tree.threshold[cur],
                              tree.left[cur], tree.right[cur])
    return tree.value[node]
