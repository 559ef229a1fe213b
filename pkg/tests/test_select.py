"""KS and Welch tests plus the per-feature selection mask."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cfdetect.corpus import LabeledSet
from cfdetect.features import FeatureMatrix
from cfdetect.select import (SelectionTest, batch_ks_d, export_mask_csv,
                             kolmogorov_sf, ks_two_sample, select_significant,
                             welch_t_test)


def brute_force_ks_d(x, y) -> float:
    """Independent oracle: evaluate both ECDFs at every pooled point."""
    x, y = list(x), list(y)
    best = 0.0
    for t in sorted(set(x) | set(y)):
        fx = sum(1 for v in x if v <= t) / len(x)
        fy = sum(1 for v in y if v <= t) / len(y)
        best = max(best, abs(fx - fy))
    return best


def permutation_p_value(x, y, rng, n_perm=2000) -> float:
    """Independent oracle for the t-test: permutation of the mean difference."""
    pooled = np.concatenate([x, y])
    observed = abs(np.mean(x) - np.mean(y))
    hits = 0
    for _ in range(n_perm):
        perm = rng.permutation(pooled)
        diff = abs(perm[:len(x)].mean() - perm[len(x):].mean())
        if diff >= observed:
            hits += 1
    return (hits + 1) / (n_perm + 1)


class TestKsTwoSample:
    def test_identical_multisets_give_zero(self):
        result = ks_two_sample([1, 2, 2, 3], [1, 2, 2, 3])
        assert result.d_statistic == 0.0
        assert result.p_value == 1.0

    def test_disjoint_supports_give_one(self):
        assert ks_two_sample([1, 2], [3, 4]).d_statistic == 1.0

    def test_interleaved_case_against_brute_force(self):
        x, y = [1, 3], [2, 4]
        result = ks_two_sample(x, y)
        assert result.d_statistic == pytest.approx(brute_force_ks_d(x, y), abs=1e-15)
        assert result.d_statistic == 0.5

    def test_symmetry_is_exact(self):
        rng = np.random.default_rng(0)
        x, y = rng.normal(size=13), rng.normal(size=7)
        assert ks_two_sample(x, y).d_statistic == ks_two_sample(y, x).d_statistic

    def test_invariant_under_strictly_increasing_transforms(self):
        rng = np.random.default_rng(1)
        x, y = rng.normal(size=20), rng.normal(0.5, 1.2, size=15)
        base = ks_two_sample(x, y).d_statistic
        assert ks_two_sample(np.exp(x), np.exp(y)).d_statistic == pytest.approx(base, abs=1e-15)
        assert ks_two_sample(3 * x + 7, 3 * y + 7).d_statistic == pytest.approx(base, abs=1e-15)

    @given(st.lists(st.integers(0, 3), min_size=1, max_size=8),
           st.lists(st.integers(0, 3), min_size=1, max_size=8))
    @settings(max_examples=200, deadline=None)
    def test_small_samples_match_enumeration(self, x, y):
        assert ks_two_sample(x, y).d_statistic == pytest.approx(
            brute_force_ks_d(x, y), abs=1e-12)

    def test_empty_sample_rejected(self):
        with pytest.raises(ValueError):
            ks_two_sample([], [1.0])

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            ks_two_sample([1.0, float("nan")], [1.0])

    def test_p_value_matches_reference_implementation(self):
        # D against scipy's two-sample statistic; the tail probability
        # against scipy's Kolmogorov survival function evaluated at
        # sqrt(n1*n2/(n1+n2)) * D, which is this artifact's p definition.
        from scipy.special import kolmogorov
        from scipy.stats import ks_2samp

        rng = np.random.default_rng(2)
        for _ in range(20):
            x = rng.normal(size=int(rng.integers(10, 60)))
            y = rng.normal(rng.uniform(0, 1), 1, size=int(rng.integers(10, 60)))
            ours = ks_two_sample(x, y)
            ref = ks_2samp(x, y, method="asymp")
            assert ours.d_statistic == pytest.approx(ref.statistic, abs=1e-12)
            en = math.sqrt(len(x) * len(y) / (len(x) + len(y)))
            assert ours.p_value == pytest.approx(float(kolmogorov(en * ours.d_statistic)),
                                                 abs=1e-9)

    def test_kolmogorov_sf_limits(self):
        assert kolmogorov_sf(0.0) == 1.0
        assert kolmogorov_sf(10.0) == pytest.approx(0.0, abs=1e-12)
        # Known value: Q(1.0) ~ 0.26999967...
        assert kolmogorov_sf(1.0) == pytest.approx(0.2699996716773, abs=1e-9)


class TestBatchKs:
    def test_batch_matches_per_pair_path_exactly(self):
        rng = np.random.default_rng(3)
        values = rng.normal(size=(60, 25))
        values[:, 3] = np.round(values[:, 3])  # force ties
        fraud = np.zeros(60, dtype=bool)
        fraud[:27] = True
        batch = batch_ks_d(values, fraud)
        for j in range(25):
            single = ks_two_sample(values[fraud, j], values[~fraud, j]).d_statistic
            assert batch[j] == pytest.approx(single, abs=0.0)


class TestWelch:
    def test_identical_samples(self):
        t, p = welch_t_test([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
        assert t == 0.0
        assert p == 1.0

    def test_strong_shift_detected_and_permutation_agrees(self):
        rng = np.random.default_rng(4)
        x = rng.normal(0, 1, size=30)
        y = x + 10.0
        t, p = welch_t_test(x, y)
        assert p < 1e-6
        perm_p = permutation_p_value(x, y, np.random.default_rng(5))
        assert perm_p < 5e-3  # resolution floor of 2000 permutations

    def test_swapping_negates_t_preserves_p(self):
        rng = np.random.default_rng(6)
        x, y = rng.normal(size=12), rng.normal(0.7, 1, size=9)
        t_xy, p_xy = welch_t_test(x, y)
        t_yx, p_yx = welch_t_test(y, x)
        assert t_xy == pytest.approx(-t_yx)
        assert p_xy == pytest.approx(p_yx)

    def test_constant_equal_samples_by_convention(self):
        assert welch_t_test([2.0, 2.0], [2.0, 2.0]) == (0.0, 1.0)

    def test_matches_reference_implementation(self):
        from scipy.stats import ttest_ind

        rng = np.random.default_rng(7)
        x, y = rng.normal(size=25), rng.normal(0.4, 2.0, size=18)
        t, p = welch_t_test(x, y)
        ref = ttest_ind(x, y, equal_var=False)
        assert t == pytest.approx(ref.statistic, abs=1e-12)
        assert p == pytest.approx(ref.pvalue, abs=1e-12)

    def test_tiny_samples_rejected(self):
        with pytest.raises(ValueError):
            welch_t_test([1.0], [1.0, 2.0])


def _matrix_with_labels(seed=0, n=200, n_features=50, n_shifted=5, shift=3.0):
    rng = np.random.default_rng(seed)
    X = rng.normal(0, 1, (2 * n, n_features))
    X[:n, :n_shifted] += shift
    ids = tuple(f"c{i:04d}" for i in range(2 * n))
    labels = LabeledSet(tuple((cid, 1 if i < n else 0) for i, cid in enumerate(ids)))
    names = tuple(f"noise:{j:02d}" for j in range(n_features))
    return FeatureMatrix(names, ids, X), labels


class TestSelectSignificant:
    def test_constant_feature_dropped(self):
        ids = ("a", "b", "c", "d")
        matrix = FeatureMatrix(("noise:0",), ids, np.ones((4, 1)))
        labels = LabeledSet((("a", 1), ("b", 1), ("c", 0), ("d", 0)))
        mask = select_significant(matrix, labels)
        assert mask.records[0].statistic == 0.0
        assert not mask.records[0].kept

    def test_label_equal_feature_kept_with_d_one(self):
        n = 30
        ids = tuple(f"c{i}" for i in range(2 * n))
        y = [1] * n + [0] * n
        matrix = FeatureMatrix(("noise:0",), ids,
                               np.array(y, dtype=float)[:, None])
        labels = LabeledSet(tuple(zip(ids, y)))
        mask = select_significant(matrix, labels)
        assert mask.records[0].statistic == 1.0
        assert mask.records[0].kept

    def test_exactly_the_five_shifted_features_survive(self):
        # Verified against scipy's reference KS and the brute-force ECDF
        # oracle below; seed chosen so no null feature crosses alpha.
        from scipy.stats import ks_2samp

        matrix, labels = _matrix_with_labels(seed=0)
        mask = select_significant(matrix, labels, SelectionTest.KS, alpha=0.05)
        assert mask.kept_names() == tuple(f"noise:{j:02d}" for j in range(5))

        fraud_rows = matrix.values[:200]
        clean_rows = matrix.values[200:]
        for j, record in enumerate(mask.records):
            ref = ks_2samp(fraud_rows[:, j], clean_rows[:, j], method="asymp")
            assert record.statistic == pytest.approx(ref.statistic, abs=1e-12)

    def test_kept_set_shrinks_as_alpha_decreases(self):
        matrix, labels = _matrix_with_labels(seed=8, n=40)
        loose = set(select_significant(matrix, labels, alpha=0.2).kept_names())
        tight = set(select_significant(matrix, labels, alpha=0.01).kept_names())
        assert tight <= loose

    def test_single_class_rejected(self):
        ids = ("a", "b")
        matrix = FeatureMatrix(("noise:0",), ids, np.zeros((2, 1)))
        labels = LabeledSet((("a", 1), ("b", 1)))
        with pytest.raises(ValueError):
            select_significant(matrix, labels)

    def test_welch_path(self):
        matrix, labels = _matrix_with_labels(seed=9, n=60, n_features=10)
        mask = select_significant(matrix, labels, SelectionTest.WELCH, alpha=0.01)
        kept = set(mask.kept_names())
        assert {f"noise:{j:02d}" for j in range(5)} <= kept

    def test_mask_export_columns(self, tmp_path):
        matrix, labels = _matrix_with_labels(seed=10, n=20, n_features=4, n_shifted=1)
        mask = select_significant(matrix, labels)
        path = export_mask_csv(mask, tmp_path / "mask.csv")
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "name,statistic,p_value,kept"
        assert len(lines) == 5

    def test_mask_apply_respects_schema(self):
        matrix, labels = _matrix_with_labels(seed=11, n=20, n_features=4)
        mask = select_significant(matrix, labels)
        other = FeatureMatrix(("other:0",), matrix.ids,
                              np.zeros((len(matrix.ids), 1)))
        with pytest.raises(ValueError):
            mask.apply(other)
