import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from drumsynth.metrics import (
    GaussianStats,
    fad,
    frechet_distance,
    imq_kernel,
    inception_score,
    kid,
    sqrtm_psd,
)


class TestInceptionScore:
    def test_uniform_rows_give_one(self):
        probs = np.full((50, 3), 1.0 / 3.0)
        assert inception_score(probs) == pytest.approx(1.0, abs=1e-6)

    def test_balanced_one_hot_gives_class_count(self):
        probs = np.eye(3)
        assert inception_score(probs) == pytest.approx(3.0, abs=1e-6)

    def test_single_class_collapse_gives_one(self):
        probs = np.tile([1.0, 0.0, 0.0], (20, 1))
        assert inception_score(probs) == pytest.approx(1.0, abs=1e-6)

    def test_row_sum_violation_rejected(self):
        with pytest.raises(ValueError, match="sum to 1"):
            inception_score(np.full((4, 3), 0.5))

    def test_negative_prob_rejected(self):
        with pytest.raises(ValueError, match="non-negative"):
            inception_score(np.array([[1.2, -0.2, 0.0]]))

    def test_empty_rejected(self):
        with pytest.raises(ValueError, match="non-empty"):
            inception_score(np.zeros((0, 3)))

    @given(
        arrays(
            np.float64,
            st.tuples(st.integers(1, 30), st.just(3)),
            elements=st.floats(1e-3, 1.0),
        )
    )
    @settings(max_examples=30, deadline=None)
    def test_bounded_by_class_count(self, raw):
        probs = raw / raw.sum(axis=1, keepdims=True)
        score = inception_score(probs)
        assert 1.0 - 1e-9 <= score <= 3.0 + 1e-9


class TestGaussianStats:
    def test_fit_is_unbiased(self):
        stats = GaussianStats.fit(np.array([[0.0], [2.0]]))
        assert stats.mu == pytest.approx(np.array([1.0]))
        assert stats.sigma[0, 0] == pytest.approx(2.0, abs=1e-12)

    def test_fit_needs_two_rows(self):
        with pytest.raises(ValueError, match="at least 2"):
            GaussianStats.fit(np.ones((1, 4)))

    def test_rank_deficient_fit_warns(self, caplog):
        rng = np.random.default_rng(0)
        with caplog.at_level("WARNING"):
            GaussianStats.fit(rng.standard_normal((5, 8)))
        assert any("rank-deficient" in r.message for r in caplog.records)

    def test_asymmetric_sigma_rejected(self):
        with pytest.raises(ValueError, match="symmetric"):
            GaussianStats(np.zeros(2), np.array([[1.0, 0.5], [0.0, 1.0]]))

    def test_non_psd_rejected(self):
        with pytest.raises(ValueError, match="positive semidefinite"):
            GaussianStats(np.zeros(1), np.array([[-1.0]]))

    def test_dim_property(self):
        assert GaussianStats(np.zeros(3), np.eye(3)).dim == 3


class TestSqrtmPsd:
    def test_squares_back_on_random_psd(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            d = int(rng.integers(1, 65))
            a = rng.standard_normal((d, d))
            mat = a @ a.T
            root = sqrtm_psd(mat)
            err = np.linalg.norm(root @ root - mat) / np.linalg.norm(mat)
            assert err < 1e-6
            assert np.allclose(root, root.T, atol=1e-10)

    def test_diagonal_case(self):
        root = sqrtm_psd(np.diag([4.0, 9.0]))
        assert root == pytest.approx(np.diag([2.0, 3.0]), abs=1e-12)

    def test_negative_eigenvalues_clamped(self):
        root = sqrtm_psd(np.array([[-1e-12]]))
        assert root[0, 0] == 0.0

    def test_non_square_rejected(self):
        with pytest.raises(ValueError, match="square"):
            sqrtm_psd(np.zeros((2, 3)))


class TestFrechetDistance:
    def test_identical_stats_give_zero(self):
        rng = np.random.default_rng(3)
        a = GaussianStats.fit(rng.standard_normal((200, 8)))
        assert frechet_distance(a, a) == pytest.approx(0.0, abs=1e-6)

    def test_scalar_mean_shift(self):
        a = GaussianStats(np.array([0.0]), np.array([[1.0]]))
        b = GaussianStats(np.array([1.0]), np.array([[1.0]]))
        assert frechet_distance(a, b) == pytest.approx(1.0, abs=1e-9)

    def test_scalar_variance_gap(self):
        # 1 + 4 - 2*sqrt(4) = 1
        a = GaussianStats(np.array([0.5]), np.array([[1.0]]))
        b = GaussianStats(np.array([0.5]), np.array([[4.0]]))
        assert frechet_distance(a, b) == pytest.approx(1.0, abs=1e-9)

    def test_symmetric(self):
        rng = np.random.default_rng(5)
        a = GaussianStats.fit(rng.standard_normal((300, 6)))
        b = GaussianStats.fit(rng.standard_normal((300, 6)) * 2.0 + 1.0)
        assert frechet_distance(a, b) == pytest.approx(frechet_distance(b, a), abs=1e-8)

    def test_dim_mismatch_rejected(self):
        a = GaussianStats(np.zeros(2), np.eye(2))
        b = GaussianStats(np.zeros(3), np.eye(3))
        with pytest.raises(ValueError, match="mismatch"):
            frechet_distance(a, b)


class TestFad:
    def test_same_distribution_is_small(self):
        rng = np.random.default_rng(3)
        draws = rng.standard_normal((4000, 16))
        assert fad(draws[:2000], draws[2000:]) < 0.1

    def test_mean_shift_dominates(self):
        rng = np.random.default_rng(13)
        real = rng.standard_normal((2000, 16))
        gen = rng.standard_normal((2000, 16)) + 10.0
        expected = 16 * 100.0
        assert fad(real, gen) == pytest.approx(expected, rel=0.05)

    def test_tiny_sets_rejected(self):
        with pytest.raises(ValueError, match="at least 2"):
            fad(np.ones((1, 4)), np.ones((10, 4)))


class TestImqKernel:
    def test_coincident_points(self):
        x = np.arange(5.0)
        assert imq_kernel(x, x) == 1.0

    def test_known_distance(self):
        x = np.zeros(4)
        y = np.array([4.0, 0.0, 0.0, 0.0])
        assert imq_kernel(x, y) == pytest.approx(0.5, abs=1e-12)

    @given(
        arrays(np.float64, 6, elements=st.floats(-20, 20)),
        arrays(np.float64, 6, elements=st.floats(-20, 20)),
    )
    @settings(max_examples=40, deadline=None)
    def test_symmetric_and_bounded(self, x, y):
        k = imq_kernel(x, y)
        assert k == imq_kernel(y, x)
        assert 0.0 < k <= 1.0

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError, match="finite"):
            imq_kernel(np.array([np.nan]), np.array([0.0]))


class TestKid:
    def test_two_point_hand_value(self):
        # X = Y = {a, b} with ||a-b||^2 = 16: estimator reduces to k(a,b) - 1
        x = np.array([[0.0], [4.0]])
        assert kid(x, x.copy()) == pytest.approx(-0.5, abs=1e-9)

    def test_same_gaussian_near_zero(self):
        rng = np.random.default_rng(17)
        x = rng.standard_normal((2000, 16))
        y = rng.standard_normal((2000, 16))
        assert abs(kid(x, y)) < 0.01

    def test_symmetric(self):
        rng = np.random.default_rng(19)
        x = rng.standard_normal((40, 5))
        y = rng.standard_normal((60, 5)) + 0.5
        assert kid(x, y) == pytest.approx(kid(y, x), abs=1e-12)

    def test_row_permutation_invariant(self):
        rng = np.random.default_rng(23)
        x = rng.standard_normal((30, 4))
        y = rng.standard_normal((25, 4))
        perm_x = x[rng.permutation(30)]
        perm_y = y[rng.permutation(25)]
        assert kid(perm_x, perm_y) == pytest.approx(kid(x, y), abs=1e-12)

    def test_separated_clusters_positive(self):
        rng = np.random.default_rng(29)
        x = rng.standard_normal((100, 3))
        y = rng.standard_normal((100, 3)) + 8.0
        assert kid(x, y) > 0.5

    def test_small_sets_rejected(self):
        with pytest.raises(ValueError, match="at least 2"):
            kid(np.ones((1, 3)), np.ones((5, 3)))

    def test_dim_mismatch_rejected(self):
        with pytest.raises(ValueError, match="embeddings"):
            kid(np.ones((5, 3)), np.ones((5, 4)))
