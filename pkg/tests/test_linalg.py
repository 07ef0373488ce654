import numpy as np
import pytest

from synstyle.errors import ValidationError
from synstyle.linalg import (
    GaussianStats,
    psd_power,
    region_stats,
    sym_eig,
    trace_sqrt_product,
)

from helpers import random_psd


def oracle_trace_sqrt(a: np.ndarray, b: np.ndarray) -> float:
    """Independent route: general (non-symmetric) eigensolver on A @ B."""
    eigvals = np.linalg.eigvals(a @ b)
    return float(np.sum(np.sqrt(np.maximum(eigvals.real, 0.0))))


class TestRegionStats:
    def test_two_point_example(self):
        stats = region_stats([(1.0, 2.0), (3.0, 4.0)])
        assert np.allclose(stats.mean, [2.0, 3.0])
        assert np.allclose(stats.cov, [[1.0, 1.0], [1.0, 1.0]])
        assert stats.count == 2

    def test_axis_aligned_example(self):
        stats = region_stats([(0.0, 0.0), (2.0, 0.0)])
        assert np.allclose(stats.cov, [[1.0, 0.0], [0.0, 0.0]])

    def test_empty_sentinel(self):
        stats = region_stats(np.empty((0, 3)))
        assert stats.count == 0
        assert np.array_equal(stats.mean, np.zeros(3))
        assert np.array_equal(stats.cov, np.zeros((3, 3)))

    def test_single_sample_zero_cov(self):
        stats = region_stats([(5.0, -1.0, 2.0)])
        assert stats.count == 1
        assert np.allclose(stats.mean, [5.0, -1.0, 2.0])
        assert np.array_equal(stats.cov, np.zeros((3, 3)))

    def test_population_convention(self):
        # explicit 1/n loop as the oracle
        rng = np.random.default_rng(0)
        x = rng.normal(size=(17, 3))
        stats = region_stats(x)
        mean = x.sum(axis=0) / 17
        cov = np.zeros((3, 3))
        for row in x:
            d = row - mean
            cov += np.outer(d, d)
        cov /= 17
        assert np.allclose(stats.mean, mean, atol=1e-12)
        assert np.allclose(stats.cov, cov, atol=1e-12)

    def test_permutation_invariance(self):
        rng = np.random.default_rng(1)
        x = rng.normal(size=(40, 4))
        a = region_stats(x)
        b = region_stats(x[rng.permutation(40)])
        assert np.allclose(a.mean, b.mean, atol=1e-12)
        assert np.allclose(a.cov, b.cov, atol=1e-12)

    def test_cov_is_psd_and_symmetric(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            x = rng.normal(size=(rng.integers(2, 30), 3)) * rng.uniform(0.1, 5)
            cov = region_stats(x).cov
            assert np.array_equal(cov, cov.T)
            assert np.linalg.eigvalsh(cov).min() >= -1e-12

    def test_ragged_input_rejected(self):
        with pytest.raises(ValidationError, match="inconsistent"):
            region_stats([(1.0, 2.0), (1.0, 2.0, 3.0)])


class TestSymEig:
    def test_identity(self):
        eig = sym_eig(np.eye(3))
        assert np.allclose(eig.eigenvalues, [1.0, 1.0, 1.0])

    def test_diagonal_descending(self):
        eig = sym_eig(np.diag([4.0, 1.0]))
        assert np.allclose(eig.eigenvalues, [4.0, 1.0])
        assert np.allclose(np.abs(eig.eigenvectors[:, 0]), [1.0, 0.0])
        assert np.allclose(np.abs(eig.eigenvectors[:, 1]), [0.0, 1.0])

    def test_2x2_example(self):
        eig = sym_eig(np.array([[2.0, 1.0], [1.0, 2.0]]))
        assert np.allclose(eig.eigenvalues, [3.0, 1.0])
        h = 1 / np.sqrt(2)
        v0, v1 = eig.eigenvectors[:, 0], eig.eigenvectors[:, 1]
        assert abs(abs(v0 @ np.array([h, h])) - 1) < 1e-12
        assert abs(abs(v1 @ np.array([h, -h])) - 1) < 1e-12

    def test_reconstruction_and_orthogonality(self):
        rng = np.random.default_rng(3)
        for _ in range(25):
            n = int(rng.integers(2, 9))
            m = rng.normal(size=(n, n))
            m = (m + m.T) / 2
            eig = sym_eig(m)
            rebuilt = eig.eigenvectors @ np.diag(eig.eigenvalues) @ eig.eigenvectors.T
            assert np.max(np.abs(rebuilt - m)) <= 1e-8
            gram = eig.eigenvectors.T @ eig.eigenvectors
            assert np.max(np.abs(gram - np.eye(n))) <= 1e-8
            assert np.all(np.diff(eig.eigenvalues) <= 1e-12)

    def test_non_symmetric_rejected(self):
        with pytest.raises(ValidationError, match="symmetric"):
            sym_eig(np.array([[1.0, 2.0], [0.0, 1.0]]))

    def test_non_finite_rejected(self):
        with pytest.raises(ValidationError, match="finite"):
            sym_eig(np.array([[np.nan, 0.0], [0.0, 1.0]]))


class TestPsdPower:
    def test_sqrt_diagonal(self):
        assert np.allclose(psd_power(np.diag([4.0, 9.0]), 0.5), np.diag([2.0, 3.0]))

    def test_inverse_sqrt_diagonal(self):
        assert np.allclose(psd_power(np.array([[4.0]]), -0.5), [[0.5]])

    def test_zero_matrix_clamp_path(self):
        out = psd_power(np.zeros((2, 2)), -0.5)
        assert np.allclose(out, np.eye(2) * 1e4)

    def test_sqrt_squares_back(self):
        rng = np.random.default_rng(4)
        for _ in range(15):
            m = random_psd(rng, int(rng.integers(2, 7)))
            root = psd_power(m, 0.5)
            assert np.allclose(root @ root, m, atol=1e-10)

    def test_inverse_sqrt_inverts(self):
        rng = np.random.default_rng(5)
        m = random_psd(rng, 4) + np.eye(4)  # well conditioned
        inv_root = psd_power(m, -0.5)
        assert np.allclose(inv_root @ m @ inv_root, np.eye(4), atol=1e-9)

    def test_other_powers_rejected(self):
        with pytest.raises(ValidationError, match="power"):
            psd_power(np.eye(2), 0.25)


class TestTraceSqrtProduct:
    def test_identity_pair(self):
        assert trace_sqrt_product(np.eye(3), np.eye(3)) == pytest.approx(3.0, abs=1e-12)

    def test_diagonal_with_identity(self):
        assert trace_sqrt_product(np.diag([4.0, 9.0]), np.eye(2)) == pytest.approx(5.0, abs=1e-12)

    def test_equal_arguments_give_trace(self):
        a = np.array([[2.0, 1.0], [1.0, 2.0]])
        assert trace_sqrt_product(a, a) == pytest.approx(np.trace(a), abs=1e-10)

    def test_against_general_eig_oracle(self):
        rng = np.random.default_rng(6)
        for _ in range(100):
            a = random_psd(rng, 3, scale=rng.uniform(0.1, 3))
            b = random_psd(rng, 3, scale=rng.uniform(0.1, 3))
            assert trace_sqrt_product(a, b) == pytest.approx(oracle_trace_sqrt(a, b), abs=1e-6)

    def test_symmetry(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            a = random_psd(rng, 4)
            b = random_psd(rng, 4)
            assert trace_sqrt_product(a, b) == pytest.approx(trace_sqrt_product(b, a), abs=1e-8)

    def test_dimension_mismatch(self):
        with pytest.raises(ValidationError, match="mismatch"):
            trace_sqrt_product(np.eye(2), np.eye(3))


class TestGaussianStats:
    def test_symmetrizes_on_construction(self):
        stats = GaussianStats(mean=np.zeros(2), cov=np.array([[1.0, 2e-13], [0.0, 1.0]]), count=5)
        assert np.array_equal(stats.cov, stats.cov.T)

    def test_shape_mismatch(self):
        with pytest.raises(ValidationError):
            GaussianStats(mean=np.zeros(2), cov=np.zeros((3, 3)), count=1)
