import numpy as np
import pytest
from scipy.linalg import eig, expm

from _gen import random_pair, random_spd
from spdkit import spd
from spdkit.errors import DimensionMismatch, NotPositiveDefinite, NotSquare, NotSymmetric
from spdkit.spd import (
    SpdMatrix,
    eig_pair,
    geometric_mean,
    kron,
    make_spd,
    matrix_log,
    matrix_power,
    relative_spectrum,
)


class TestMakeSpd:
    def test_scalar(self):
        m = make_spd([[4.0]])
        assert m.chol[0, 0] == pytest.approx(2.0)

    def test_identity(self):
        m = make_spd(np.eye(2))
        np.testing.assert_array_equal(m.chol, np.eye(2))

    def test_indefinite(self):
        with pytest.raises(NotPositiveDefinite):
            make_spd([[1.0, 2.0], [2.0, 1.0]])

    def test_not_square(self):
        with pytest.raises(NotSquare):
            make_spd(np.ones((2, 3)))

    def test_asymmetric(self):
        with pytest.raises(NotSymmetric):
            make_spd([[2.0, 1.0], [0.0, 2.0]])

    def test_small_asymmetry_is_symmetrized(self):
        a = np.array([[2.0, 1.0], [1.0 + 1e-10, 2.0]])
        m = make_spd(a)
        assert m.entries[0, 1] == m.entries[1, 0]

    def test_tolerance_is_relative(self):
        a = 1e6 * np.array([[2.0, 1.0], [1.0 + 1e-10, 2.0]])
        make_spd(a)
        with pytest.raises(NotSymmetric):
            make_spd(a, sym_tol=1e-12)

    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError):
            make_spd([[np.nan]])

    def test_read_only(self):
        m = make_spd(np.eye(2))
        with pytest.raises(ValueError):
            m.entries[0, 0] = 5.0

    def test_reconstruction(self, rng):
        for n in (1, 3, 8):
            a = random_spd(rng, n, cond=1e4)
            m = make_spd(a)
            err = np.linalg.norm(m.chol @ m.chol.T - m.entries)
            assert err <= 1e-10 * np.linalg.norm(m.entries)


class TestRelativeSpectrum:
    def test_equal_pair(self, rng):
        p = random_spd(rng, 4)
        np.testing.assert_allclose(relative_spectrum(p, p).lambdas, 1.0, atol=1e-10)

    def test_diagonal(self):
        lam = relative_spectrum(np.diag([2.0, 0.5]), np.eye(2)).lambdas
        np.testing.assert_allclose(lam, [2.0, 0.5])

    def test_against_nonsymmetric_solver(self):
        p = np.array([[2.0, 1.0], [1.0, 2.0]])
        q = np.array([[1.0, 0.0], [0.0, 4.0]])
        oracle = np.sort(np.real(eig(np.linalg.solve(q, p))[0]))[::-1]
        np.testing.assert_allclose(relative_spectrum(p, q).lambdas, oracle, rtol=1e-12)

    def test_random_against_nonsymmetric_solver(self, rng):
        for n in (2, 3, 5):
            p, q = random_pair(rng, n, cond=100)
            oracle = np.sort(np.real(eig(p @ np.linalg.inv(q))[0]))[::-1]
            np.testing.assert_allclose(relative_spectrum(p, q).lambdas, oracle, rtol=1e-9)

    def test_sorted_positive(self, rng):
        p, q = random_pair(rng, 6, cond=1e3)
        lam = relative_spectrum(p, q).lambdas
        assert np.all(lam > 0)
        assert np.all(np.diff(lam) <= 0)

    def test_determinant_ratio(self, rng):
        p, q = random_pair(rng, 5, cond=100)
        lam = relative_spectrum(p, q).lambdas
        ratio = np.linalg.det(p) / np.linalg.det(q)
        assert np.prod(lam) == pytest.approx(ratio, rel=1e-8)

    def test_swapping_inverts(self, rng):
        p, q = random_pair(rng, 5, cond=100)
        a = relative_spectrum(p, q).lambdas
        b = relative_spectrum(q, p).lambdas
        np.testing.assert_allclose(np.sort(a), np.sort(1.0 / b), rtol=1e-8)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            relative_spectrum(np.eye(2), np.eye(3))

    def test_metadata(self):
        rs = relative_spectrum(np.eye(3), np.eye(3))
        assert rs.dim == 3 and rs.effective_dim == 3 and rs.shrinkage is None


class TestMatrixFunctions:
    def test_power_identity(self):
        np.testing.assert_allclose(matrix_power(np.eye(3), 2.7).entries, np.eye(3))

    def test_power_scalar(self):
        assert matrix_power([[4.0]], 0.5).entries[0, 0] == pytest.approx(2.0)

    def test_power_zero_one(self, rng):
        p = make_spd(random_spd(rng, 3))
        np.testing.assert_array_equal(matrix_power(p, 0).entries, np.eye(3))
        assert matrix_power(p, 1) is p

    def test_power_additivity(self, rng):
        p = random_spd(rng, 4)
        lhs = matrix_power(p, 0.7 + 1.6).entries
        rhs = matrix_power(p, 0.7).entries @ matrix_power(p, 1.6).entries
        np.testing.assert_allclose(lhs, rhs, rtol=1e-9, atol=1e-9 * np.abs(lhs).max())

    @pytest.mark.parametrize("alpha", [-2.0, -0.5, 0.5, 2.0])
    def test_det_of_power(self, rng, alpha):
        p = random_spd(rng, 4)
        assert np.linalg.det(matrix_power(p, alpha).entries) == pytest.approx(
            np.linalg.det(p) ** alpha, rel=1e-8
        )

    def test_trace_of_power(self, rng):
        p = random_spd(rng, 5)
        w = np.linalg.eigvalsh(p)
        assert np.trace(matrix_power(p, 1.3).entries) == pytest.approx(np.sum(w**1.3), rel=1e-9)

    def test_log_identity(self):
        np.testing.assert_allclose(matrix_log(np.eye(3)), 0.0, atol=1e-15)

    def test_log_diagonal(self):
        np.testing.assert_allclose(matrix_log(np.diag([np.e, np.e**2])), np.diag([1.0, 2.0]), atol=1e-14)

    def test_log_trace_is_logdet(self, rng):
        p = make_spd(random_spd(rng, 5))
        assert np.trace(matrix_log(p)) == pytest.approx(p.logdet, rel=1e-9)

    def test_log_inverts_expm(self, rng):
        p = random_spd(rng, 4)
        np.testing.assert_allclose(expm(matrix_log(p)), p, rtol=1e-8, atol=1e-8 * np.abs(p).max())

    def test_trace_minus_logdet(self, rng):
        for n in (1, 2, 5):
            p = make_spd(random_spd(rng, n))
            assert np.trace(p.entries) - p.logdet >= n

    def test_kron_logdet(self, rng):
        n = 3
        p, q = random_pair(rng, n)
        k = kron(p, q)
        assert k.logdet == pytest.approx(n * make_spd(p).logdet + n * make_spd(q).logdet, rel=1e-10, abs=1e-10)

    def test_eig_pair(self, rng):
        s = random_spd(rng, 5) - 2.0 * np.eye(5)  # indefinite is fine
        e = eig_pair(s)
        assert np.linalg.norm(e.reconstruct() - s) <= 1e-9 * np.linalg.norm(s)
        assert np.linalg.norm(e.vectors.T @ e.vectors - np.eye(5)) <= 1e-10


class TestGeometricMean:
    def test_endpoints(self, rng):
        p, q = random_pair(rng, 3)
        np.testing.assert_array_equal(geometric_mean(p, q, 0).entries, make_spd(p).entries)
        np.testing.assert_array_equal(geometric_mean(p, q, 1).entries, make_spd(q).entries)

    def test_scalar(self):
        assert geometric_mean([[4.0]], [[1.0]], 0.5).entries[0, 0] == pytest.approx(2.0)

    def test_midpoint_symmetry(self, rng):
        p, q = random_pair(rng, 4)
        np.testing.assert_allclose(geometric_mean(p, q).entries, geometric_mean(q, p).entries, rtol=1e-9, atol=1e-9)

    def test_riccati(self, rng):
        # G = P # Q solves G P^-1 G = Q.
        p, q = random_pair(rng, 4)
        g = geometric_mean(p, q).entries
        np.testing.assert_allclose(g @ np.linalg.solve(p, g), q, rtol=1e-8, atol=1e-8)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            geometric_mean(np.eye(2), np.eye(3))


def test_trusted_constructor_symmetrizes():
    m = SpdMatrix._trusted(np.array([[2.0, 1.0], [1.0 + 1e-3, 2.0]]))
    assert m.entries[0, 1] == m.entries[1, 0]


def test_trace_ratio(rng):
    p, q = random_pair(rng, 3)
    assert spd.trace_ratio(p, q) == pytest.approx(np.trace(p @ np.linalg.inv(q)), rel=1e-10)
