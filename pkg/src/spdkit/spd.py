"""Validated SPD matrices, spectral matrix functions and relative spectra."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.linalg import cho_solve, solve_triangular

from .errors import (
    DimensionMismatch,
    InputError,
    NotPositiveDefinite,
    NotSquare,
    NotSymmetric,
    NumericalFailure,
)

DEFAULT_SYM_TOL = 1e-8


def _symmetrize(a):
    return 0.5 * (a + a.T)


@dataclass(frozen=True)
class EigPair:
    """Eigen-decomposition ``S = V diag(values) V^T`` of a symmetric matrix."""

    values: np.ndarray
    vectors: np.ndarray

    def reconstruct(self, f=None):
        w = self.values if f is None else f(self.values)
        return _symmetrize((self.vectors * w) @ self.vectors.T)


def eig_pair(s) -> EigPair:
    s = np.asarray(s, dtype=float)
    w, v = np.linalg.eigh(_symmetrize(s))
    return EigPair(w, v)


class SpdMatrix:
    """Dense symmetric positive definite matrix with a cached Cholesky factor.

    The input is symmetrized as ``(A + A^T) / 2`` before factorization, after
    checking that the asymmetry is within ``sym_tol`` relative to the largest
    entry.  Instances are immutable; ``entries`` and ``chol`` are read-only.

    Parameters
    ----------
    entries : array_like, shape (n, n)
        Matrix entries.  A scalar is accepted as a 1x1 matrix.
    sym_tol : float, default=1e-8
        Relative symmetry tolerance.

    Raises
    ------
    NotSquare, NotSymmetric, NotPositiveDefinite
    """

    __array_priority__ = 10

    def __init__(self, entries, sym_tol: float = DEFAULT_SYM_TOL):
        if sym_tol <= 0:
            raise InputError("sym_tol must be positive")
        a = np.array(entries, dtype=float)
        if a.ndim == 0:
            a = a.reshape(1, 1)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise NotSquare(f"expected a non-empty square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise InputError("matrix has non-finite entries")
        scale = np.max(np.abs(a))
        asym = np.max(np.abs(a - a.T))
        if asym > sym_tol * scale:
            raise NotSymmetric(
                f"asymmetry {asym:.3g} exceeds tolerance {sym_tol:g} * {scale:.3g}"
            )
        self._init_trusted(_symmetrize(a))

    def _init_trusted(self, a):
        try:
            chol = np.linalg.cholesky(a)
        except np.linalg.LinAlgError:
            raise NotPositiveDefinite("Cholesky factorization failed") from None
        if not np.all(np.diag(chol) > 0):
            raise NotPositiveDefinite("Cholesky factor has a non-positive diagonal")
        a.setflags(write=False)
        chol.setflags(write=False)
        self.entries = a
        self.chol = chol

    @classmethod
    def _trusted(cls, a) -> "SpdMatrix":
        # Skips the symmetry check; used for results of our own matrix functions.
        obj = cls.__new__(cls)
        obj._init_trusted(_symmetrize(np.asarray(a, dtype=float)))
        return obj

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @cached_property
    def eig(self) -> EigPair:
        w, v = np.linalg.eigh(self.entries)
        if w[0] <= 0:
            raise NumericalFailure("eigenvalue solver returned a non-positive eigenvalue")
        return EigPair(w, v)

    @cached_property
    def logdet(self) -> float:
        return 2.0 * float(np.sum(np.log(np.diag(self.chol))))

    def solve(self, b):
        """Return ``P^{-1} b`` using the cached Cholesky factor."""
        return cho_solve((self.chol, True), b)

    def inv(self) -> "SpdMatrix":
        return SpdMatrix._trusted(self.solve(np.eye(self.dim)))

    def __array__(self, dtype=None, copy=None):
        return np.array(self.entries, dtype=dtype)

    def __repr__(self):
        return f"SpdMatrix(dim={self.dim})"


def make_spd(entries, sym_tol: float = DEFAULT_SYM_TOL) -> SpdMatrix:
    """Validate ``entries`` and return an :class:`SpdMatrix`."""
    return SpdMatrix(entries, sym_tol)


def as_spd(x) -> SpdMatrix:
    return x if isinstance(x, SpdMatrix) else SpdMatrix(x)


def _check_same_dim(p: SpdMatrix, q: SpdMatrix):
    if p.dim != q.dim:
        raise DimensionMismatch(f"dimensions differ: {p.dim} vs {q.dim}")


@dataclass(frozen=True)
class RelativeSpectrum:
    """Positive eigenvalues of ``P Q^{-1}``, sorted in descending order.

    ``dim`` is the size of the original pair.  After shrinkage or truncation
    the zero eigenvalues are dropped, so ``len(lambdas)`` (the effective
    dimension) may be smaller than ``dim``; ``shrinkage`` names the rule.
    """

    lambdas: np.ndarray
    dim: int
    shrinkage: str | None = None

    @property
    def effective_dim(self) -> int:
        return len(self.lambdas)

    def __len__(self):
        return len(self.lambdas)

    def __array__(self, dtype=None, copy=None):
        return np.array(self.lambdas, dtype=dtype)


def relative_spectrum(p, q) -> RelativeSpectrum:
    """Generalized eigenvalues ``lambda`` of ``P v = lambda Q v``.

    Computed by Cholesky whitening: with ``Q = L L^T`` the symmetric matrix
    ``L^{-1} P L^{-T}`` has the same eigenvalues as ``P Q^{-1}``.
    """
    p, q = as_spd(p), as_spd(q)
    _check_same_dim(p, q)
    x = solve_triangular(q.chol, p.entries, lower=True)
    w = solve_triangular(q.chol, x.T, lower=True)
    lam = np.linalg.eigvalsh(_symmetrize(w))[::-1].copy()
    if not lam[-1] > 0:
        raise NumericalFailure(
            f"relative spectrum has a non-positive eigenvalue ({lam[-1]:.3g}); "
            "the pair is too ill-conditioned"
        )
    lam.setflags(write=False)
    return RelativeSpectrum(lam, p.dim)


def spectrum_array(lambdas) -> np.ndarray:
    """Coerce a spectrum (array or :class:`RelativeSpectrum`) to a 1-D array."""
    lam = np.atleast_1d(np.asarray(lambdas, dtype=float))
    if lam.ndim != 1:
        raise InputError("a spectrum must be one-dimensional")
    return lam


def matrix_power(p, alpha: float) -> SpdMatrix:
    """Spectral power ``P^alpha = V diag(w^alpha) V^T``."""
    p = as_spd(p)
    if alpha == 0:
        return SpdMatrix._trusted(np.eye(p.dim))
    if alpha == 1:
        return p
    return SpdMatrix._trusted(p.eig.reconstruct(lambda w: w**alpha))


def matrix_log(p) -> np.ndarray:
    """Spectral logarithm; symmetric and possibly indefinite."""
    return as_spd(p).eig.reconstruct(np.log)


def sym_expm(s) -> np.ndarray:
    """Spectral exponential of a symmetric matrix."""
    return eig_pair(s).reconstruct(np.exp)


def geometric_mean(p, q, u: float = 0.5) -> SpdMatrix:
    """Weighted geometric mean ``P #_u Q = P^{1/2} (P^{-1/2} Q P^{-1/2})^u P^{1/2}``."""
    p, q = as_spd(p), as_spd(q)
    _check_same_dim(p, q)
    if u == 0:
        return p
    if u == 1:
        return q
    half = p.eig.reconstruct(np.sqrt)
    ihalf = p.eig.reconstruct(lambda w: 1.0 / np.sqrt(w))
    inner = eig_pair(ihalf @ q.entries @ ihalf).reconstruct(lambda w: w**u)
    return SpdMatrix._trusted(half @ inner @ half)


def congruence(p, a) -> SpdMatrix:
    """``A P A^T`` for a nonsingular (or full-row-rank) ``A``."""
    a = np.asarray(a, dtype=float)
    return SpdMatrix._trusted(a @ as_spd(p).entries @ a.T)


def kron(*mats) -> SpdMatrix:
    out = np.ones((1, 1))
    for m in mats:
        out = np.kron(out, as_spd(m).entries)
    return SpdMatrix._trusted(out)


def trace_ratio(p, q) -> float:
    """``tr(P Q^{-1})`` without forming the inverse."""
    p, q = as_spd(p), as_spd(q)
    _check_same_dim(p, q)
    return float(np.trace(q.solve(p.entries)))
