"""Divergences between Kronecker-structured covariances ``sigma2 * (P_1 x ... x P_K)``.

Eigenvalues of a Kronecker product are products of factor eigenvalues, so
each divergence reduces to small per-factor problems.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidParams, NotNormalized, ShapeMismatch, TooLarge
from .spd import SpdMatrix, as_spd, kron, relative_spectrum
from .spectral_gamma import hilbert_metric

DEFAULT_EXPAND_CAP = 4096
UNIT_DET_TOL = 1e-6


@dataclass(frozen=True)
class KroneckerSpd:
    """Separable covariance ``sigma2 * (factors[0] x factors[1] x ...)``."""

    sigma2: float
    factors: tuple

    def __init__(self, sigma2: float, factors: Sequence):
        sigma2 = float(sigma2)
        if not (sigma2 > 0 and math.isfinite(sigma2)):
            raise InvalidParams("sigma2 must be a positive finite number")
        if len(factors) == 0:
            raise InvalidParams("a Kronecker model needs at least one factor")
        object.__setattr__(self, "sigma2", sigma2)
        object.__setattr__(self, "factors", tuple(as_spd(f) for f in factors))

    @property
    def shape(self) -> tuple:
        return tuple(f.dim for f in self.factors)

    @property
    def dim(self) -> int:
        return math.prod(self.shape)

    @property
    def normalized(self) -> bool:
        return all(abs(math.exp(f.logdet) - 1.0) <= 1e-8 for f in self.factors)


def _matching(p: KroneckerSpd, q: KroneckerSpd):
    if p.shape != q.shape:
        raise ShapeMismatch(f"factor shapes differ: {p.shape} vs {q.shape}")


def normalize_factors(m: KroneckerSpd) -> KroneckerSpd:
    """Rescale each factor to unit determinant and fold the scales into sigma2."""
    factors = []
    log_scale = math.log(m.sigma2)
    for f in m.factors:
        c = f.logdet / f.dim  # log det^(1/n_k)
        factors.append(SpdMatrix._trusted(f.entries * math.exp(-c)))
        log_scale += c
    return KroneckerSpd(math.exp(log_scale), factors)


def expand_kronecker(m: KroneckerSpd, cap: int = DEFAULT_EXPAND_CAP) -> SpdMatrix:
    """Dense ``sigma2 * (P_1 x ... x P_K)``; refuses models larger than ``cap``."""
    if m.dim > cap:
        raise TooLarge(f"expanded size {m.dim} exceeds the cap {cap}")
    k = kron(*m.factors)
    return SpdMatrix._trusted(m.sigma2 * k.entries)


def kronecker_spectrum(p: KroneckerSpd, q: KroneckerSpd) -> np.ndarray:
    """Relative spectrum of the expanded pair, assembled from factor spectra.

    Entries come out in Kronecker order, not sorted.
    """
    _matching(p, q)
    lam = np.array([p.sigma2 / q.sigma2])
    for pf, qf in zip(p.factors, q.factors):
        lam = np.kron(lam, relative_spectrum(pf, qf).lambdas)
    return lam


def multiway_hilbert(p: KroneckerSpd, q: KroneckerSpd, shrink=None) -> float:
    """Sum of per-factor Hilbert metrics; the scales play no role."""
    _matching(p, q)
    return float(sum(hilbert_metric(pf, qf, shrink) for pf, qf in zip(p.factors, q.factors)))


def multiway_stein(q: KroneckerSpd, p: KroneckerSpd) -> float:
    """Multiway Stein's loss ``tr(P Q^-1) - log det(P Q^-1) - N`` of the expanded pair.

    Note the argument order: the first argument is the reference ``Q``.
    Evaluated as ``r prod_k tr(P_k Q_k^-1) - sum_k (N/n_k) log det(P_k Q_k^-1)
    - N log r - N`` with ``r = sigma2_P / sigma2_Q``; factors need not be
    normalized.
    """
    _matching(p, q)
    n_total = p.dim
    log_r = math.log(p.sigma2) - math.log(q.sigma2)
    log_tr = log_r
    logdet_sum = 0.0
    for pf, qf in zip(p.factors, q.factors):
        log_tr += math.log(float(np.trace(qf.solve(pf.entries))))
        logdet_sum += (n_total / pf.dim) * (pf.logdet - qf.logdet)
    value = math.exp(log_tr) - logdet_sum - n_total * log_r - n_total
    return max(value, 0.0)


def multiway_riemannian_sq(p: KroneckerSpd, q: KroneckerSpd) -> float:
    """Squared Riemannian distance between models with unit-determinant factors.

    ``N log^2(sigma2_P/sigma2_Q) + sum_k (N/n_k) d_R^2(P_k, Q_k)``.  The
    formula needs every factor to have unit determinant; call
    :func:`normalize_factors` first.

    Raises
    ------
    NotNormalized
    """
    _matching(p, q)
    for m in (p, q):
        for f in m.factors:
            if abs(math.exp(f.logdet) - 1.0) > UNIT_DET_TOL:
                raise NotNormalized(
                    f"factor determinant {math.exp(f.logdet):.6g} is not 1; normalize first"
                )
    n_total = p.dim
    value = n_total * (math.log(p.sigma2) - math.log(q.sigma2)) ** 2
    for pf, qf in zip(p.factors, q.factors):
        logl = np.log(relative_spectrum(pf, qf).lambdas)
        value += (n_total / pf.dim) * float(np.sum(logl**2))
    return value
