"""Symmetrized AB log-det divergences."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .abld import AbParams, DivergenceValue, Regime, ab_logdet
from .errors import InvalidParams
from .spd import _check_same_dim, as_spd, relative_spectrum, spectrum_array


class SymKind(enum.Enum):
    TYPE1 = "type1"
    TYPE2 = "type2"


@dataclass(frozen=True)
class SymmetrizedParams:
    alpha: float
    beta: float
    kind: SymKind = SymKind.TYPE1

    @property
    def base(self) -> AbParams:
        return AbParams(self.alpha, self.beta)


def _mean(d1: DivergenceValue, d2: DivergenceValue) -> DivergenceValue:
    if not (d1.finite and d2.finite):
        return DivergenceValue(np.inf, False)
    return DivergenceValue(0.5 * (d1.value + d2.value), True)


def sym_ab_logdet(p, q, alpha: float, beta: float, kind="type1") -> DivergenceValue:
    """Symmetrized AB log-det divergence.

    Type 1 averages both directions, ``(D(P||Q) + D(Q||P)) / 2``.  Type 2
    measures both arguments against their arithmetic mean,
    ``(D(P||M) + D(Q||M)) / 2`` with ``M = (P + Q) / 2``.  The result is
    infinite whenever one directed divergence is.
    """
    kind = SymKind(kind)
    p, q = as_spd(p), as_spd(q)
    _check_same_dim(p, q)
    if kind is SymKind.TYPE1:
        return _mean(ab_logdet(p, q, alpha, beta), ab_logdet(q, p, alpha, beta))
    m = as_spd(0.5 * (p.entries + q.entries))
    return _mean(ab_logdet(p, m, alpha, beta), ab_logdet(q, m, alpha, beta))


def sym_type1_terms(lambdas, alpha: float, beta: float) -> np.ndarray:
    """Per-eigenvalue terms of the closed-form Type 1 divergence.

    The generic row only applies to same-sign parameters; for opposite signs
    the product form hides the truncation of each direction, so it is
    rejected.
    """
    lam = spectrum_array(lambdas)
    logl = np.log(lam)
    a, b = float(alpha), float(beta)
    regime = AbParams(a, b).regime
    if regime is Regime.BOTH_ZERO:
        return 0.5 * logl**2
    if regime in (Regime.ALPHA_ZERO, Regime.BETA_ZERO):
        k = a if regime is Regime.BETA_ZERO else b
        # (l^k + l^-k - 2) / (2 k^2) = 2 sinh^2(k log l / 2) / k^2
        return 2.0 * np.sinh(0.5 * k * logl) ** 2 / k**2
    if regime is Regime.ALPHA_EQUALS_MINUS_BETA:
        x = a * logl
        t = np.full(lam.shape, np.inf)
        ok = np.abs(x) < 1.0
        t[ok] = -np.log1p(-x[ok] ** 2) / (2.0 * a**2)
        return t
    if a * b < 0:
        raise InvalidParams("the Type 1 closed form needs same-sign alpha and beta")
    s = a + b
    c = 4.0 * np.sinh(0.5 * s * logl) ** 2  # l^s + l^-s - 2
    return np.log1p(a * b / s**2 * c) / (2.0 * a * b)


def sym_ab_logdet_closed(p, q, alpha: float, beta: float) -> DivergenceValue:
    """Type 1 symmetrized divergence from its eigenvalue closed form."""
    t = sym_type1_terms(relative_spectrum(p, q).lambdas, alpha, beta)
    finite = bool(np.all(np.isfinite(t)))
    return DivergenceValue(float(np.sum(t)) if finite else np.inf, finite)


def jeffreys_kldm(p, q) -> float:
    """Jeffreys KL divergence (symmetric Stein's loss)
    ``1/2 sum (sqrt l - 1/sqrt l)^2``."""
    lam = relative_spectrum(p, q).lambdas
    r = np.sqrt(lam)
    return float(0.5 * np.sum((r - 1.0 / r) ** 2))


def jeffreys_kldm_trace(p, q) -> float:
    """Trace form ``1/2 tr(PQ^-1 + QP^-1) - n``."""
    p, q = as_spd(p), as_spd(q)
    _check_same_dim(p, q)
    return float(0.5 * (np.trace(q.solve(p.entries)) + np.trace(p.solve(q.entries))) - p.dim)
