"""Alpha-Beta log-det divergence over the whole (alpha, beta) plane.

Every value is a sum of per-eigenvalue terms of the relative spectrum
``lambda_i`` of ``P Q^{-1}``.  The five parameter regimes are

* generic:      1/(ab) * log[(a l^b + b l^-a) / (a + b)]_+
* beta = 0:     1/a^2 * (l^-a - log l^-a - 1)
* alpha = 0:    1/b^2 * (l^b - log l^b - 1)
* alpha = -beta: 1/a^2 * log[l^a / (1 + log l^a)]_+
* both zero:    1/2 * log^2 l

A non-positive logarithm argument makes the divergence ``+inf``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.linalg import fractional_matrix_power

from .errors import DimensionMismatch, InvalidParams
from .spd import _check_same_dim, as_spd, relative_spectrum, spectrum_array


class Regime(enum.Enum):
    GENERIC = "generic"
    ALPHA_ZERO = "alpha_zero"
    BETA_ZERO = "beta_zero"
    ALPHA_EQUALS_MINUS_BETA = "alpha_equals_minus_beta"
    BOTH_ZERO = "both_zero"


@dataclass(frozen=True)
class AbParams:
    alpha: float
    beta: float

    @property
    def regime(self) -> Regime:
        # Exact comparisons on purpose: near-singular parameters go through
        # the generic formula.
        a, b = self.alpha, self.beta
        if a == 0 and b == 0:
            return Regime.BOTH_ZERO
        if a == 0:
            return Regime.ALPHA_ZERO
        if b == 0:
            return Regime.BETA_ZERO
        if a == -b:
            return Regime.ALPHA_EQUALS_MINUS_BETA
        return Regime.GENERIC


@dataclass(frozen=True)
class DivergenceValue:
    """A non-negative extended real.

    ``terms`` holds the per-eigenvalue contributions when requested; entries
    equal to ``inf`` mark eigenvalues outside the finite domain.
    """

    value: float
    finite: bool
    terms: np.ndarray | None = None

    def __float__(self):
        return self.value


# Beyond this |exponent| the expm1/log1p path risks overflow.
_NEAR_LIMIT = 30.0


def _generic_log_arg(logl, a, b):
    """log of (a l^b + b l^-a)/(a+b); nan where the argument is <= 0."""
    s = a + b
    x, y = b * logl, -a * logl
    near = (np.abs(x) <= _NEAR_LIMIT) & (np.abs(y) <= _NEAR_LIMIT)
    out = np.full(logl.shape, np.nan)
    with np.errstate(all="ignore"):
        if np.any(near):
            xn, yn = x[near], y[near]
            arg_m1 = (a * np.expm1(xn) + b * np.expm1(yn)) / s
            out[near] = np.where(arg_m1 > -1.0, np.log1p(arg_m1), np.nan)
        far = ~near
        if np.any(far):
            u = np.log(abs(a)) + x[far]
            v = np.log(abs(b)) + y[far]
            if np.sign(a) == np.sign(b):
                mag, sign = np.logaddexp(u, v), np.sign(a)
            else:
                hi, lo = np.maximum(u, v), np.minimum(u, v)
                mag = hi + np.log(-np.expm1(lo - hi))
                sign = np.where(u > v, np.sign(a), np.sign(b))
                sign = np.where(u == v, 0.0, sign)
            sign = sign * np.sign(s)
            out[far] = np.where(sign > 0, mag - np.log(abs(s)), np.nan)
    return out


def ab_terms(lambdas, alpha: float, beta: float) -> np.ndarray:
    """Per-eigenvalue AB log-det terms; ``inf`` outside the finite domain."""
    lam = spectrum_array(lambdas)
    logl = np.log(lam)
    a, b = float(alpha), float(beta)
    regime = AbParams(a, b).regime
    with np.errstate(over="ignore", invalid="ignore"):
        if regime is Regime.BOTH_ZERO:
            return 0.5 * logl**2
        if regime is Regime.ALPHA_ZERO:
            x = b * logl
            return (np.expm1(x) - x) / b**2
        if regime is Regime.BETA_ZERO:
            x = -a * logl
            return (np.expm1(x) - x) / a**2
        if regime is Regime.ALPHA_EQUALS_MINUS_BETA:
            x = a * logl
            ok = x > -1.0
            t = np.full(lam.shape, np.inf)
            t[ok] = (x[ok] - np.log1p(x[ok])) / a**2
            return t
        la = _generic_log_arg(logl, a, b)
        return np.where(np.isnan(la), np.inf, la / (a * b))


def ab_logdet_spectrum(lambdas, alpha: float, beta: float, return_terms: bool = False) -> DivergenceValue:
    """AB log-det divergence of a relative spectrum (see :func:`ab_logdet`)."""
    t = ab_terms(lambdas, alpha, beta)
    finite = bool(np.all(np.isfinite(t)))
    value = float(np.sum(t)) if finite else np.inf
    return DivergenceValue(value, finite, t if return_terms else None)


def ab_logdet(p, q, alpha: float, beta: float, return_terms: bool = False) -> DivergenceValue:
    """AB log-det divergence ``D^(alpha,beta)(P || Q)``.

    Defined on the whole parameter plane by continuity.  For parameters of
    opposite sign the value is ``+inf`` (``finite=False``) as soon as one
    relative eigenvalue lies outside the bound given by :func:`domain_bound`.

    Parameters
    ----------
    p, q : SpdMatrix or array_like
        Matrices of equal size.
    alpha, beta : float
        Divergence parameters.
    return_terms : bool, default=False
        Attach the per-eigenvalue contributions to the result.

    Returns
    -------
    DivergenceValue
    """
    return ab_logdet_spectrum(relative_spectrum(p, q).lambdas, alpha, beta, return_terms)


class BoundKind(enum.Enum):
    NONE = "none"
    LOWER = "lower"
    UPPER = "upper"


@dataclass(frozen=True)
class DomainBound:
    kind: BoundKind
    value: float | None = None

    def admits(self, lam) -> bool:
        lam = np.asarray(lam)
        if self.kind is BoundKind.LOWER:
            return bool(np.all(lam > self.value))
        if self.kind is BoundKind.UPPER:
            return bool(np.all(lam < self.value))
        return True


def domain_bound(alpha: float, beta: float) -> DomainBound:
    """Eigenvalue bound outside of which the divergence is infinite.

    Lower bound ``|b/a|^(1/(a+b))`` for ``a > 0 > b``, upper bound for
    ``a < 0 < b``; ``exp(-1/a)`` when ``a == -b``.  Same-sign parameters (or a
    zero) have no bound.
    """
    a, b = float(alpha), float(beta)
    regime = AbParams(a, b).regime
    if regime is Regime.BOTH_ZERO:
        raise InvalidParams("the bound is undefined at alpha = beta = 0")
    if a * b >= 0:
        return DomainBound(BoundKind.NONE)
    kind = BoundKind.LOWER if a > 0 else BoundKind.UPPER
    if regime is Regime.ALPHA_EQUALS_MINUS_BETA:
        return DomainBound(kind, float(np.exp(-1.0 / a)))
    return DomainBound(kind, float(np.exp(np.log(abs(b / a)) / (a + b))))


def ab_logdet_dense(p, q, alpha: float, beta: float) -> DivergenceValue:
    """Determinant form evaluated with non-symmetric matrix functions.

    Computes ``det[(a (PQ^-1)^(a+b) + b I)/(a+b)] / det(PQ^-1)^a`` through a
    Schur-Pade fractional power of ``P Q^{-1}``, never touching the
    eigenvalues of the pair.  Intended as a cross-check of :func:`ab_logdet`;
    only the generic regime is supported.

    The determinant only sees the product of the per-eigenvalue arguments:
    an even number of eigenvalues beyond the domain bound gives a positive
    determinant and a finite (meaningless) value.  Compare against
    :func:`ab_logdet` only where the latter is finite.
    """
    p, q = as_spd(p), as_spd(q)
    _check_same_dim(p, q)
    a, b = float(alpha), float(beta)
    if AbParams(a, b).regime is not Regime.GENERIC:
        raise InvalidParams("the determinant form needs alpha, beta, alpha+beta != 0")
    s = a + b
    pq_inv = q.solve(p.entries).T  # (Q^-1 P)^T = P Q^-1
    pw = np.real_if_close(fractional_matrix_power(pq_inv, s), tol=1e6)
    m = (a * np.real(pw) + b * np.eye(p.dim)) / s
    sign, logdet = np.linalg.slogdet(m)
    if sign <= 0:
        return DivergenceValue(np.inf, False)
    return DivergenceValue(float((logdet - a * (p.logdet - q.logdet)) / (a * b)), True)


def riemannian_quadratic_form(p, dp) -> float:
    """``1/2 tr(dP P^-1 dP P^-1)``, the metric shared by every (alpha, beta)."""
    p = as_spd(p)
    dp = np.asarray(dp, dtype=float)
    if dp.shape != (p.dim, p.dim):
        raise DimensionMismatch(f"tangent shape {dp.shape} does not match {p.dim}")
    x = p.solve(dp)
    return 0.5 * float(np.sum(x * x.T))
