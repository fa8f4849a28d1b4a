"""Power means of relative spectra and the Gamma matrix divergences built on them.

Includes the Hilbert projective metric (the extreme ratio ``max/min``) and
the eigenvalue shrinkage rules used to suppress noise-subspace eigenvalues.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.special import logsumexp

from .abld import _generic_log_arg
from .errors import DimensionMismatch, EmptyInput, InvalidParams, NonPositiveEntry
from .spd import _check_same_dim, as_spd, relative_spectrum, spectrum_array

# Past this order lambda**gamma leaves the float64 range for any spread-out
# spectrum, while the mean is already within rounding of min/max.
LARGE_ORDER = 300.0


@dataclass(frozen=True)
class PowerMeanOrder:
    gamma: float

    @property
    def name(self) -> str:
        return {
            -math.inf: "min",
            -1.0: "harmonic",
            0.0: "geometric",
            1.0: "arithmetic",
            2.0: "quadratic",
            math.inf: "max",
        }.get(float(self.gamma), "power")


def _positive_array(lambdas) -> np.ndarray:
    lam = spectrum_array(lambdas)
    if lam.size == 0:
        raise EmptyInput("power mean of an empty array")
    if not np.all(lam > 0):
        raise NonPositiveEntry("power means need strictly positive entries")
    return lam


def power_mean(lambdas, gamma) -> float:
    """Power mean ``M_gamma = ((1/n) sum l^gamma)^(1/gamma)``.

    ``gamma`` may be a float (including ``+-inf``) or a
    :class:`PowerMeanOrder`.  The orders -inf, -1, 0, 1, 2 and +inf are
    dispatched to their exact forms; ``|gamma| > 300`` is treated as min/max.
    """
    if isinstance(gamma, PowerMeanOrder):
        gamma = gamma.gamma
    g = float(gamma)
    lam = _positive_array(lambdas)
    if math.isnan(g):
        raise InvalidParams("power mean order is NaN")
    if g == -math.inf or g < -LARGE_ORDER:
        return float(np.min(lam))
    if g == math.inf or g > LARGE_ORDER:
        return float(np.max(lam))
    if g == 0:
        return float(np.exp(np.mean(np.log(lam))))
    if g == 1:
        return float(np.mean(lam))
    if g == -1:
        return float(lam.size / np.sum(1.0 / lam))
    if g == 2:
        return float(np.sqrt(np.mean(lam * lam)))
    x = g * np.log(lam)
    if np.max(np.abs(x)) <= 1.0:
        # small orders: log(mean(e^x)) - log(n) would cancel to nothing
        log_m = math.log1p(float(np.mean(np.expm1(x)))) / g
    else:
        log_m = (logsumexp(x) - math.log(lam.size)) / g
    return float(np.exp(log_m))


# -- shrinkage ---------------------------------------------------------------


@dataclass(frozen=True)
class NoShrink:
    pass


@dataclass(frozen=True)
class ThresholdShrink:
    """``l * max(1 - (tau/l)^gamma, 0)``; gamma=1 is soft thresholding."""

    tau: float
    gamma: float = 1.0


@dataclass(frozen=True)
class SubspaceTruncate:
    """Keep only eigenvalues strictly above ``tau``."""

    tau: float


@dataclass(frozen=True)
class AbShrink:
    """``((a l^b + b l^-a)/(a+b))^(1/(ab))``, always >= 1."""

    alpha: float
    beta: float


ShrinkageRule = Union[NoShrink, ThresholdShrink, SubspaceTruncate, AbShrink, None]


def _rule_name(rule) -> str | None:
    if rule is None or isinstance(rule, NoShrink):
        return None
    return type(rule).__name__


def apply_shrinkage(lambdas, rule: ShrinkageRule) -> np.ndarray:
    """Shrink a spectrum.

    Thresholding and truncation can produce zeros; they are kept in the
    output so the caller sees the full length.  Use :func:`retained` to drop
    them before taking logs or means.
    """
    lam = spectrum_array(lambdas)
    if rule is None or isinstance(rule, NoShrink):
        return lam.copy()
    if isinstance(rule, ThresholdShrink):
        if not (rule.tau > 0 and rule.gamma > 0):
            raise InvalidParams("ThresholdShrink needs tau > 0 and gamma > 0")
        with np.errstate(over="ignore"):
            ratio = np.exp(rule.gamma * (math.log(rule.tau) - np.log(lam)))
        return lam * np.maximum(1.0 - ratio, 0.0)
    if isinstance(rule, SubspaceTruncate):
        if not rule.tau > 0:
            raise InvalidParams("SubspaceTruncate needs tau > 0")
        return np.where(lam > rule.tau, lam, 0.0)
    if isinstance(rule, AbShrink):
        a, b = float(rule.alpha), float(rule.beta)
        if a == 0 or b == 0 or a * b < 0:
            raise InvalidParams("AbShrink needs nonzero alpha and beta of the same sign")
        # exp of the log-argument divided by ab; never below 1 for same signs.
        return np.exp(_generic_log_arg(np.log(lam), a, b) / (a * b))
    raise InvalidParams(f"unknown shrinkage rule {rule!r}")


def retained(lambdas) -> np.ndarray:
    """Strictly positive entries of a (possibly truncated) spectrum."""
    lam = spectrum_array(lambdas)
    return lam[lam > 0]


def _shrunk_spectrum(p, q, shrink) -> np.ndarray:
    lam = relative_spectrum(p, q).lambdas
    kept = retained(apply_shrinkage(lam, shrink))
    if kept.size == 0:
        raise EmptyInput("shrinkage removed every eigenvalue")
    return kept


# -- Gamma divergences -------------------------------------------------------


def gamma_cca(p, q, gamma2=1.0, gamma1=0.0, shrink: ShrinkageRule = None) -> float:
    """``log(M_gamma2 / M_gamma1)`` of the (optionally shrunk) relative spectrum.

    Requires ``gamma2 > gamma1``.  Zero eigenvalues produced by shrinkage are
    dropped, so the means run over the retained ``r`` eigenvalues only.
    """
    g2 = gamma2.gamma if isinstance(gamma2, PowerMeanOrder) else float(gamma2)
    g1 = gamma1.gamma if isinstance(gamma1, PowerMeanOrder) else float(gamma1)
    if not g2 > g1:
        raise InvalidParams("gamma_cca needs gamma2 > gamma1")
    lam = _shrunk_spectrum(p, q, shrink)
    return math.log(power_mean(lam, g2)) - math.log(power_mean(lam, g1))


def gamma_cca_trace_form(p, q) -> float:
    """``log tr(PQ^-1) - (1/n) log det(PQ^-1) - log n``."""
    p, q = as_spd(p), as_spd(q)
    _check_same_dim(p, q)
    n = p.dim
    tr = float(np.trace(q.solve(p.entries)))
    return math.log(tr) - (p.logdet - q.logdet) / n - math.log(n)


def gamma_acs(p, q) -> float:
    """``log(M_1{l} * M_1{1/l})``, i.e. arithmetic over harmonic mean."""
    lam = relative_spectrum(p, q).lambdas
    return float(math.log(np.mean(lam)) + math.log(np.mean(1.0 / lam)))


def hilbert_spectrum(lambdas) -> float:
    lam = _positive_array(lambdas)
    return float(np.log(np.max(lam)) - np.log(np.min(lam)))


def hilbert_metric(p, q, shrink: ShrinkageRule = None) -> float:
    """Hilbert projective metric ``log(l_max / l_min)``.

    Computed from the same min/max as ``gamma_cca(p, q, inf, -inf)`` so the
    two agree bit for bit.
    """
    lam = _shrunk_spectrum(p, q, shrink)
    return math.log(power_mean(lam, math.inf)) - math.log(power_mean(lam, -math.inf))


def _log_sum_pow(x, s):
    return float(logsumexp(s * np.log(x)))


def discrete_gamma_divergence(p, q, alpha: float, beta: float, symmetric: bool = False) -> float:
    """Gamma divergence between positive vectors.

    Non-symmetric form::

        1/(b(a+b)) log sum p^(a+b) + 1/(a(a+b)) log sum q^(a+b)
            - 1/(ab) log sum p^a q^b

    The symmetric form is ``1/(ab) log[(sum p^(a+b))(sum q^(a+b)) /
    ((sum p^a q^b)(sum p^b q^a))]``.
    """
    p = np.asarray(p, dtype=float).ravel()
    q = np.asarray(q, dtype=float).ravel()
    if p.shape != q.shape:
        raise DimensionMismatch(f"lengths differ: {p.size} vs {q.size}")
    if p.size == 0:
        raise EmptyInput("empty vectors")
    if not (np.all(p > 0) and np.all(q > 0)):
        raise NonPositiveEntry("entries must be strictly positive")
    a, b = float(alpha), float(beta)
    s = a + b
    if a == 0 or b == 0 or s == 0:
        raise InvalidParams("alpha, beta and alpha+beta must be nonzero")
    lp, lq = np.log(p), np.log(q)
    sp, sq = _log_sum_pow(p, s), _log_sum_pow(q, s)
    cross = float(logsumexp(a * lp + b * lq))
    if symmetric:
        cross2 = float(logsumexp(b * lp + a * lq))
        return (sp + sq - cross - cross2) / (a * b)
    return sp / (b * s) + sq / (a * s) - cross / (a * b)
