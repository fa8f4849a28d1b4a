"""Named members of the AB log-det family, related divergences and the kernel.

Each named divergence is evaluated from its own closed form rather than by
calling :func:`~spdkit.abld.ab_logdet`, so the atlas below can be checked
against the general engine.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .abld import DivergenceValue, ab_logdet, ab_logdet_spectrum
from .errors import InvalidParams
from .spd import _check_same_dim, as_spd, matrix_power, relative_spectrum, trace_ratio


def _spectrum(p, q):
    return relative_spectrum(p, q).lambdas


def airm(p, q) -> float:
    """Affine-invariant Riemannian distance ``sqrt(sum log^2 lambda_i)``."""
    return float(np.sqrt(np.sum(np.log(_spectrum(p, q)) ** 2)))


def _log_cosh(x):
    # log cosh x = log1p(2 sinh^2(x/2)), with the asymptote for large |x|.
    x = np.abs(np.asarray(x, dtype=float))
    big = x > 20.0
    out = np.empty_like(x)
    out[~big] = np.log1p(2.0 * np.sinh(0.5 * x[~big]) ** 2)
    out[big] = x[big] - np.log(2.0) + np.log1p(np.exp(-2.0 * x[big]))
    return out


def s_divergence(p, q, form: str = "eigen") -> float:
    """S-divergence (Jensen-Bregman log-det divergence).

    ``form`` selects one of the equivalent expressions:

    ``"eigen"``    ``4 sum log((l + 1) / (2 sqrt l))``
    ``"power"``    ``4 log det((PQ^-1)^(1/2) + (PQ^-1)^(-1/2)) / 2``
    ``"det"``      ``4 log[det((P+Q)/2) / sqrt(det P det Q)]``
    ``"logdet"``   ``4 (log det((P+Q)/2) - 1/2 log det(PQ))``
    """
    p, q = as_spd(p), as_spd(q)
    _check_same_dim(p, q)
    if form == "eigen":
        return float(4.0 * np.sum(_log_cosh(0.5 * np.log(_spectrum(p, q)))))
    if form == "power":
        # Q^{-1/2} P Q^{-1/2} is similar to P Q^{-1}.
        qi = matrix_power(q, -0.5).entries
        w = as_spd(qi @ p.entries @ qi)
        m = 0.5 * (matrix_power(w, 0.5).entries + matrix_power(w, -0.5).entries)
        return float(4.0 * np.linalg.slogdet(m)[1])
    mid = as_spd(0.5 * (p.entries + q.entries))
    if form == "det":
        det = np.linalg.det
        return float(4.0 * np.log(det(mid.entries) / np.sqrt(det(p.entries) * det(q.entries))))
    if form == "logdet":
        return float(4.0 * (mid.logdet - 0.5 * (p.logdet + q.logdet)))
    raise InvalidParams(f"unknown S-divergence form {form!r}")


def logdet_zero(p, q) -> float:
    """LogDet zero (Bhattacharyya) distance, the square root of the S-divergence."""
    return float(np.sqrt(max(s_divergence(p, q), 0.0)))


def stein_loss(p, q) -> float:
    """Stein's loss ``tr(PQ^-1) - log det(PQ^-1) - n``."""
    p, q = as_spd(p), as_spd(q)
    return trace_ratio(p, q) - (p.logdet - q.logdet) - p.dim


itakura_saito = stein_loss


def alpha_logdet(p, q, alpha: float) -> float:
    """Alpha log-det divergence, ``alpha`` in ``[0, 1]``.

    The endpoints are the two Stein's losses.
    """
    if not 0.0 <= alpha <= 1.0:
        raise InvalidParams("alpha must lie in [0, 1]")
    if alpha == 0:
        return stein_loss(p, q)
    if alpha == 1:
        return stein_loss(q, p)
    lam = _spectrum(p, q)
    a = float(alpha)
    return float(np.sum(np.log1p(a * (lam - 1.0)) - a * np.log(lam)) / (a * (1.0 - a)))


def beta_logdet(p, q, beta: float) -> DivergenceValue:
    """Beta log-det divergence ``D^(1, beta)``; may be infinite for ``beta < 0``."""
    lam = _spectrum(p, q)
    b = float(beta)
    with np.errstate(invalid="ignore", divide="ignore"):
        if b == 0:
            t = 1.0 / lam + np.log(lam) - 1.0
        elif b == -1:
            logl = np.log(lam)
            t = np.where(logl > -1.0, logl - np.log1p(logl), np.inf)
        else:
            return ab_logdet_spectrum(lam, 1.0, b)
    finite = bool(np.all(np.isfinite(t)))
    return DivergenceValue(float(np.sum(t)) if finite else np.inf, finite)


def beta_infinity(p, q) -> float:
    """Large-beta limit: sum of ``log lambda_i`` over eigenvalues above one."""
    lam = _spectrum(p, q)
    return float(np.sum(np.log(lam[lam > 1.0])))


def power_logdet(p, q, alpha: float) -> float:
    """Power log-det divergence ``D^(alpha, alpha)``; symmetric in its arguments."""
    logl = np.log(_spectrum(p, q))
    if alpha == 0:
        return float(0.5 * np.sum(logl**2))
    return float(np.sum(_log_cosh(alpha * logl)) / alpha**2)


def generalized_stein(p, q, alpha: float = 0.0, beta: float = 0.0) -> float:
    """Generalized Stein's loss: ``D^(alpha, 0)`` or ``D^(0, beta)``.

    Exactly one of ``alpha`` and ``beta`` must be non-zero.
    """
    if (alpha == 0) == (beta == 0):
        raise InvalidParams("exactly one of alpha, beta must be non-zero")
    logl = np.log(_spectrum(p, q))
    c = -alpha * logl if beta == 0 else beta * logl
    k = alpha if beta == 0 else beta
    return float(np.sum(np.expm1(c) - c) / k**2)


def ab_trace_divergence(p, q, alpha: float, beta: float) -> float:
    """Trace-based AB divergence
    ``1/(ab) tr[a/(a+b) P^(a+b) + b/(a+b) Q^(a+b) - P^a Q^b]``.

    Only defined away from the singular parameter lines.
    """
    if alpha == 0 or beta == 0 or alpha + beta == 0:
        raise InvalidParams("the trace divergence needs alpha, beta, alpha+beta != 0")
    p, q = as_spd(p), as_spd(q)
    _check_same_dim(p, q)
    s = alpha + beta
    ps = matrix_power(p, s).entries
    qs = matrix_power(q, s).entries
    cross = np.sum(matrix_power(p, alpha).entries * matrix_power(q, beta).entries.T)
    return float((alpha / s * np.trace(ps) + beta / s * np.trace(qs) - cross) / (alpha * beta))


def alt_ab_logdet(p, q, alpha: float, beta: float) -> float:
    """Alternative AB log-det divergence for ``alpha, beta > 0``:
    ``1/(ab) log[det((a P^(a+b) + b Q^(a+b))/(a+b)) / (det P^a det Q^b)]``.
    """
    if not (alpha > 0 and beta > 0):
        raise InvalidParams("the alternative AB divergence needs alpha, beta > 0")
    p, q = as_spd(p), as_spd(q)
    _check_same_dim(p, q)
    s = alpha + beta
    mix = (alpha * matrix_power(p, s).entries + beta * matrix_power(q, s).entries) / s
    num = np.linalg.slogdet(mix)[1]
    return float((num - alpha * p.logdet - beta * q.logdet) / (alpha * beta))


def alt_ab_via_alpha(p, q, alpha: float, beta: float) -> float:
    """The alternative AB divergence rewritten as a scaled Alpha log-det divergence:
    ``(a+b)^-2 D_A^(a/(a+b))(P^(a+b) || Q^(a+b))``.
    """
    if not (alpha > 0 and beta > 0):
        raise InvalidParams("the alternative AB divergence needs alpha, beta > 0")
    s = alpha + beta
    return alpha_logdet(matrix_power(p, s), matrix_power(q, s), alpha / s) / s**2


@dataclass(frozen=True)
class GramMatrix:
    """Kernel Gram matrix with the diagnostics reported alongside it.

    ``symmetrization`` records how the asymmetric divergence was turned into
    a symmetric matrix; ``min_eigenvalue`` is the smallest Gram eigenvalue,
    an empirical positive-definiteness diagnostic only.
    """

    matrix: np.ndarray
    symmetrization: str
    min_eigenvalue: float


def ab_kernel(ps, alpha: float, beta: float, gamma: float) -> GramMatrix:
    """Gram matrix of the AB log-det kernel ``exp(-gamma D^(alpha,beta))``.

    The raw matrix ``G_ij = k(P_i, P_j)`` is asymmetric unless
    ``alpha == beta``; it is returned symmetrized as ``(G + G^T) / 2``.
    """
    if alpha == 0 or beta == 0 or np.sign(alpha) != np.sign(beta):
        raise InvalidParams("the kernel needs non-zero alpha, beta of the same sign")
    if not gamma > 0:
        raise InvalidParams("gamma must be positive")
    ps = [as_spd(p) for p in ps]
    n = len(ps)
    g = np.eye(n)
    for i in range(n):
        for j in range(n):
            if i != j:
                g[i, j] = np.exp(-gamma * ab_logdet(ps[i], ps[j], alpha, beta).value)
    g = 0.5 * (g + g.T)
    np.fill_diagonal(g, 1.0)
    return GramMatrix(g, "mean", float(np.linalg.eigvalsh(g)[0]))


class Named(enum.Enum):
    AIRM = "airm"
    S_DIVERGENCE = "s_divergence"
    LOGDET_ZERO = "logdet_zero"
    STEIN_LOSS = "stein_loss"
    GENERALIZED_STEIN_ALPHA = "generalized_stein_alpha"
    GENERALIZED_STEIN_BETA = "generalized_stein_beta"
    ALPHA_LOGDET = "alpha_logdet"
    BETA_LOGDET = "beta_logdet"
    POWER_LOGDET = "power_logdet"
    BETA_INFINITY = "beta_infinity"
    ITAKURA_SAITO = "itakura_saito"


@dataclass(frozen=True)
class NamedDivergence:
    """A point (or line) of the (alpha, beta) atlas.

    ``ab_point(param)`` gives the (alpha, beta) location, and ``from_ab``
    maps the AB value at that point onto the named quantity (e.g. AIRM is
    ``sqrt(2 D^(0,0))``).  ``ab_point`` is ``None`` for limits that are not a
    point of the plane.
    """

    name: Named
    evaluate: object
    ab_point: object = None
    from_ab: object = None
    needs_param: bool = False

    def __call__(self, p, q, param=None):
        if self.needs_param:
            if param is None:
                raise InvalidParams(f"{self.name.value} needs a parameter")
            return self.evaluate(p, q, param)
        return self.evaluate(p, q)


def _value(x):
    return x.value if isinstance(x, DivergenceValue) else x


ATLAS = {
    Named.AIRM: NamedDivergence(
        Named.AIRM, airm, lambda _: (0.0, 0.0), lambda d: np.sqrt(2.0 * d)
    ),
    Named.S_DIVERGENCE: NamedDivergence(Named.S_DIVERGENCE, s_divergence, lambda _: (0.5, 0.5)),
    Named.LOGDET_ZERO: NamedDivergence(
        Named.LOGDET_ZERO, logdet_zero, lambda _: (0.5, 0.5), np.sqrt
    ),
    Named.STEIN_LOSS: NamedDivergence(Named.STEIN_LOSS, stein_loss, lambda _: (0.0, 1.0)),
    Named.ITAKURA_SAITO: NamedDivergence(Named.ITAKURA_SAITO, itakura_saito, lambda _: (0.0, 1.0)),
    Named.GENERALIZED_STEIN_ALPHA: NamedDivergence(
        Named.GENERALIZED_STEIN_ALPHA,
        lambda p, q, a: generalized_stein(p, q, alpha=a),
        lambda a: (a, 0.0),
        needs_param=True,
    ),
    Named.GENERALIZED_STEIN_BETA: NamedDivergence(
        Named.GENERALIZED_STEIN_BETA,
        lambda p, q, b: generalized_stein(p, q, beta=b),
        lambda b: (0.0, b),
        needs_param=True,
    ),
    Named.ALPHA_LOGDET: NamedDivergence(
        Named.ALPHA_LOGDET, alpha_logdet, lambda a: (a, 1.0 - a), needs_param=True
    ),
    Named.BETA_LOGDET: NamedDivergence(
        Named.BETA_LOGDET, lambda p, q, b: beta_logdet(p, q, b).value, lambda b: (1.0, b), needs_param=True
    ),
    Named.POWER_LOGDET: NamedDivergence(
        Named.POWER_LOGDET, power_logdet, lambda a: (a, a), needs_param=True
    ),
    Named.BETA_INFINITY: NamedDivergence(Named.BETA_INFINITY, beta_infinity),
}


def named_divergence(name: str, p, q, param: float | None = None) -> float:
    """Evaluate an atlas entry by name (``"airm"``, ``"alpha_logdet"``, ...)."""
    try:
        entry = ATLAS[Named(name)]
    except ValueError:
        raise InvalidParams(f"unknown divergence {name!r}") from None
    return float(_value(entry(p, q, param)))
