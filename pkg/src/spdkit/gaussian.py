"""Gamma divergences between multivariate Gaussian densities.

For ``p = N(mu1, P)`` and ``q = N(mu2, Q)`` the Gamma divergence

    D = 1/(b s) log int p^s + 1/(a s) log int q^s - 1/(ab) log int p^a q^b,

with ``s = a + b``, has a closed form: a log-det term in the mixture
``M = (a Q + b P)/s`` plus a Mahalanobis term ``1/(2s) dmu^T M^-1 dmu``.
KL, Bhattacharyya, Renyi and Cauchy-Schwarz are special points of it.

:func:`numeric_divergence_oracle` evaluates the same three integrals
numerically and is meant for validation only.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.linalg import solve_triangular
from scipy.special import logsumexp

from .errors import (
    BudgetExceeded,
    DimensionMismatch,
    InvalidParams,
    NotIntegrable,
    NotPositiveDefinite,
    NumericalFailure,
)
from .spd import SpdMatrix, as_spd

_LOG_2PI = math.log(2.0 * math.pi)


class GaussianModel:
    """Mean vector plus SPD covariance."""

    def __init__(self, mean, cov):
        cov = as_spd(cov)
        mean = np.atleast_1d(np.array(mean, dtype=float))
        if mean.ndim != 1 or mean.shape[0] != cov.dim:
            raise DimensionMismatch(
                f"mean of length {mean.shape} does not match covariance of size {cov.dim}"
            )
        mean.setflags(write=False)
        self.mean = mean
        self.cov = cov

    @property
    def dim(self) -> int:
        return self.cov.dim

    def logpdf(self, x) -> np.ndarray:
        """Log density at the rows of ``x`` (shape ``(m, n)``)."""
        x = np.atleast_2d(x)
        d = x - self.mean
        z = solve_triangular(self.cov.chol, d.T, lower=True)  # L^-1 (x - mu)
        return -0.5 * (np.sum(z * z, axis=0) + self.dim * _LOG_2PI + self.cov.logdet)

    def sample(self, rng, size: int) -> np.ndarray:
        z = rng.standard_normal((size, self.dim))
        return self.mean + z @ self.cov.chol.T

    def __repr__(self):
        return f"GaussianModel(dim={self.dim})"


def _pair(p: GaussianModel, q: GaussianModel):
    if p.dim != q.dim:
        raise DimensionMismatch(f"dimensions differ: {p.dim} vs {q.dim}")
    return p.mean - q.mean


@dataclass(frozen=True)
class GaussianGammaResult:
    total: float
    logdet_term: float
    mahalanobis_term: float

    def __float__(self):
        return self.total


def _positive_params(alpha, beta):
    a, b = float(alpha), float(beta)
    if not (a > 0 and b > 0):
        raise InvalidParams("the Gaussian closed form needs alpha > 0 and beta > 0")
    return a, b


def gaussian_gamma(p: GaussianModel, q: GaussianModel, alpha: float, beta: float) -> GaussianGammaResult:
    """Closed-form Gamma divergence ``D^(alpha,beta)(p || q)`` for ``alpha, beta > 0``.

    Returns
    -------
    GaussianGammaResult
        ``logdet_term`` is ``1/(2ab) log[det M / (det Q^(a/s) det P^(b/s))]``
        and ``mahalanobis_term`` is ``1/(2s) dmu^T M^-1 dmu``.
    """
    a, b = _positive_params(alpha, beta)
    d = _pair(p, q)
    s = a + b
    m = SpdMatrix._trusted((a * q.cov.entries + b * p.cov.entries) / s)
    logdet = (m.logdet - (a / s) * q.cov.logdet - (b / s) * p.cov.logdet) / (2.0 * a * b)
    maha = float(d @ m.solve(d)) / (2.0 * s)
    # Concavity of log det makes the log-det term non-negative; clip rounding.
    logdet = max(logdet, 0.0)
    return GaussianGammaResult(logdet + maha, logdet, maha)


def gaussian_kl(p: GaussianModel, q: GaussianModel) -> float:
    """``KL(p || q) = 1/2 [tr(PQ^-1) - log det(PQ^-1) - n + dmu^T Q^-1 dmu]``."""
    d = _pair(p, q)
    n = p.dim
    tr = float(np.trace(q.cov.solve(p.cov.entries)))
    stein = tr - (p.cov.logdet - q.cov.logdet) - n
    return 0.5 * (max(stein, 0.0) + float(d @ q.cov.solve(d)))


def gaussian_bhattacharyya(p: GaussianModel, q: GaussianModel) -> float:
    """Bhattacharyya distance in the Gamma-family scaling, ``-4 log int sqrt(pq)``.

    Identical to ``gaussian_gamma(p, q, 0.5, 0.5).total``.  The classical
    ``-log int sqrt(pq)`` is :func:`bhattacharyya_classical`.
    """
    return gaussian_gamma(p, q, 0.5, 0.5).total


def bhattacharyya_classical(p: GaussianModel, q: GaussianModel) -> float:
    return gaussian_bhattacharyya(p, q) / 4.0


def gaussian_renyi(p: GaussianModel, q: GaussianModel, alpha: float) -> float:
    """Renyi-type divergence ``-1/(a(1-a)) log int p^a q^(1-a)`` for ``0 < a < 1``."""
    a = float(alpha)
    if not 0 < a < 1:
        raise InvalidParams("Renyi order must lie in (0, 1)")
    return gaussian_gamma(p, q, a, 1.0 - a).total


def gaussian_cauchy_schwarz(p: GaussianModel, q: GaussianModel) -> float:
    """Cauchy-Schwarz divergence ``-log[int pq / sqrt(int p^2 int q^2)]``.

    Equal to the Gamma divergence at ``alpha = beta = 1``.
    """
    return gaussian_gamma(p, q, 1.0, 1.0).total


def _log_power_integral(model: GaussianModel, s: float) -> float:
    n = model.dim
    return 0.5 * n * (1.0 - s) * _LOG_2PI - 0.5 * n * math.log(s) + 0.5 * (1.0 - s) * model.cov.logdet


def gaussian_power_integral(model: GaussianModel, s: float) -> float:
    """``int p^s dx = (2 pi)^(n(1-s)/2) s^(-n/2) det(P)^((1-s)/2)``."""
    s = float(s)
    if not s > 0:
        raise InvalidParams("the exponent must be positive")
    if s == 1:
        return 1.0
    return math.exp(_log_power_integral(model, s))


def _log_product_integral(p: GaussianModel, q: GaussianModel, a: float, b: float) -> float:
    d = _pair(p, q)
    n = p.dim
    pinv = p.cov.solve(np.eye(n))
    qinv = q.cov.solve(np.eye(n))
    try:
        amat = SpdMatrix._trusted(a * pinv + b * qinv)
    except NotPositiveDefinite:
        raise NotIntegrable(
            "alpha P^-1 + beta Q^-1 is not positive definite; the integral diverges"
        ) from None
    # Complete the square around mu2: y = x - mu2, d = mu1 - mu2.
    bvec = a * (pinv @ d)
    quad = float(bvec @ amat.solve(bvec)) - a * float(d @ pinv @ d)
    return (
        -0.5 * n * (a + b - 1.0) * _LOG_2PI
        - 0.5 * a * p.cov.logdet
        - 0.5 * b * q.cov.logdet
        - 0.5 * amat.logdet
        + 0.5 * quad
    )


def gaussian_product_integral(p: GaussianModel, q: GaussianModel, alpha: float, beta: float) -> float:
    """``int p^alpha q^beta dx`` in closed form.

    Any real exponents are accepted as long as the precision mixture
    ``alpha P^-1 + beta Q^-1`` is positive definite.

    Raises
    ------
    NotIntegrable
    """
    return math.exp(_log_product_integral(p, q, float(alpha), float(beta)))


def gamma_from_integrals(log_ip: float, log_iq: float, log_ipq: float, alpha: float, beta: float) -> float:
    a, b = float(alpha), float(beta)
    s = a + b
    return log_ip / (b * s) + log_iq / (a * s) - log_ipq / (a * b)


# -- numerical oracle --------------------------------------------------------


@dataclass(frozen=True)
class OracleEstimate:
    estimate: float
    error: float
    method: str
    evaluations: int
    seed: int | None = None


def _is_kl(a, b):
    return a == 1 and b == 0


def _integrands(p, q, a, b):
    """Log-integrands whose integrals enter the divergence."""
    if _is_kl(a, b):
        return None
    s = a + b
    if a == 0 or b == 0 or s == 0:
        raise InvalidParams("the oracle supports (1, 0) and alpha, beta, alpha+beta != 0")
    if not s > 0:
        raise NotIntegrable("p^(alpha+beta) is not integrable for alpha + beta <= 0")
    # Fails early with NotIntegrable when the product integral diverges.
    _log_product_integral(p, q, a, b)
    return [
        lambda x: s * p.logpdf(x),
        lambda x: s * q.logpdf(x),
        lambda x: a * p.logpdf(x) + b * q.logpdf(x),
    ]


def _box(p, q, s_min):
    widen = 10.0 / math.sqrt(min(s_min, 1.0))
    lo = np.minimum(p.mean - widen * np.sqrt(np.diag(p.cov.entries)),
                    q.mean - widen * np.sqrt(np.diag(q.cov.entries)))
    hi = np.maximum(p.mean + widen * np.sqrt(np.diag(p.cov.entries)),
                    q.mean + widen * np.sqrt(np.diag(q.cov.entries)))
    return lo, hi


def _quad_1d(logf, lo, hi, limit):
    def f(t):
        return float(np.exp(logf(np.array([[t]]))[0]))

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err, info = integrate.quad(f, lo, hi, epsabs=0.0, epsrel=1e-12, limit=limit, full_output=1)[:3]
    if info["last"] >= limit and err > 1e-8 * abs(val):
        raise BudgetExceeded("adaptive quadrature hit its subdivision limit")
    return val, err, info["neval"]


_GL_ORDER = 20


def _gl_grid(lo, hi, panels):
    x, w = np.polynomial.legendre.leggauss(_GL_ORDER)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def _tensor_quad(logfs, lo, hi, panels):
    gx, wx = _gl_grid(lo[0], hi[0], panels)
    gy, wy = _gl_grid(lo[1], hi[1], panels)
    xx, yy = np.meshgrid(gx, gy, indexing="ij")
    pts = np.column_stack([xx.ravel(), yy.ravel()])
    ww = np.outer(wx, wy).ravel()
    return [float(np.sum(ww * f(pts))) for f in logfs], pts.shape[0]


def _quad_2d(funcs, lo, hi, budget):
    """Composite Gauss-Legendre on a tensor grid, doubling panels until stable."""
    panels, used = 8, 0
    prev = None
    while True:
        n_pts = (panels * _GL_ORDER) ** 2
        if used + n_pts > budget:
            raise BudgetExceeded("2-D quadrature did not converge within the evaluation budget")
        vals, n = _tensor_quad(funcs, lo, hi, panels)
        used += n * len(funcs)
        if prev is not None:
            errs = [abs(v - u) for v, u in zip(vals, prev)]
            if all(e <= 1e-11 * abs(v) + 1e-300 for e, v in zip(errs, vals)):
                return vals, errs, used
        prev = vals
        panels *= 2


def _quadrature(p, q, a, b, budget):
    n = p.dim
    if n > 2:
        raise InvalidParams("quadrature is only available in one or two dimensions")
    kl = _is_kl(a, b)
    if kl:
        # The integrand p log(p/q) changes sign, so integrate it directly.
        def integrand(x):
            lp = p.logpdf(x)
            return np.exp(lp) * (lp - q.logpdf(x))

        lo, hi = _box(p, p, 1.0)
        if n == 1:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", integrate.IntegrationWarning)
                val, err, info = integrate.quad(
                    lambda t: float(integrand(np.array([[t]]))[0]),
                    lo[0], hi[0], epsabs=1e-13, epsrel=1e-12,
                    limit=max(budget // 21, 1), full_output=1,
                )[:3]
            return OracleEstimate(val, err, "quadrature", info["neval"])
        vals, errs, used = _quad_2d([integrand], lo, hi, budget)
        return OracleEstimate(vals[0], errs[0], "quadrature", used)

    logfs = _integrands(p, q, a, b)
    lo, hi = _box(p, q, a + b)
    if n == 1:
        limit = max(budget // (21 * 3), 1)
        res = [_quad_1d(f, lo[0], hi[0], limit) for f in logfs]
        vals = [r[0] for r in res]
        errs = [r[1] for r in res]
        used = sum(r[2] for r in res)
    else:
        vals, errs, used = _quad_2d([lambda x, f=f: np.exp(f(x)) for f in logfs], lo, hi, budget)
    coef = _coefficients(a, b)
    est = sum(c * math.log(v) for c, v in zip(coef, vals))
    err = sum(abs(c) * e / v for c, e, v in zip(coef, errs, vals))
    return OracleEstimate(est, err, "quadrature", used)


def _coefficients(a, b):
    s = a + b
    return (1.0 / (b * s), 1.0 / (a * s), -1.0 / (a * b))


def _proposal(p, q, a, b):
    """Importance density N((mu1+mu2)/2, G) with G = P + Q, widened until
    every importance weight has finite variance."""
    mean = 0.5 * (p.mean + q.mean)
    g = p.cov.entries + q.cov.entries
    n = p.dim
    pinv = p.cov.solve(np.eye(n))
    qinv = q.cov.solve(np.eye(n))
    s = a + b
    precisions = [s * pinv, s * qinv, a * pinv + b * qinv]
    for _ in range(60):
        ginv = np.linalg.inv(g)
        if all(np.linalg.eigvalsh(0.5 * ((2 * m - ginv) + (2 * m - ginv).T))[0] > 0 for m in precisions):
            return GaussianModel(mean, g)
        g = 2.0 * g
    raise NumericalFailure("could not find an importance density with finite variance")


def _montecarlo(p, q, a, b, budget, seed):
    if budget < 2:
        raise BudgetExceeded("Monte Carlo needs at least two samples")
    rng = np.random.default_rng(seed)
    if _is_kl(a, b):
        x = p.sample(rng, budget)
        v = p.logpdf(x) - q.logpdf(x)
        return OracleEstimate(float(np.mean(v)), float(np.std(v, ddof=1) / math.sqrt(budget)),
                              "montecarlo", budget, seed)
    logfs = _integrands(p, q, a, b)
    g = _proposal(p, q, a, b)
    x = g.sample(rng, budget)
    lg = g.logpdf(x)
    logw = np.array([f(x) - lg for f in logfs])
    log_i = logsumexp(logw, axis=1) - math.log(budget)
    # Weights scaled to unit mean; the delta method gives the standard error
    # of sum_k c_k log I_k as std(sum_k c_k u_k) / sqrt(N).
    u = np.exp(logw - log_i[:, None])
    coef = np.array(_coefficients(a, b))
    est = float(coef @ log_i)
    se = float(np.std(coef @ u, ddof=1) / math.sqrt(budget))
    return OracleEstimate(est, se, "montecarlo", budget, seed)


def numeric_divergence_oracle(
    p: GaussianModel,
    q: GaussianModel,
    alpha: float,
    beta: float,
    method: str = "quadrature",
    budget: int | None = None,
    seed: int = 0,
) -> OracleEstimate:
    """Numerical estimate of the Gamma divergence between two Gaussians.

    ``(alpha, beta) = (1, 0)`` is read as KL and integrates ``p log(p/q)``.

    Parameters
    ----------
    method : {"quadrature", "montecarlo"}
        Quadrature works in one or two dimensions (adaptive Gauss-Kronrod in
        1-D, a refined Gauss-Legendre tensor grid in 2-D).  Monte Carlo uses
        importance sampling and works in any dimension.
    budget : int, optional
        Maximum integrand evaluations (quadrature) or the sample count
        (Monte Carlo, default one million).
    seed : int
        Seed of the Monte Carlo generator.

    Returns
    -------
    OracleEstimate
        ``error`` is an error estimate for quadrature and a standard error
        for Monte Carlo.

    Raises
    ------
    BudgetExceeded
    """
    _pair(p, q)
    a, b = float(alpha), float(beta)
    if method == "quadrature":
        return _quadrature(p, q, a, b, budget or 50_000_000)
    if method == "montecarlo":
        return _montecarlo(p, q, a, b, budget or 1_000_000, seed)
    raise InvalidParams(f"unknown oracle method {method!r}")


__all__ = [
    "GaussianModel",
    "GaussianGammaResult",
    "OracleEstimate",
    "gaussian_gamma",
    "gaussian_kl",
    "gaussian_bhattacharyya",
    "bhattacharyya_classical",
    "gaussian_renyi",
    "gaussian_cauchy_schwarz",
    "gaussian_power_integral",
    "gaussian_product_integral",
    "gamma_from_integrals",
    "numeric_divergence_oracle",
]
