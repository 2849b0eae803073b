"""Least-squares extraction of (sigma_S^2, sigma_L^2) from mean variance
trajectories, with AIC/BIC likelihood scans and QPN bounds.

The model is ``V(n) = s^2 U(n) + l^2 C(n) + s l X`` with ``s = sigma_S^2`` and
``l = sigma_L^2`` (see :func:`qcorr.stats.variance_model`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .errors import InvalidArgs, InvalidRSS, NonConvergence
from .stats import TrajectorySet, VarianceTrajectory, variance_model

FLOOR = 1e-12
GRID_RANGE = (1e-8, 1e-1)
GRID_PER_DECADE = 25
KAPPA = 2


@dataclass(frozen=True)
class FitResult:
    sigma_S2: float
    sigma_L2: float
    rss: float
    n_pts: int
    kappa: int = KAPPA
    family: str = "primitive"

    @property
    def aic(self) -> float:
        return aic(self.rss, self.n_pts, self.kappa)

    @property
    def bic(self) -> float:
        return bic(self.rss, self.n_pts, self.kappa)


def aic(rss, n_pts, kappa=KAPPA) -> float:
    if rss <= 0:
        raise InvalidRSS(f"RSS must be positive, got {rss}")
    if n_pts < 1:
        raise InvalidArgs("n_pts must be >= 1")
    return 2 * kappa + n_pts * math.log(rss)


def bic(rss, n_pts, kappa=KAPPA) -> float:
    if rss <= 0:
        raise InvalidRSS(f"RSS must be positive, got {rss}")
    if n_pts < 1:
        raise InvalidArgs("n_pts must be >= 1")
    return math.log(n_pts) * kappa + n_pts * math.log(rss / n_pts)


def relative_likelihood(aic_i, aic_min) -> float:
    return math.exp((aic_min - aic_i) / 2)


def bic_violation(delta_bic) -> bool:
    return delta_bic > 10


def qpn_bound(p, r):
    """Projection-noise variance ``p(1-p)/r`` of one r-shot estimate."""
    return p * (1 - p) / r


def _basis(n, J, family):
    """Columns ``U(n), C(n), X`` of the model, evaluated at unit strengths."""
    n = np.asarray(n, dtype=float)
    u = variance_model(n, J, 1.0, 0.0, family)
    c = variance_model(n, J, 0.0, 1.0, family)
    x = variance_model(n, J, 1.0, 1.0, family) - u - c
    return u, c, x


def _grid():
    lo, hi = np.log10(GRID_RANGE)
    pts = np.logspace(lo, hi, int(round((hi - lo) * GRID_PER_DECADE)) + 1)
    return np.concatenate(([FLOOR], pts))


def _trajectory(trajectory):
    if isinstance(trajectory, TrajectorySet):
        trajectory = trajectory.mean
    elif isinstance(trajectory, VarianceTrajectory):
        trajectory = trajectory.variance
    v = np.asarray(trajectory, dtype=float)
    if v.ndim != 1 or len(v) == 0:
        raise InvalidArgs("trajectory must be a nonempty 1-D sequence")
    return v


def _snap(x):
    return 0.0 if x <= FLOOR * (1 + 1e-6) else float(x)


def _rss(y, u, c, x, s, l):
    return float(np.sum((s * s * u + l * l * c + s * l * x - y) ** 2))


def fit_error_strengths(trajectory, family: str = "primitive", J: int = 100) -> FitResult:
    """Minimize RSS over ``(sigma_S2, sigma_L2) >= 0``.

    Coarse log grid, then Nelder-Mead in log space. ``trajectory`` holds V at
    n = 1..N (a TrajectorySet uses its mean).
    """
    y = _trajectory(trajectory)
    n = np.arange(1, len(y) + 1)
    u, c, x = _basis(n, J, family)
    g = _grid()
    # RSS over the grid, expanded so the n-sum is done once per coefficient
    s, l = np.meshgrid(g, g, indexing="ij")
    terms = (s ** 2, l ** 2, s * l, np.ones_like(s))
    cols = (u, c, np.full_like(u, x) if np.ndim(x) == 0 else x, -y)
    gram = np.array([[np.dot(a, b) for b in cols] for a in cols])
    rss = sum(gram[i, j] * terms[i] * terms[j] for i in range(4) for j in range(4))
    i, j = np.unravel_index(np.argmin(rss), rss.shape)
    start = np.log([g[i], g[j]])
    best = _rss(y, u, c, x, g[i], g[j])
    if best <= 0:
        return FitResult(_snap(g[i]), _snap(g[j]), 0.0, len(y), KAPPA, family)
    lf = math.log(FLOOR)

    def obj(p):
        ss, ll = np.exp(np.maximum(p, lf))
        return math.log(_rss(y, u, c, x, ss, ll) + 1e-300)

    res = minimize(obj, start, method="Nelder-Mead",
                   options={"xatol": 1e-6, "fatol": 1e-12, "maxiter": 4000})
    ss, ll = np.exp(np.maximum(res.x, lf))
    if _rss(y, u, c, x, ss, ll) > best * (1 + 1e-9):
        raise NonConvergence("refinement did not improve on the grid optimum")
    ss, ll = _snap(ss), _snap(ll)
    return FitResult(ss, ll, _rss(y, u, c, x, ss, ll), len(y), KAPPA, family)


def _refit_short(y, u, c, x, l):
    """Exact minimizer over ``s >= 0`` of the quartic RSS at fixed ``l``."""
    b = l * x * np.ones_like(u)
    r0 = l * l * c - y
    # RSS(s) = sum (u s^2 + b s + r0)^2; derivative is a cubic in s
    coeffs = [4 * np.dot(u, u), 6 * np.dot(u, b),
              2 * np.dot(b, b) + 4 * np.dot(u, r0), 2 * np.dot(b, r0)]
    cands = [0.0] + [float(z.real) for z in np.roots(coeffs)
                     if abs(z.imag) < 1e-9 * max(1.0, abs(z)) and z.real > 0]
    vals = [_rss(y, u, c, x, s, l) for s in cands]
    k = int(np.argmin(vals))
    return cands[k], vals[k]


@dataclass(frozen=True)
class ScanPoint:
    sigma_L2: float
    sigma_S2: float
    aic: float
    rel_likelihood: float
    bic: float
    delta_bic: float


@dataclass(frozen=True)
class ScanResult:
    points: tuple
    best: FitResult
    likelihood_interval: tuple
    bic_interval: tuple


def _interval(grid, ok):
    """Interpolated edges of the contiguous window where ``ok`` crosses zero.

    ``ok`` is positive inside; the window containing its maximum is used.
    """
    k = int(np.argmax(ok))
    lo = k
    while lo > 0 and ok[lo - 1] >= 0:
        lo -= 1
    hi = k
    while hi < len(ok) - 1 and ok[hi + 1] >= 0:
        hi += 1
    lg = np.log(np.maximum(grid, FLOOR))

    def cross(a, b):
        t = ok[a] / (ok[a] - ok[b])
        return float(np.exp(lg[a] + t * (lg[b] - lg[a])))

    left = grid[0] if lo == 0 else cross(lo, lo - 1)
    right = grid[-1] if hi == len(ok) - 1 else cross(hi, hi + 1)
    return float(left), float(right)


def likelihood_scan(trajectory, family: str, grid, J: int = 100,
                    level: float = 0.05) -> ScanResult:
    """Profile scan: fix sigma_L2 on ``grid``, refit sigma_S2, score by AIC/BIC.

    Returns the points plus the ``level`` relative-likelihood window and the
    window where ``delta BIC <= 10``.
    """
    y = _trajectory(trajectory)
    n = np.arange(1, len(y) + 1)
    u, c, x = _basis(n, J, family)
    grid = np.sort(np.asarray(grid, dtype=float))
    best = fit_error_strengths(y, family, J)
    fits = [_refit_short(y, u, c, x, l) for l in grid]
    rss_floor = 1e-300
    aics = np.array([aic(max(r, rss_floor), len(y)) for _, r in fits])
    bics = np.array([bic(max(r, rss_floor), len(y)) for _, r in fits])
    aic_min = min(aics.min(), aic(max(best.rss, rss_floor), len(y)))
    bic_min = min(bics.min(), bic(max(best.rss, rss_floor), len(y)))
    rel = np.exp((aic_min - aics) / 2)
    dbic = bics - bic_min
    pts = tuple(ScanPoint(float(l), float(s), float(a), float(q), float(b), float(d))
                for l, (s, _), a, q, b, d in zip(grid, fits, aics, rel, bics, dbic))
    return ScanResult(pts, best, _interval(grid, rel - level), _interval(grid, 10 - dbic))
