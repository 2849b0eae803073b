"""Gamma-distribution and variance-scaling predictions, and empirical
cumulative noise-averaged variance trajectories.

Closed forms use the moments of the 2D-projected walk step. ``c1 = 1/2 +
pi^2/96`` and ``g1 = 7/36 + pi^4/576`` belong to one detuning value per gate;
``c2``/``g2`` to noise that changes every primitive pi/2 time.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import stats as sps

from . import kernels
from .errors import DivideByZero, IncompleteGrid, InvalidArgs
from .walkmodel import gate_class_fractions, gate_step_weights, projected_moments

C1 = 0.5 + np.pi ** 2 / 96
C2 = 0.5 + np.pi ** 2 / 192
G1 = 7 / 36 + np.pi ** 4 / 576
G2 = 1 / 6 + np.pi ** 4 / 2304
CROSS_PRIMITIVE = (1 / 6 + np.pi ** 4 / 1152) - 4 / 9 * C1 * C2

# eight-value CORPSE constants as tabulated
CORPSE_MEAN = 0.167
CORPSE_MEAN_L = 1.14
CORPSE_M2_L = 3.78


@dataclass(frozen=True)
class GammaParams:
    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise InvalidArgs("gamma parameters must be positive")

    @property
    def mean(self) -> float:
        return self.alpha * self.beta

    @property
    def var(self) -> float:
        return self.alpha * self.beta ** 2

    def dist(self):
        return sps.gamma(self.alpha, scale=self.beta)


def expected_infidelity(J, sigma2, bandwidth=1) -> float:
    """Mean noise-averaged P(|1>) to first order.

    ``bandwidth`` is 1 (one value per gate), 2 (one per primitive pi/2) or 8
    (CORPSE gates under pi/2-slot noise).
    """
    coeff = {1: 2 / 3 * C1, 2: 2 / 3 * C2, 8: CORPSE_MEAN}.get(bandwidth)
    if coeff is None:
        raise InvalidArgs(f"bandwidth must be 1, 2 or 8, got {bandwidth!r}")
    return J * sigma2 * coeff


def gamma_params(correlation: str, J: int, sigma2: float, n: int = 1,
                 bandwidth: int = 1) -> GammaParams:
    """Predicted distribution of per-circuit noise-averaged P(|1>)."""
    if J < 1 or n < 1 or sigma2 <= 0:
        raise InvalidArgs("need J >= 1, n >= 1 and sigma2 > 0")
    if bandwidth not in (1, 2):
        raise InvalidArgs("bandwidth must be 1 or 2")
    mean = expected_infidelity(J, sigma2, bandwidth)
    if correlation == "correlated":
        return GammaParams(1.0, mean)
    if correlation == "uncorrelated":
        return GammaParams(float(n), mean / n)
    raise InvalidArgs(f"correlation must be 'correlated' or 'uncorrelated', got {correlation!r}")


# ---------------------------------------------------------------------------
# variance model


@dataclass(frozen=True)
class VarianceCoefficients:
    """Brace coefficients of the mixed-noise variance.

    uncorrelated: ``J^2 sS^4/n (u0 + u1/J + u2 (n-1)/J)``
    correlated:   ``J^2 sL^4/n (c0 + c1/J + (n-1)(c2 + c3/J))``
    cross:        ``2 J sL^2 sS^2 x``
    """
    u: tuple
    c: tuple
    cross: float


def _coeffs_from_moments(mu_s, m2_s, mu_l, m2_l, cross, tail=None):
    tail = m2_l - 2 * mu_l ** 2 if tail is None else tail
    return VarianceCoefficients(
        (mu_s ** 2, 3 * m2_s - 2 * mu_s ** 2, m2_s - mu_s ** 2),
        (3 * mu_l ** 2, 3 * m2_l - 6 * mu_l ** 2, mu_l ** 2, tail),
        cross)


@lru_cache(maxsize=None)
def walk_moments(family: str, bandwidth_S: int = None):
    """``(mu_S, m2_S, mu_L, m2_L, cross)`` from per-class step weights.

    The correlated component sees one value per gate; the uncorrelated one
    sees two values per primitive pi gate, or eight per DCG.
    """
    if bandwidth_S is None:
        bandwidth_S = 2 if family == "primitive" else 8
    frac = gate_class_fractions()
    out = np.zeros(5)
    for cls in ("pi", "pi/2", "I"):
        L = gate_step_weights(cls, 1, family)
        S = gate_step_weights(cls, bandwidth_S, family)
        eL, e4L, x = projected_moments(L, S)
        eS, e4S, _ = projected_moments(S)
        out += frac[cls] * np.array([eS, e4S, eL, e4L, x])
    mu_s, m2_s, mu_l, m2_l, x = (float(v) for v in out)
    return mu_s, m2_s, mu_l, m2_l, x - mu_l * mu_s


@lru_cache(maxsize=None)
def variance_coefficients(family: str) -> VarianceCoefficients:
    if family == "primitive":
        return _coeffs_from_moments(2 / 3 * C2, G2, 2 / 3 * C1, G1, CROSS_PRIMITIVE)
    if family == "corpse":
        return VarianceCoefficients(
            (0.028, 0.067, 0.013),
            (3 * CORPSE_MEAN_L ** 2, 3 * CORPSE_M2_L - 6 * CORPSE_MEAN_L ** 2,
             CORPSE_MEAN_L ** 2, CORPSE_M2_L - 2 * CORPSE_MEAN_L),
            0.318 - 1.142 * CORPSE_MEAN)
    if family == "wamf":
        return _coeffs_from_moments(*walk_moments("wamf"))
    raise InvalidArgs(f"unknown family {family!r}")


def variance_model(n, J, sigma_S2, sigma_L2, family: str = "primitive"):
    """Predicted across-circuit variance of P(|1>) averaged over ``n`` realizations.

    ``n`` may be an array.
    """
    n_arr = np.asarray(n, dtype=float)
    if np.any(n_arr < 1) or J < 1 or sigma_S2 < 0 or sigma_L2 < 0:
        raise InvalidArgs("need n >= 1, J >= 1 and nonnegative variances")
    k = variance_coefficients(family)
    u0, u1, u2 = k.u
    c0, c1, c2, c3 = k.c
    unc = J ** 2 * sigma_S2 ** 2 / n_arr * (u0 + u1 / J + u2 * (n_arr - 1) / J)
    cor = J ** 2 * sigma_L2 ** 2 / n_arr * (c0 + c1 / J + (n_arr - 1) * (c2 + c3 / J))
    out = unc + cor + 2 * J * sigma_L2 * sigma_S2 * k.cross
    return float(out) if np.ndim(out) == 0 else out


def variance_limit(J, sigma_S2, sigma_L2, family: str = "primitive") -> float:
    """``n -> infinity`` limit of :func:`variance_model`."""
    k = variance_coefficients(family)
    return (J * sigma_S2 ** 2 * k.u[2] + J ** 2 * sigma_L2 ** 2 * (k.c[2] + k.c[3] / J)
            + 2 * J * sigma_L2 * sigma_S2 * k.cross)


def variance_single_value(n, J, sigma2, correlated: bool):
    """Variance with one detuning value per gate (no bandwidth correction)."""
    n = np.asarray(n, dtype=float)
    mu, m2 = 2 / 3 * C1, G1
    if correlated:
        k = _coeffs_from_moments(0, 0, mu, m2, 0.0)
        c0, c1, c2, c3 = k.c
        return J ** 2 * sigma2 ** 2 / n * (c0 + c1 / J + (n - 1) * (c2 + c3 / J))
    k = _coeffs_from_moments(mu, m2, 0, 0, 0.0)
    u0, u1, u2 = k.u
    return J ** 2 * sigma2 ** 2 / n * (u0 + u1 / J + u2 * (n - 1) / J)


# ---------------------------------------------------------------------------
# empirical trajectories


@dataclass(frozen=True)
class VarianceTrajectory:
    reordering_id: int
    n: np.ndarray
    variance: np.ndarray


@dataclass(frozen=True)
class TrajectorySet:
    """All reordering trajectories, shape ``(reorderings, N)``."""
    n: np.ndarray
    variances: np.ndarray

    @property
    def mean(self) -> np.ndarray:
        return self.variances.mean(axis=0)

    def __len__(self):
        return self.variances.shape[0]

    def __iter__(self):
        for q, v in enumerate(self.variances):
            yield VarianceTrajectory(q, self.n, v)

    def mean_trajectory(self) -> VarianceTrajectory:
        return VarianceTrajectory(-1, self.n, self.mean)


def _as_grid(records, column):
    if hasattr(records, "grid"):
        return records.grid(column)
    p = np.asarray(records, dtype=float)
    if p.ndim != 2 or np.isnan(p).any():
        raise IncompleteGrid("expected a complete (k, n) array")
    return p


def reorderings(n: int, count: int, seed: int = 0) -> np.ndarray:
    """``count`` permutations of ``range(n)``; the first is the identity."""
    rng = np.random.default_rng(seed)
    perms = np.tile(np.arange(n), (count, 1))
    if count > 1:
        perms[1:] = rng.permuted(perms[1:], axis=1)
    return perms


def cumulative_variance_trajectories(records, reorderings_count: int = 1000, seed: int = 0,
                                     column: str = "p_est") -> TrajectorySet:
    """Across-circuit variance of running means, per realization ordering.

    ``records`` is a RecordTable or a ``(k, N)`` array. All circuits share the
    same permutation within a reordering. Variance uses 1/k normalization.
    """
    p = _as_grid(records, column)
    if reorderings_count < 1:
        raise InvalidArgs("need at least one reordering")
    perms = reorderings(p.shape[1], reorderings_count, seed)
    return TrajectorySet(np.arange(1, p.shape[1] + 1), kernels.cumulative_variances(p, perms))


def _values(trajectory):
    if isinstance(trajectory, TrajectorySet):
        return trajectory.mean
    if isinstance(trajectory, VarianceTrajectory):
        return trajectory.variance
    return np.asarray(trajectory, dtype=float)


def variance_ratio(trajectory) -> float:
    """Initial over final variance."""
    v = _values(trajectory)
    if v[-1] == 0:
        raise DivideByZero("final variance is zero")
    return float(v[0] / v[-1])


def saturation_fit(trajectory, n_min: int = 1):
    """Least-squares ``V(n) = A/n + B``; returns ``(A, B)``."""
    v = _values(trajectory)
    n = np.arange(1, len(v) + 1)
    sel = n >= n_min
    design = np.column_stack([1.0 / n[sel], np.ones(sel.sum())])
    (a, b), *_ = np.linalg.lstsq(design, v[sel], rcond=None)
    return float(a), float(b)


def loglog_slope(trajectory, n_max: int = 20, n_min: int = 1) -> float:
    v = _values(trajectory)
    n = np.arange(1, len(v) + 1)
    sel = (n >= n_min) & (n <= n_max)
    return float(np.polyfit(np.log(n[sel]), np.log(v[sel]), 1)[0])


# ---------------------------------------------------------------------------
# distributions


def gamma_fit(samples):
    """Maximum-likelihood gamma with zero location; returns params and KS statistic."""
    x = np.asarray(samples, dtype=float)
    if len(x) < 2 or np.all(x == x[0]):
        raise InvalidArgs("need at least two distinct samples")
    a, _, scale = sps.gamma.fit(x, floc=0)
    params = GammaParams(float(a), float(scale))
    return params, ks_test(x, params)[0]


def ks_test(samples, params: GammaParams):
    """Kolmogorov-Smirnov statistic and p-value against ``params``."""
    res = sps.kstest(np.asarray(samples, dtype=float), "gamma", args=(params.alpha, 0, params.beta))
    return float(res.statistic), float(res.pvalue)


def renormalized_gamma(params: GammaParams, edges, k: int) -> np.ndarray:
    """Expected histogram counts for ``k`` samples in the given bins."""
    cdf = params.dist().cdf(np.asarray(edges, dtype=float))
    return k * np.diff(cdf)


def gamma_density_samples(params: GammaParams, x, bin_width: float, k: int) -> np.ndarray:
    """Density at ``x`` scaled to counts per bin (``bin_width * k``)."""
    return params.dist().pdf(np.asarray(x, dtype=float)) * bin_width * k
