"""Hoelder exponent and constant, empirical Hoelder checks, decay fits, thresholds."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect

from .geometry import ConvexBody, diameter, project, sample

SQRT2 = math.sqrt(2.0)
CONSTANT_CAP = 1e12
BISECTION_TOL = 1e-12
BISECTION_MAXITER = 200


def _check_k(k: float) -> None:
    if not 1.0 < k < SQRT2:
        raise ValueError(f"k must lie in (1, sqrt 2), got {k}")


def holder_exponent(k: float) -> float:
    """alpha = 1 / (1 - log_{k^2-1} k)."""
    _check_k(k)
    gamma = k * k - 1.0
    return 1.0 / (1.0 - math.log(k) / math.log(gamma))


def holder_constant(k: float, diam: float) -> float:
    """c = k + 8 diam / (2 - k^2); ``inf`` once it exceeds ``CONSTANT_CAP``."""
    if k * k >= 2.0:
        raise ValueError(f"k^2 must be < 2, got k = {k}")
    if k <= 1.0:
        raise ValueError(f"k must exceed 1, got {k}")
    if diam <= 0:
        raise ValueError("diameter must be positive")
    c = k + 8.0 * diam / (2.0 - k * k)
    return math.inf if c > CONSTANT_CAP else c


def holder_bound(dist: np.ndarray, alpha: float, c: float, diam: float) -> np.ndarray:
    """c * diam * (dist / diam)^alpha: the Hoelder bound with distances in diameter units."""
    return c * diam * (np.asarray(dist) / diam) ** alpha


@dataclass
class HolderEstimate:
    alpha_theory: float
    c_theory: float
    alpha_empirical: float
    worst_ratio: float
    pairs_tested: int
    passed: bool
    pairs: np.ndarray | None = None

    def as_dict(self) -> dict:
        return {
            "alpha_theory": self.alpha_theory,
            "c_theory": self.c_theory,
            "alpha_empirical": self.alpha_empirical,
            "worst_ratio": self.worst_ratio,
            "pairs_tested": self.pairs_tested,
            "passed": self.passed,
        }


def sample_pairs(body: ConvexBody, pairs: int, rng: np.random.Generator):
    """Half independent pairs, half short pairs with log-uniform separation."""
    scale = diameter(body)
    for i in range(pairs):
        x = sample(body, rng)
        if i % 2:
            step = rng.standard_normal(body.dimension)
            y = project(body, x + step / np.linalg.norm(step) * scale * 10 ** rng.uniform(-6, 0))
        else:
            y = sample(body, rng)
        yield x, y


def check_holder(R, body: ConvexBody, k: float, pairs: int, seed, tol: float = 1e-6) -> HolderEstimate:
    """Test d(Rx, Ry) <= c diam (d(x, y) / diam)^alpha on sampled pairs.

    ``alpha_empirical`` is the slope of the 95th-percentile regression line
    of log d(Rx, Ry) on log d(x, y).
    """
    alpha = holder_exponent(k)
    diam = diameter(body)
    c = holder_constant(k, diam)
    rng = np.random.default_rng(seed)
    rows = []
    for x, y in sample_pairs(body, pairs, rng):
        d = float(np.linalg.norm(x - y))
        if d == 0.0:
            continue
        rows.append((d, float(np.linalg.norm(R(x) - R(y)))))
    data = np.array(rows).reshape(-1, 2)
    ratios = data[:, 1] / holder_bound(data[:, 0], alpha, c, diam)
    worst = float(ratios.max()) if len(ratios) else 0.0
    return HolderEstimate(
        alpha_theory=alpha,
        c_theory=c,
        alpha_empirical=_quantile_slope(data),
        worst_ratio=worst,
        pairs_tested=len(data),
        passed=worst <= 1.0 + tol,
        pairs=data,
    )


def _quantile_slope(data: np.ndarray, q: float = 0.95) -> float:
    mask = (data[:, 0] > 0) & (data[:, 1] > 0)
    if mask.sum() < 3:
        return float("nan")
    import statsmodels.api as sm

    X = sm.add_constant(np.log(data[mask, 0]))
    fit = sm.QuantReg(np.log(data[mask, 1]), X).fit(q=q)
    return float(fit.params[1])


@dataclass
class DecayFit:
    fittable: bool
    ratio: float
    slope: float
    points: int

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def decay_rate_fit(residuals, floor: float = 1e-24) -> DecayFit:
    """Least-squares slope of log residual against iteration index.

    Residuals at or below ``floor`` times the initial residual are rounding
    noise and are dropped; fewer than four remaining points is not fittable.
    """
    r = np.asarray(getattr(residuals, "residuals", residuals), dtype=float)
    if len(r) == 0 or r[0] <= 0:
        return DecayFit(False, float("nan"), float("nan"), 0)
    keep = r > floor * r[0]
    # use the leading run only: once residuals hit the floor they stay there
    stop = int(np.argmin(keep)) if not keep.all() else len(r)
    n = np.arange(stop)
    if stop < 4:
        return DecayFit(False, float("nan"), float("nan"), stop)
    slope = float(np.polyfit(n, np.log(r[:stop]), 1)[0])
    return DecayFit(True, math.exp(slope), slope, stop)


def hilbert_modulus(eps: float) -> float:
    """Modulus of convexity of a Hilbert space, 1 - sqrt(1 - eps^2 / 4)."""
    if not 0.0 <= eps <= 2.0:
        raise ValueError(f"eps must lie in [0, 2], got {eps}")
    return 1.0 - math.sqrt(1.0 - eps * eps / 4.0)


def goebel_kirk_condition(k: float) -> float:
    """k (1 - delta(1/k)) - 1; negative where the fixed point condition holds."""
    return k * (1.0 - hilbert_modulus(1.0 / k)) - 1.0


def goebel_kirk_threshold() -> float:
    return bisect(goebel_kirk_condition, 1.0, 2.0, xtol=BISECTION_TOL, rtol=4 * np.finfo(float).eps, maxiter=BISECTION_MAXITER)


def lifschitz_threshold() -> float:
    return SQRT2


def min_iterations(tol: float, k: float, diam: float) -> int:
    """Smallest n >= 0 with 4 (k^2 - 1)^n diam^2 <= tol^2."""
    _check_k(k)
    if tol <= 0 or diam <= 0:
        raise ValueError("tol and diam must be positive")
    gamma = k * k - 1.0
    target = tol * tol / (4.0 * diam * diam)
    if target >= 1.0:
        return 0
    n = max(0, math.ceil(math.log(target) / math.log(gamma)))
    # guard the ceiling against rounding in the logs
    while n > 0 and 4.0 * gamma ** (n - 1) * diam * diam <= tol * tol:
        n -= 1
    while 4.0 * gamma**n * diam * diam > tol * tol:
        n += 1
    return n
