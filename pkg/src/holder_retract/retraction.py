"""The mean-averaged map and the iteration converging to the retraction."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .actions import LipschitzAction
from .analysis import min_iterations
from .geometry import as_vector, diameter, project, sample
from .semigroups import FiniteSemigroup, Mean, Naturals

DEFAULT_MAX_ITER = 1000
SQRT2 = math.sqrt(2.0)


class DivergenceError(ArithmeticError):
    def __init__(self, index: int, iterate):
        self.index = index
        self.iterate = iterate
        super().__init__(f"non-finite iterate at index {index}: {iterate}")


def _check_compatible(action: LipschitzAction, mean: Mean) -> None:
    if isinstance(action.index, FiniteSemigroup):
        ok = isinstance(mean.domain, FiniteSemigroup) and mean.domain.order == action.index.order
    else:
        ok = isinstance(mean.domain, Naturals)
    if not ok:
        raise ValueError("mean and action are indexed by different semigroups")


def averaged_map(action: LipschitzAction, mean: Mean, x) -> np.ndarray:
    """sum_t mu_t T_t x, the barycenter of the orbit under the mean."""
    _check_compatible(action, mean)
    return mean.weights @ action.orbit(mean.support, x)


def residual(action: LipschitzAction, mean: Mean, x) -> float:
    """sum_t mu_t ||T_t x - x||^2."""
    _check_compatible(action, mean)
    x = as_vector(x, action.dimension)
    diffs = action.orbit(mean.support, x) - x
    return float(mean.weights @ np.einsum("ij,ij->i", diffs, diffs))


def theoretical_iterations(tol: float, k: float, diam: float) -> int | None:
    """Smallest n with 4 (k^2 - 1)^n diam^2 <= tol^2, or None if k is outside (1, sqrt 2)."""
    if not 1.0 < k < SQRT2:
        return None
    return min_iterations(tol, k, diam)


def default_max_iter(action: LipschitzAction, tol: float) -> int:
    n_star = theoretical_iterations(tol, action.declared_k, diameter(action.body))
    return DEFAULT_MAX_ITER if n_star is None else max(2 * n_star, 10)


@dataclass
class RetractionTrace:
    iterates: list[np.ndarray]
    gaps: list[float]
    residuals: list[float]
    converged: bool
    iterations_used: int
    limit: np.ndarray = field(init=False)

    def __post_init__(self):
        self.limit = self.iterates[-1]

    def summary(self) -> dict:
        return {
            "converged": self.converged,
            "iterations_used": self.iterations_used,
            "limit": [float(v) for v in self.limit],
            "final_gap": float(self.gaps[-1]) if self.gaps else 0.0,
            "final_residual": float(self.residuals[-1]),
        }

    def rows(self):
        """(n, gap, residual, *coords) rows; gap of the last iterate is blank."""
        for n, x in enumerate(self.iterates):
            gap = self.gaps[n] if n < len(self.gaps) else ""
            yield [n, gap, self.residuals[n], *x.tolist()]


def iterate_retraction(action: LipschitzAction, mean: Mean, x0, tol: float, max_iter: int | None = None) -> RetractionTrace:
    """Run x_{n+1} = Tbar x_n from ``x0`` until the step is at most ``tol``.

    Each iterate is projected back onto the body to absorb rounding.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    x = as_vector(x0, action.dimension)
    if max_iter is None:
        max_iter = default_max_iter(action, tol)
    iterates = [x]
    residuals = [residual(action, mean, x)]
    gaps: list[float] = []
    if residuals[0] == 0.0:
        return RetractionTrace(iterates, gaps, residuals, True, 0)
    converged = False
    for n in range(max_iter):
        y = averaged_map(action, mean, x)
        if not np.all(np.isfinite(y)):
            raise DivergenceError(n + 1, y)
        y = project(action.body, y)
        gaps.append(float(np.linalg.norm(y - x)))
        iterates.append(y)
        residuals.append(residual(action, mean, y))
        x = y
        if gaps[-1] <= tol:
            converged = True
            break
    return RetractionTrace(iterates, gaps, residuals, converged, len(gaps))


class Retraction:
    """x -> lim Tbar^n x, evaluated by ``iterate_retraction``."""

    def __init__(self, action: LipschitzAction, mean: Mean, tol: float, max_iter: int | None = None):
        _check_compatible(action, mean)
        self.action = action
        self.mean = mean
        self.tol = tol
        self.max_iter = max_iter

    def trace(self, x) -> RetractionTrace:
        return iterate_retraction(self.action, self.mean, x, self.tol, self.max_iter)

    def __call__(self, x) -> np.ndarray:
        return self.trace(x).limit


def build_retraction(action: LipschitzAction, mean: Mean, tol: float, max_iter: int | None = None) -> Retraction:
    return Retraction(action, mean, tol, max_iter)


@dataclass
class RetractionReport:
    fix_defect: float
    idempotence_defect: float
    identity_defect: float
    mean_defect: float
    allowance: float
    samples: int
    passed: bool

    def as_dict(self) -> dict:
        return {k: (float(v) if isinstance(v, (float, np.floating)) else v) for k, v in self.__dict__.items()}


def verify_retraction(R: Retraction, action: LipschitzAction, mean: Mean, samples: int, seed, tol: float, window: int = 3) -> RetractionReport:
    """Check T_s R = R, R R = R and R = id on Fix over sampled points.

    Foelner-window means get the allowance ``tol + k * defect * diam(C)``,
    the bound on how far a non-invariant mean can move any mean value. A
    non-invariant mean on a finite semigroup gets no allowance.
    """
    rng = np.random.default_rng(seed)
    elems = action.elements(window)
    fix = idem = ident = 0.0
    for _ in range(samples):
        x = sample(action.body, rng)
        rx = R(x)
        for s in elems:
            fix = max(fix, float(np.linalg.norm(action.evaluate(s, rx) - rx)))
        idem = max(idem, float(np.linalg.norm(R(rx) - rx)))
        if action.fixed_point_sampler is not None:
            f = action.fixed_point_sampler(rng)
        else:
            f = rx
        ident = max(ident, float(np.linalg.norm(R(f) - f)))
    k = action.declared_k if np.isfinite(action.declared_k) else 1.0
    allowance = tol if mean.exact or not isinstance(mean.domain, Naturals) else tol + max(k, 1.0) * mean.defect * diameter(action.body)
    passed = max(fix, idem, ident) <= allowance
    return RetractionReport(fix, idem, ident, float(mean.defect), allowance, samples, passed)
