"""Euclidean primitives and bounded closed convex bodies in R^d."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

PROJECTION_TOL = 1e-12
_NEWTON_MAX_ITER = 200


def as_vector(x, dim: int | None = None) -> np.ndarray:
    v = np.asarray(x, dtype=float).reshape(-1)
    if v.size == 0:
        raise ValueError("vector must have dimension >= 1")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"vector has non-finite entries: {v}")
    if dim is not None and v.size != dim:
        raise ValueError(f"dimension mismatch: expected {dim}, got {v.size}")
    return v


def inner(x, y) -> float:
    x = as_vector(x)
    y = as_vector(y, x.size)
    return float(x @ y)


def norm(x) -> float:
    return float(np.linalg.norm(x))


@dataclass(frozen=True, eq=False)
class Ball:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_vector(self.center))
        if not (np.isfinite(self.radius) and self.radius > 0):
            raise ValueError("ball radius must be finite and positive")
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dimension(self) -> int:
        return self.center.size


@dataclass(frozen=True, eq=False)
class Box:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = as_vector(self.lower)
        hi = as_vector(self.upper, lo.size)
        if np.any(hi <= lo):
            raise ValueError("box edges must be positive")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dimension(self) -> int:
        return self.lower.size

    def vertices(self) -> np.ndarray:
        d = self.dimension
        bits = (np.arange(2**d)[:, None] >> np.arange(d)) & 1
        return np.where(bits == 1, self.upper, self.lower)


@dataclass(frozen=True, eq=False)
class Ellipsoid:
    """The set ``center + S u`` with ``|u| <= radius``."""

    shape: np.ndarray
    radius: float
    center: np.ndarray = field(default=None)
    _inv: np.ndarray = field(init=False, repr=False)
    _q: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        S = np.atleast_2d(np.asarray(self.shape, dtype=float))
        if S.shape[0] != S.shape[1] or not np.all(np.isfinite(S)):
            raise ValueError("ellipsoid shape matrix must be square and finite")
        if np.linalg.cond(S) > 1e12:
            raise ValueError("ellipsoid shape matrix must be invertible")
        if not (np.isfinite(self.radius) and self.radius > 0):
            raise ValueError("ellipsoid radius must be finite and positive")
        c = np.zeros(S.shape[0]) if self.center is None else as_vector(self.center, S.shape[0])
        inv = np.linalg.inv(S)
        object.__setattr__(self, "shape", S)
        object.__setattr__(self, "radius", float(self.radius))
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "_inv", inv)
        # membership quadratic form: (x-c)^T Q (x-c) <= r^2
        object.__setattr__(self, "_q", inv.T @ inv)

    @property
    def dimension(self) -> int:
        return self.shape.shape[0]

    def gauge(self, x: np.ndarray) -> float:
        return float(np.linalg.norm(self._inv @ (x - self.center)))


ConvexBody = Union[Ball, Box, Ellipsoid]


def project(body: ConvexBody, x) -> np.ndarray:
    """Nearest point of ``body`` to ``x`` in the Euclidean norm."""
    x = as_vector(x, body.dimension)
    if isinstance(body, Ball):
        r = x - body.center
        n = np.linalg.norm(r)
        if n <= body.radius:
            return x.copy()
        return body.center + r * (body.radius / n)
    if isinstance(body, Box):
        return np.clip(x, body.lower, body.upper)
    if isinstance(body, Ellipsoid):
        return _project_ellipsoid(body, x)
    raise TypeError(f"unsupported body {type(body).__name__}")


def _project_ellipsoid(body: Ellipsoid, x: np.ndarray) -> np.ndarray:
    y = x - body.center
    r2 = body.radius**2
    if y @ body._q @ y <= r2:
        return x.copy()
    # KKT: z = (I + lam Q)^{-1} y with z^T Q z = r^2; work in the eigenbasis of Q
    w, V = np.linalg.eigh(body._q)
    b = V.T @ y

    def phi(lam):
        z = b / (1.0 + lam * w)
        return float(np.sum(w * z * z)) - r2

    lo, hi = 0.0, 1.0
    while phi(hi) > 0:
        hi *= 2.0
    lam = 0.5 * (lo + hi)
    for _ in range(_NEWTON_MAX_ITER):
        val = phi(lam)
        if val > 0:
            lo = lam
        else:
            hi = lam
        deriv = -2.0 * float(np.sum(w * w * b * b / (1.0 + lam * w) ** 3))
        step = lam - val / deriv if deriv != 0 else 0.5 * (lo + hi)
        lam = step if lo < step < hi else 0.5 * (lo + hi)
        if hi - lo <= PROJECTION_TOL * max(1.0, hi) or abs(val) <= PROJECTION_TOL * r2:
            break
    z = V @ (b / (1.0 + lam * w))
    # pull onto the boundary from the outside-rounding side
    g = np.sqrt(z @ body._q @ z)
    if g > body.radius:
        z *= body.radius / g
    return body.center + z


def contains(body: ConvexBody, x, tol: float = 1e-9) -> bool:
    x = as_vector(x, body.dimension)
    return bool(np.linalg.norm(project(body, x) - x) <= tol)


def diameter(body: ConvexBody) -> float:
    if isinstance(body, Ball):
        return 2.0 * body.radius
    if isinstance(body, Box):
        return float(np.linalg.norm(body.upper - body.lower))
    if isinstance(body, Ellipsoid):
        return 2.0 * body.radius * float(np.linalg.svd(body.shape, compute_uv=False)[0])
    raise TypeError(f"unsupported body {type(body).__name__}")


def antipodal_pair(body: ConvexBody) -> tuple[np.ndarray, np.ndarray]:
    """Two points of ``body`` realizing its diameter."""
    if isinstance(body, Ball):
        e = np.zeros(body.dimension)
        e[0] = body.radius
        return body.center + e, body.center - e
    if isinstance(body, Box):
        return body.lower.copy(), body.upper.copy()
    if isinstance(body, Ellipsoid):
        _, _, vt = np.linalg.svd(body.shape)
        u = body.radius * vt[0]
        return body.center + body.shape @ u, body.center - body.shape @ u
    raise TypeError(f"unsupported body {type(body).__name__}")


def sample(body: ConvexBody, seed) -> np.ndarray:
    """Deterministic pseudo-random point of ``body``.

    ``seed`` may be an int or a ``numpy.random.Generator`` (consumed in place).
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    d = body.dimension
    if isinstance(body, Box):
        return body.lower + rng.random(d) * (body.upper - body.lower)
    # uniform in the unit ball, then mapped
    g = rng.standard_normal(d)
    u = g / np.linalg.norm(g) * rng.random() ** (1.0 / d)
    if isinstance(body, Ball):
        return body.center + body.radius * u
    return body.center + body.shape @ (body.radius * u)


def sample_many(body: ConvexBody, count: int, seed) -> np.ndarray:
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return np.array([sample(body, rng) for _ in range(count)])


def boundary_points(body: ConvexBody, count: int, seed=0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    d = body.dimension
    if isinstance(body, Box):
        return body.vertices()
    g = rng.standard_normal((count, d))
    u = g / np.linalg.norm(g, axis=1, keepdims=True)
    if isinstance(body, Ball):
        return body.center + body.radius * u
    return body.center + (body.radius * u) @ body.shape.T


def is_linearly_invariant(body: ConvexBody, A: np.ndarray, tol: float = 1e-10) -> bool:
    """Whether ``A @ body`` is contained in ``body``."""
    A = np.asarray(A, dtype=float)
    if isinstance(body, Box):
        return all(contains(body, A @ v, tol) for v in body.vertices())
    if isinstance(body, Ball):
        S_inv, S = np.eye(body.dimension) / body.radius, np.eye(body.dimension) * body.radius
        c, r = body.center, 1.0
    else:
        S_inv, S, c, r = body._inv, body.shape, body.center, body.radius
    # A(c + S u) in body for all |u| <= r
    shift = np.linalg.norm(S_inv @ (A @ c - c))
    spread = np.linalg.norm(S_inv @ A @ S, 2)
    return bool(shift + r * spread <= r * (1.0 + tol))


def body_contains_body(outer: ConvexBody, inner_body: ConvexBody, tol: float = 1e-9) -> bool:
    """Containment test; exact for boxes, sampled on 4096 boundary points otherwise."""
    pts = boundary_points(inner_body, 4096)
    return all(contains(outer, p, tol) for p in pts)
