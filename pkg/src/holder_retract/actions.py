"""Uniformly Lipschitzian semigroup actions on convex bodies.

Finite-semigroup actions store one map per element. Actions of the naturals
store the generator ``T`` and evaluate ``T^t``, either in closed form or by
repeated composition.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .geometry import (
    Ball,
    ConvexBody,
    Ellipsoid,
    as_vector,
    body_contains_body,
    contains,
    diameter,
    is_linearly_invariant,
    project,
    sample,
)
from .semigroups import FiniteSemigroup, IndexSet, Naturals, cyclic_group

INVOLUTION_TOL = 1e-10

Map = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class LipschitzAction:
    """A family ``{T_t}`` indexed by a finite semigroup or by the naturals.

    ``maps[i]`` is ``T`` of element ``i`` for finite index sets. For the
    naturals ``generator`` is ``T_1``; ``power(t, x)`` may give ``T_t x`` in
    closed form, and must broadcast over a column of exponents ``t``.
    """

    index: IndexSet
    body: ConvexBody
    declared_k: float
    family: str
    params: dict = field(default_factory=dict)
    maps: tuple[Map, ...] = ()
    generator: Map | None = None
    power: Callable[[int, np.ndarray], np.ndarray] | None = None
    matrices: tuple[np.ndarray, ...] | None = None
    fixed_point_sampler: Callable[[np.random.Generator], np.ndarray] | None = None

    @property
    def dimension(self) -> int:
        return self.body.dimension

    @property
    def is_finite(self) -> bool:
        return isinstance(self.index, FiniteSemigroup)

    def elements(self, window: int = 8) -> list[int]:
        if self.is_finite:
            return list(range(self.index.order))
        return list(range(1, window + 1))

    def evaluate(self, t, x) -> np.ndarray:
        x = as_vector(x, self.dimension)
        if self.is_finite:
            return np.asarray(self.maps[self.index.index(t)](x), dtype=float)
        t = int(t)
        if t < 1:
            raise KeyError(f"natural index must be >= 1, got {t}")
        if self.power is not None:
            return np.asarray(self.power(t, x), dtype=float)
        for _ in range(t):
            x = self.generator(x)
        return np.asarray(x, dtype=float)

    def orbit(self, elements: Sequence[int], x) -> np.ndarray:
        """Stack of ``T_t x`` for ``t`` in ``elements``."""
        x = as_vector(x, self.dimension)
        if self.is_finite:
            if self.matrices is not None:
                return np.stack([self.matrices[t] @ x for t in elements])
            return np.stack([self.maps[t](x) for t in elements])
        if self.power is not None:
            return np.asarray(self.power(np.asarray(elements, dtype=int)[:, None], x), dtype=float)
        # ascending powers by repeated composition
        order = np.argsort(elements)
        out = np.empty((len(elements), x.size))
        cur, n = x, 0
        for i in order:
            t = int(elements[i])
            while n < t:
                cur = self.generator(cur)
                n += 1
            out[i] = cur
        return out

    def product(self, t, s) -> int:
        return self.index.product(t, s)


def _operator_norm(A: np.ndarray) -> float:
    return float(np.linalg.norm(A, 2))


def _linear_maps(mats) -> tuple[Map, ...]:
    return tuple((lambda x, M=M: M @ x) for M in mats)


def involution_action(A, body: ConvexBody) -> LipschitzAction:
    """Z_2 = {e, a} acting by the identity and by the involution ``A``."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    d = body.dimension
    if A.shape != (d, d):
        raise ValueError(f"matrix must be {d}x{d}")
    if np.linalg.norm(A @ A - np.eye(d)) > INVOLUTION_TOL:
        raise ValueError("matrix is not an involution (A^2 != I)")
    if not is_linearly_invariant(body, A):
        raise ValueError("body is not invariant under the involution")
    mats = (np.eye(d), A)
    return LipschitzAction(
        index=cyclic_group(2),
        body=body,
        declared_k=max(1.0, _operator_norm(A)),
        family="involution",
        params={"matrix": A.tolist()},
        maps=_linear_maps(mats),
        matrices=mats,
        fixed_point_sampler=_linear_fixed_sampler(body, (np.eye(d) + A) / 2),
    )


def shear_involution_action(shear: float, radius: float = 1.0) -> LipschitzAction:
    """``A = S diag(1, -1) S^{-1}`` with ``S = [[1, shear], [0, 1]]`` on the S-ellipsoid."""
    S = np.array([[1.0, shear], [0.0, 1.0]])
    A = S @ np.diag([1.0, -1.0]) @ np.linalg.inv(S)
    action = involution_action(A, Ellipsoid(S, radius))
    return replace(action, params={**action.params, "shear": shear})


def random_isometric_action(dimension: int, rng: np.random.Generator, order: int | None = None) -> LipschitzAction:
    """Orthogonal involution (order 2) or block-rotation Z_n action on the unit ball."""
    Q, _ = np.linalg.qr(rng.standard_normal((dimension, dimension)))
    body = Ball(np.zeros(dimension), 1.0)
    order = order or int(rng.integers(2, 7))
    if order == 2:
        signs = rng.choice([-1.0, 1.0], size=dimension)
        signs[0] = -1.0
        return involution_action(Q @ np.diag(signs) @ Q.T, body)
    D = np.eye(dimension)
    for i in range(0, dimension - 1, 2):
        if rng.random() < 0.8:
            D[i : i + 2, i : i + 2] = rotation(2 * np.pi * rng.integers(1, order) / order)
    return cyclic_linear_action(Q, D, order, body)


def _linear_fixed_sampler(body, P):
    # P is a projection onto the fixed space commuting with the action, and
    # maps the body into itself
    return lambda rng: P @ sample(body, rng)


def cyclic_linear_action(S_conj, D, n: int, body: ConvexBody | None = None, radius: float = 1.0) -> LipschitzAction:
    """Z_n acting by powers of ``A = S D S^{-1}`` with ``D^n = I``.

    ``body`` defaults to the ellipsoid ``S_conj`` applied to a ball.
    """
    S = np.atleast_2d(np.asarray(S_conj, dtype=float))
    D = np.atleast_2d(np.asarray(D, dtype=float))
    d = S.shape[0]
    if np.linalg.cond(S) > 1e12:
        raise ValueError("conjugating matrix must be invertible")
    if np.linalg.norm(np.linalg.matrix_power(D, n) - np.eye(d)) > INVOLUTION_TOL:
        raise ValueError(f"D^{n} != I")
    if body is None:
        body = Ellipsoid(S, radius)
    A = S @ D @ np.linalg.inv(S)
    mats = tuple(np.linalg.matrix_power(A, m) for m in range(n))
    for M in mats[1:]:
        if not is_linearly_invariant(body, M):
            raise ValueError("body is not invariant under the action")
    P = sum(mats) / n
    return LipschitzAction(
        index=cyclic_group(n),
        body=body,
        declared_k=max(_operator_norm(M) for M in mats),
        family="cyclic",
        params={"conjugator": S.tolist(), "D": D.tolist(), "n": n},
        maps=_linear_maps(mats),
        matrices=mats,
        fixed_point_sampler=_linear_fixed_sampler(body, P),
    )


def rotation(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]])


def _twist(x: np.ndarray, beta: float, sign: float) -> np.ndarray:
    r = np.linalg.norm(x)
    c, s = np.cos(sign * beta * r), np.sin(sign * beta * r)
    y = x.copy()
    y[0], y[1] = c * x[0] - s * x[1], s * x[0] + c * x[1]
    return y


def twist_lipschitz(a: float) -> float:
    """Largest singular value of ``I + a w v^T`` for orthonormal ``w, v``."""
    return 0.5 * (a + np.sqrt(a * a + 4.0))


def twisted_involution_action(beta: float, radius: float = 1.0, dimension: int = 2, D=None) -> LipschitzAction:
    """Z_2 acting by the nonlinear involution ``g^{-1} D g`` on a centered ball.

    ``g`` rotates the first coordinate plane by the angle ``beta |x|``; it
    preserves every sphere about the origin, so the ball is invariant, and
    ``g`` and ``g^{-1}`` are both ``twist_lipschitz(beta * radius)``-Lipschitz
    on the ball. ``D`` defaults to the reflection ``diag(1, -1, 1, ...)``.
    """
    if dimension < 2:
        raise ValueError("twisted involution needs dimension >= 2")
    D = np.diag([1.0, -1.0] + [1.0] * (dimension - 2)) if D is None else np.asarray(D, dtype=float)
    if np.linalg.norm(D @ D - np.eye(dimension)) > INVOLUTION_TOL or np.linalg.norm(D.T @ D - np.eye(dimension)) > INVOLUTION_TOL:
        raise ValueError("D must be an orthogonal involution")
    body = Ball(np.zeros(dimension), radius)
    lip = twist_lipschitz(abs(beta) * radius)

    def T(x):
        return _twist(D @ _twist(x, beta, 1.0), beta, -1.0)

    def fixed(rng):
        # g^{-1} of a fixed point of D
        y = sample(body, rng)
        return _twist((y + D @ y) / 2, beta, -1.0)

    return LipschitzAction(
        index=cyclic_group(2),
        body=body,
        declared_k=max(1.0, lip * lip),
        family="twisted_involution",
        params={"beta": beta, "radius": radius, "dimension": dimension, "D": D.tolist()},
        maps=(lambda x: x.copy(), T),
        fixed_point_sampler=fixed,
    )


def contraction_action(p, q: float, body: ConvexBody) -> LipschitzAction:
    """Naturals acting by ``T^t x = p + q^t (x - p)``."""
    p = as_vector(p, body.dimension)
    if not 0 < q < 1:
        raise ValueError("contraction factor must lie in (0, 1)")
    if not contains(body, p):
        raise ValueError("anchor point must lie in the body")
    return LipschitzAction(
        index=Naturals(),
        body=body,
        declared_k=float(q),
        family="contraction",
        params={"p": p.tolist(), "q": q},
        generator=lambda x: p + q * (x - p),
        power=lambda t, x: p + q ** np.asarray(t, dtype=float) * (x - p),
        fixed_point_sampler=lambda rng: p.copy(),
    )


@dataclass(frozen=True, eq=False)
class PointSet:
    points: np.ndarray

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        object.__setattr__(self, "points", pts)

    @property
    def dimension(self) -> int:
        return self.points.shape[1]


def distance_to(F, x) -> float:
    if isinstance(F, PointSet):
        return float(np.min(np.linalg.norm(F.points - x, axis=1)))
    return float(np.linalg.norm(project(F, x) - x))


def dist_perturbation_map(F, z, eps: float, body: ConvexBody) -> LipschitzAction:
    """Naturals acting by powers of ``T x = x + eps dist(x, F) (z - x)``.

    ``F`` is a convex body or a ``PointSet`` inside ``body``. ``T`` fixes
    exactly ``F``. ``declared_k`` is the empirical sup over a short power
    window; no analytic uniform bound is claimed.
    """
    z = as_vector(z, body.dimension)
    if eps <= 0:
        raise ValueError("eps must be positive")
    if distance_to(F, z) > 1e-12:
        raise ValueError("z must belong to F")
    inside = all(contains(body, p) for p in F.points) if isinstance(F, PointSet) else body_contains_body(body, F)
    if not inside:
        raise ValueError("F must lie inside the body")
    if eps * diameter(body) > 1:
        # x + eps d (z - x) is then not a convex combination of x and z
        raise ValueError("eps * diam(body) must be <= 1 to keep the body invariant")

    def T(x):
        return x + eps * distance_to(F, x) * (z - x)

    def fixed(rng):
        if isinstance(F, PointSet):
            return F.points[rng.integers(len(F.points))].copy()
        return sample(F, rng)

    action = LipschitzAction(
        index=Naturals(),
        body=body,
        declared_k=float("nan"),
        family="dist_perturbation",
        params={"eps": eps, "z": z.tolist()},
        generator=T,
        fixed_point_sampler=fixed,
    )
    k = estimate_uniform_lipschitz(action, samples=200, seed=0, window=8)
    return _replace(action, declared_k=k)


def _replace(action: LipschitzAction, **changes) -> LipschitzAction:
    return replace(action, **changes)


def with_index(action: LipschitzAction, index: IndexSet) -> LipschitzAction:
    """Same maps over a different (possibly corrupted) index table."""
    return _replace(action, index=index)


def check_homomorphism(action: LipschitzAction, samples: int, seed, window: int = 6) -> float:
    """max ||T_{ts} x - T_t T_s x|| over sampled ``(t, s, x)``."""
    rng = np.random.default_rng(seed)
    elems = action.elements(window)
    worst = 0.0
    for _ in range(samples):
        t, s = rng.choice(elems), rng.choice(elems)
        x = sample(action.body, rng)
        lhs = action.evaluate(action.product(t, s), x)
        rhs = action.evaluate(t, action.evaluate(s, x))
        worst = max(worst, float(np.linalg.norm(lhs - rhs)))
    return worst


def check_domain_invariance(action: LipschitzAction, samples: int, seed, window: int = 6) -> float:
    """max ||P_C(T_t x) - T_t x|| over sampled ``(t, x)``."""
    rng = np.random.default_rng(seed)
    elems = action.elements(window)
    worst = 0.0
    for _ in range(samples):
        t = rng.choice(elems)
        y = action.evaluate(t, sample(action.body, rng))
        worst = max(worst, float(np.linalg.norm(project(action.body, y) - y)))
    return worst


def estimate_uniform_lipschitz(action: LipschitzAction, samples: int, seed, window: int = 6) -> float:
    """Empirical max of ||T_t x - T_t y|| / ||x - y|| over sampled ``(t, x, y)``.

    Half of the pairs are short (relative separation down to 1e-4) so local
    stretching is probed as well as global.
    """
    rng = np.random.default_rng(seed)
    elems = action.elements(window)
    scale = diameter(action.body)
    best = 0.0
    for i in range(samples):
        t = rng.choice(elems)
        x = sample(action.body, rng)
        if i % 2:
            step = rng.standard_normal(action.dimension)
            y = project(action.body, x + step / np.linalg.norm(step) * scale * 10 ** rng.uniform(-4, -1))
        else:
            y = sample(action.body, rng)
        dxy = np.linalg.norm(x - y)
        if dxy == 0:
            continue
        best = max(best, float(np.linalg.norm(action.evaluate(t, x) - action.evaluate(t, y)) / dxy))
    return best
