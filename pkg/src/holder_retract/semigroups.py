"""Finite semigroups, Foelner windows of the naturals, and invariant means."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from scipy.optimize import linprog

DEFECT_TOL = 1e-9


class AssociativityError(ValueError):
    def __init__(self, witness: tuple[int, int, int], labels: Sequence[str]):
        a, b, c = witness
        self.witness = witness
        super().__init__(
            f"table is not associative: ({labels[a]}{labels[b]}){labels[c]} != "
            f"{labels[a]}({labels[b]}{labels[c]}) for witness {witness}"
        )


class FeasibilityError(RuntimeError):
    """The LP kernel failed for numerical reasons (not infeasibility)."""


@dataclass(frozen=True, eq=False)
class FiniteSemigroup:
    labels: tuple[str, ...]
    table: np.ndarray

    def __post_init__(self):
        table = np.asarray(self.table)
        n = len(self.labels)
        if table.shape != (n, n):
            raise ValueError(f"table must be {n}x{n}, got shape {table.shape}")
        if not np.issubdtype(table.dtype, np.integer):
            if not np.all(table == np.round(table)):
                raise ValueError("table entries must be integers")
            table = table.astype(int)
        if n == 0 or table.min() < 0 or table.max() >= n:
            raise ValueError("table entries must be element indices in range")
        table = table.astype(int)
        table.setflags(write=False)
        object.__setattr__(self, "labels", tuple(str(x) for x in self.labels))
        object.__setattr__(self, "table", table)

    @property
    def order(self) -> int:
        return len(self.labels)

    def index(self, s) -> int:
        if isinstance(s, (int, np.integer)) and not isinstance(s, bool):
            if 0 <= s < self.order:
                return int(s)
        elif s in self.labels:
            return self.labels.index(s)
        raise KeyError(f"unknown semigroup element {s!r}")

    def product(self, s, t) -> int:
        return int(self.table[self.index(s), self.index(t)])

    def associativity_witness(self) -> tuple[int, int, int] | None:
        T = self.table
        # (ab)c vs a(bc) over all triples at once
        lhs = T[T[:, :, None], np.arange(self.order)[None, None, :]]
        rhs = T[np.arange(self.order)[:, None, None], T[None, :, :]]
        bad = np.argwhere(lhs != rhs)
        return tuple(int(i) for i in bad[0]) if len(bad) else None

    def is_commutative(self) -> bool:
        return bool(np.array_equal(self.table, self.table.T))

    def __eq__(self, other):
        return (
            isinstance(other, FiniteSemigroup)
            and self.labels == other.labels
            and np.array_equal(self.table, other.table)
        )

    def __hash__(self):
        return hash((self.labels, self.table.tobytes()))


@dataclass(frozen=True)
class Naturals:
    """The additive semigroup {1, 2, ...}; means live on finite windows."""

    def product(self, s: int, t: int) -> int:
        return int(s) + int(t)


IndexSet = Union[FiniteSemigroup, Naturals]


def validate_table(labels, table) -> FiniteSemigroup:
    """Build a semigroup, checking associativity over all n^3 triples."""
    table = np.asarray(table)
    if labels is None:
        labels = [str(i) for i in range(table.shape[0])]
    S = FiniteSemigroup(tuple(labels), table)
    witness = S.associativity_witness()
    if witness is not None:
        raise AssociativityError(witness, S.labels)
    return S


def cyclic_group(n: int) -> FiniteSemigroup:
    i = np.arange(n)
    return validate_table([f"g{k}" for k in range(n)], (i[:, None] + i[None, :]) % n)


def left_zero(n: int) -> FiniteSemigroup:
    return validate_table([f"s{k}" for k in range(n)], np.repeat(np.arange(n)[:, None], n, axis=1))


def right_zero(n: int) -> FiniteSemigroup:
    return validate_table([f"s{k}" for k in range(n)], np.repeat(np.arange(n)[None, :], n, axis=0))


def random_commutative_table(n: int, rng: np.random.Generator, max_nodes: int = 20000) -> np.ndarray:
    """Random commutative associative n x n table by randomized backtracking."""
    cells = [(i, j) for i in range(n) for j in range(i, n)]
    while True:
        table = -np.ones((n, n), dtype=int)
        nodes = [0]
        if _fill(table, cells, 0, rng, nodes, max_nodes):
            return table


def _consistent(T: np.ndarray) -> bool:
    n = T.shape[0]
    for a, b, c in itertools.product(range(n), repeat=3):
        ab, bc = T[a, b], T[b, c]
        if ab < 0 or bc < 0:
            continue
        l, r = T[ab, c], T[a, bc]
        if l >= 0 and r >= 0 and l != r:
            return False
    return True


def _fill(T, cells, k, rng, nodes, max_nodes) -> bool:
    if k == len(cells):
        return True
    nodes[0] += 1
    if nodes[0] > max_nodes:
        return False
    i, j = cells[k]
    for v in rng.permutation(T.shape[0]):
        T[i, j] = T[j, i] = v
        if _consistent(T) and _fill(T, cells, k + 1, rng, nodes, max_nodes):
            return True
        if nodes[0] > max_nodes:
            break
    T[i, j] = T[j, i] = -1
    return False


def left_translation(S: FiniteSemigroup, s) -> np.ndarray:
    """Matrix of ``f -> l_s f`` with ``(l_s f)(t) = f(st)``.

    The transpose is the action on means: ``(L.T @ mu)(u)`` sums ``mu(t)``
    over ``t`` with ``st = u``.
    """
    i = S.index(s)
    n = S.order
    L = np.zeros((n, n))
    L[np.arange(n), S.table[i]] = 1.0
    return L


@dataclass(frozen=True, eq=False)
class Mean:
    """Probability weights on a finite set of semigroup elements.

    For a finite semigroup ``support`` is ``range(n)`` (element indices); for
    the naturals it is the window ``1..N``.
    """

    domain: IndexSet
    support: tuple[int, ...]
    weights: np.ndarray
    defect: float
    exact: bool

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (len(self.support),):
            raise ValueError("weights and support differ in length")
        if np.any(w < -1e-14) or abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("mean weights must be nonnegative and sum to 1")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "support", tuple(int(t) for t in self.support))

    def pairing(self, f) -> float:
        """mu(f) for f given as values on the support."""
        return float(self.weights @ np.asarray(f, dtype=float))

    def summary(self) -> dict:
        return {
            "weights": [float(w) for w in self.weights],
            "support": list(self.support),
            "defect": float(self.defect),
            "exact": bool(self.exact),
        }


@dataclass(frozen=True)
class Infeasible:
    """No left invariant mean exists; carries the LP status as certificate."""

    status: int
    message: str


def _invariance_constraints(S: FiniteSemigroup) -> np.ndarray:
    n = S.order
    rows = [left_translation(S, s).T - np.eye(n) for s in range(n)]
    return np.vstack(rows)


def translate_mean(S: FiniteSemigroup, s, weights) -> np.ndarray:
    return left_translation(S, s).T @ np.asarray(weights, dtype=float)


def invariance_defect(domain: IndexSet, mean, shifts: Sequence[int] = (1,)) -> float:
    """max_s || L_s^* mu - mu ||_1 over all elements (finite) or ``shifts`` (naturals)."""
    if isinstance(mean, Mean):
        weights, support = mean.weights, mean.support
    else:
        weights = np.asarray(mean, dtype=float)
        support = tuple(range(len(weights))) if isinstance(domain, FiniteSemigroup) else tuple(range(1, len(weights) + 1))
    if isinstance(domain, FiniteSemigroup):
        full = np.zeros(domain.order)
        full[list(support)] = weights
        return max(float(np.abs(translate_mean(domain, s, full) - full).sum()) for s in range(domain.order))
    lo = min(support)
    hi = max(support) + max(shifts)
    worst = 0.0
    for s in shifts:
        a = np.zeros(hi - lo + 1)
        b = np.zeros(hi - lo + 1)
        idx = np.asarray(support) - lo
        a[idx] += weights
        b[idx + s] += weights
        worst = max(worst, float(np.abs(b - a).sum()))
    return worst


def folner_mean(N: int) -> Mean:
    """Uniform Cesaro weights on the window {1, ..., N} of the naturals."""
    if N < 1:
        raise ValueError("window length must be >= 1")
    probe = Mean(Naturals(), tuple(range(1, N + 1)), np.full(N, 1.0 / N), defect=0.0, exact=False)
    # the shift by 1 moves mass 1/N off each end of the window: defect 2/N
    return Mean(probe.domain, probe.support, probe.weights, defect=invariance_defect(Naturals(), probe), exact=False)


def custom_mean(domain: IndexSet, weights, support=None) -> Mean:
    """A user-specified mean; its defect is measured, never assumed."""
    w = np.asarray(weights, dtype=float)
    w = w / w.sum()
    if support is None:
        support = range(len(w)) if isinstance(domain, FiniteSemigroup) else range(1, len(w) + 1)
    probe = Mean(domain, tuple(support), w, defect=0.0, exact=False)
    d = invariance_defect(domain, probe)
    return Mean(domain, probe.support, w, defect=d, exact=d <= DEFECT_TOL)


def solve_left_invariant_mean(S: FiniteSemigroup) -> Mean | Infeasible:
    """Left invariant mean closest to uniform, or ``Infeasible``.

    Feasibility is decided by an LP (mu >= 0, sum mu = 1, L_s^* mu = mu); a
    feasible instance is then canonicalized by projecting the uniform vector
    onto the feasible polytope.
    """
    n = S.order
    B = _invariance_constraints(S)
    A_eq = np.vstack([B, np.ones((1, n))])
    b_eq = np.concatenate([np.zeros(B.shape[0]), [1.0]])
    res = linprog(np.zeros(n), A_eq=A_eq, b_eq=b_eq, bounds=[(0, None)] * n, method="highs")
    if res.status == 2:
        return Infeasible(status=2, message=res.message)
    if res.status != 0:
        raise FeasibilityError(f"LP kernel failed with status {res.status}: {res.message}")
    vertex = np.clip(res.x, 0.0, None)
    vertex /= vertex.sum()
    mu = _canonicalize(A_eq, b_eq, vertex)
    defect = invariance_defect(S, mu)
    if defect > DEFECT_TOL:
        mu, defect = vertex, invariance_defect(S, vertex)
    if defect > DEFECT_TOL:
        raise FeasibilityError(f"solved mean has defect {defect:.3e}")
    return Mean(S, tuple(range(n)), mu, defect=defect, exact=True)


def _canonicalize(A_eq, b_eq, feasible, iters: int = 20000) -> np.ndarray:
    """Projection of the uniform vector onto {A x = b, x >= 0}.

    Dykstra's alternating projections identify the active set; an
    equality-constrained least-squares solve on that support polishes it.
    """
    n = A_eq.shape[1]
    u = np.full(n, 1.0 / n)
    pinv = np.linalg.pinv(A_eq)

    def proj_affine(x):
        return x - pinv @ (A_eq @ x - b_eq)

    x = u.copy()
    p = np.zeros(n)
    q = np.zeros(n)
    for _ in range(iters):
        y = proj_affine(x + p)
        p = x + p - y
        x_new = np.maximum(y + q, 0.0)
        q = y + q - x_new
        if np.max(np.abs(x_new - x)) < 1e-15:
            x = x_new
            break
        x = x_new
    support = x > 1e-10
    if not support.any():
        return feasible
    polished = _polish(A_eq, b_eq, u, support)
    if polished is not None:
        return polished
    x = np.clip(proj_affine(x), 0.0, None)
    return x / x.sum()


def _polish(A_eq, b_eq, u, support) -> np.ndarray | None:
    As = A_eq[:, support]
    k = As.shape[1]
    # KKT system for min |x - u_S|^2 s.t. As x = b
    m = As.shape[0]
    K = np.block([[np.eye(k), As.T], [As, np.zeros((m, m))]])
    rhs = np.concatenate([u[support], b_eq])
    sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
    xs = sol[:k]
    if np.any(xs < -1e-12) or np.max(np.abs(As @ xs - b_eq)) > 1e-12:
        return None
    x = np.zeros(A_eq.shape[1])
    x[support] = np.clip(xs, 0.0, None)
    return x / x.sum()


def uniform_mean(S: FiniteSemigroup) -> Mean:
    n = S.order
    w = np.full(n, 1.0 / n)
    d = invariance_defect(S, w)
    return Mean(S, tuple(range(n)), w, defect=d, exact=d <= DEFECT_TOL)


def read_table_file(path) -> FiniteSemigroup:
    """Read ``n``, then ``n`` rows of 0-based indices, then an optional label line."""
    with open(path) as fh:
        lines = [ln.split("#", 1)[0].strip() for ln in fh]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise ValueError(f"{path}: empty table file")
    n = int(lines[0])
    if len(lines) < n + 1:
        raise ValueError(f"{path}: expected {n} table rows")
    table = [[int(v) for v in lines[1 + i].split()] for i in range(n)]
    labels = lines[n + 1].split() if len(lines) > n + 1 else [str(i) for i in range(n)]
    if len(labels) != n:
        raise ValueError(f"{path}: label line must have {n} entries")
    return validate_table(labels, table)


def write_table_file(S: FiniteSemigroup, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"{S.order}\n")
        for row in S.table:
            fh.write(" ".join(str(int(v)) for v in row) + "\n")
        fh.write(" ".join(S.labels) + "\n")
