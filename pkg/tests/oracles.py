"""Independent reference computations used by the tests."""
import mpmath
import numpy as np
from scipy.optimize import minimize


def modulus_brute_force(eps: float, grid: int = 121) -> float:
    """inf of 1 - |(x+y)/2| over x, y in the closed unit disk with |x - y| >= eps.

    Rotation invariance fixes x on the positive axis; a grid over
    (|x|, |y|, angle) is refined by a constrained local search.
    """

    def obj(v):
        r1, r2, th = v
        x = np.array([r1, 0.0])
        y = r2 * np.array([np.cos(th), np.sin(th)])
        return 1.0 - np.linalg.norm((x + y) / 2)

    def sep(v):
        r1, r2, th = v
        return np.linalg.norm(np.array([r1, 0.0]) - r2 * np.array([np.cos(th), np.sin(th)])) - eps

    best, arg = np.inf, None
    rs = np.linspace(0, 1, 21)
    for r1 in rs:
        for r2 in rs:
            for th in np.linspace(0, np.pi, grid):
                v = (r1, r2, th)
                if sep(v) >= 0 and obj(v) < best:
                    best, arg = obj(v), v
    res = minimize(
        obj, arg, method="SLSQP", bounds=[(0, 1), (0, 1), (0, np.pi)],
        constraints=[{"type": "ineq", "fun": sep}], options={"ftol": 1e-14, "maxiter": 500},
    )
    if res.success and sep(res.x) >= -1e-12:
        best = min(best, float(res.fun))
    return best


def holder_exponent_mp(k: float) -> float:
    with mpmath.workdps(50):
        k = mpmath.mpf(k)
        return float(1 / (1 - mpmath.log(k) / mpmath.log(k * k - 1)))


def min_iterations_by_search(tol: float, k: float, diam: float) -> int:
    with mpmath.workdps(50):
        g = mpmath.mpf(k) ** 2 - 1
        n = 0
        while 4 * g**n * mpmath.mpf(diam) ** 2 > mpmath.mpf(tol) ** 2:
            n += 1
        return n
