"""Per-scenario verification criteria shared by the CLI and the scripts."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .actions import (
    LipschitzAction,
    check_domain_invariance,
    check_homomorphism,
    estimate_uniform_lipschitz,
)
from .analysis import SQRT2, check_holder, decay_rate_fit
from .geometry import diameter, sample
from .retraction import (
    Retraction,
    RetractionTrace,
    averaged_map,
    iterate_retraction,
    residual,
    verify_retraction,
)
from .semigroups import FiniteSemigroup, Mean, Naturals

STRUCTURE_TOL = 1e-9
HOMOMORPHISM_TOL = 1e-10
BOUND_SLACK = 1e-9
COLLAPSE_TOL = 1e-10
ORACLE_TOL = 1e-8
HOLDER_TOL = 1e-6
DECAY_FIT_TOL = 1e-3
FOLNER_DEFECT_TOL = 1e-12


@dataclass
class Criterion:
    name: str
    passed: bool | None
    value: float | None
    threshold: float | None
    detail: str = ""

    @property
    def skipped(self) -> bool:
        return self.passed is None

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "status": "skip" if self.skipped else ("pass" if self.passed else "fail"),
            "value": None if self.value is None else float(self.value),
            "threshold": None if self.threshold is None else float(self.threshold),
            "detail": self.detail,
        }


def skip(name: str, why: str) -> Criterion:
    return Criterion(name, None, None, None, why)


def theorem_regime(action: LipschitzAction, mean: Mean) -> str:
    """'contracting' (1 < k < sqrt 2), 'nonexpansive' (k <= 1) or 'none'."""
    if not mean.exact:
        return "none"
    k = action.declared_k
    if k <= 1.0:
        return "nonexpansive"
    if k < SQRT2:
        return "contracting"
    return "none"


def mean_invariance(mean: Mean) -> Criterion:
    if isinstance(mean.domain, Naturals):
        expected = 2.0 / len(mean.support)
        err = abs(mean.defect - expected)
        return Criterion("mean_invariance", err <= FOLNER_DEFECT_TOL, mean.defect, expected, "Foelner defect equals 2/N")
    return Criterion("mean_invariance", mean.defect <= STRUCTURE_TOL, mean.defect, STRUCTURE_TOL, "max_s |L_s* mu - mu|_1")


def action_structure(action: LipschitzAction, samples: int, rng) -> list[Criterion]:
    seed = int(rng.integers(2**31))
    hom = check_homomorphism(action, samples, seed)
    dom = check_domain_invariance(action, samples, seed + 1)
    out = [
        Criterion("homomorphism", hom <= HOMOMORPHISM_TOL, hom, HOMOMORPHISM_TOL, "max |T_ts x - T_t T_s x|"),
        Criterion("domain_invariance", dom <= STRUCTURE_TOL, dom, STRUCTURE_TOL, "max |P_C T_t x - T_t x|"),
    ]
    if np.isfinite(action.declared_k):
        est = estimate_uniform_lipschitz(action, samples, seed + 2)
        bound = action.declared_k + 1e-9
        out.append(Criterion("uniform_lipschitz", est <= bound, est, bound, "empirical sup of Lipschitz ratios"))
    return out


def traces_from_starts(action: LipschitzAction, mean: Mean, starts: int, tol: float, max_iter, rng) -> list[RetractionTrace]:
    return [iterate_retraction(action, mean, sample(action.body, rng), tol, max_iter) for _ in range(starts)]


def residual_contraction(action: LipschitzAction, traces) -> Criterion:
    gamma = action.declared_k**2 - 1.0
    worst = -np.inf
    for tr in traces:
        r = np.asarray(tr.residuals)
        if len(r) > 1:
            worst = max(worst, float(np.max(r[1:] - gamma * r[:-1])))
    worst = max(worst, 0.0) if np.isfinite(worst) else 0.0
    return Criterion("residual_contraction", worst <= BOUND_SLACK, worst, BOUND_SLACK, "max r(x_{n+1}) - (k^2-1) r(x_n)")


def gap_bound(action: LipschitzAction, traces) -> Criterion:
    gamma = action.declared_k**2 - 1.0
    d2 = diameter(action.body) ** 2
    worst = 0.0
    for tr in traces:
        g = np.asarray(tr.gaps)
        if len(g):
            n = np.arange(len(g))
            worst = max(worst, float(np.max(g**2 - 4.0 * gamma**n * d2)))
    return Criterion("gap_bound", worst <= BOUND_SLACK, worst, BOUND_SLACK, "max |x_{n+1}-x_n|^2 - 4 (k^2-1)^n diam^2")


def one_step_collapse(action: LipschitzAction, mean: Mean, starts: int, rng) -> list[Criterion]:
    res = fixd = 0.0
    for _ in range(starts):
        x1 = averaged_map(action, mean, sample(action.body, rng))
        res = max(res, residual(action, mean, x1))
        for s in action.elements():
            fixd = max(fixd, float(np.linalg.norm(action.evaluate(s, x1) - x1)))
    return [
        Criterion("one_step_residual", res <= COLLAPSE_TOL, res, COLLAPSE_TOL, "residual after one averaging step"),
        Criterion("one_step_fixed", fixd <= STRUCTURE_TOL, fixd, STRUCTURE_TOL, "max |T_s x_1 - x_1|"),
    ]


def retraction_algebra(R: Retraction, action: LipschitzAction, mean: Mean, samples: int, tol: float, rng) -> tuple[list[Criterion], dict]:
    rep = verify_retraction(R, action, mean, samples, int(rng.integers(2**31)), tol)
    limit = rep.allowance
    crit = [
        Criterion("retraction_fixes", rep.fix_defect <= limit, rep.fix_defect, limit, "max |T_s R x - R x|"),
        Criterion("retraction_idempotent", rep.idempotence_defect <= limit, rep.idempotence_defect, limit, "max |R R x - R x|"),
        Criterion("retraction_identity_on_fix", rep.identity_defect <= limit, rep.identity_defect, limit, "max |R f - f| on fixed points"),
    ]
    return crit, rep.as_dict()


def linear_oracle(action: LipschitzAction, mean: Mean) -> np.ndarray | None:
    """Algebraic projection onto Fix for linear group actions under the uniform mean."""
    if action.matrices is None or not isinstance(action.index, FiniteSemigroup):
        return None
    if action.family == "involution":
        return (np.eye(action.dimension) + action.matrices[1]) / 2.0
    # average of the group elements; the uniform mean is the Haar mean
    return sum(action.matrices) / len(action.matrices)


def oracle_equivalence(R: Retraction, action: LipschitzAction, mean: Mean, samples: int, rng) -> Criterion:
    P = linear_oracle(action, mean)
    if P is None:
        return skip("oracle_equivalence", "no algebraic oracle for this family")
    worst = 0.0
    for _ in range(samples):
        x = sample(action.body, rng)
        worst = max(worst, float(np.linalg.norm(R(x) - P @ x)))
    return Criterion("oracle_equivalence", worst <= ORACLE_TOL, worst, ORACLE_TOL, "max |R x - P x| against algebraic projection")


def holder(R: Retraction, action: LipschitzAction, pairs: int, rng):
    est = check_holder(R, action.body, action.declared_k, pairs, int(rng.integers(2**31)), HOLDER_TOL)
    crit = Criterion("holder", est.passed, est.worst_ratio, 1.0 + HOLDER_TOL, f"alpha={est.alpha_theory:.6g}, c={est.c_theory:.6g}")
    return crit, est


def decay_fit(action: LipschitzAction, traces) -> Criterion:
    gamma = action.declared_k**2 - 1.0
    ratios = [f.ratio for f in (decay_rate_fit(tr) for tr in traces) if f.fittable]
    if not ratios:
        return skip("decay_fit", "no trace with >= 4 positive residuals")
    worst = max(ratios)
    return Criterion("decay_fit", worst <= gamma + DECAY_FIT_TOL, worst, gamma + DECAY_FIT_TOL, f"fitted ratio vs k^2-1 over {len(ratios)} traces")


def contraction_limit(action: LipschitzAction, mean: Mean, trace: RetractionTrace, tol: float = 2e-3) -> Criterion:
    """Limit against the closed-form window-averaged map x -> p + c_N (x - p), whose only fixed point is p."""
    if action.family != "contraction":
        return skip("foelner_limit", "closed-form oracle only for the contraction family")
    p = np.asarray(action.params["p"])
    q = action.params["q"]
    c_N = float(np.mean([q**t for t in mean.support]))
    oracle_limit = p + c_N ** trace.iterations_used * (trace.iterates[0] - p)
    err = max(float(np.linalg.norm(trace.limit - p)), float(np.linalg.norm(trace.limit - oracle_limit)))
    return Criterion("foelner_limit", err <= tol, err, tol, f"distance of limit to p and to the oracle iterate (c_N={c_N:.3g})")
