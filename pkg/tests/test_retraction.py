import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holder_retract.actions import (
    LipschitzAction,
    contraction_action,
    involution_action,
    twisted_involution_action,
)
from holder_retract.geometry import Ball, diameter, sample
from holder_retract.retraction import (
    DivergenceError,
    averaged_map,
    build_retraction,
    default_max_iter,
    iterate_retraction,
    residual,
    verify_retraction,
)
from holder_retract.analysis import min_iterations
from holder_retract.semigroups import Mean, cyclic_group, custom_mean, folner_mean, solve_left_invariant_mean

from .conftest import SHEAR_A

SQRT2 = math.sqrt(2.0)


@pytest.fixture(scope="module")
def diag_action():
    return involution_action(np.diag([1.0, -1.0]), Ball([0, 0], 1))


@pytest.fixture(scope="module")
def twisted():
    return twisted_involution_action(0.3)


def test_averaged_map_examples(diag_action, shear_action, z2_mean):
    assert np.allclose(averaged_map(diag_action, z2_mean, [0.6, 0.4]), [0.6, 0.0], atol=1e-15)
    # (I + A) / 2 = [[1, -0.3], [0, 0]]
    assert np.allclose(averaged_map(shear_action, z2_mean, [0.2, 0.4]), [0.08, 0.0], atol=1e-15)
    assert np.allclose(averaged_map(shear_action, z2_mean, [0.5, 0.0]), [0.5, 0.0], atol=1e-15)


def test_averaged_map_rejects_mismatched_mean(shear_action):
    with pytest.raises(ValueError):
        averaged_map(shear_action, folner_mean(5), [0.1, 0.1])
    with pytest.raises(ValueError):
        averaged_map(shear_action, solve_left_invariant_mean(cyclic_group(3)), [0.1, 0.1])


def test_residual_examples(diag_action, z2_mean):
    assert residual(diag_action, z2_mean, [0.6, 0.4]) == pytest.approx(0.32, abs=1e-15)
    assert residual(diag_action, z2_mean, [0.3, 0.0]) == 0.0
    point = Mean(cyclic_group(2), (0, 1), [0.0, 1.0], defect=2.0, exact=False)
    x = np.array([0.6, 0.4])
    assert residual(diag_action, point, x) == pytest.approx(np.linalg.norm(np.diag([1, -1]) @ x - x) ** 2)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_averaged_map_is_k_lipschitz_and_stays_in_body(seed):
    rng = np.random.default_rng(seed)
    act = twisted_involution_action(0.3)
    mean = solve_left_invariant_mean(cyclic_group(2))
    x, y = sample(act.body, rng), sample(act.body, rng)
    tx, ty = averaged_map(act, mean, x), averaged_map(act, mean, y)
    assert np.linalg.norm(tx - ty) <= act.declared_k * np.linalg.norm(x - y) + 1e-12
    assert np.linalg.norm(tx) <= act.body.radius + 1e-12


def test_shear_iteration_converges_in_one_step(shear_action, z2_mean):
    tr = iterate_retraction(shear_action, z2_mean, [0.2, 0.4], 1e-12)
    assert tr.converged
    assert np.allclose(tr.iterates[1], [0.08, 0.0], atol=1e-15)
    assert tr.iterations_used <= 2
    assert np.allclose(tr.limit, [0.08, 0.0], atol=1e-15)
    # idempotence of (I + A) / 2 when A^2 = I
    P = (np.eye(2) + SHEAR_A) / 2
    assert np.allclose(P @ P, P, atol=1e-15)


def test_contraction_folner_geometric_oracle():
    p, x0, q, N = np.array([0.3, -0.2]), np.array([1.0, 1.0]), 0.5, 10
    act = contraction_action(p, q, Ball([0, 0], 2))
    c_N = sum(q**n for n in range(1, N + 1)) / N
    assert c_N == pytest.approx((1 - q**N) / N, rel=1e-15)
    tr = iterate_retraction(act, folner_mean(N), x0, 1e-12)
    assert tr.converged
    for n, x in enumerate(tr.iterates):
        assert np.linalg.norm(x - (p + c_N**n * (x0 - p))) <= 1e-14
    assert np.linalg.norm(tr.limit - p) <= 1e-11


def test_contraction_limit_approaches_p_as_window_grows():
    p = np.array([0.3, -0.2])
    act = contraction_action(p, 0.5, Ball([0, 0], 2))
    for N in (1, 10, 100, 1000):
        lim = iterate_retraction(act, folner_mean(N), [1.0, 1.0], 1e-12).limit
        assert np.linalg.norm(lim - p) <= 1e-10


def test_fixed_start_gives_trivial_trace(shear_action, z2_mean):
    tr = iterate_retraction(shear_action, z2_mean, [0.4, 0.0], 1e-12)
    assert len(tr.iterates) == 1 and tr.gaps == []
    assert tr.converged and np.array_equal(tr.limit, [0.4, 0.0])


def test_trace_invariants(twisted, z2_mean):
    tr = iterate_retraction(twisted, z2_mean, [0.5, 0.6], 1e-12)
    assert tr.converged
    assert all(g >= 0 for g in tr.gaps) and all(r >= 0 for r in tr.residuals)
    assert all(np.linalg.norm(x) <= twisted.body.radius + 1e-9 for x in tr.iterates)
    assert np.array_equal(tr.limit, tr.iterates[-1])
    rows = list(tr.rows())
    assert len(rows) == len(tr.iterates) and rows[-1][1] == ""


def test_residual_contraction_and_gap_bound_twisted(twisted, z2_mean):
    gamma = twisted.declared_k**2 - 1
    d2 = diameter(twisted.body) ** 2
    rng = np.random.default_rng(0)
    for _ in range(20):
        tr = iterate_retraction(twisted, z2_mean, sample(twisted.body, rng), 1e-13)
        r = np.asarray(tr.residuals)
        assert np.all(r[1:] <= gamma * r[:-1] + 1e-9)
        g = np.asarray(tr.gaps)
        assert np.all(g**2 <= 4 * gamma ** np.arange(len(g)) * d2 + 1e-9)


def test_nonexpansive_one_step_collapse(diag_action, z2_mean):
    x1 = averaged_map(diag_action, z2_mean, [0.3, -0.7])
    assert residual(diag_action, z2_mean, x1) <= 1e-10


def test_default_max_iter_uses_decay_bound(shear_action):
    n_star = min_iterations(1e-6, shear_action.declared_k, diameter(shear_action.body))
    assert default_max_iter(shear_action, 1e-6) == 2 * n_star


def test_max_iter_respected(twisted, z2_mean):
    tr = iterate_retraction(twisted, z2_mean, [0.5, 0.6], 1e-300, max_iter=3)
    assert not tr.converged and tr.iterations_used == 3


def test_divergence_reports_index():
    body = Ball([0, 0], 1)
    blowup = LipschitzAction(
        index=cyclic_group(2), body=body, declared_k=1.0, family="broken",
        maps=(lambda x: x.copy(), lambda x: np.full_like(x, np.inf)),
    )
    with pytest.raises(DivergenceError) as info:
        iterate_retraction(blowup, solve_left_invariant_mean(cyclic_group(2)), [0.1, 0.1], 1e-9)
    assert info.value.index == 1


def test_build_retraction_examples(shear_action, z2_mean):
    R = build_retraction(shear_action, z2_mean, 1e-12)
    rng = np.random.default_rng(3)
    for _ in range(50):
        x = sample(shear_action.body, rng)
        rx = R(x)
        assert np.allclose(rx, [x[0] - 0.3 * x[1], 0.0], atol=1e-14)
        assert np.linalg.norm(R(rx) - rx) <= 2e-12
        f = np.array([x[0], 0.0])
        assert np.linalg.norm(R(f) - f) <= 1e-12
    assert np.array_equal(R([0.1, 0.2]), R([0.1, 0.2]))


def test_verify_retraction_exact_group_isometry(diag_action, z2_mean):
    R = build_retraction(diag_action, z2_mean, 1e-12)
    rep = verify_retraction(R, diag_action, z2_mean, 100, 0, 1e-9)
    assert rep.passed
    assert max(rep.fix_defect, rep.idempotence_defect, rep.identity_defect) <= 1e-9


def test_verify_retraction_shear(shear_action, z2_mean):
    R = build_retraction(shear_action, z2_mean, 1e-12)
    rep = verify_retraction(R, shear_action, z2_mean, 100, 1, 1e-9)
    assert rep.passed and rep.fix_defect <= 1e-9
    # A (I + A) / 2 = (A + I) / 2
    P = (np.eye(2) + SHEAR_A) / 2
    assert np.allclose(SHEAR_A @ P, P, atol=1e-15)


def test_verify_retraction_flags_non_invariant_mean(shear_action):
    bad = custom_mean(cyclic_group(2), [1.0, 0.0])
    R = build_retraction(shear_action, bad, 1e-12)
    rep = verify_retraction(R, shear_action, bad, 50, 0, 1e-6)
    assert not rep.passed and rep.fix_defect > 0.1


def test_verify_retraction_folner(z2_mean):
    act = contraction_action([0.3, -0.2], 0.5, Ball([0, 0], 2))
    mean = folner_mean(200)
    rep = verify_retraction(build_retraction(act, mean, 1e-12), act, mean, 30, 0, 1e-6)
    assert rep.passed and rep.allowance > 1e-6
