import numpy as np
import pytest

from holder_retract.actions import (
    PointSet,
    check_domain_invariance,
    check_homomorphism,
    contraction_action,
    cyclic_linear_action,
    dist_perturbation_map,
    distance_to,
    estimate_uniform_lipschitz,
    involution_action,
    random_isometric_action,
    rotation,
    twist_lipschitz,
    twisted_involution_action,
    with_index,
)
from holder_retract.geometry import Ball, Box, Ellipsoid, project, sample
from holder_retract.semigroups import FiniteSemigroup

from .conftest import SHEAR, SHEAR_A, sigma_max_2x2

SQRT2 = np.sqrt(2.0)


def test_orthogonal_involution_is_isometric():
    act = involution_action(np.diag([1.0, -1.0]), Ball([0, 0], 1))
    assert act.declared_k == 1.0
    assert estimate_uniform_lipschitz(act, 200, 0) <= 1 + 1e-9


def test_shear_involution_declared_k(shear_action):
    oracle = sigma_max_2x2(SHEAR_A)
    assert oracle == pytest.approx(1.344031, abs=1e-6)
    assert shear_action.declared_k == pytest.approx(oracle, abs=1e-12)
    assert shear_action.declared_k < SQRT2
    est = estimate_uniform_lipschitz(shear_action, 400, 1)
    assert 1 < est <= 1.3441


def test_identity_involution():
    act = involution_action(np.eye(2), Ball([0, 0], 1))
    assert act.declared_k == 1.0


def test_involution_preconditions():
    with pytest.raises(ValueError, match="involution"):
        involution_action([[1.0, 0.1], [0.0, 1.0]], Ball([0, 0], 1))
    with pytest.raises(ValueError, match="invariant"):
        involution_action(SHEAR_A, Ball([0, 0], 1))


def test_cyclic_rotation_isometric():
    act = cyclic_linear_action(np.eye(2), rotation(2 * np.pi / 3), 3, Ball([0, 0], 1))
    assert act.declared_k == pytest.approx(1.0, abs=1e-12)
    assert check_homomorphism(act, 200, 0) <= 1e-10


def test_cyclic_matches_involution_example():
    act = cyclic_linear_action(SHEAR, np.diag([1.0, -1.0]), 2)
    oracle = SHEAR @ np.diag([1.0, -1.0]) @ np.linalg.inv(SHEAR)
    assert np.allclose(act.matrices[1], oracle, atol=1e-15)
    assert np.allclose(act.matrices[1], SHEAR_A, atol=1e-15)
    assert act.declared_k == pytest.approx(sigma_max_2x2(SHEAR_A), abs=1e-12)


def test_cyclic_declared_k_is_max_over_powers():
    S = np.array([[1.0, 0.2], [0.1, 1.0]])
    act = cyclic_linear_action(S, rotation(np.pi / 2), 4)
    norms = [np.linalg.norm(np.linalg.matrix_power(act.matrices[1], m), 2) for m in range(4)]
    assert act.declared_k == pytest.approx(max(norms), abs=1e-12)


def test_cyclic_rejects_wrong_period():
    with pytest.raises(ValueError):
        cyclic_linear_action(np.eye(2), rotation(2 * np.pi / 5), 3, Ball([0, 0], 1))


def test_contraction_examples():
    act = contraction_action([0.3, -0.2], 0.5, Ball([0, 0], 2))
    assert np.allclose(act.evaluate(1, [1, 1]), [0.65, 0.4], atol=1e-15)
    p = np.array([0.3, -0.2])
    for n in (1, 5, 17):
        assert np.allclose(act.evaluate(n, p), p)
        x = np.array([1.0, 1.0])
        assert np.linalg.norm(act.evaluate(n, x) - p) == pytest.approx(0.5**n * np.linalg.norm(x - p), rel=1e-12)
    assert estimate_uniform_lipschitz(act, 200, 0) <= 0.5 + 1e-9


def test_natural_power_by_composition_matches_closed_form():
    act = contraction_action([0.3, -0.2], 0.5, Ball([0, 0], 2))
    from dataclasses import replace

    slow = replace(act, power=None)
    x = np.array([1.0, 1.0])
    assert np.allclose(slow.orbit([3, 1, 7], x), act.orbit([3, 1, 7], x), atol=1e-15)


def test_dist_perturbation_example():
    F = Box([-0.7, -0.7], [0.0, 0.7])
    z = np.array([-0.5, 0.0])
    act = dist_perturbation_map(F, z, 0.1, Ball([0, 0], 1))
    x = np.array([0.5, 0.0])
    assert np.allclose(act.evaluate(1, x), x + 0.1 * 0.5 * (z - x), atol=1e-15)
    assert np.array_equal(act.evaluate(1, z), z)
    for seed in range(20):
        f = sample(F, seed)
        assert np.array_equal(act.evaluate(1, f), f)


def test_dist_perturbation_fixed_set_is_F():
    F = Box([-0.7, -0.7], [0.0, 0.7])
    act = dist_perturbation_map(F, [-0.5, 0.0], 0.1, Ball([0, 0], 1))
    rng = np.random.default_rng(0)
    for _ in range(500):
        x = sample(act.body, rng)
        moved = np.linalg.norm(act.evaluate(1, x) - x)
        d = distance_to(F, x)
        # Tx = x  <=>  dist(x, F) = 0, since z - x vanishes only at z in F
        if moved <= 1e-15:
            assert d <= 1e-9
        if d == 0:
            assert moved == 0


def test_dist_perturbation_point_set_and_preconditions():
    F = PointSet([[0.0, 0.0], [0.5, 0.5]])
    act = dist_perturbation_map(F, [0.0, 0.0], 0.2, Ball([0, 0], 1))
    assert np.array_equal(act.evaluate(3, [0.5, 0.5]), [0.5, 0.5])
    with pytest.raises(ValueError, match="z"):
        dist_perturbation_map(F, [0.1, 0.0], 0.2, Ball([0, 0], 1))
    with pytest.raises(ValueError, match="inside"):
        dist_perturbation_map(PointSet([[0.0, 0.0], [2.0, 0.0]]), [0.0, 0.0], 0.2, Ball([0, 0], 1))


def test_twisted_involution_is_an_involution():
    act = twisted_involution_action(0.3)
    rng = np.random.default_rng(2)
    for _ in range(100):
        x = sample(act.body, rng)
        assert np.linalg.norm(act.evaluate(1, act.evaluate(1, x)) - x) <= 1e-12
    assert check_homomorphism(act, 200, 0) <= 1e-10
    assert check_domain_invariance(act, 200, 0) <= 1e-9
    assert act.declared_k == pytest.approx(twist_lipschitz(0.3) ** 2)
    assert 1 < act.declared_k < SQRT2
    assert estimate_uniform_lipschitz(act, 2000, 3) <= act.declared_k + 1e-9


def test_twisted_fixed_point_sampler():
    act = twisted_involution_action(0.25, radius=1.0, dimension=3)
    rng = np.random.default_rng(5)
    for _ in range(50):
        f = act.fixed_point_sampler(rng)
        assert np.linalg.norm(act.evaluate(1, f) - f) <= 1e-12


def test_twist_lipschitz_matches_singular_value():
    for a in (0.0, 0.1, 0.35):
        M = np.eye(2) + a * np.outer([0, 1], [1, 0])
        assert twist_lipschitz(a) == pytest.approx(np.linalg.norm(M, 2), abs=1e-12)


@pytest.mark.parametrize("dim", [2, 3, 5, 8])
def test_random_isometric_actions(dim):
    rng = np.random.default_rng(dim)
    for _ in range(5):
        act = random_isometric_action(dim, rng)
        assert act.declared_k == pytest.approx(1.0, abs=1e-12)
        assert check_homomorphism(act, 50, 0) <= 1e-10
        assert check_domain_invariance(act, 50, 0) <= 1e-9


def test_homomorphism_defect_detects_corrupted_table(shear_action):
    assert check_homomorphism(shear_action, 100, 0) <= 1e-10
    # aa = a instead of e: T_{aa} = A but T_a T_a = I
    bad = FiniteSemigroup(("e", "a"), np.array([[0, 1], [1, 1]]))
    assert check_homomorphism(with_index(shear_action, bad), 100, 0) > 0.1


def test_domain_invariance_of_shipped_families(shear_action):
    for act in (shear_action, contraction_action([0.3, -0.2], 0.5, Ball([0, 0], 2))):
        rng = np.random.default_rng(0)
        for _ in range(100):
            t = rng.choice(act.elements(5))
            y = act.evaluate(t, sample(act.body, rng))
            assert np.linalg.norm(project(act.body, y) - y) <= 1e-9


def test_uniform_lipschitz_empirical_for_dist_perturbation():
    act = dist_perturbation_map(Box([-0.7, -0.7], [0.0, 0.7]), [-0.5, 0.0], 0.1, Ball([0, 0], 1))
    # reported, not claimed: an empirical sup over a short power window
    assert np.isfinite(act.declared_k) and act.declared_k >= 0.9
