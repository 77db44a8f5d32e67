from pathlib import Path

import numpy as np
import pytest

from holder_retract.actions import shear_involution_action
from holder_retract.semigroups import cyclic_group, solve_left_invariant_mean

ROOT = Path(__file__).resolve().parent.parent
CONFIGS = ROOT / "configs"

SHEAR = np.array([[1.0, 0.3], [0.0, 1.0]])
SHEAR_A = np.array([[1.0, -0.6], [0.0, -1.0]])


@pytest.fixture(scope="session")
def shear_action():
    return shear_involution_action(0.3)


@pytest.fixture(scope="session")
def z2_mean():
    return solve_left_invariant_mean(cyclic_group(2))


def sigma_max_2x2(M) -> float:
    """Largest singular value of a 2x2 matrix from the eigenvalues of M^T M."""
    G = np.asarray(M, dtype=float).T @ np.asarray(M, dtype=float)
    tr, det = G[0, 0] + G[1, 1], G[0, 0] * G[1, 1] - G[0, 1] * G[1, 0]
    return float(np.sqrt((tr + np.sqrt(tr * tr - 4.0 * det)) / 2.0))
