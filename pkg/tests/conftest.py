import sys

import numpy as np
import pytest

from qdetect import Ensemble

R2 = np.sqrt(0.5)

# worked example: three pure qubit states
EX_VECTORS = [[1.0, 0.0], [R2, R2], [0.0, 1.0]]
EX_PRIORS = [0.1, 0.6, 0.3]

# reference 3-decimal values for the worked example
EX_X_HAT = np.array([[0.352, 0.217], [0.217, 0.434]])
EX_Q = [np.array([-0.833, 0.554]), np.array([0.850, 0.527]), np.array([-0.525, 0.851])]
EX_Y = np.array(
    [
        [0.693, 0.722, 0.276],
        [-0.461, 0.448, -0.447],
        [-0.461, 0.448, -0.447],
        [0.306, 0.278, 0.724],
    ]
)
EX_A = np.array([0.007, 0.999, 0.994])
EX_MU = [np.array([-0.067, 0.046]), np.array([0.849, 0.527]), np.array([-0.524, 0.849])]
EX_PD = 0.78
EX_LSM_PD = 0.71


@pytest.fixture
def example():
    return Ensemble.from_vectors(EX_PRIORS, EX_VECTORS)


@pytest.fixture
def example_doc():
    return {
        "dim": 2,
        "states": [
            {"prior": p, "vector": [[float(x), 0.0] for x in v]} for p, v in zip(EX_PRIORS, EX_VECTORS)
        ],
    }


@pytest.fixture
def orthogonal_pair():
    return Ensemble.from_vectors([0.5, 0.5], [[1, 0], [0, 1]])


@pytest.fixture
def zero_plus():
    return Ensemble.from_vectors([0.5, 0.5], [[1, 0], [R2, R2]])


def proj(v):
    v = np.asarray(v, dtype=complex)
    return np.outer(v, v.conj())


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.RESULTS:
        terminalreporter.write_line(line)
