"""Shared fixtures: a zoo of model instances and in-domain parameter draws."""
from pathlib import Path

import numpy as np
import pytest

from src.chain import StateSpace, TupleCounts, count_tuples, simulate
from src.models import (
    Equicorrelation,
    EquicorrelationKnown,
    GeneralTwoState,
    Ising,
    Kimura4,
    Kimura6,
    ParametricModel,
    ReflectingWalk,
    Saturated,
    SymmetricTwoState,
    ThreeState,
)

GOLDEN_DIR = Path(__file__).parent / "golden"

KIMURA_THETA = (0.027, 0.041, 0.123, 0.128)
PUSHKIN = [[1104, 7534], [7533, 3829]]


def build_zoo() -> dict[str, ParametricModel]:
    return {
        "symmetric_two_state": SymmetricTwoState(),
        "general_two_state": GeneralTwoState(),
        "equicorrelation_known": EquicorrelationKnown([0.3, 0.6, 0.1]),
        "equicorrelation": Equicorrelation(3),
        "three_state": ThreeState(),
        "ising": Ising(),
        "reflecting_walk": ReflectingWalk(6),
        "kimura4": Kimura4(),
        "kimura6": Kimura6(),
        "saturated": Saturated(StateSpace.integers(3)),
    }


ZOO_NAMES = sorted(build_zoo())


def random_thetas(model: ParametricModel, count: int, seed: int = 0) -> list[np.ndarray]:
    """In-domain draws through the model's reparameterisation, kept away from the boundary."""
    rng = np.random.default_rng(seed)
    return [model.transform.forward(rng.normal(scale=0.6, size=model.dim)) for _ in range(count)]


def simulated_counts(
    model: ParametricModel, theta, n: int, order: int, seed: int
) -> TupleCounts:
    path = simulate(model.transition(theta), n, seed=seed)
    return count_tuples(path, order)


@pytest.fixture(scope="session")
def zoo():
    return build_zoo()


@pytest.fixture(params=ZOO_NAMES)
def zoo_model(request, zoo):
    """Each model-zoo family in turn."""
    return zoo[request.param]
