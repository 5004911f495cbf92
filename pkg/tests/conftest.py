import numpy as np
import pytest

from qbattery.models.common import SIGMA_X, SIGMA_Y, SIGMA_Z


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(20240917)


@pytest.fixture()
def paulis() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    return SIGMA_X, SIGMA_Y, SIGMA_Z
