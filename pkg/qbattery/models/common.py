from functools import reduce
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from collections.abc import Sequence

    from qbattery.linalg import ComplexMatrix

IDENTITY = np.eye(2, dtype=np.complex128)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)


def kron_all(ops: 'Sequence[ComplexMatrix]') -> 'ComplexMatrix':
    return reduce(np.kron, ops, np.ones((1, 1), dtype=np.complex128))


def site_operator(op: 'ComplexMatrix', site: int, sites: int) -> 'ComplexMatrix':
    """op acting on one site of a chain, site 0 being the most significant factor."""
    eye = np.eye(op.shape[0], dtype=np.complex128)
    return kron_all([op if j == site else eye for j in range(sites)])


def bloch_state(eps: 'Sequence[float]') -> 'ComplexMatrix':
    """I/2 + eps . sigma."""
    return IDENTITY / 2 + sum(e * s for e, s in zip(eps, PAULIS))
