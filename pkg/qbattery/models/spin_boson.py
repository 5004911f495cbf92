"""Dephasing two-level system with tunnelling, as a Lindblad battery."""

import logging
from typing import TYPE_CHECKING, Any, NamedTuple, Optional

import numpy as np

from qbattery.closed import BoundReport
from qbattery.errors import InvalidParamsError, NotDensityMatrixError
from qbattery.linalg import as_matrix, is_density_matrix
from qbattery.models.common import IDENTITY, SIGMA_X, SIGMA_Z
from qbattery.open import (
    LindbladModel,
    Trajectory,
    energy_bound_series,
    open_energy_bound,
)

if TYPE_CHECKING:
    from numpy.typing import ArrayLike, NDArray

    from qbattery.linalg import ComplexMatrix

logger = logging.getLogger(__name__)

SPECIALIZED = 'specialized'
GENERAL = 'general'


def spin_boson_state(rho12: complex) -> 'ComplexMatrix':
    """Equal populations with coherence rho12."""
    if abs(rho12) > 0.5:
        raise InvalidParamsError(f'|rho12| must be <= 1/2, got {rho12}')
    rho = IDENTITY / 2
    rho[0, 1] = rho12
    rho[1, 0] = np.conj(rho12)
    return rho


class SpinBosonParams(NamedTuple):
    omega0: float
    delta0: float
    gamma: float
    rho0: 'ComplexMatrix'

    @classmethod
    def create(
        cls,
        omega0: float = 0.1,
        delta0: float = 1.0,
        gamma: float = 10.0,
        rho0: Optional['ArrayLike'] = None,
    ) -> 'SpinBosonParams':
        if gamma < 0:
            raise InvalidParamsError(f'negative rate gamma={gamma}')
        state = spin_boson_state(0.3) if rho0 is None else as_matrix(rho0)
        if state.shape != (2, 2) or not is_density_matrix(state):
            raise NotDensityMatrixError('rho0 must be a 2x2 density matrix')
        return cls(float(omega0), float(delta0), float(gamma), state)

    @property
    def strong_dephasing(self) -> bool:
        return self.gamma >= abs(self.delta0) >= abs(self.omega0)


def spin_boson_build(p: SpinBosonParams) -> LindbladModel:
    # V and the 1/sqrt(2) on sigma_z give the standard dephasing rates:
    # rho12 decays at gamma and precesses at omega0 / 2
    return LindbladModel.create(
        0.5 * (p.omega0 * SIGMA_Z - p.delta0 * SIGMA_X),
        -p.omega0 / 4 * SIGMA_Z,
        [(p.gamma, SIGMA_Z / np.sqrt(2))],
        normalized=True,
    )


def spin_boson_energy(rho: 'ComplexMatrix', p: SpinBosonParams) -> float:
    return float(
        p.omega0 / 2 * (rho[0, 0] - rho[1, 1]).real - p.delta0 * rho[0, 1].real,
    )


def spin_boson_energy_rate(rho: 'ComplexMatrix', p: SpinBosonParams) -> float:
    rho12 = rho[0, 1]
    return float(
        p.delta0 * p.gamma * rho12.real + p.delta0 * p.omega0 / 2 * rho12.imag,
    )


def spin_boson_exact_rho12(p: SpinBosonParams, t: float) -> complex:
    """rho12(t) without tunnelling, where populations are frozen."""
    if p.delta0 != 0:
        raise InvalidParamsError('closed form only holds for delta0 = 0')
    return complex(p.rho0[0, 1] * np.exp(-(p.gamma + 0.5j * p.omega0) * t))


def _specialized_bound(
    p: SpinBosonParams,
    times: 'NDArray[np.float64]',
    rho12: 'NDArray[np.complex128]',
) -> 'NDArray[np.float64]':
    return (
        times
        * 3
        * np.sqrt(2)
        * abs(p.delta0)
        * p.gamma
        * np.maximum.accumulate(np.abs(rho12))
    )


def spin_boson_bound(p: SpinBosonParams, traj: Trajectory, t: float) -> BoundReport:
    index = traj.index_at(t)
    if not p.strong_dephasing:
        logger.debug('spin_boson_bound: outside strong dephasing, general bound')
        report = open_energy_bound(spin_boson_build(p), traj, t)
        return report._replace(auxiliary={**report.auxiliary, 'path': GENERAL})
    bound = _specialized_bound(
        p,
        traj.times[: index + 1],
        traj.states[: index + 1, 0, 1],
    )
    auxiliary: dict[str, Any] = {
        'path': SPECIALIZED,
        't': float(traj.times[index]),
        'sup_rho12': float(np.max(np.abs(traj.states[: index + 1, 0, 1]))),
    }
    return BoundReport.of(
        abs(traj.energies[index] - traj.energies[0]),
        float(bound[-1]),
        auxiliary=auxiliary,
    )


class SpinBosonSeries(NamedTuple):
    times: 'NDArray[np.float64]'
    energies: 'NDArray[np.float64]'
    quantity: 'NDArray[np.float64]'
    bound: 'NDArray[np.float64]'
    W_A: 'NDArray[np.float64]'
    W_B: 'NDArray[np.float64]'
    rho12: 'NDArray[np.complex128]'
    path: str


def spin_boson_bound_series(p: SpinBosonParams, traj: Trajectory) -> SpinBosonSeries:
    """Bound along the whole grid, with the general W_A and W_B alongside."""
    general = energy_bound_series(spin_boson_build(p), traj)
    rho12 = traj.states[:, 0, 1]
    if p.strong_dephasing:
        path, bound = SPECIALIZED, _specialized_bound(p, traj.times, rho12)
    else:
        path, bound = GENERAL, general.bound
    return SpinBosonSeries(
        traj.times,
        traj.energies,
        general.quantity,
        bound,
        general.W_A,
        general.W_B,
        rho12,
        path,
    )
