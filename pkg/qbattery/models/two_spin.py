"""Two-qubit charger: a spin in a transverse field, kicked by a longitudinal one."""

from typing import TYPE_CHECKING, Literal, NamedTuple

import numpy as np

from qbattery.closed import ClosedBattery
from qbattery.errors import InvalidParamsError
from qbattery.models.common import (
    IDENTITY,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    bloch_state,
    kron_all,
)

if TYPE_CHECKING:
    from collections.abc import Sequence

    from numpy.typing import NDArray

PURITY_SLACK = 1e-12


class TwoSpinParams(NamedTuple):
    J: float
    B: float
    eps: tuple[float, float, float]

    @classmethod
    def create(cls, J: float, B: float, eps: 'Sequence[float]') -> 'TwoSpinParams':
        if len(eps) != 3:
            raise InvalidParamsError(f'eps needs 3 components, got {len(eps)}')
        e = tuple(float(x) for x in eps)
        if e[0] ** 2 + e[1] ** 2 + e[2] ** 2 > 0.25 + PURITY_SLACK:
            raise InvalidParamsError(f'|eps|^2 must be <= 1/4, got eps={e}')
        return cls(float(J), float(B), e)  # type: ignore[arg-type]

    @property
    def a(self) -> float:
        return float(np.hypot(self.J, 2 * self.B))

    @property
    def q(self) -> float:
        """a^2 times the squared component of eps orthogonal to the field axis."""
        e1, e2, e3 = self.eps
        return (e2 * self.a) ** 2 + (2 * self.B * e1 - self.J * e3) ** 2


def two_spin_build(p: TwoSpinParams, protocol: Literal[1, 2] = 2) -> ClosedBattery:
    """Protocol 2 is the single effective qubit; protocol 1 the full Heisenberg pair.

    Protocol 1 keeps the state inside the {|01>, |10>} block, where the kick
    vanishes, so it never exchanges energy.
    """
    J, B = p.J, p.B
    if protocol == 2:
        return ClosedBattery.create(
            J * SIGMA_X - J / 2 * IDENTITY,
            2 * B * SIGMA_Z,
            bloch_state(p.eps),
        )
    if protocol == 1:
        heisenberg = sum(kron_all([s, s]) for s in (SIGMA_X, SIGMA_Y, SIGMA_Z))
        rho0 = np.zeros((4, 4), dtype=np.complex128)
        rho0[1:3, 1:3] = bloch_state(p.eps)
        return ClosedBattery.create(
            J / 2 * heisenberg,
            np.diag([2 * B, 0, 0, -2 * B]).astype(np.complex128),
            rho0,
        )
    raise InvalidParamsError(f'unknown protocol {protocol}')


def two_spin_work(p: TwoSpinParams, t: float) -> float:
    a = p.a
    if a == 0:
        return 0.0
    e1, e2, e3 = p.eps
    s, c = np.sin(a * t), np.cos(a * t)
    return float(
        4
        * p.B
        * p.J
        * ((2 * p.J * e3 - 4 * p.B * e1) * s**2 / a**2 - 2 * e2 * s * c / a),
    )


def two_spin_power(p: TwoSpinParams, t: float) -> float:
    a = p.a
    if a == 0:
        return 0.0
    e1, e2, e3 = p.eps
    return float(
        8
        * p.B
        * p.J
        * ((p.J * e3 - 2 * p.B * e1) * np.sin(2 * a * t) / a - e2 * np.cos(2 * a * t)),
    )


def two_spin_bloch(p: TwoSpinParams, t: float) -> 'NDArray[np.float64]':
    """eps(t): the Bloch vector halved, precessing about (J, 0, 2B) at rate 2a."""
    eps = np.asarray(p.eps, dtype=float)
    a = p.a
    if a == 0:
        return eps
    axis = np.array([p.J, 0.0, 2 * p.B]) / a
    along = (axis @ eps) * axis
    angle = 2 * a * t
    return along + np.cos(angle) * (eps - along) + np.sin(angle) * np.cross(axis, eps)


def two_spin_unitary_coherence(p: TwoSpinParams) -> float:
    """Coherence of rho0 in the eigenbasis of a non-degenerate evolution."""
    a = p.a
    return 0.0 if a == 0 else 2 * p.q / a**2


def two_spin_bound_a(p: TwoSpinParams) -> float:
    a = p.a
    return 0.0 if a == 0 else float(6 * abs(p.J) * np.sqrt(p.q) / a)


def two_spin_power_bound_c(p: TwoSpinParams, t: float = 0.0) -> float:
    e1, e2, _ = two_spin_bloch(p, t)
    return float(12 * abs(p.B * p.J) * np.hypot(e1, e2))
