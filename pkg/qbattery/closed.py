import logging
from typing import TYPE_CHECKING, Any, NamedTuple, Optional

import numpy as np

from qbattery.coherence import CoherenceBasis, basis_of, generalized_coherence
from qbattery.errors import InvalidParamsError, NotDensityMatrixError, ZeroNormError
from qbattery.ineq import InequalityCheck, holds
from qbattery.linalg import (
    RANK_TOL,
    as_matrix,
    check_dims,
    commutator,
    dagger,
    evolve_unitary,
    frobenius_norm,
    is_density_matrix,
    numerical_rank,
    operator_norm,
    require_hermitian,
)

if TYPE_CHECKING:
    from numpy.typing import ArrayLike

    from qbattery.linalg import ComplexMatrix

logger = logging.getLogger(__name__)

MIN_NORM = 1e-14


class ClosedBattery(NamedTuple):
    H0: 'ComplexMatrix'
    V: 'ComplexMatrix'
    rho0: 'ComplexMatrix'

    @classmethod
    def create(
        cls,
        H0: 'ArrayLike',
        V: 'ArrayLike',
        rho0: 'ArrayLike',
    ) -> 'ClosedBattery':
        H0, V, rho0 = as_matrix(H0), as_matrix(V), as_matrix(rho0)
        check_dims(H0, V, rho0)
        require_hermitian(H0)
        require_hermitian(V)
        if not is_density_matrix(rho0):
            raise NotDensityMatrixError('rho0 fails hermiticity, trace or positivity')
        return cls(H0, V, rho0)

    @property
    def dim(self) -> int:
        return int(self.H0.shape[0])

    @property
    def hamiltonian(self) -> 'ComplexMatrix':
        return self.H0 + self.V


class BoundReport(NamedTuple):
    quantity: float
    bound_a: float
    bound_b: Optional[float]
    bound_c: Optional[float]
    auxiliary: dict[str, Any]
    all_hold: bool

    @classmethod
    def of(
        cls,
        quantity: float,
        bound_a: float,
        bound_b: Optional[float] = None,
        bound_c: Optional[float] = None,
        auxiliary: Optional[dict[str, Any]] = None,
    ) -> 'BoundReport':
        bounds = [b for b in (bound_a, bound_b, bound_c) if b is not None]
        all_hold = all(holds(abs(quantity), b) for b in bounds)
        if not all_hold:
            logger.warning('bound violated: |%g| > one of %s', quantity, bounds)
        return cls(
            float(quantity),
            float(bound_a),
            None if bound_b is None else float(bound_b),
            None if bound_c is None else float(bound_c),
            auxiliary or {},
            all_hold,
        )

    @property
    def tightest(self) -> float:
        bounds = (self.bound_a, self.bound_b, self.bound_c)
        return min(b for b in bounds if b is not None)


class WorkIdentities(NamedTuple):
    W_A: float
    W_B: float
    W_C: float


class PowerIdentities(NamedTuple):
    P_A: float
    P_B: float
    P_C: float


class PowerIntegral(NamedTuple):
    integral: float
    sup_bound: float


def evolution(b: ClosedBattery, t: float) -> 'ComplexMatrix':
    return evolve_unitary(b.hamiltonian, t)


def evolution_basis(b: ClosedBattery) -> CoherenceBasis:
    """Eigenprojectors of U(t) = exp(-iHt), read off H itself.

    Clustering the eigenphases of U merges every level at small t.
    """
    return basis_of(b.hamiltonian, 'hermitian')


def evolve_state(b: ClosedBattery, t: float) -> 'ComplexMatrix':
    U = evolution(b, t)
    return U @ b.rho0 @ dagger(U)


def _real(value: complex, scale: float) -> float:
    assert abs(value.imag) <= 1e-10 * max(1.0, scale), value
    return float(value.real)


def work(b: ClosedBattery, t: float) -> float:
    rho_t = evolve_state(b, t)
    return _real(complex(np.trace((rho_t - b.rho0) @ b.H0)), operator_norm(b.H0))


def work_identities(b: ClosedBattery, t: float) -> WorkIdentities:
    U = evolution(b, t)
    Ud_H0 = dagger(U) @ b.H0
    scale = operator_norm(b.H0)
    return WorkIdentities(
        _real(complex(np.trace(Ud_H0 @ commutator(U, b.rho0))), scale),
        _real(complex(np.trace(U @ commutator(b.rho0, Ud_H0))), scale),
        _real(complex(np.trace(b.rho0 @ commutator(Ud_H0, U))), scale),
    )


def _work_bound_terms(
    rho0: 'ComplexMatrix',
    H0: 'ComplexMatrix',
    U: 'ComplexMatrix',
    u_basis: CoherenceBasis,
) -> tuple[float, float, float, dict[str, Any]]:
    n = rho0.shape[0]
    rho_basis = basis_of(rho0, 'hermitian')
    Ud_H0 = dagger(U) @ H0

    rank_rho = numerical_rank(rho0, RANK_TOL)
    rank_cap = min(2 * rank_rho, n)
    coh_u_rho = generalized_coherence(rho0, u_basis)
    coh_rho_k = generalized_coherence(Ud_H0, rho_basis)
    coh_u_h0 = generalized_coherence(H0, u_basis)
    rank_b = numerical_rank(commutator(rho0, Ud_H0), RANK_TOL)

    norm_h0 = operator_norm(H0)
    norm_rho = operator_norm(rho0)
    frob_rho = frobenius_norm(rho0)

    bound_a = 2 * norm_h0 * np.sqrt(rank_cap * coh_u_rho)
    bound_b = norm_rho * np.sqrt(max(rank_b, 4) * coh_rho_k)
    bound_c = 2 * frob_rho * np.sqrt(coh_u_h0)
    auxiliary = {
        'n': n,
        'rank_rho0': rank_rho,
        'rank_cap': rank_cap,
        'rank_comm_rho0_UdH0': rank_b,
        'coherence_U_rho0': coh_u_rho,
        'coherence_rho0_UdH0': coh_rho_k,
        'coherence_U_H0': coh_u_h0,
        'norm_H0': norm_h0,
        'norm_rho0': norm_rho,
        'frobenius_rho0': frob_rho,
        'bound_b_printed': 2 * norm_rho * np.sqrt(coh_rho_k),
    }
    return float(bound_a), float(bound_b), float(bound_c), auxiliary


def work_bounds(b: ClosedBattery, t: float) -> BoundReport:
    U = evolution(b, t)
    bound_a, bound_b, bound_c, auxiliary = _work_bound_terms(
        b.rho0,
        b.H0,
        U,
        evolution_basis(b),
    )
    return BoundReport.of(work(b, t), bound_a, bound_b, bound_c, auxiliary)


def interaction_picture_bounds(b: ClosedBattery, t: float) -> BoundReport:
    """Work bounds with every operator moved to the interaction picture of H0."""
    U0 = evolve_unitary(b.H0, t)
    U_int = dagger(U0) @ evolution(b, t) @ U0
    rho_int = dagger(U0) @ b.rho0 @ U0
    H0_int = dagger(U0) @ b.H0 @ U0
    bound_a, bound_b, bound_c, auxiliary = _work_bound_terms(
        rho_int,
        H0_int,
        U_int,
        evolution_basis(b).transformed(dagger(U0)),
    )
    return BoundReport.of(work(b, t), bound_a, bound_b, bound_c, auxiliary)


def power_identities(b: ClosedBattery, t: float) -> PowerIdentities:
    rho_t = evolve_state(b, t)
    H0, V = b.H0, b.V
    scale = operator_norm(H0) * operator_norm(V)
    return PowerIdentities(
        _real(-1j * complex(np.trace(H0 @ commutator(V, rho_t))), scale),
        _real(-1j * complex(np.trace(V @ commutator(rho_t, H0))), scale),
        _real(-1j * complex(np.trace(rho_t @ commutator(H0, V))), scale),
    )


def power(b: ClosedBattery, t: float) -> float:
    return power_identities(b, t).P_A


def power_bounds(b: ClosedBattery, t: float) -> BoundReport:
    rho_t = evolve_state(b, t)
    H0, V = b.H0, b.V
    v_basis = basis_of(V, 'hermitian')
    h_basis = basis_of(H0, 'hermitian')

    norm_h0 = operator_norm(H0)
    norm_v = operator_norm(V)
    frob_rho = frobenius_norm(b.rho0)
    rank_v = numerical_rank(commutator(V, rho_t), RANK_TOL)
    rank_h = numerical_rank(commutator(rho_t, H0), RANK_TOL)
    coh_v_rho = generalized_coherence(rho_t, v_basis)
    coh_h_rho = generalized_coherence(rho_t, h_basis)
    coh_v_h0 = generalized_coherence(H0, v_basis)
    coh_h_v = generalized_coherence(V, h_basis)

    bound_a = 2 * norm_h0 * norm_v * np.sqrt(rank_v * coh_v_rho)
    bound_b = 2 * norm_h0 * norm_v * np.sqrt(rank_h * coh_h_rho)
    bound_c_v = 2 * frob_rho * norm_v * np.sqrt(coh_v_h0)
    bound_c_h = 2 * norm_h0 * frob_rho * np.sqrt(coh_h_v)
    auxiliary = {
        'rank_comm_V_rho': rank_v,
        'rank_comm_rho_H0': rank_h,
        'coherence_V_rho': coh_v_rho,
        'coherence_H0_rho': coh_h_rho,
        'coherence_V_H0': coh_v_h0,
        'coherence_H0_V': coh_h_v,
        'bound_c_V_basis': float(bound_c_v),
        'bound_c_H0_basis': float(bound_c_h),
        'norm_H0': norm_h0,
        'norm_V': norm_v,
    }
    return BoundReport.of(
        abs(power(b, t)),
        bound_a,
        bound_b,
        min(bound_c_v, bound_c_h),
        auxiliary,
    )


def power_combined_bound(b: ClosedBattery, t: float) -> InequalityCheck:
    norm_h0 = operator_norm(b.H0)
    norm_v = operator_norm(b.V)
    if norm_h0 < MIN_NORM:
        raise ZeroNormError('H0', norm_h0)
    if norm_v < MIN_NORM:
        raise ZeroNormError('V', norm_v)
    rho_t = evolve_state(b, t)
    comm_h = commutator(rho_t, b.H0)
    comm_v = commutator(rho_t, b.V)
    q_term = numerical_rank(comm_h, RANK_TOL) * frobenius_norm(comm_h) ** 2
    t_term = numerical_rank(comm_v, RANK_TOL) * frobenius_norm(comm_v) ** 2
    return InequalityCheck.of(
        'power_combined',
        (power(b, t) / (norm_h0 * norm_v)) ** 2,
        min(q_term / norm_h0**2, t_term / norm_v**2),
    )


def energy_from_power(b: ClosedBattery, t: float, grid: int) -> PowerIntegral:
    if grid < 2:
        raise InvalidParamsError(f'grid needs at least 2 points, got {grid}')
    if not t > 0:
        raise InvalidParamsError(f't must be > 0, got {t}')
    times = np.linspace(0.0, t, grid)
    powers = np.array([power(b, tau) for tau in times])
    return PowerIntegral(
        float(np.trapezoid(powers, times)),
        float(t * np.max(np.abs(powers))),
    )
