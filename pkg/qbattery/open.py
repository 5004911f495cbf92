import logging
import warnings
from collections.abc import Sequence
from typing import TYPE_CHECKING, Any, NamedTuple, Optional

import numpy as np

from qbattery.closed import BoundReport
from qbattery.coherence import basis_of, generalized_coherence
from qbattery.errors import (
    IncompleteChannelError,
    InvalidParamsError,
    NonHermitianKrausError,
    NonHermitianLindbladError,
    StepTooLargeError,
    StepTooLargeWarning,
    TOutsideTrajectoryError,
)
from qbattery.linalg import (
    RANK_TOL,
    anticommutator,
    as_matrix,
    check_dims,
    commutator,
    dagger,
    frobenius_norm,
    is_hermitian,
    numerical_rank,
    operator_norm,
    require_hermitian,
)

if TYPE_CHECKING:
    from numpy.typing import ArrayLike, NDArray

    from qbattery.coherence import CoherenceBasis
    from qbattery.linalg import ComplexMatrix

logger = logging.getLogger(__name__)

COMPLETENESS_TOL = 1e-8
NORMALIZATION_TOL = 1e-8
STABILITY_LIMIT = 0.1


class KrausChannel(NamedTuple):
    operators: tuple['ComplexMatrix', ...]
    tol: float = COMPLETENESS_TOL

    @classmethod
    def create(
        cls,
        operators: Sequence['ArrayLike'],
        tol: float = COMPLETENESS_TOL,
    ) -> 'KrausChannel':
        ops = tuple(as_matrix(op) for op in operators)
        check_dims(*ops)
        channel = cls(ops, tol)
        residual = completeness_residual(channel)
        if residual > tol:
            raise IncompleteChannelError(residual, tol)
        return channel

    @property
    def dim(self) -> int:
        return int(self.operators[0].shape[0])

    @property
    def hermitian(self) -> tuple[bool, ...]:
        return tuple(is_hermitian(op) for op in self.operators)


class KrausEnergyChange(NamedTuple):
    dE: float
    dE_A: float
    dE_B: float
    dE_C: float


def completeness_residual(ch: KrausChannel) -> float:
    zero = np.zeros_like(ch.operators[0])
    total = sum((dagger(op) @ op for op in ch.operators), zero)
    return frobenius_norm(total - np.eye(ch.dim))


def _require_complete(ch: KrausChannel) -> None:
    residual = completeness_residual(ch)
    if residual > ch.tol:
        raise IncompleteChannelError(residual, ch.tol)


def apply_channel(ch: KrausChannel, rho: 'ComplexMatrix') -> 'ComplexMatrix':
    check_dims(rho, ch.operators[0])
    _require_complete(ch)
    return sum((op @ rho @ dagger(op) for op in ch.operators), np.zeros_like(rho))


def adjoint_channel(ch: KrausChannel, X: 'ComplexMatrix') -> 'ComplexMatrix':
    check_dims(X, ch.operators[0])
    return sum((dagger(op) @ X @ op for op in ch.operators), np.zeros_like(X))


def kraus_energy_change(
    ch: KrausChannel,
    rho0: 'ComplexMatrix',
    H0: 'ComplexMatrix',
) -> KrausEnergyChange:
    evolved = apply_channel(ch, rho0)
    after = complex(np.trace(evolved @ H0))
    dual = complex(np.trace(rho0 @ adjoint_channel(ch, H0)))
    assert abs(after - dual) <= 1e-10 * max(1.0, operator_norm(H0)), (after, dual)

    dE = float(np.real(np.trace(rho0 @ H0)) - after.real)
    forms = np.zeros(3)
    for op in ch.operators:
        op_d = dagger(op)
        forms += np.real(
            [
                np.trace(op_d @ H0 @ commutator(rho0, op)),
                np.trace(op @ commutator(op_d @ H0, rho0)),
                np.trace(rho0 @ commutator(H0 @ op, op_d)),
            ],
        )
    return KrausEnergyChange(dE, *map(float, forms))


def _require_hermitian_kraus(ch: KrausChannel) -> None:
    for index, flag in enumerate(ch.hermitian):
        if not flag:
            raise NonHermitianKrausError(index)


def _kraus_form_c(
    ch: KrausChannel,
    H0: 'ComplexMatrix',
    rho0: 'ComplexMatrix',
) -> float:
    frob_rho = frobenius_norm(rho0)
    return float(
        sum(
            2
            * frob_rho
            * operator_norm(op) ** 2
            * np.sqrt(generalized_coherence(H0, basis_of(op, 'hermitian')))
            for op in ch.operators
        ),
    )


def kraus_bounds(
    ch: KrausChannel,
    rho0: 'ComplexMatrix',
    H0: 'ComplexMatrix',
) -> BoundReport:
    _require_hermitian_kraus(ch)
    change = kraus_energy_change(ch, rho0, H0)
    rho_basis = basis_of(rho0, 'hermitian')
    norm_h0 = operator_norm(H0)
    norm_rho = operator_norm(rho0)

    bound_a = bound_b = 0.0
    r1, r2, coh_rho, coh_k, coh_h0 = [], [], [], [], []
    for op in ch.operators:
        op_basis = basis_of(op, 'hermitian')
        norm_op = operator_norm(op)
        r1.append(numerical_rank(commutator(op, rho0), RANK_TOL))
        r2.append(numerical_rank(commutator(rho0, op @ H0), RANK_TOL))
        coh_rho.append(generalized_coherence(rho0, op_basis))
        coh_k.append(generalized_coherence(op @ H0, rho_basis))
        coh_h0.append(generalized_coherence(H0, op_basis))
        bound_a += 2 * norm_h0 * norm_op**2 * np.sqrt(r1[-1] * coh_rho[-1])
        bound_b += 2 * norm_rho * norm_op * np.sqrt(r2[-1] * coh_k[-1])

    auxiliary = {
        'R1': r1,
        'R2': r2,
        'coherence_A_rho0': coh_rho,
        'coherence_rho0_AH0': coh_k,
        'coherence_A_H0': coh_h0,
        'identities': change,
    }
    return BoundReport.of(
        change.dE,
        bound_a,
        bound_b,
        _kraus_form_c(ch, H0, rho0),
        auxiliary,
    )


class LindbladModel(NamedTuple):
    H0: 'ComplexMatrix'
    V: 'ComplexMatrix'
    dissipators: tuple[tuple[float, 'ComplexMatrix'], ...]

    @classmethod
    def create(
        cls,
        H0: 'ArrayLike',
        V: Optional['ArrayLike'] = None,
        dissipators: Sequence[tuple[float, 'ArrayLike']] = (),
        *,
        normalized: bool = False,
    ) -> 'LindbladModel':
        H0 = as_matrix(H0)
        V = np.zeros_like(H0) if V is None else as_matrix(V)
        ops = tuple((float(gamma), as_matrix(op)) for gamma, op in dissipators)
        check_dims(H0, V, *(op for _, op in ops))
        require_hermitian(H0)
        require_hermitian(V)
        for gamma, _ in ops:
            if gamma < 0:
                raise InvalidParamsError(f'negative rate gamma={gamma}')
        if normalized and ops:
            stack = np.stack([op for _, op in ops])
            overlap = np.einsum('pxy,qxy->pq', stack, stack.conj())
            if frobenius_norm(overlap - np.eye(len(ops))) > NORMALIZATION_TOL:
                raise InvalidParamsError('lindblad operators are not orthonormal')
        return cls(H0, V, ops)

    @property
    def dim(self) -> int:
        return int(self.H0.shape[0])

    @property
    def hamiltonian(self) -> 'ComplexMatrix':
        return self.H0 + self.V

    @property
    def stiffness(self) -> float:
        return operator_norm(self.hamiltonian) + sum(
            gamma * operator_norm(op) ** 2 for gamma, op in self.dissipators
        )


class TrajectoryDrift(NamedTuple):
    trace_error: float
    hermiticity: float
    min_eigenvalue: float

    @property
    def physical(self) -> bool:
        return (
            self.trace_error <= 1e-7
            and self.hermiticity <= 1e-8
            and self.min_eigenvalue >= -1e-6
        )


class Trajectory(NamedTuple):
    times: 'NDArray[np.float64]'
    states: 'NDArray[np.complex128]'
    energies: 'NDArray[np.float64]'

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    def index_at(self, t: float) -> int:
        """Grid index nearest to t."""
        if t < -1e-12 or t > self.t_end * (1 + 1e-12) + 1e-12:
            raise TOutsideTrajectoryError(t, self.t_end)
        return int(np.argmin(np.abs(self.times - t)))

    def drift(self) -> TrajectoryDrift:
        """Worst departure of the stored states from a density matrix."""
        states = self.states
        adjoint = states.conj().transpose(0, 2, 1)
        traces = np.real(np.einsum('tii->t', states))
        return TrajectoryDrift(
            float(np.max(np.abs(traces - 1))),
            float(np.max(np.abs(states - adjoint))),
            float(np.min(np.linalg.eigvalsh((states + adjoint) / 2))),
        )


def lindblad_rhs(m: LindbladModel, rho: 'ComplexMatrix') -> 'ComplexMatrix':
    check_dims(rho, m.H0)
    drho = -1j * commutator(m.hamiltonian, rho)
    for gamma, op in m.dissipators:
        op_d = dagger(op)
        drho += gamma * (op @ rho @ op_d - 0.5 * anticommutator(op_d @ op, rho))
    return drho


def _effective_generator(
    m: LindbladModel,
) -> tuple['ComplexMatrix', list[tuple[float, 'ComplexMatrix']]]:
    decay = sum(
        (gamma * dagger(op) @ op for gamma, op in m.dissipators),
        np.zeros_like(m.H0),
    )
    return m.hamiltonian - 0.5j * decay, [(g, op) for g, op in m.dissipators if g > 0]


def lindblad_evolve(
    m: LindbladModel,
    rho0: 'ComplexMatrix',
    t_end: float,
    dt: float,
    *,
    strict: bool = False,
) -> Trajectory:
    if dt <= 0 or dt > t_end:
        raise InvalidParamsError(f'need 0 < dt <= t_end, got dt={dt}, t_end={t_end}')
    stiffness = m.stiffness
    if dt * stiffness > STABILITY_LIMIT:
        if strict:
            raise StepTooLargeError(dt, stiffness)
        warnings.warn(StepTooLargeWarning(dt, stiffness), stacklevel=2)

    steps = max(1, round(t_end / dt))
    h = t_end / steps
    H_eff, jumps = _effective_generator(m)
    H_eff_d = dagger(H_eff)

    def rhs(rho: 'ComplexMatrix') -> 'ComplexMatrix':
        drho = -1j * (H_eff @ rho - rho @ H_eff_d)
        for gamma, op in jumps:
            drho += gamma * (op @ rho @ dagger(op))
        return drho

    states = np.empty((steps + 1, *rho0.shape), dtype=np.complex128)
    states[0] = rho = as_matrix(rho0)
    for i in range(1, steps + 1):
        k1 = rhs(rho)
        k2 = rhs(rho + 0.5 * h * k1)
        k3 = rhs(rho + 0.5 * h * k2)
        k4 = rhs(rho + h * k3)
        rho = rho + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        states[i] = rho

    times = h * np.arange(steps + 1)
    energies = np.real(np.einsum('txy,yx->t', states, m.H0))
    logger.debug('lindblad_evolve: %d RK4 steps of %g', steps, h)
    traj = Trajectory(times, states, energies)
    drift = traj.drift()
    if not drift.physical:
        logger.warning(
            'trajectory drifted: trace error %.3g, hermiticity %.3g, min eig %.3g',
            *drift,
        )
    return traj


def _rank_series(stack: 'NDArray[np.complex128]') -> 'NDArray[np.float64]':
    sv = np.linalg.svd(stack, compute_uv=False)
    top = sv[:, :1]
    return np.where(top[:, 0] > 0, np.sum(sv > RANK_TOL * top, axis=1), 0).astype(float)


def _coherence_series(
    stack: 'NDArray[np.complex128]',
    basis: 'CoherenceBasis',
) -> 'NDArray[np.float64]':
    vectors = basis.decomposition.eigenvectors
    rotated = np.einsum('xa,txy,yb->tab', vectors.conj(), stack, vectors)
    return np.sum(np.abs(rotated[:, basis.offdiag_mask()]) ** 2, axis=1)


class OpenBoundSeries(NamedTuple):
    times: 'NDArray[np.float64]'
    quantity: 'NDArray[np.float64]'
    bound: 'NDArray[np.float64]'
    W_A: 'NDArray[np.float64]'
    W_B: 'NDArray[np.float64]'
    auxiliary: dict[str, Any]


def _require_hermitian_lindblad(m: LindbladModel) -> None:
    for index, (_, op) in enumerate(m.dissipators):
        if not is_hermitian(op):
            raise NonHermitianLindbladError(index)


def energy_bound_series(
    m: LindbladModel,
    traj: Trajectory,
    stop: Optional[int] = None,
) -> OpenBoundSeries:
    """Running energy-exchange bound along the trajectory grid.

    The suprema over earlier times are cumulative maxima, so entry k bounds
    |E(t_k) - E(0)| using only states up to t_k.
    """
    _require_hermitian_lindblad(m)
    end = len(traj.times) if stop is None else stop + 1
    times = traj.times[:end]
    states = traj.states[:end]
    H0, V = m.H0, m.V

    v_basis = basis_of(V, 'hermitian')
    h_basis = basis_of(H0, 'hermitian')
    norm_v = operator_norm(V)
    coh_h_v = generalized_coherence(V, h_basis)

    form_v = norm_v * np.sqrt(
        _rank_series(states @ V - V @ states) * _coherence_series(states, v_basis),
    )
    form_f = np.linalg.norm(states, axis=(1, 2)) * np.sqrt(coh_h_v)
    form_h = norm_v * np.sqrt(
        _rank_series(states @ H0 - H0 @ states) * _coherence_series(states, h_basis),
    )
    forms = np.stack([form_v, form_f, form_h])
    pointwise = 2 * forms.min(axis=0)
    w_a = np.maximum.accumulate(pointwise)

    rank_rho = _rank_series(states)
    w_b = np.zeros_like(times)
    ranks_l = []
    for gamma, op in m.dissipators:
        rank_l = numerical_rank(op, RANK_TOL)
        ranks_l.append(rank_l)
        coh = _coherence_series(states, basis_of(op, 'hermitian'))
        term = np.sqrt((rank_rho + rank_l) * coh)
        weight = 3 * gamma * max(1.0, operator_norm(op) ** 2)
        w_b += weight * np.maximum.accumulate(term)

    quantity = np.abs(traj.energies[:end] - traj.energies[0])
    bound = times * operator_norm(H0) * (w_a + w_b)
    names = ('V_rank', 'frobenius', 'H0_rank')
    auxiliary = {
        'W_A_form': names[int(np.argmin(forms[:, int(np.argmax(pointwise))]))],
        'rank_L': ranks_l,
        'rank_rho_final': int(rank_rho[-1]),
    }
    return OpenBoundSeries(times, quantity, bound, w_a, w_b, auxiliary)


def open_energy_bound(m: LindbladModel, traj: Trajectory, t: float) -> BoundReport:
    index = traj.index_at(t)
    series = energy_bound_series(m, traj, index)
    auxiliary = {
        **series.auxiliary,
        't': float(traj.times[index]),
        'W_A': float(series.W_A[-1]),
        'W_B': float(series.W_B[-1]),
    }
    return BoundReport.of(
        float(series.quantity[-1]),
        float(series.bound[-1]),
        auxiliary=auxiliary,
    )


def kraus_from_lindblad(m: LindbladModel, dt: float) -> KrausChannel:
    decay = sum(
        (gamma * dagger(op) @ op for gamma, op in m.dissipators),
        np.zeros_like(m.H0),
    )
    A0 = np.eye(m.dim) - dt * (1j * m.hamiltonian + 0.5 * decay)
    ops = [A0] + [np.sqrt(gamma * dt) * op for gamma, op in m.dissipators]
    # first order in dt, so completeness only holds up to dt^2 terms
    tol = 10 * dt**2 * m.stiffness**2 + 1e-12
    channel = KrausChannel(tuple(ops), tol)
    _require_complete(channel)
    return channel


def ensemble_bound(
    subsystems: Sequence[tuple[KrausChannel, 'ComplexMatrix', 'ComplexMatrix']],
) -> BoundReport:
    quantity = 0.0
    bounds = []
    for ch, H0, rho in subsystems:
        _require_hermitian_kraus(ch)
        quantity -= kraus_energy_change(ch, rho, H0).dE
        bounds.append(_kraus_form_c(ch, H0, rho))
    return BoundReport.of(
        quantity,
        sum(bounds),
        auxiliary={'subsystem_bounds': bounds, 'subsystems': len(bounds)},
    )
