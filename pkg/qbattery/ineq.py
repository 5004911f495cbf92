from typing import TYPE_CHECKING, NamedTuple

import numpy as np

from qbattery.coherence import (
    CoherenceBasis,
    basis_of,
    generalized_coherence,
    l1_offdiag,
    offdiag_sq_sum,
)
from qbattery.errors import NotDensityMatrixError
from qbattery.linalg import (
    RANK_TOL,
    check_dims,
    commutator,
    dagger,
    frobenius_norm,
    is_density_matrix,
    numerical_rank,
    operator_norm,
    require_hermitian,
    require_normal,
    require_unitary,
)

if TYPE_CHECKING:
    from numpy.typing import NDArray

    from qbattery.linalg import ComplexMatrix

REL_SLACK = 1e-9
ABS_SLACK = 1e-12
IDENTITY_TOL = 1e-10


def holds(lhs: float, rhs: float) -> bool:
    return lhs <= rhs * (1 + REL_SLACK) + ABS_SLACK


class InequalityCheck(NamedTuple):
    name: str
    lhs: float
    rhs: float
    holds: bool
    slack_ratio: float

    @classmethod
    def of(cls, name: str, lhs: float, rhs: float) -> 'InequalityCheck':
        if rhs == 0:
            ratio = 0.0 if lhs == 0 else float('inf')
        else:
            ratio = lhs / rhs
        return cls(name, float(lhs), float(rhs), holds(lhs, rhs), float(ratio))


def frobenius_trace_ineq(A: 'ComplexMatrix', B: 'ComplexMatrix') -> InequalityCheck:
    check_dims(A, B)
    return InequalityCheck.of(
        'frobenius_trace',
        abs(np.trace(dagger(A) @ B)),
        frobenius_norm(A) * frobenius_norm(B),
    )


def holder_rank_trace_ineq(
    A: 'ComplexMatrix',
    B: 'ComplexMatrix',
    tol: float = RANK_TOL,
) -> InequalityCheck:
    check_dims(A, B)
    return InequalityCheck.of(
        'holder_rank_trace',
        abs(np.trace(dagger(A) @ B)),
        operator_norm(A) * np.sqrt(numerical_rank(B, tol)) * frobenius_norm(B),
    )


def lemma1(A: 'ComplexMatrix', B: 'ComplexMatrix') -> InequalityCheck:
    require_normal(A)
    require_hermitian(B)
    basis = basis_of(A, 'normal')
    return InequalityCheck.of(
        'lemma1',
        frobenius_norm(commutator(A, B)) ** 2,
        4 * operator_norm(A) ** 2 * generalized_coherence(B, basis),
    )


def lemma1_unitary_corollary(U: 'ComplexMatrix', A: 'ComplexMatrix') -> InequalityCheck:
    require_unitary(U)
    require_hermitian(A)
    return InequalityCheck.of(
        'lemma1_unitary_corollary',
        frobenius_norm(commutator(U, A)) ** 2,
        4 * generalized_coherence(A, basis_of(U, 'unitary')),
    )


def lemma1_prime(U: 'ComplexMatrix', A: 'ComplexMatrix') -> InequalityCheck:
    require_unitary(U)
    require_hermitian(A)
    basis = basis_of(U, 'unitary')
    n = U.shape[0]
    rhs = (
        2
        * np.sqrt(2)
        * operator_norm(A)
        * (np.sqrt(n * offdiag_sq_sum(A, basis)) + l1_offdiag(A, basis))
    )
    lhs = frobenius_norm(commutator(U, A)) ** 2
    return InequalityCheck.of('lemma1_prime', lhs, rhs)


def lemma2(A: 'ComplexMatrix', B: 'ComplexMatrix') -> InequalityCheck:
    require_normal(A)
    require_hermitian(B)
    lhs = frobenius_norm(commutator(dagger(A), B @ A)) ** 2
    mirrored = frobenius_norm(commutator(dagger(A), A @ B)) ** 2
    assert abs(lhs - mirrored) <= IDENTITY_TOL * max(1.0, lhs), (lhs, mirrored)
    basis = basis_of(A, 'normal')
    return InequalityCheck.of(
        'lemma2',
        lhs,
        4 * operator_norm(A) ** 4 * generalized_coherence(B, basis),
    )


def lemma2b(A: 'ComplexMatrix', B: 'ComplexMatrix') -> InequalityCheck:
    require_hermitian(A)
    require_hermitian(B)
    basis = basis_of(A, 'hermitian')
    n = A.shape[0]
    rhs = operator_norm(A @ A) ** 2 * (
        operator_norm(B)
        * (np.sqrt(n * offdiag_sq_sum(B, basis)) + l1_offdiag(B, basis))
        + 2 * generalized_coherence(B, basis)
    )
    return InequalityCheck.of('lemma2b', frobenius_norm(commutator(A, B @ A)) ** 2, rhs)


def _equality_checks(
    name: str,
    lhs: 'NDArray[np.complex128]',
    rhs: 'NDArray[np.complex128]',
    scale: float,
) -> list[InequalityCheck]:
    """Two one-sided checks at the worst entry of lhs == rhs."""
    diff = np.ravel(lhs - rhs)
    worst = diff[np.argmax(np.abs(diff))] if diff.size else 0j
    tol = IDENTITY_TOL * max(1.0, scale)
    skew = abs(worst.imag)
    return [
        InequalityCheck.of(f'{name} (<=)', max(0.0, worst.real) + skew, tol),
        InequalityCheck.of(f'{name} (>=)', max(0.0, -worst.real) + skew, tol),
    ]


def _comm(
    X: 'NDArray[np.complex128]',
    Y: 'NDArray[np.complex128]',
) -> 'NDArray[np.complex128]':
    return X @ Y - Y @ X


def _gram(
    X: 'NDArray[np.complex128]',
    Y: 'NDArray[np.complex128]',
) -> 'NDArray[np.complex128]':
    # tr(X_p^dag Y_q) over the leading index
    return np.einsum('pxy,qxy->pq', X.conj(), Y)


def check_propositions(
    basis: CoherenceBasis,
    A: 'ComplexMatrix',
    B: 'ComplexMatrix',
) -> list[InequalityCheck]:
    require_hermitian(B)
    check_dims(A, B, basis.projectors[0])
    P = np.stack(basis.projectors)
    k = len(P)
    d = np.eye(k)
    scale = max(frobenius_norm(A), frobenius_norm(B)) ** 2
    coherence = generalized_coherence(B, basis)

    # tr([P_i, A P_i]^dag [P_j, A P_j]) = delta_ij |[P_j, A P_j]|^2
    diag_comm = _comm(P, A @ P)
    g = _gram(diag_comm, diag_comm)
    checks = _equality_checks('proposition1', g, d * np.diag(g), scale)

    # |[P_i, B P_j]| = |[P_i, P_j B]|
    left = _comm(P[:, None], B @ P[None, :])
    right = _comm(P[:, None], P[None, :] @ B)
    left_sq = np.sum(np.abs(left) ** 2, axis=(2, 3))
    right_sq = np.sum(np.abs(right) ** 2, axis=(2, 3))
    checks += _equality_checks('proposition2', left_sq, right_sq, scale)

    # |[P_i, B P_i]|^2 = 1/2 |[P_i, B]|^2, summing to C(B)
    half = 0.5 * np.sum(np.abs(_comm(P, B[None])) ** 2, axis=(1, 2))
    checks += _equality_checks('proposition3', np.diag(left_sq), half, scale)
    checks += _equality_checks(
        'proposition3_sum',
        np.array([np.trace(left_sq)]),
        np.array([coherence]),
        scale,
    )

    # tr([P_i, P_j B]^dag [P_a, P_b B])
    lhs4 = _gram(right.reshape(k * k, *B.shape), right.reshape(k * k, *B.shape))
    lhs4 = lhs4.reshape(k, k, k, k)
    BP = B @ P
    # s[i] = tr(B^2 P_i), m2[j, a] = tr(B P_j B P_a)
    s = np.einsum('xy,iyx->i', B @ B, P)
    m2 = np.einsum('jxy,ayx->ja', BP, BP)
    rhs4 = (
        np.einsum('ij,ab,ia,i->ijab', d, d, d, s)
        - np.einsum('ij,ib,ia->ijab', d, d, m2)
        - np.einsum('ab,ja,ij->ijab', d, d, m2)
        + np.einsum('ia,jb,ij->ijab', d, d, m2)
    )
    checks += _equality_checks('proposition4', lhs4, rhs4, scale)

    # proposition 4 at a=i, b=j
    cor1 = d * (s - np.diag(m2))[:, None] + (1 - d) * m2.T
    checks += _equality_checks('corollary1', right_sq, cor1, scale)
    checks += _equality_checks(
        'corollary2',
        np.array([right_sq.sum()]),
        np.array([2 * coherence]),
        scale,
    )
    return checks


class VonNeumannBounds(NamedTuple):
    lower: float
    upper: float
    weyl_upper: float


def von_neumann_work_bounds(
    rho0: 'ComplexMatrix',
    H0: 'ComplexMatrix',
    U: 'ComplexMatrix',
) -> VonNeumannBounds:
    check_dims(rho0, H0, U)
    if not is_density_matrix(rho0):
        raise NotDensityMatrixError('rho0 fails hermiticity, trace or positivity')
    require_unitary(U)
    require_hermitian(H0)
    n = rho0.shape[0]
    delta = H0 - dagger(U) @ H0 @ U
    d = np.sort(np.linalg.eigvalsh(rho0))[::-1]
    mu = np.sort(np.linalg.eigvalsh((delta + dagger(delta)) / 2))
    sigma = np.sort(np.abs(mu))[::-1]
    lower = max(0.0, float(d @ mu), -float(d @ mu[::-1]))
    upper = float(d @ sigma)
    weyl_upper = 2 * n * float(d.max()) * operator_norm(H0)
    return VonNeumannBounds(lower, upper, weyl_upper)
