import logging
from typing import TYPE_CHECKING, Literal, NamedTuple

import numpy as np
import scipy.linalg
from scipy.sparse.csgraph import connected_components

from qbattery.errors import (
    DegenerateClusteringError,
    DimensionMismatchError,
    InvalidParamsError,
    NotHermitianError,
    NotNormalError,
    NotUnitaryError,
)

if TYPE_CHECKING:
    from numpy.typing import ArrayLike, NDArray

    ComplexMatrix = NDArray[np.complex128]

logger = logging.getLogger(__name__)

RANK_TOL = 1e-9
CLUSTER_TOL = 1e-8
HERMITIAN_TOL = 1e-10
UNITARY_TOL = 1e-8
NORMAL_TOL = 1e-8

SpectralKind = Literal['hermitian', 'unitary', 'normal']


class SpectralDecomposition(NamedTuple):
    kind: SpectralKind
    eigenvalues: 'NDArray[np.complex128]'
    projectors: tuple['ComplexMatrix', ...]
    cluster_tol: float
    eigenvectors: 'ComplexMatrix'
    labels: 'NDArray[np.intp]'

    @property
    def dim(self) -> int:
        return int(self.eigenvectors.shape[0])


def as_matrix(M: 'ArrayLike') -> 'ComplexMatrix':
    arr = np.asarray(M, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionMismatchError(arr.shape)
    if not np.all(np.isfinite(arr)):
        raise InvalidParamsError('matrix has non-finite entries')
    return arr


def check_dims(*ms: 'ComplexMatrix') -> int:
    shapes = {m.shape for m in ms}
    if len(shapes) != 1:
        raise DimensionMismatchError(*(m.shape for m in ms))
    return int(ms[0].shape[0])


def dagger(M: 'ComplexMatrix') -> 'ComplexMatrix':
    return M.conj().T


def within(a: complex, b: complex, tol: float) -> bool:
    """Absolute comparison below scale 1, relative above it."""
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def frobenius_norm(M: 'ComplexMatrix') -> float:
    return float(np.linalg.norm(M, 'fro'))


def operator_norm(M: 'ComplexMatrix') -> float:
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))


def numerical_rank(M: 'ComplexMatrix', tol: float = RANK_TOL) -> int:
    sv = scipy.linalg.svdvals(M)
    if sv.size == 0 or sv[0] == 0:
        return 0
    return int(np.count_nonzero(sv > tol * sv[0]))


def commutator(A: 'ComplexMatrix', B: 'ComplexMatrix') -> 'ComplexMatrix':
    check_dims(A, B)
    return A @ B - B @ A


def anticommutator(A: 'ComplexMatrix', B: 'ComplexMatrix') -> 'ComplexMatrix':
    check_dims(A, B)
    return A @ B + B @ A


def hermitian_residual(M: 'ComplexMatrix') -> float:
    return frobenius_norm(M - dagger(M))


def unitary_residual(M: 'ComplexMatrix') -> float:
    return frobenius_norm(dagger(M) @ M - np.eye(M.shape[0]))


def normal_residual(M: 'ComplexMatrix') -> float:
    return frobenius_norm(commutator(M, dagger(M)))


def is_hermitian(M: 'ComplexMatrix', tol: float = HERMITIAN_TOL) -> bool:
    return hermitian_residual(M) <= tol * max(1.0, frobenius_norm(M))


def is_unitary(M: 'ComplexMatrix', tol: float = UNITARY_TOL) -> bool:
    return unitary_residual(M) <= tol


def is_normal(M: 'ComplexMatrix', tol: float = NORMAL_TOL) -> bool:
    return normal_residual(M) <= tol * max(1.0, frobenius_norm(M) ** 2)


def require_hermitian(M: 'ComplexMatrix', tol: float = HERMITIAN_TOL) -> None:
    if not is_hermitian(M, tol):
        raise NotHermitianError(hermitian_residual(M))


def require_unitary(M: 'ComplexMatrix', tol: float = UNITARY_TOL) -> None:
    if not is_unitary(M, tol):
        raise NotUnitaryError(unitary_residual(M))


def require_normal(M: 'ComplexMatrix', tol: float = NORMAL_TOL) -> None:
    if not is_normal(M, tol):
        raise NotNormalError(normal_residual(M))


def is_density_matrix(rho: 'ComplexMatrix', tol: float = 1e-10) -> bool:
    if not is_hermitian(rho, tol):
        return False
    if abs(np.trace(rho) - 1) > tol:
        return False
    return bool(np.linalg.eigvalsh(rho)[0] >= -tol)


def _pairwise_distance(
    values: 'NDArray[np.complex128]',
    kind: SpectralKind,
) -> 'NDArray[np.float64]':
    if kind == 'unitary':
        # arc length on the unit circle
        return np.abs(np.angle(values[:, None] * values[None, :].conj()))
    return np.abs(values[:, None] - values[None, :])


def _cluster(
    values: 'NDArray[np.complex128]',
    kind: SpectralKind,
    cluster_tol: float,
) -> tuple[int, 'NDArray[np.intp]']:
    dist = _pairwise_distance(values, kind)
    count, labels = connected_components(dist <= cluster_tol, directed=False)
    for label in range(count):
        members = labels == label
        span = float(dist[np.ix_(members, members)].max())
        if span > 10 * cluster_tol:
            raise DegenerateClusteringError(span, cluster_tol)
    return count, labels


def _representative(values: 'NDArray[np.complex128]', kind: SpectralKind) -> complex:
    mean = complex(values.mean())
    if kind == 'hermitian':
        return complex(mean.real)
    if kind == 'unitary':
        return mean / abs(mean)
    return mean


def spectral_projectors(
    M: 'ComplexMatrix',
    kind: SpectralKind = 'hermitian',
    cluster_tol: float = CLUSTER_TOL,
) -> SpectralDecomposition:
    if kind == 'hermitian':
        require_hermitian(M)
        values, vectors = scipy.linalg.eigh((M + dagger(M)) / 2)
        values = values.astype(np.complex128)
    else:
        if kind == 'unitary':
            require_unitary(M)
        else:
            require_normal(M)
        # the Schur form of a normal matrix is diagonal with orthonormal vectors
        triangular, vectors = scipy.linalg.schur(M, output='complex')
        values = np.diag(triangular).copy()

    count, labels = _cluster(values, kind, cluster_tol)
    eigenvalues = np.empty(count, dtype=np.complex128)
    projectors = []
    for label in range(count):
        members = labels == label
        block = vectors[:, members]
        eigenvalues[label] = _representative(values[members], kind)
        projectors.append(block @ dagger(block))

    logger.debug(
        'spectral_projectors(%s): %d eigenvalues in %d clusters',
        kind,
        len(values),
        count,
    )
    return SpectralDecomposition(
        kind=kind,
        eigenvalues=eigenvalues,
        projectors=tuple(projectors),
        cluster_tol=cluster_tol,
        eigenvectors=vectors.astype(np.complex128),
        labels=labels.astype(np.intp),
    )


def reconstruct(decomposition: SpectralDecomposition) -> 'ComplexMatrix':
    return sum(
        (
            value * proj
            for value, proj in zip(decomposition.eigenvalues, decomposition.projectors)
        ),
        np.zeros((decomposition.dim, decomposition.dim), dtype=np.complex128),
    )


def evolve_unitary(H: 'ComplexMatrix', t: float) -> 'ComplexMatrix':
    require_hermitian(H)
    values, vectors = scipy.linalg.eigh((H + dagger(H)) / 2)
    return (vectors * np.exp(-1j * values * t)) @ dagger(vectors)


def sector_isometry(mask: 'NDArray[np.bool_]') -> 'ComplexMatrix':
    """Columns of the identity selected by ``mask``."""
    return np.eye(len(mask), dtype=np.complex128)[:, np.asarray(mask, dtype=bool)]
