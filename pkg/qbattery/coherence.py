from typing import TYPE_CHECKING, NamedTuple

import numpy as np

from qbattery.linalg import (
    CLUSTER_TOL,
    SpectralDecomposition,
    check_dims,
    commutator,
    dagger,
    frobenius_norm,
    spectral_projectors,
)

if TYPE_CHECKING:
    from qbattery.linalg import ComplexMatrix, SpectralKind

IDENTITY_TOL = 1e-10


class CoherenceBasis(NamedTuple):
    decomposition: SpectralDecomposition

    @property
    def projectors(self) -> tuple['ComplexMatrix', ...]:
        return self.decomposition.projectors

    @property
    def dim(self) -> int:
        return self.decomposition.dim

    def to_eigenbasis(self, X: 'ComplexMatrix') -> 'ComplexMatrix':
        """Matrix elements of X between the basis eigenvectors."""
        vectors = self.decomposition.eigenvectors
        return dagger(vectors) @ X @ vectors

    def offdiag_mask(self) -> 'np.ndarray':
        labels = self.decomposition.labels
        return labels[:, None] != labels[None, :]

    def transformed(self, G: 'ComplexMatrix') -> 'CoherenceBasis':
        """Basis of G B G^dag for the unitary G."""
        dec = self.decomposition
        return CoherenceBasis(
            dec._replace(
                projectors=tuple(G @ proj @ dagger(G) for proj in dec.projectors),
                eigenvectors=G @ dec.eigenvectors,
            ),
        )


def basis_of(
    M: 'ComplexMatrix',
    kind: 'SpectralKind' = 'hermitian',
    cluster_tol: float = CLUSTER_TOL,
) -> CoherenceBasis:
    return CoherenceBasis(spectral_projectors(M, kind, cluster_tol))


def dephase(X: 'ComplexMatrix', basis: CoherenceBasis) -> 'ComplexMatrix':
    check_dims(X, basis.projectors[0])
    return sum(
        (proj @ X @ proj for proj in basis.projectors),
        np.zeros_like(X),
    )


def generalized_coherence(X: 'ComplexMatrix', basis: CoherenceBasis) -> float:
    check_dims(X, basis.projectors[0])
    value = 0.5 * sum(
        frobenius_norm(commutator(X, proj)) ** 2 for proj in basis.projectors
    )
    offdiag = frobenius_norm(X - dephase(X, basis)) ** 2
    assert abs(value - offdiag) <= IDENTITY_TOL * max(1.0, frobenius_norm(X) ** 2), (
        value,
        offdiag,
    )
    return float(value)


def offdiag_sq_sum(X: 'ComplexMatrix', basis: CoherenceBasis) -> float:
    check_dims(X, basis.projectors[0])
    entries = basis.to_eigenbasis(X)[basis.offdiag_mask()]
    return float(np.sum(np.abs(entries) ** 2))


def l1_offdiag(X: 'ComplexMatrix', basis: CoherenceBasis) -> float:
    # elementwise over eigenvector pairs that sit in different clusters
    check_dims(X, basis.projectors[0])
    entries = basis.to_eigenbasis(X)[basis.offdiag_mask()]
    return float(np.sum(np.abs(entries)))


def purity(rho: 'ComplexMatrix') -> float:
    return float(np.real(np.trace(rho @ rho)))
