"""Quench of the periodic anisotropic XY chain, solved mode by mode.

The chain maps onto independent momentum pairs (k, -k). Each pair lives in
the two-level space {|00>, |11>} and contributes a spin-1/2 precession, so
work and power are sums over the positive momenta. The dense builders below
are the exact-diagonalisation counterparts used to check those sums.
"""

import logging
from typing import TYPE_CHECKING, NamedTuple

import numpy as np
import scipy.linalg

from qbattery.closed import ClosedBattery
from qbattery.errors import InvalidParamsError, TooLargeError
from qbattery.linalg import dagger, sector_isometry
from qbattery.models.common import SIGMA_X, SIGMA_Y, SIGMA_Z, site_operator

if TYPE_CHECKING:
    from numpy.typing import NDArray

    from qbattery.linalg import ComplexMatrix

logger = logging.getLogger(__name__)

DENSE_LIMIT = 12
ENUMERATION_LIMIT = 16

# sign of each pair state |00>, |10>, |01>, |11> in the H0 block coherence
_PAIR_SIGN = np.array([-1.0, 0.0, 0.0, 1.0])


class XYChainParams(NamedTuple):
    N: int
    eta: float
    h1: float
    h2: float

    @classmethod
    def create(cls, N: int, eta: float, h1: float, h2: float) -> 'XYChainParams':
        if N < 2 or N % 2:
            raise InvalidParamsError(f'N must be even and >= 2, got {N}')
        return cls(int(N), float(eta), float(h1), float(h2))


class XYModeData(NamedTuple):
    k: 'NDArray[np.float64]'
    lambda1: 'NDArray[np.float64]'
    lambda2: 'NDArray[np.float64]'
    theta1: 'NDArray[np.float64]'
    theta2: 'NDArray[np.float64]'
    chi: 'NDArray[np.float64]'


def _momenta(N: int) -> 'NDArray[np.float64]':
    return (2 * np.arange(1, N // 2 + 1) - 1) * np.pi / N


def _dispersion(
    k: 'NDArray[np.float64]',
    eta: float,
    h: float,
) -> tuple['NDArray[np.float64]', 'NDArray[np.float64]']:
    eps = h - np.cos(k)
    gap = eta * np.sin(k)
    # arctan(gap / (eps + |.|)) written as a half angle, continuous in k
    return 0.5 * np.hypot(eps, gap), 0.5 * np.arctan2(gap, eps)


def xy_modes(p: XYChainParams) -> XYModeData:
    k = _momenta(p.N)
    lambda1, theta1 = _dispersion(k, p.eta, p.h1)
    lambda2, theta2 = _dispersion(k, p.eta, p.h2)
    return XYModeData(k, lambda1, lambda2, theta1, theta2, theta2 - theta1)


def xy_work(p: XYChainParams, t: float) -> float:
    m = xy_modes(p)
    return float(
        2 * np.sum(m.lambda1 * np.sin(2 * m.chi) ** 2 * np.sin(m.lambda2 * t) ** 2),
    )


def xy_power(p: XYChainParams, t: float) -> float:
    m = xy_modes(p)
    return float(
        2
        * np.sum(
            m.lambda1 * m.lambda2 * np.sin(2 * m.chi) ** 2 * np.sin(2 * m.lambda2 * t),
        ),
    )


def xy_state_coherence(p: XYChainParams) -> float:
    chi = xy_modes(p).chi
    overlap = np.prod(np.cos(chi) ** 4 + np.sin(chi) ** 4)
    return float(1 - overlap)


def xy_work_bound_a(p: XYChainParams) -> float:
    m = xy_modes(p)
    return float(
        2 * np.sqrt(2) * abs(np.sum(m.lambda1)) * np.sqrt(xy_state_coherence(p)),
    )


def xy_h0_coherence_smallN(p: XYChainParams) -> float:
    """Coherence of the pre-quench Hamiltonian in the post-quench eigenbasis.

    Sums over every string of pair occupations, 4**(N/2) of them. Only pairs
    left intact (both modes empty or both filled) contribute, with the sign
    of their energy.
    """
    if p.N > ENUMERATION_LIMIT:
        raise TooLargeError('xy pair enumeration N', p.N, ENUMERATION_LIMIT)
    m = xy_modes(p)
    pairs = p.N // 2
    configs = np.indices((4,) * pairs).reshape(pairs, -1).T
    signs = _PAIR_SIGN[configs]
    cos2 = np.cos(2 * m.chi)
    first = signs @ (m.lambda1 * (1 + cos2))
    second = signs @ (m.lambda1 * (1 - cos2))
    value = float(np.sum(first * second))
    logger.debug('xy_h0_coherence_smallN: %d strings, value %g', len(configs), value)
    return value


def _require_dense(N: int) -> None:
    if N > DENSE_LIMIT:
        raise TooLargeError('dense xy chain N', N, DENSE_LIMIT)


def xy_spin_hamiltonian(N: int, eta: float, h: float) -> 'ComplexMatrix':
    """-1/4 sum_j [(1+eta)/2 XX + (1-eta)/2 YY + h Z] on a ring of N spins."""
    _require_dense(N)
    H = np.zeros((2**N, 2**N), dtype=np.complex128)
    for j in range(N):
        nxt = (j + 1) % N
        for op, weight in ((SIGMA_X, (1 + eta) / 2), (SIGMA_Y, (1 - eta) / 2)):
            H += weight * site_operator(op, j, N) @ site_operator(op, nxt, N)
        H += h * site_operator(SIGMA_Z, j, N)
    return -H / 4


def _even_parity_mask(N: int) -> 'NDArray[np.bool_]':
    flips = np.array([bin(i).count('1') for i in range(2**N)])
    return flips % 2 == 0


def xy_even_sector_battery(p: XYChainParams) -> ClosedBattery:
    """The chain restricted to prod sigma_z = +1, starting in the ground state of h1."""
    _require_dense(p.N)
    S = sector_isometry(_even_parity_mask(p.N))
    H1 = dagger(S) @ xy_spin_hamiltonian(p.N, p.eta, p.h1) @ S
    H2 = dagger(S) @ xy_spin_hamiltonian(p.N, p.eta, p.h2) @ S
    _, vectors = scipy.linalg.eigh(H1, subset_by_index=[0, 0])
    ground = vectors[:, 0]
    return ClosedBattery.create(H1, H2 - H1, np.outer(ground, ground.conj()))


def _pair_block(k: float, eta: float, h: float) -> 'ComplexMatrix':
    # basis |00>, |10>, |01>, |11> of the modes (k, -k)
    eps = 0.5 * (h - np.cos(k))
    gap = 0.5 * eta * np.sin(k)
    block = np.diag([-eps, 0, 0, eps]).astype(np.complex128)
    block[3, 0] = 1j * gap
    block[0, 3] = -1j * gap
    return block


def xy_pair_fock_hamiltonian(p: XYChainParams, h: float) -> 'ComplexMatrix':
    """Free-fermion Hamiltonian at field h as a dense matrix on the pair Fock space."""
    _require_dense(p.N)
    pairs = p.N // 2
    H = np.zeros((4**pairs, 4**pairs), dtype=np.complex128)
    for index, k in enumerate(_momenta(p.N)):
        H += site_operator(_pair_block(k, p.eta, h), index, pairs)
    return H
