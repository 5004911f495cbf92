"""Random instances for the inequality sweeps."""

from typing import TYPE_CHECKING, Literal, Optional

import numpy as np
from scipy.stats import unitary_group

from qbattery.closed import ClosedBattery
from qbattery.linalg import dagger
from qbattery.open import KrausChannel, LindbladModel

if TYPE_CHECKING:
    from qbattery.linalg import ComplexMatrix


def random_complex(
    rng: np.random.Generator,
    n: int,
    m: Optional[int] = None,
) -> 'ComplexMatrix':
    shape = (n, n if m is None else m)
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_hermitian(
    rng: np.random.Generator,
    n: int,
    scale: float = 1.0,
) -> 'ComplexMatrix':
    G = random_complex(rng, n)
    return scale * (G + dagger(G)) / 2


def random_unitary(rng: np.random.Generator, n: int) -> 'ComplexMatrix':
    if n == 1:
        return np.exp(2j * np.pi * rng.random()) * np.ones((1, 1), dtype=np.complex128)
    return np.asarray(unitary_group.rvs(n, random_state=rng), dtype=np.complex128)


def random_normal(rng: np.random.Generator, n: int) -> 'ComplexMatrix':
    U = random_unitary(rng, n)
    values = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return (U * values) @ dagger(U)


def random_density_matrix(
    rng: np.random.Generator,
    n: int,
    rank: Optional[int] = None,
) -> 'ComplexMatrix':
    G = random_complex(rng, n, n if rank is None else rank)
    rho = G @ dagger(G)
    rho = (rho + dagger(rho)) / 2
    return rho / np.trace(rho).real


def random_projectors(
    rng: np.random.Generator,
    n: int,
    parts: int,
) -> list['ComplexMatrix']:
    """Orthogonal projectors summing to the identity, each of rank >= 1."""
    parts = min(parts, n)
    U = random_unitary(rng, n)
    cuts = np.sort(rng.choice(np.arange(1, n), size=parts - 1, replace=False))
    return [
        U[:, block] @ dagger(U[:, block])
        for block in np.split(np.arange(n), cuts)
    ]


def random_battery(
    rng: np.random.Generator,
    n: int,
    scale: float = 1.0,
) -> ClosedBattery:
    rank = int(rng.integers(1, n + 1))
    return ClosedBattery.create(
        random_hermitian(rng, n, scale),
        random_hermitian(rng, n, scale),
        random_density_matrix(rng, n, rank),
    )


def random_isometry_channel(rng: np.random.Generator, n: int, k: int) -> KrausChannel:
    W = random_unitary(rng, n * k)[:, :n]
    return KrausChannel.create([W[a * n : (a + 1) * n] for a in range(k)])


def random_unital_channel(rng: np.random.Generator, n: int, k: int) -> KrausChannel:
    weights = rng.dirichlet(np.ones(k))
    return KrausChannel.create(
        [np.sqrt(p) * random_unitary(rng, n) for p in weights],
    )


def random_hermitian_kraus_channel(
    rng: np.random.Generator,
    n: int,
    k: int,
    kind: Literal['measurement', 'reflection'] = 'measurement',
) -> KrausChannel:
    if kind == 'measurement':
        return KrausChannel.create(random_projectors(rng, n, k))
    weights = rng.dirichlet(np.ones(k))
    eye = np.eye(n)
    ops = []
    for p in weights:
        P = random_projectors(rng, n, 2)[0]
        ops.append(np.sqrt(p) * (eye - 2 * P))
    return KrausChannel.create(ops)


def random_lindblad_model(
    rng: np.random.Generator,
    n: int,
    operators: int = 1,
    scale: float = 1.0,
) -> LindbladModel:
    """Hermitian jump operators normalised to tr(L L^dag) = 1."""
    dissipators = []
    for _ in range(operators):
        L = random_hermitian(rng, n)
        dissipators.append((float(rng.random()), L / np.linalg.norm(L)))
    return LindbladModel.create(
        random_hermitian(rng, n, scale),
        random_hermitian(rng, n, scale),
        dissipators,
    )
