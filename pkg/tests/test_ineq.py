import numpy as np
import pytest

from qbattery.coherence import basis_of
from qbattery.errors import NotDensityMatrixError, NotHermitianError, NotUnitaryError
from qbattery.ineq import (
    InequalityCheck,
    check_propositions,
    frobenius_trace_ineq,
    holder_rank_trace_ineq,
    holds,
    lemma1,
    lemma1_prime,
    lemma1_unitary_corollary,
    lemma2,
    lemma2b,
    von_neumann_work_bounds,
)
from qbattery.linalg import dagger, evolve_unitary
from qbattery.models.common import SIGMA_X, SIGMA_Z
from qbattery.sampling import (
    random_complex,
    random_density_matrix,
    random_hermitian,
    random_normal,
    random_projectors,
    random_unitary,
)

DIMS = [2, 3, 4, 5, 6, 8]


def _assert_saturated(check: InequalityCheck, lhs: float, rhs: float) -> None:
    assert check.lhs == pytest.approx(lhs)
    assert check.rhs == pytest.approx(rhs)
    assert check.holds


def test_holds_tolerance() -> None:
    assert holds(1.0, 1.0)
    assert holds(1.0 + 1e-12, 1.0)
    assert not holds(1.001, 1.0)
    assert holds(1e-13, 0.0)


def test_slack_ratio() -> None:
    assert InequalityCheck.of('x', 1.0, 2.0).slack_ratio == 0.5
    assert InequalityCheck.of('x', 0.0, 0.0).slack_ratio == 0.0
    assert InequalityCheck.of('x', 1.0, 0.0).slack_ratio == float('inf')


def test_frobenius_trace_examples() -> None:
    _assert_saturated(frobenius_trace_ineq(np.eye(3), np.eye(3)), 3, 3)
    check = frobenius_trace_ineq(SIGMA_X, SIGMA_Z)
    assert check.lhs == pytest.approx(0)
    assert check.rhs == pytest.approx(2)


def test_holder_rank_trace_examples() -> None:
    proj = np.diag([1.0, 0.0, 0.0]).astype(complex)
    _assert_saturated(holder_rank_trace_ineq(np.eye(3), proj), 1, 1)
    check = holder_rank_trace_ineq(
        np.diag([2.0, 1.0]).astype(complex),
        np.eye(2, dtype=complex),
    )
    assert check.lhs == pytest.approx(3)
    assert check.rhs == pytest.approx(4)


def test_lemma1_examples() -> None:
    diag = np.diag([1.0, 2.0]).astype(complex)
    check = lemma1(diag, np.diag([3.0, -1.0]).astype(complex))
    assert check.lhs == 0
    assert check.rhs == pytest.approx(0)
    _assert_saturated(lemma1(SIGMA_Z, SIGMA_X), 8, 8)


def test_lemma1_unitary_corollary_examples() -> None:
    check = lemma1_unitary_corollary(np.eye(2, dtype=complex), SIGMA_X)
    assert check.lhs == pytest.approx(0)
    assert check.rhs == pytest.approx(0)
    assert check.holds
    _assert_saturated(lemma1_unitary_corollary(SIGMA_Z, SIGMA_X), 8, 8)


def test_lemma1_prime_examples() -> None:
    check = lemma1_prime(SIGMA_Z, np.diag([1.0, 5.0]).astype(complex))
    assert check.lhs == 0
    assert check.holds
    check = lemma1_prime(SIGMA_Z, SIGMA_X)
    assert check.lhs == pytest.approx(8)
    assert check.rhs == pytest.approx(2 * np.sqrt(2) * (np.sqrt(2 * 2) + 2))
    assert check.holds


def test_lemma1_prime_small_operator() -> None:
    check = lemma1_prime(SIGMA_Z, 0.1 * SIGMA_X)
    assert check.lhs == pytest.approx(0.08)
    assert check.holds


def test_lemma2_examples() -> None:
    check = lemma2(SIGMA_Z, np.diag([1.0, 4.0]).astype(complex))
    assert check.lhs == pytest.approx(0)
    _assert_saturated(lemma2(SIGMA_Z, SIGMA_X), 8, 8)


def test_lemma2b_examples() -> None:
    check = lemma2b(SIGMA_Z, SIGMA_Z)
    assert check.lhs == pytest.approx(0)
    assert check.rhs == pytest.approx(0)
    check = lemma2b(np.diag([1.0, 2.0]).astype(complex), SIGMA_X)
    assert check.lhs == pytest.approx(5)
    assert check.rhs == pytest.approx(16 * (1 * (2 + 2) + 2 * 2))
    assert check.holds


def test_lemma2b_block_counterexample_holds() -> None:
    m = 3
    eye, zero = np.eye(m), np.zeros((m, m))
    B = np.block([[zero, eye], [eye, zero]]).astype(complex)
    A = np.block([[eye, zero], [zero, -eye]]).astype(complex)
    assert lemma2b(A, B).holds


def test_inequality_preconditions() -> None:
    with pytest.raises(NotHermitianError):
        lemma1(SIGMA_Z, random_complex(np.random.default_rng(0), 2))
    with pytest.raises(NotUnitaryError):
        lemma1_prime(2 * SIGMA_Z, SIGMA_X)
    with pytest.raises(NotDensityMatrixError):
        von_neumann_work_bounds(SIGMA_X, SIGMA_Z, SIGMA_Z)


@pytest.mark.parametrize('n', DIMS)
def test_inequalities_on_random_instances(n: int) -> None:
    for sample in range(1000):
        rng = np.random.default_rng([n, sample])
        A = random_complex(rng, n)
        B = random_hermitian(rng, n)
        normal = random_normal(rng, n)
        U = random_unitary(rng, n)
        checks = [
            frobenius_trace_ineq(A, B),
            holder_rank_trace_ineq(A, B),
            lemma1(normal, B),
            lemma1_unitary_corollary(U, B),
            lemma1_prime(U, B),
            lemma2(normal, B),
            lemma2b(random_hermitian(rng, n), B),
        ]
        for check in checks:
            assert check.holds, check
            assert check.slack_ratio <= 1 + 1e-9


def test_propositions_in_z_basis() -> None:
    checks = check_propositions(basis_of(SIGMA_Z), SIGMA_X, SIGMA_X)
    assert len(checks) == 14
    assert all(check.holds for check in checks)
    assert max(check.lhs for check in checks) < 1e-12


@pytest.mark.parametrize('parts', [1, 2, 3, 6])
def test_propositions_random(rng: np.random.Generator, parts: int) -> None:
    projectors = random_projectors(rng, 6, parts)
    M = sum((j * p for j, p in enumerate(projectors)), np.zeros((6, 6), dtype=complex))
    basis = basis_of(M)
    assert len(basis.projectors) == parts
    checks = check_propositions(basis, random_complex(rng, 6), random_hermitian(rng, 6))
    failed = [check for check in checks if not check.holds]
    assert not failed


def test_propositions_with_rank_three_block(rng: np.random.Generator) -> None:
    M = np.diag([0.0, 0.0, 0.0, 1.0, 2.0]).astype(complex)
    G = random_unitary(rng, 5)
    basis = basis_of(G @ M @ dagger(G))
    checks = check_propositions(basis, random_complex(rng, 5), random_hermitian(rng, 5))
    assert all(check.holds for check in checks)


def test_von_neumann_identity_evolution() -> None:
    rho = np.diag([0.7, 0.3]).astype(complex)
    bounds = von_neumann_work_bounds(rho, SIGMA_Z, np.eye(2, dtype=complex))
    assert bounds.lower == 0
    assert bounds.upper == pytest.approx(0)


def test_von_neumann_maximally_mixed_state() -> None:
    U = evolve_unitary(SIGMA_X, 0.4)
    bounds = von_neumann_work_bounds(np.eye(2, dtype=complex) / 2, SIGMA_Z, U)
    assert bounds.lower == pytest.approx(0, abs=1e-12)


def test_von_neumann_sandwich_on_time_grid() -> None:
    rho0 = np.diag([1.0, 0.0]).astype(complex)
    for t in np.linspace(0, 3, 31):
        U = evolve_unitary(SIGMA_X, t)
        work = np.real(np.trace(U @ rho0 @ dagger(U) @ SIGMA_Z - rho0 @ SIGMA_Z))
        bounds = von_neumann_work_bounds(rho0, SIGMA_Z, U)
        assert holds(bounds.lower, abs(work))
        assert holds(abs(work), bounds.upper)
        assert holds(bounds.upper, bounds.weyl_upper)


def test_von_neumann_sandwich_random(rng: np.random.Generator) -> None:
    for _ in range(200):
        rho0 = random_density_matrix(rng, 6, int(rng.integers(1, 7)))
        H0 = random_hermitian(rng, 6)
        U = random_unitary(rng, 6)
        work = np.real(np.trace(U @ rho0 @ dagger(U) @ H0 - rho0 @ H0))
        bounds = von_neumann_work_bounds(rho0, H0, U)
        assert holds(bounds.lower, abs(work))
        assert holds(abs(work), bounds.upper)
        assert holds(bounds.upper, bounds.weyl_upper)
