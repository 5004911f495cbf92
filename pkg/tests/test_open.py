from typing import Literal

import numpy as np
import pytest

from qbattery.closed import evolution, evolve_state, work
from qbattery.errors import (
    DimensionMismatchError,
    IncompleteChannelError,
    InvalidParamsError,
    NonHermitianKrausError,
    NonHermitianLindbladError,
    StepTooLargeError,
    StepTooLargeWarning,
    TOutsideTrajectoryError,
)
from qbattery.linalg import is_density_matrix
from qbattery.models.common import SIGMA_X, SIGMA_Z
from qbattery.open import (
    KrausChannel,
    LindbladModel,
    Trajectory,
    adjoint_channel,
    apply_channel,
    completeness_residual,
    energy_bound_series,
    ensemble_bound,
    kraus_bounds,
    kraus_energy_change,
    kraus_from_lindblad,
    lindblad_evolve,
    lindblad_rhs,
    open_energy_bound,
)
from qbattery.sampling import (
    random_battery,
    random_density_matrix,
    random_hermitian,
    random_hermitian_kraus_channel,
    random_isometry_channel,
    random_lindblad_model,
    random_unital_channel,
)

PLUS = np.full((2, 2), 0.5, dtype=complex)


def _dephasing(p: float) -> KrausChannel:
    return KrausChannel.create([np.sqrt(1 - p) * np.eye(2), np.sqrt(p) * SIGMA_Z])


def test_incomplete_channel_is_rejected() -> None:
    with pytest.raises(IncompleteChannelError):
        KrausChannel.create([0.5 * np.eye(2)])
    with pytest.raises(DimensionMismatchError):
        apply_channel(_dephasing(0.1), np.eye(3) / 3)


def test_unitary_channel(rng: np.random.Generator) -> None:
    b = random_battery(rng, 3)
    U = evolution(b, 0.6)
    ch = KrausChannel.create([U])
    np.testing.assert_allclose(
        apply_channel(ch, b.rho0),
        evolve_state(b, 0.6),
        atol=1e-12,
    )
    change = kraus_energy_change(ch, b.rho0, b.H0)
    assert change.dE == pytest.approx(-work(b, 0.6), abs=1e-10)


def test_dephasing_channel_scales_coherence() -> None:
    out = apply_channel(_dephasing(0.2), PLUS)
    np.testing.assert_allclose(out, [[0.5, 0.3], [0.3, 0.5]], atol=1e-15)


def test_dephasing_energy_change() -> None:
    change = kraus_energy_change(_dephasing(0.2), PLUS, SIGMA_X)
    assert change == pytest.approx((0.4, 0.4, 0.4, 0.4), abs=1e-12)


def test_identity_channel_changes_nothing(rng: np.random.Generator) -> None:
    ch = KrausChannel.create([np.eye(3)])
    rho, H0 = random_density_matrix(rng, 3), random_hermitian(rng, 3)
    assert kraus_energy_change(ch, rho, H0) == pytest.approx((0, 0, 0, 0), abs=1e-12)
    report = kraus_bounds(ch, rho, H0)
    assert report.quantity == pytest.approx(0, abs=1e-12)
    assert min(report.bound_a, report.bound_b, report.bound_c) >= 0
    assert report.all_hold


def test_random_isometry_channel_is_physical(rng: np.random.Generator) -> None:
    for _ in range(20):
        ch = random_isometry_channel(rng, 4, 3)
        out = apply_channel(ch, random_density_matrix(rng, 4))
        assert is_density_matrix(out, 1e-9)


def test_adjoint_is_hilbert_schmidt_dual(rng: np.random.Generator) -> None:
    ch = random_isometry_channel(rng, 3, 2)
    rho, X = random_density_matrix(rng, 3), random_hermitian(rng, 3)
    assert np.trace(apply_channel(ch, rho) @ X) == pytest.approx(
        np.trace(rho @ adjoint_channel(ch, X)),
    )


def test_kraus_forms_agree_with_each_other(rng: np.random.Generator) -> None:
    for _ in range(20):
        ch = random_isometry_channel(rng, 4, 2)
        rho, H0 = random_density_matrix(rng, 4), random_hermitian(rng, 4)
        change = kraus_energy_change(ch, rho, H0)
        assert change.dE_B == pytest.approx(change.dE_A, abs=1e-10)
        assert change.dE_C == pytest.approx(change.dE_A, abs=1e-10)


def test_kraus_forms_give_energy_change_for_unital_channels(
    rng: np.random.Generator,
) -> None:
    for _ in range(20):
        ch = random_unital_channel(rng, 4, 3)
        rho, H0 = random_density_matrix(rng, 4), random_hermitian(rng, 4)
        change = kraus_energy_change(ch, rho, H0)
        assert change.dE_A == pytest.approx(change.dE, abs=1e-10)


def test_kraus_bounds_need_hermitian_operators(rng: np.random.Generator) -> None:
    ch = random_isometry_channel(rng, 3, 2)
    with pytest.raises(NonHermitianKrausError):
        kraus_bounds(ch, random_density_matrix(rng, 3), random_hermitian(rng, 3))


def test_kraus_bounds_dephasing() -> None:
    report = kraus_bounds(_dephasing(0.2), PLUS, SIGMA_X)
    assert report.quantity == pytest.approx(0.4)
    assert report.all_hold


@pytest.mark.parametrize('kind', ['measurement', 'reflection'])
@pytest.mark.parametrize('n', [2, 3, 5])
def test_kraus_bounds_sweep(
    kind: Literal['measurement', 'reflection'],
    n: int,
) -> None:
    for sample in range(100):
        rng = np.random.default_rng([n, sample])
        k = int(rng.integers(1, 4))
        ch = random_hermitian_kraus_channel(rng, n, k, kind)
        rho, H0 = random_density_matrix(rng, n), random_hermitian(rng, n)
        report = kraus_bounds(ch, rho, H0)
        assert report.all_hold, (sample, report)


def test_lindblad_rhs_without_dissipation(rng: np.random.Generator) -> None:
    H0, V = random_hermitian(rng, 3), random_hermitian(rng, 3)
    m = LindbladModel.create(H0, V, [(0.0, random_hermitian(rng, 3))])
    rho = random_density_matrix(rng, 3)
    H = H0 + V
    expected = -1j * (H @ rho - rho @ H)
    np.testing.assert_allclose(lindblad_rhs(m, rho), expected, atol=1e-12)


def test_lindblad_rhs_is_traceless(rng: np.random.Generator) -> None:
    m = random_lindblad_model(rng, 4, operators=2)
    assert np.trace(lindblad_rhs(m, random_density_matrix(rng, 4))) == pytest.approx(
        0,
        abs=1e-12,
    )


def test_lindblad_model_validates() -> None:
    with pytest.raises(InvalidParamsError):
        LindbladModel.create(SIGMA_Z, SIGMA_X, [(-1.0, SIGMA_Z)])
    with pytest.raises(InvalidParamsError):
        LindbladModel.create(SIGMA_Z, SIGMA_X, [(1.0, SIGMA_Z)], normalized=True)
    unit = [(1.0, SIGMA_Z / np.sqrt(2))]
    assert LindbladModel.create(SIGMA_Z, SIGMA_X, unit, normalized=True).dim == 2


def test_closed_limit_matches_unitary_evolution(rng: np.random.Generator) -> None:
    b = random_battery(rng, 3)
    m = LindbladModel.create(b.H0, b.V)
    traj = lindblad_evolve(m, b.rho0, 1.0, 1e-3)
    np.testing.assert_allclose(traj.states[-1], evolve_state(b, 1.0), atol=1e-9)
    np.testing.assert_allclose(traj.energies[0], np.trace(b.rho0 @ b.H0).real)


def test_step_size_heuristic() -> None:
    m = LindbladModel.create(10 * SIGMA_Z, SIGMA_X, [(5.0, SIGMA_Z)])
    rho0 = PLUS
    with pytest.warns(StepTooLargeWarning):
        lindblad_evolve(m, rho0, 0.5, 0.05)
    with pytest.raises(StepTooLargeError):
        lindblad_evolve(m, rho0, 0.5, 0.05, strict=True)
    with pytest.raises(InvalidParamsError):
        lindblad_evolve(m, rho0, 0.5, 0.0)


def test_trajectory_lookup() -> None:
    m = LindbladModel.create(SIGMA_Z, SIGMA_X)
    traj = lindblad_evolve(m, PLUS, 1.0, 0.01)
    assert traj.index_at(0.5) == 50
    assert traj.index_at(0.50004) == 50
    with pytest.raises(TOutsideTrajectoryError):
        traj.index_at(1.5)
    with pytest.raises(TOutsideTrajectoryError):
        open_energy_bound(m, traj, -0.1)


@pytest.mark.parametrize('n', [2, 3, 5])
def test_trajectory_stays_physical(rng: np.random.Generator, n: int) -> None:
    m = random_lindblad_model(rng, n, operators=2)
    traj = lindblad_evolve(m, random_density_matrix(rng, n), 2.0, 0.05 / m.stiffness)
    drift = traj.drift()
    assert drift.trace_error <= 1e-9
    assert drift.hermiticity <= 1e-10
    assert drift.min_eigenvalue >= -1e-9
    assert drift.physical
    for rho in traj.states[:: max(1, len(traj.states) // 10)]:
        assert is_density_matrix(rho, 1e-8)


def test_drift_flags_unphysical_states() -> None:
    states = np.stack([PLUS, np.diag([1.2, -0.2]).astype(complex)])
    traj = Trajectory(np.array([0.0, 1.0]), states, np.zeros(2))
    drift = traj.drift()
    assert drift.trace_error == pytest.approx(0, abs=1e-15)
    assert drift.min_eigenvalue == pytest.approx(-0.2)
    assert not drift.physical


def test_open_bound_trivial_model() -> None:
    m = LindbladModel.create(SIGMA_Z, None, [(0.0, SIGMA_X)])
    traj = lindblad_evolve(m, PLUS, 1.0, 0.01)
    report = open_energy_bound(m, traj, 1.0)
    assert report.quantity == pytest.approx(0, abs=1e-12)
    assert report.auxiliary['W_A'] == pytest.approx(0, abs=1e-12)
    assert report.auxiliary['W_B'] == 0
    assert report.all_hold


def test_open_bound_needs_hermitian_lindblad_operators() -> None:
    lowering = np.array([[0, 1], [0, 0]], dtype=complex)
    m = LindbladModel.create(SIGMA_Z, SIGMA_X, [(1.0, lowering)])
    traj = lindblad_evolve(m, PLUS, 0.1, 0.01)
    with pytest.raises(NonHermitianLindbladError):
        open_energy_bound(m, traj, 0.1)


def test_open_bound_sweep() -> None:
    for sample in range(10):
        rng = np.random.default_rng([4, sample])
        m = random_lindblad_model(rng, 4, operators=2)
        rho0 = random_density_matrix(rng, 4)
        dt = 0.05 / m.stiffness
        traj = lindblad_evolve(m, rho0, 1.0, dt)
        series = energy_bound_series(m, traj)
        assert np.all(series.quantity <= series.bound * (1 + 1e-9) + 1e-12), sample
        assert np.all(np.diff(series.W_A) >= 0)
        assert np.all(np.diff(series.W_B) >= 0)


def test_kraus_from_lindblad_closed_limit(rng: np.random.Generator) -> None:
    H0 = random_hermitian(rng, 3)
    m = LindbladModel.create(H0)
    ch = kraus_from_lindblad(m, 1e-4)
    assert len(ch.operators) == 1
    np.testing.assert_allclose(ch.operators[0], np.eye(3) - 1e-4j * H0, atol=1e-15)


def test_kraus_from_lindblad_first_order(rng: np.random.Generator) -> None:
    m = random_lindblad_model(rng, 3, operators=2)
    rho = random_density_matrix(rng, 3)
    for dt in (1e-4, 1e-5, 1e-6):
        ch = kraus_from_lindblad(m, dt)
        step = rho + dt * lindblad_rhs(m, rho)
        tol = 10 * dt**2 * m.stiffness**2
        np.testing.assert_allclose(apply_channel(ch, rho), step, atol=tol)


def test_ensemble_bound_reduces_to_single_channel() -> None:
    ch = _dephasing(0.3)
    single = kraus_bounds(ch, PLUS, SIGMA_X)
    report = ensemble_bound([(ch, SIGMA_X, PLUS)])
    assert report.quantity == pytest.approx(-single.quantity)
    assert report.bound_a == pytest.approx(single.bound_c)


def test_ensemble_bound_is_additive() -> None:
    ch = _dephasing(0.3)
    one = ensemble_bound([(ch, SIGMA_X, PLUS)])
    three = ensemble_bound([(ch, SIGMA_X, PLUS)] * 3)
    assert three.quantity == pytest.approx(3 * one.quantity)
    assert three.bound_a == pytest.approx(3 * one.bound_a)
    assert three.auxiliary['subsystems'] == 3


def test_ensemble_bound_heterogeneous(rng: np.random.Generator) -> None:
    subsystems = [
        (
            random_hermitian_kraus_channel(rng, n, 2, 'reflection'),
            random_hermitian(rng, n),
            random_density_matrix(rng, n),
        )
        for n in (2, 3)
    ]
    assert ensemble_bound(subsystems).all_hold


def test_kraus_from_lindblad_completeness_is_second_order(
    rng: np.random.Generator,
) -> None:
    m = random_lindblad_model(rng, 3, operators=2)
    coarse = completeness_residual(kraus_from_lindblad(m, 1e-3))
    fine = completeness_residual(kraus_from_lindblad(m, 1e-4))
    assert coarse / fine == pytest.approx(100, rel=0.2)
