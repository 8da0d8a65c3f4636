from dataclasses import replace

import numpy as np
import pytest

from heisenberg_anneal.errors import ConfigError, ContractError, NormDriftError
from heisenberg_anneal.experiments import preset
from heisenberg_anneal.operators import build_staggered_driver
from heisenberg_anneal.propagator import IntegratorConfig, evolve, prepare_driver_ground, rk4_step
from heisenberg_anneal.schedule import AnnealHamiltonian, AnnealSchedule

import scipy.sparse as sp
from heisenberg_anneal.operators import SparseHermitian


def frozen(H, tau=1.0):
    return AnnealHamiltonian(H, H, AnnealSchedule(tau))


def test_prepare_small():
    np.testing.assert_allclose(prepare_driver_ground(2), [0.5, 0.5, -0.5, -0.5])
    # same ray as the initial amplitudes (-1/2, -1/2, 1/2, 1/2)
    np.testing.assert_allclose(-prepare_driver_ground(2), [-0.5, -0.5, 0.5, 0.5])
    np.testing.assert_allclose(prepare_driver_ground(1), np.array([1, -1]) / np.sqrt(2))


@pytest.mark.parametrize("n", range(1, 8))
def test_prepare_is_driver_ground(n):
    psi = prepare_driver_ground(n)
    assert np.allclose(np.abs(psi), 2 ** (-n / 2))
    assert psi[0].real > 0 and np.all(psi.imag == 0)
    D = build_staggered_driver(n, 20.0)
    assert np.vdot(psi, D.matrix @ psi).real == pytest.approx(-10.0 * n)
    np.testing.assert_allclose(D.matrix @ psi, -10.0 * n * psi, atol=1e-12)


def test_rk4_zero_hamiltonian():
    Z = SparseHermitian(sp.csr_matrix((4, 4)), build_staggered_driver(2, 1.0).basis)
    psi = prepare_driver_ground(2)
    np.testing.assert_array_equal(rk4_step(frozen(Z), psi, 0.0, 0.1), psi)


def test_rk4_stationary_state():
    D = build_staggered_driver(3, 20.0)
    psi = prepare_driver_ground(3)
    dt = 1e-3
    out = rk4_step(frozen(D), psi, 0.0, dt)
    np.testing.assert_allclose(np.abs(out) ** 2, np.abs(psi) ** 2, atol=(30 * dt) ** 5)
    # only a global phase ~ exp(+i 30 dt) develops
    assert np.angle(out[0] / psi[0]) == pytest.approx(30 * dt, abs=1e-9)


def test_rk4_rabi_precession():
    D = build_staggered_driver(1, 20.0)  # gap 20
    ah = frozen(D, tau=1.0)
    psi0 = np.array([1, 0], dtype=complex)
    psi, dt = psi0.copy(), 1e-3
    for i in range(1000):
        psi = rk4_step(ah, psi, i * dt, dt)
        if (i + 1) % 100 == 0:
            t = (i + 1) * dt
            assert abs(np.vdot(psi0, psi)) ** 2 == pytest.approx(np.cos(10 * t) ** 2, abs=1e-6)


def test_rk4_step_range():
    ah = frozen(build_staggered_driver(1, 1.0), tau=1.0)
    with pytest.raises(ValueError):
        rk4_step(ah, np.array([1, 0], dtype=complex), 0.95, 0.1)


def test_compiled_kernel_matches_rk4_step():
    """evolve's kernel and the reference rk4_step perform the same update."""
    ah = replace(preset("frustrated3").config, schedule=AnnealSchedule(2.0)).hamiltonian()
    psi = prepare_driver_ground(3)
    cfg = IntegratorConfig(dt=0.01, n_samples=2, phase_frame=False, norm_tol=1.0)
    traj = evolve(ah, psi, cfg)
    ref = psi.copy()
    for i in range(200):
        ref = rk4_step(ah, ref, i * 0.01, 0.01)
    np.testing.assert_allclose(traj.final_state, ref, atol=1e-12)


def test_phase_frame_only_changes_global_phase_at_first_order():
    ah = replace(preset("frustrated3").config, schedule=AnnealSchedule(2.0)).hamiltonian()
    psi = prepare_driver_ground(3)
    a = evolve(ah, psi, IntegratorConfig(dt=1e-3, n_samples=2)).final_state
    b = evolve(ah, psi, IntegratorConfig(dt=1e-3, n_samples=2, phase_frame=False)).final_state
    np.testing.assert_allclose(a, b, atol=1e-8)


def test_trajectory_shape_and_sampling():
    cfg = replace(preset("ferro2").config.integrator, n_samples=11)
    ah = replace(preset("ferro2").config, schedule=AnnealSchedule(10.0)).hamiltonian()
    traj = evolve(ah, prepare_driver_ground(2), cfg)
    np.testing.assert_allclose(traj.times, np.linspace(0, 10, 11))
    assert np.all(np.diff(traj.times) > 0)
    assert traj.probabilities.shape == (11, 4)
    np.testing.assert_allclose(traj.probabilities.sum(axis=1), 1, atol=1e-9)
    np.testing.assert_allclose(traj.probabilities[0], 0.25)
    assert traj.max_norm_drift() < 1e-10


def test_uneven_dt_lands_on_tau():
    ah = replace(preset("ferro2").config, schedule=AnnealSchedule(1.0)).hamiltonian()
    psi = prepare_driver_ground(2)
    # 0.03 does not divide tau = 1; the last step is shortened to 0.01
    cfg = IntegratorConfig(dt=0.03, n_samples=2, norm_tol=1.0, phase_frame=False)
    a = evolve(ah, psi, cfg).final_state
    ref = psi.copy()
    for i in range(33):
        ref = rk4_step(ah, ref, i * 0.03, 0.03)
    ref = rk4_step(ah, ref, 0.99, 1.0 - 0.99)
    np.testing.assert_allclose(a, ref, atol=1e-12)


def test_degenerate_frozen_driver():
    D = build_staggered_driver(2, 20.0)
    psi = prepare_driver_ground(2)
    traj = evolve(frozen(D, tau=1e-3), psi, IntegratorConfig(dt=1e-3, n_samples=2))
    np.testing.assert_allclose(traj.probabilities[-1], traj.probabilities[0], atol=1e-9)


def test_global_phase_covariance():
    ah = replace(preset("antiferro2").config, schedule=AnnealSchedule(20.0)).hamiltonian()
    psi = prepare_driver_ground(2)
    alpha = np.exp(0.7j)
    a = evolve(ah, psi, IntegratorConfig(n_samples=3)).final_state
    b = evolve(ah, alpha * psi, IntegratorConfig(n_samples=3)).final_state
    np.testing.assert_allclose(b, alpha * a, atol=1e-12)


def test_norm_drift_error():
    ah = preset("ferro2").config.hamiltonian()
    with pytest.raises(NormDriftError) as err:
        # far outside the RK4 stability region
        evolve(ah, prepare_driver_ground(2), IntegratorConfig(dt=0.5, phase_frame=False))
    assert err.value.time == pytest.approx(1.0)
    assert err.value.drift > 1e-6


def test_renormalize_flag():
    ah = replace(preset("ferro2").config, schedule=AnnealSchedule(5.0)).hamiltonian()
    traj = evolve(ah, prepare_driver_ground(2), IntegratorConfig(dt=0.05, norm_tol=1.0, renormalize=True, n_samples=6))
    assert abs(np.linalg.norm(traj.final_state) - 1) < 1e-12


def test_initial_must_be_normalized():
    ah = preset("ferro2").config.hamiltonian()
    with pytest.raises(ContractError):
        evolve(ah, 2 * prepare_driver_ground(2))
    with pytest.raises(ContractError):
        evolve(ah, prepare_driver_ground(3))


def test_track_and_snapshots():
    ah = replace(preset("frustrated3").config, schedule=AnnealSchedule(5.0)).hamiltonian()
    cfg = IntegratorConfig(n_samples=6, track=(1, 2), snapshot_full=True)
    traj = evolve(ah, prepare_driver_ground(3), cfg)
    assert list(traj.tracked) == [1, 2]
    assert traj.probabilities.shape == (6, 2)
    np.testing.assert_allclose(np.abs(traj.snapshots[:, [1, 2]]) ** 2, traj.probabilities, atol=1e-14)
    np.testing.assert_allclose(traj.snapshots[-1], traj.final_state, atol=1e-14)
    with pytest.raises(ConfigError):
        evolve(ah, prepare_driver_ground(3), IntegratorConfig(track=(8,)))


def test_top_k_tracking_for_larger_systems():
    cfg = replace(preset("alternating9").config, schedule=AnnealSchedule(2.0))
    traj = evolve(cfg.hamiltonian(), prepare_driver_ground(9), IntegratorConfig(n_samples=3))
    assert traj.tracked.size == 16
    p = np.abs(traj.final_state) ** 2
    assert p[traj.tracked].min() >= np.sort(p)[-16] - 1e-15


@pytest.mark.parametrize("kw", [{"dt": 0}, {"norm_tol": -1}, {"n_samples": 1}, {"track": "some"}])
def test_integrator_config_validation(kw):
    with pytest.raises(ConfigError):
        IntegratorConfig(**kw)
