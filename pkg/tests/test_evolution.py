"""Propagator correctness, invariants, and failure modes."""

import numpy as np
import pytest

from excitonkit.evolution import (IntegrationAbort, Trajectory,
                                  build_liouvillian, propagate,
                                  sink_population_integral,
                                  write_populations_csv)
from excitonkit.network import ConfigError, build_fcn, build_fmo, get_preset
from excitonkit.states import StateError, basis_state, mixed_state
from excitonkit.units import convert_rate


def rabi_spec():
    return build_fcn(2, 50.0, sink_rate=0.0, label="rabi")


def test_rabi_against_analytic():
    spec = rabi_spec()
    traj = propagate(spec, t_end=0.5, dt=0.001, sample_every=0.001)
    j_rad = convert_rate(50.0)
    p2 = np.sin(j_rad * traj.t) ** 2
    p1 = np.cos(j_rad * traj.t) ** 2
    assert np.max(np.abs(traj.populations[:, 1] - p2)) < 1e-8
    assert np.max(np.abs(traj.populations[:, 0] - p1)) < 1e-8


def test_purity_conserved_without_rates():
    # RK4 purity drift grows as dt^4 per unit time; the 7-site network at
    # J = 50 cm^-1 needs a 0.25 fs step to hold 1e-8 over a picosecond,
    # while the soft two-site case holds it at the 1 fs default.
    spec = build_fcn(7, 50.0, sink_rate=0.0)
    traj = propagate(spec, t_end=1.0, dt=0.00025, sample_every=0.02)
    purity = np.real(np.einsum("tij,tji->t", traj.states, traj.states))
    assert np.max(np.abs(purity - 1.0)) < 1e-8
    traj = propagate(rabi_spec(), t_end=2.0, dt=0.001, sample_every=0.02)
    purity = np.real(np.einsum("tij,tji->t", traj.states, traj.states))
    assert np.max(np.abs(purity - 1.0)) < 1e-8


def test_trace_conserved_with_rates():
    traj = propagate(build_fmo(), t_end=1.0, dt=0.001, sample_every=0.01)
    traces = np.real(np.einsum("tii->t", traj.states))
    assert np.max(np.abs(traces - 1.0)) < 1e-10


def test_liouvillian_structure():
    gen = build_liouvillian(build_fmo())
    assert gen.k_index == 3
    assert gen.h_rad.shape == (9, 9)
    assert gen.h_rad[0, 0] == 0.0 and gen.h_rad[8, 8] == 0.0
    rng = np.random.default_rng(2)
    a = rng.standard_normal((9, 9)) + 1j * rng.standard_normal((9, 9))
    rho = a @ a.conj().T
    rho /= np.trace(rho).real
    drho = gen(rho)
    assert abs(np.trace(drho)) < 1e-12  # generator is trace-free
    assert np.max(np.abs(drho - drho.conj().T)) < 1e-12


def test_dissipation_fills_ground():
    spec = build_fcn(2, 0.0, diss=np.array([10.0, 0.0]), sink_rate=0.0)
    traj = propagate(spec, t_end=1.0, dt=0.001, sample_every=0.1)
    # dp1/dt = -2 Gamma p1 in the decoupled limit
    gamma = convert_rate(10.0)
    expected = np.exp(-2.0 * gamma * traj.t)
    assert np.max(np.abs(traj.populations[:, 0] - expected)) < 1e-9
    assert traj.ground[-1] == pytest.approx(1.0 - expected[-1], abs=1e-9)


def test_sink_trapping_rate():
    spec = build_fcn(2, 0.0, sink_rate=10.0, preferred=1)
    traj = propagate(spec, t_end=1.0, dt=0.001, sample_every=0.1)
    g = convert_rate(10.0)
    expected = np.exp(-2.0 * g * traj.t)
    assert np.max(np.abs(traj.populations[:, 0] - expected)) < 1e-9
    assert np.max(np.abs(traj.sink - (1.0 - expected))) < 1e-9


def test_dephasing_kills_coherence_keeps_populations():
    spec = build_fcn(2, 0.0, deph=np.array([20.0, 0.0]), sink_rate=0.0)
    rho0 = np.full((4, 4), 0.0, dtype=complex)
    rho0[1, 1] = rho0[2, 2] = 0.5
    rho0[1, 2] = rho0[2, 1] = 0.5
    traj = propagate(spec, rho0, t_end=1.0, dt=0.001, sample_every=0.1)
    gamma = convert_rate(20.0)
    coh = np.real(traj.states[:, 1, 2])
    assert np.max(np.abs(coh - 0.5 * np.exp(-gamma * traj.t))) < 1e-9
    assert np.max(np.abs(traj.populations - 0.5)) < 1e-12


def test_default_initial_is_site_1():
    traj = propagate(get_preset("fcn-clean"), t_end=0.01, dt=0.001,
                     sample_every=0.01)
    assert traj.populations[0, 0] == pytest.approx(1.0)


def test_time_grid_and_shapes():
    spec = build_fmo()
    traj = propagate(spec, t_end=0.1, dt=0.001, sample_every=0.02)
    assert traj.t[0] == 0.0
    assert np.allclose(np.diff(traj.t), 0.02)
    assert len(traj.t) == 6
    assert traj.states.shape == (6, 9, 9)
    assert traj.populations.shape == (6, 7)
    assert traj.ground.shape == (6,)
    assert traj.sink.shape == (6,)


def test_step_count_validation():
    spec = build_fmo()
    with pytest.raises(ConfigError):
        propagate(spec, t_end=0.1, dt=-0.001, sample_every=0.01)
    with pytest.raises(ConfigError):
        propagate(spec, t_end=0.1, dt=0.0003, sample_every=0.01)
    with pytest.raises(ConfigError):
        propagate(spec, t_end=0.1, dt=0.001, sample_every=0.0015)
    with pytest.raises(ConfigError):
        propagate(spec, t_end=0.05, dt=0.001, sample_every=0.02)


def test_rho0_validation():
    spec = build_fmo()
    with pytest.raises(ValueError):
        propagate(spec, np.eye(4, dtype=complex) / 4.0, t_end=0.01,
                  dt=0.001, sample_every=0.01)
    with pytest.raises(StateError):
        propagate(spec, np.eye(9, dtype=complex), t_end=0.01, dt=0.001,
                  sample_every=0.01)


def test_integration_abort_on_oversized_step():
    with pytest.raises(IntegrationAbort):
        propagate(build_fmo(), t_end=10.0, dt=0.1, sample_every=0.1)


def test_sink_monotone_and_integral_consistency():
    traj = propagate(build_fmo(), t_end=1.0, dt=0.001, sample_every=0.001)
    assert np.all(np.diff(traj.sink) >= -1e-12)
    recon = sink_population_integral(traj)
    assert np.max(np.abs(recon - traj.sink)) < 1e-5
    traj.check_invariants()


def test_check_invariants_flags_decreasing_sink():
    spec = build_fcn(2, 0.0, sink_rate=0.0)
    states = np.array([basis_state(3, 4), basis_state(0, 4)])
    traj = Trajectory(t=np.array([0.0, 0.1]), states=states, spec=spec)
    with pytest.raises(ValueError):
        traj.check_invariants()


def test_mixed_initial_state():
    spec = get_preset("fcn-clean")
    rho0 = mixed_state([(0.5, 1), (0.5, 6)], spec.dim)
    traj = propagate(spec, rho0, t_end=0.05, dt=0.001, sample_every=0.05)
    assert traj.populations[0, 0] == pytest.approx(0.5)
    assert traj.populations[0, 5] == pytest.approx(0.5)


def test_propagation_deterministic():
    spec = build_fmo()
    a = propagate(spec, t_end=0.2, dt=0.001, sample_every=0.02)
    b = propagate(spec, t_end=0.2, dt=0.001, sample_every=0.02)
    assert np.array_equal(a.states, b.states)


def test_write_populations_csv(tmp_path):
    traj = propagate(build_fmo(), t_end=0.05, dt=0.001, sample_every=0.01)
    path = tmp_path / "populations.csv"
    write_populations_csv(traj, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "t_ps,p0,p1,p2,p3,p4,p5,p6,p7,psink"
    assert len(lines) == 7
    first = lines[1].split(",")
    assert float(first[0]) == 0.0
    assert float(first[2]) == 1.0
    write_populations_csv(traj, tmp_path / "again.csv")
    assert (tmp_path / "again.csv").read_bytes() == path.read_bytes()
