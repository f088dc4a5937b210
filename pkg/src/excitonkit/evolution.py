"""Lindblad time evolution on the zero/one-excitation subspace.

The dynamical basis has dimension N + 2: level 0 is the shared ground state,
levels 1..N are the single-site excitations, level N + 1 is the sink.  The
generator combines coherent hopping, per-site exciton loss (into the ground
state), per-site pure dephasing, and irreversible trapping from the
preferred site into the sink.

Integration is fixed-step RK4.  The step keeps the trace constant to
rounding; a drift beyond TRACE_DRIFT_TOL means the step size is far too
large for the rates involved and raises IntegrationAbort rather than
returning garbage.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid

from . import _backend
from .network import ConfigError, NetworkSpec
from .states import assert_valid_state, basis_state
from .units import convert_rate

TRACE_DRIFT_TOL = 1e-6


class IntegrationAbort(RuntimeError):
    """Raised when the integrator loses the trace invariant."""


@dataclass(frozen=True)
class Liouvillian:
    """Master-equation generator for one network, rates in rad/ps."""

    h_rad: np.ndarray
    diss_rad: np.ndarray
    deph_rad: np.ndarray
    sink_rad: float
    k_index: int

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        """Apply the generator: returns d(rho)/dt in 1/ps."""
        return _backend.lindblad_apply(self.h_rad, self.diss_rad,
                                       self.deph_rad, self.sink_rad,
                                       self.k_index, np.asarray(rho, dtype=complex))


def build_liouvillian(spec: NetworkSpec) -> Liouvillian:
    """Convert a NetworkSpec (cm^-1) into the rad/ps generator."""
    d = spec.dim
    h = np.zeros((d, d), dtype=complex)
    h[1:spec.n_sites + 1, 1:spec.n_sites + 1] = convert_rate(1.0) * spec.hamiltonian
    return Liouvillian(
        h_rad=h,
        diss_rad=convert_rate(spec.dissipation_rates.astype(float)),
        deph_rad=convert_rate(spec.dephasing_rates.astype(float)),
        sink_rad=convert_rate(spec.sink_rate),
        k_index=spec.preferred_site,
    )


@dataclass(frozen=True)
class Trajectory:
    """Sampled solution of the master equation.

    t is the sample grid in ps (t[0] = 0); states has shape (len(t), d, d).
    """

    t: np.ndarray
    states: np.ndarray
    spec: NetworkSpec

    @property
    def populations(self) -> np.ndarray:
        """Site populations, shape (len(t), N)."""
        n = self.spec.n_sites
        return np.real(np.einsum("tii->ti", self.states)[:, 1:n + 1])

    @property
    def ground(self) -> np.ndarray:
        return np.real(self.states[:, 0, 0])

    @property
    def sink(self) -> np.ndarray:
        return np.real(self.states[:, -1, -1])

    def check_invariants(self, eig_tol: float = 1e-8) -> None:
        """Verify trace, Hermiticity, positivity, and sink monotonicity."""
        for k in range(self.states.shape[0]):
            assert_valid_state(self.states[k], eig_tol=eig_tol)
        sink = self.sink
        if np.any(np.diff(sink) < -1e-9):
            raise ValueError("sink population decreased along the trajectory")


def _step_counts(t_end: float, dt: float, sample_every: float) -> tuple[int, int]:
    if dt <= 0 or t_end <= 0 or sample_every <= 0:
        raise ConfigError("t_end, dt, and sample_every must be positive")
    n_steps = int(round(t_end / dt))
    if n_steps < 1 or abs(n_steps * dt - t_end) > 1e-9 * max(1.0, t_end):
        raise ConfigError(f"t_end={t_end} is not a multiple of dt={dt}")
    stride = int(round(sample_every / dt))
    if stride < 1 or abs(stride * dt - sample_every) > 1e-9:
        raise ConfigError(f"sample_every={sample_every} is not a multiple of dt={dt}")
    if n_steps % stride != 0:
        raise ConfigError("t_end must be a multiple of sample_every")
    return n_steps, stride


def propagate(spec: NetworkSpec, rho0: np.ndarray | None = None,
              t_end: float = 10.0, dt: float = 0.001,
              sample_every: float = 0.01) -> Trajectory:
    """Integrate the master equation and return the sampled trajectory.

    rho0 defaults to the excitation localized on site 1.  Times are in ps;
    the defaults give a 10 ps horizon at a 1 fs step sampled every 10 fs.
    Raises IntegrationAbort if any sampled state drifts off unit trace by
    more than TRACE_DRIFT_TOL.
    """
    if rho0 is None:
        rho0 = basis_state(1, spec.dim)
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (spec.dim, spec.dim):
        raise ValueError(f"rho0 must be {spec.dim}x{spec.dim}")
    assert_valid_state(rho0)
    n_steps, stride = _step_counts(t_end, dt, sample_every)
    gen = build_liouvillian(spec)
    states = _backend.rk4_evolve(gen.h_rad, gen.diss_rad, gen.deph_rad,
                                 gen.sink_rad, gen.k_index, rho0, dt,
                                 n_steps, stride)
    t = np.arange(states.shape[0]) * (stride * dt)
    traces = np.real(np.einsum("tii->t", states))
    drift = np.abs(traces - 1.0)
    bad = ~(drift <= TRACE_DRIFT_TOL)  # catches NaN as well
    if np.any(bad):
        k = int(np.argmax(bad))
        raise IntegrationAbort(
            f"trace drift {drift[k]:.3e} at t={t[k]:.6g} ps exceeds {TRACE_DRIFT_TOL:g}; "
            f"reduce dt")
    return Trajectory(t=t, states=states, spec=spec)


def sink_population_integral(traj: Trajectory) -> np.ndarray:
    """Sink population reconstructed from the trapping inflow.

    Integrates 2*G*p_k(t) over the sample grid (trapezoid rule) and adds the
    initial sink population.  Agrees with traj.sink to integration accuracy;
    the comparison is a consistency check on the propagator.
    """
    g_rad = convert_rate(traj.spec.sink_rate)
    p_k = np.real(traj.states[:, traj.spec.preferred_site, traj.spec.preferred_site])
    inflow = cumulative_trapezoid(2.0 * g_rad * p_k, traj.t, initial=0.0)
    return traj.sink[0] + inflow


def write_populations_csv(traj: Trajectory, path) -> None:
    """Write t, ground, site, and sink populations as CSV."""
    n = traj.spec.n_sites
    header = ["t_ps", "p0"] + [f"p{j}" for j in range(1, n + 1)] + ["psink"]
    cols = np.column_stack([traj.t, traj.ground, traj.populations, traj.sink])
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in cols:
            fh.write(",".join(f"{v:.12g}" for v in row) + "\n")
