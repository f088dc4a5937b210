"""Vectorized numpy implementations of the hot kernels.

This is the fallback backend used when the compiled extension is not built.
The three entry points mirror :mod:`excitonkit._kernels` exactly:

* ``rk4_evolve``: fixed-step RK4 integration of the Lindblad generator.
* ``site_conditional_entropies``: average post-measurement entropy of the
  rest-of-network marginal for a grid of single-qubit measurement bases.
* ``pair_conditional_entropies``: same for a two-qubit state, measuring the
  first party, with closed-form 2x2 eigenvalues.

Entropies are in bits.  Eigenvalues in [-1e-8, 0) from integration noise are
clamped to zero; positivity is enforced upstream on the raw states.
"""

import numpy as np

_LOG2 = np.log(2.0)
_P_FLOOR = 1e-12


def lindblad_apply(h_rad, diss_rad, deph_rad, sink_rad, k_index, rho):
    """Right-hand side of the master equation, all rates in rad/ps.

    h_rad is the (d, d) Hamiltonian embedded in the subspace basis (zero
    ground and sink rows).  k_index is the matrix index of the preferred
    site (equal to its 1-based site number).
    """
    d = rho.shape[0]
    n = d - 2
    decay = np.zeros(d)
    decay[1:n + 1] = diss_rad + deph_rad
    decay[k_index] += sink_rad
    out = -1j * (h_rad @ rho - rho @ h_rad)
    out -= (decay[:, None] + decay[None, :]) * rho
    diag = np.diagonal(rho)[1:n + 1]
    out[0, 0] += 2.0 * np.dot(diss_rad, diag)
    sites = np.arange(1, n + 1)
    out[sites, sites] += 2.0 * deph_rad * diag
    out[d - 1, d - 1] += 2.0 * sink_rad * rho[k_index, k_index]
    return out


def rk4_evolve(h_rad, diss_rad, deph_rad, sink_rad, k_index, rho0, dt,
               n_steps, stride):
    """Propagate rho0 for n_steps of size dt, saving every stride steps.

    Returns an array of shape (n_steps // stride + 1, d, d) whose first
    entry is rho0.  States are re-Hermitized after every step.
    """
    d = rho0.shape[0]
    n_saved = n_steps // stride + 1
    out = np.empty((n_saved, d, d), dtype=complex)
    rho = np.array(rho0, dtype=complex)
    out[0] = rho
    args = (h_rad, diss_rad, deph_rad, sink_rad, k_index)
    save = 1
    for step in range(1, n_steps + 1):
        k1 = lindblad_apply(*args, rho)
        k2 = lindblad_apply(*args, rho + (0.5 * dt) * k1)
        k3 = lindblad_apply(*args, rho + (0.5 * dt) * k2)
        k4 = lindblad_apply(*args, rho + dt * k3)
        rho = rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        rho = 0.5 * (rho + rho.conj().T)
        if step % stride == 0:
            out[save] = rho
            save += 1
    return out


def _entropy_terms(lam, p):
    """Sum over outcomes of p*S(normalized spectrum), from raw eigenvalues."""
    lam = np.where(lam > 0.0, lam, 1.0)  # clamped entries contribute 0
    ent = -np.sum(lam * np.log(lam), axis=-1)
    p_safe = np.where(p > _P_FLOOR, p, 1.0)
    ent += p_safe * np.log(p_safe)
    ent = np.where(p > _P_FLOOR, ent, 0.0)
    return np.sum(ent, axis=-1) / _LOG2


def _outcome_amplitudes(thetas, phis):
    """Qubit amplitudes (a_g, a_e) of the two projective outcomes, (P, 2)."""
    c = np.cos(0.5 * thetas)
    s = np.sin(0.5 * thetas)
    ph = np.exp(1j * phis)
    a_g = np.stack([c + 0j, -s * ph.conj()], axis=1)
    a_e = np.stack([s * ph, c + 0j], axis=1)
    return a_g, a_e


def site_conditional_entropies(rho_ns, site, thetas, phis):
    """Average conditional entropy of R for measurements on one site qubit.

    rho_ns is a sink-free compact state of dimension n_sites + 1; site is
    1-based.  thetas and phis are equal-length arrays of Bloch angles; the
    returned array holds sum_a p_a S(rho_{R|a}) in bits for each direction.
    """
    rho_ns = np.asarray(rho_ns, dtype=complex)
    d = rho_ns.shape[0]
    rest = [j for j in range(1, d) if j != site]
    idx = [0] + rest
    base = rho_ns[np.ix_(idx, idx)]
    u = rho_ns[0, rest]
    v = rho_ns[site, rest]
    r00 = rho_ns[0, 0]
    r0i = rho_ns[0, site]
    ri0 = rho_ns[site, 0]
    rii = rho_ns[site, site]

    a_g, a_e = _outcome_amplitudes(np.asarray(thetas, dtype=float),
                                   np.asarray(phis, dtype=float))
    w = (np.abs(a_g) ** 2)[:, :, None, None]
    m = w * base[None, None, :, :]
    row = a_g[:, :, None] * (a_g.conj()[:, :, None] * u[None, None, :]
                             + a_e.conj()[:, :, None] * v[None, None, :])
    m[:, :, 0, 1:] = row
    m[:, :, 1:, 0] = row.conj()
    m[:, :, 0, 0] = (np.abs(a_g) ** 2 * r00 + a_g.conj() * a_e * r0i
                     + a_g * a_e.conj() * ri0 + np.abs(a_e) ** 2 * rii)
    lam = np.linalg.eigvalsh(m)
    p = np.sum(lam, axis=-1)
    return _entropy_terms(lam, p)


def pair_conditional_entropies(sigma, thetas, phis):
    """Average conditional entropy for a two-qubit state, measuring party one."""
    s = np.asarray(sigma, dtype=complex).reshape(2, 2, 2, 2)
    a_g, a_e = _outcome_amplitudes(np.asarray(thetas, dtype=float),
                                   np.asarray(phis, dtype=float))
    mv = np.stack([a_g, a_e], axis=2)  # (P, outcome, component)
    m = np.einsum("poa,poc,abcd->pobd", mv.conj(), mv, s)
    tr = (m[..., 0, 0] + m[..., 1, 1]).real
    det = (m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]).real
    disc = np.sqrt(np.maximum(tr * tr - 4.0 * det, 0.0))
    lam = np.stack([0.5 * (tr - disc), 0.5 * (tr + disc)], axis=-1)
    return _entropy_terms(lam, tr)
