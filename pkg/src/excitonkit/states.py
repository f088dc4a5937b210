"""Density matrices in the zero/one-excitation subspace.

States are plain complex ndarrays of dimension N+2 (or N+1 once the sink has
been traced out).  Index 0 is the global ground state, indices 1..N put the
excitation on site j, and the last index (when present) is the trapped-sink
level.  The dynamics never leaves this span, so the full many-qubit tensor
product is only ever materialized by :func:`embed_full`, which exists as a
brute-force test oracle.

Constructors return read-only arrays; all reductions are pure functions.
"""

from __future__ import annotations

import numpy as np

HERM_TOL = 1e-10
TRACE_TOL = 1e-10
EIG_TOL = 1e-8


class StateError(ValueError):
    """Raised when a density matrix violates a state invariant."""


def assert_valid_state(rho: np.ndarray, herm_tol=HERM_TOL, trace_tol=TRACE_TOL,
                       eig_tol=EIG_TOL) -> None:
    """Check Hermiticity, unit trace and positivity; raise StateError if violated."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise StateError(f"state must be a square matrix, got shape {rho.shape}")
    herm = np.max(np.abs(rho - rho.conj().T))
    if not herm <= herm_tol:
        raise StateError(f"state not Hermitian: max |rho - rho^dag| = {herm:.3g}")
    tr = np.trace(rho).real
    if not abs(tr - 1.0) <= trace_tol:
        raise StateError(f"state trace {tr!r} differs from 1")
    lam = np.linalg.eigvalsh(rho)
    if not lam[0] >= -eig_tol:
        raise StateError(f"state has negative eigenvalue {lam[0]:.3g}")


def _frozen(rho: np.ndarray) -> np.ndarray:
    rho = np.ascontiguousarray(rho, dtype=complex)
    rho.setflags(write=False)
    return rho


def basis_state(index: int, dim: int) -> np.ndarray:
    """Projector onto basis vector `index` of a dim-dimensional subspace state."""
    if not 0 <= index < dim:
        raise IndexError(f"basis index {index} out of range for dim {dim}")
    rho = np.zeros((dim, dim), dtype=complex)
    rho[index, index] = 1.0
    return _frozen(rho)


def mixed_state(components, dim: int) -> np.ndarray:
    """Statistical mixture of basis projectors from (weight, index) pairs."""
    rho = np.zeros((dim, dim), dtype=complex)
    total = 0.0
    for weight, index in components:
        if not 0 <= index < dim:
            raise IndexError(f"basis index {index} out of range for dim {dim}")
        rho[index, index] += weight
        total += weight
    if abs(total - 1.0) > 1e-12:
        raise ValueError(f"mixture weights sum to {total}, expected 1")
    return _frozen(rho)


def trace_out_sink(rho: np.ndarray) -> np.ndarray:
    """Remove the sink level: its weight joins the ground state.

    Site-sink (and ground-sink) coherences connect different sink-qubit
    levels and vanish under the partial trace.
    """
    rho = np.asarray(rho)
    d = rho.shape[0]
    out = np.array(rho[: d - 1, : d - 1])
    out[0, 0] += rho[d - 1, d - 1]
    return _frozen(out)


def reduce_two_site(rho: np.ndarray, i: int, j: int) -> np.ndarray:
    """Two-qubit marginal of sites i and j (first party = i).

    Basis order is {gg, ge, eg, ee} with the first label belonging to site i.
    The ee row and column are identically zero in the one-excitation sector.
    Works for states with or without the sink level; every level other than
    i and j contributes its population to the gg weight.
    """
    rho = np.asarray(rho)
    d = rho.shape[0]
    n_levels = d - 1  # sites plus possibly the sink
    if not (1 <= i <= n_levels and 1 <= j <= n_levels) or i == j:
        raise IndexError(f"invalid site pair ({i}, {j}) for state of dim {d}")
    sigma = np.zeros((4, 4), dtype=complex)
    others = [m for m in range(1, d) if m not in (i, j)]
    sigma[0, 0] = rho[0, 0] + sum(rho[m, m] for m in others)
    sigma[2, 2] = rho[i, i]
    sigma[1, 1] = rho[j, j]
    sigma[2, 1] = rho[i, j]
    sigma[1, 2] = rho[j, i]
    sigma[2, 0] = rho[i, 0]
    sigma[0, 2] = rho[0, i]
    sigma[1, 0] = rho[j, 0]
    sigma[0, 1] = rho[0, j]
    return _frozen(sigma)


def reduce_site(rho: np.ndarray, i: int) -> np.ndarray:
    """Single-qubit marginal of site i, basis {g, e}."""
    rho = np.asarray(rho)
    d = rho.shape[0]
    if not 1 <= i <= d - 1:
        raise IndexError(f"invalid site {i} for state of dim {d}")
    return _frozen(np.array([[1.0 - rho[i, i], rho[0, i]],
                             [rho[i, 0], rho[i, i]]], dtype=complex))


MAX_ORACLE_QUBITS = 10


def embed_full(rho: np.ndarray) -> np.ndarray:
    """Embed a subspace state into the full qubit tensor product.

    A dim-d subspace state maps onto d-1 qubits: index 0 becomes |g...g> and
    index m puts qubit m (tensor factor m-1, most significant first) in |e>.
    Exponential in the qubit count; guarded at 10 qubits.  Test oracle only.
    """
    rho = np.asarray(rho)
    d = rho.shape[0]
    n_qubits = d - 1
    if n_qubits > MAX_ORACLE_QUBITS:
        raise ValueError(f"embedding {n_qubits} qubits exceeds the oracle guard")
    full_dim = 2 ** n_qubits
    # basis index m > 0 excites qubit m: bit n_qubits - m set
    pos = np.zeros(d, dtype=int)
    for m in range(1, d):
        pos[m] = 1 << (n_qubits - m)
    out = np.zeros((full_dim, full_dim), dtype=complex)
    for a in range(d):
        for b in range(d):
            out[pos[a], pos[b]] = rho[a, b]
    return _frozen(out)


def partial_trace(rho: np.ndarray, dims, keep) -> np.ndarray:
    """Partial trace of a multipartite density matrix.

    dims lists the subsystem dimensions in tensor order; keep is a (0-based)
    subsystem position or list of positions to retain, in original order.
    """
    dims = list(dims)
    if isinstance(keep, (int, np.integer)):
        keep = [int(keep)]
    keep = sorted(keep)
    n = len(dims)
    rho = np.asarray(rho).reshape(dims + dims)
    traced = [q for q in range(n) if q not in keep]
    for offset, q in enumerate(traced):
        axis = q - offset
        rho = np.trace(rho, axis1=axis, axis2=axis + rho.ndim // 2)
    d_keep = int(np.prod([dims[q] for q in keep])) if keep else 1
    return rho.reshape(d_keep, d_keep)


def random_subspace_state(dim: int, rng, rank: int | None = None) -> np.ndarray:
    """Random valid density matrix on the compact subspace (test fixture)."""
    r = dim if rank is None else rank
    a = rng.standard_normal((dim, r)) + 1j * rng.standard_normal((dim, r))
    rho = a @ a.conj().T
    rho /= np.trace(rho).real
    return _frozen(rho)


def state_to_csv(rho: np.ndarray) -> str:
    """Debug export: row-major CSV with real and imaginary parts interleaved."""
    rho = np.asarray(rho)
    rows = []
    for row in rho:
        cells = []
        for v in row:
            cells.append(f"{v.real:.12g}")
            cells.append(f"{v.imag:.12g}")
        rows.append(",".join(cells))
    return "\n".join(rows) + "\n"
