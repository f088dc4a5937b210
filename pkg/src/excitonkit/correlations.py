"""Bipartite quantum-correlation measures: negativity and quantum discord.

Conventions used throughout:

* Entropies and discord are in bits.
* For a bipartite state ``sigma`` with dims (dA, dB), party A is listed
  first, and measurement-based quantities (classical correlation, discord)
  measure party A.
* Negativity is the absolute sum of the negative eigenvalues of the partial
  transpose over party A.

Single-excitation networks get dedicated fast paths that work directly on
the compact (N + 1)-level state with the sink already traced out, avoiding
the 2^N qubit embedding: the partial transpose of such a state has support
on a known 2N-dimensional subspace, and the post-measurement states for a
single-site measurement live in an N-dimensional subspace.

Discord minimizes over projective measurements parameterized by Bloch
angles (theta, phi).  The minimization is a uniform grid scan followed by a
Nelder-Mead refinement from the best grid point; the refinement can only
lower the value, never raise it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from . import _backend, _purepy
from .states import StateError, partial_trace, reduce_site

MEASURES = ("negativity", "negativity2", "discord")

GRID_SHAPE = (32, 64)
REFINE_OPTIONS = {"xatol": 1e-5, "fatol": 1e-7, "maxiter": 200}


@dataclass(frozen=True)
class MeasurementBasis:
    """Projective single-qubit measurement direction on the Bloch sphere."""

    theta: float
    phi: float

    def projectors(self) -> tuple[np.ndarray, np.ndarray]:
        """The two rank-1 projectors of the measurement."""
        c = np.cos(0.5 * self.theta)
        s = np.sin(0.5 * self.theta)
        ph = np.exp(1j * self.phi)
        m0 = np.array([c, s * ph])
        m1 = np.array([-s * ph.conjugate(), c])
        return np.outer(m0, m0.conj()), np.outer(m1, m1.conj())


@dataclass(frozen=True)
class CorrelationValue:
    """A tagged correlation value.

    Negativity (and its square) must be non-negative; discord may dip to
    -1e-9 from minimizer rounding but no further.
    """

    measure: str
    value: float

    def __post_init__(self):
        if self.measure not in MEASURES:
            raise ValueError(f"unknown measure '{self.measure}' (known: {MEASURES})")
        if self.measure in ("negativity", "negativity2") and self.value < 0:
            raise ValueError(f"{self.measure} must be non-negative, got {self.value}")
        if self.measure == "discord" and self.value < -1e-9:
            raise ValueError(f"discord below rounding floor: {self.value}")


def entropy(rho: np.ndarray, eig_tol: float = 1e-8) -> float:
    """von Neumann entropy in bits.

    Eigenvalues in [-eig_tol, 0) are treated as zero; anything below raises
    StateError since the input is not a state.
    """
    lam = np.linalg.eigvalsh(np.asarray(rho, dtype=complex))
    if lam[0] < -eig_tol:
        raise StateError(f"negative eigenvalue {lam[0]:.3e} in entropy input")
    lam = lam[lam > 0.0]
    return float(-np.sum(lam * np.log2(lam)))


def negativity(sigma: np.ndarray, dims: tuple[int, int]) -> float:
    """Negativity of sigma across the (A, B) split, transposing party A."""
    da, db = dims
    sig = np.asarray(sigma, dtype=complex).reshape(da, db, da, db)
    pt = np.transpose(sig, (2, 1, 0, 3)).reshape(da * db, da * db)
    lam = np.linalg.eigvalsh(pt)
    return float(-np.sum(lam[lam < 0.0]))


def negativity_site_vs_rest(rho_ns: np.ndarray, site: int) -> float:
    """Negativity between one site qubit and the rest of the network.

    rho_ns is the compact sink-free state of dimension N + 1 (vacuum plus N
    single-site excitations); site is 1-based.  The partial transpose over
    the site qubit maps the single-excitation coherences rho[site, k] into a
    double-excitation sector, so the spectrum is computed on a 2N-dimensional
    matrix instead of the 2^N embedding.
    """
    rho = np.asarray(rho_ns, dtype=complex)
    d = rho.shape[0]
    n = d - 1
    if not 1 <= site <= n:
        raise IndexError(f"site {site} out of range for {n} sites")
    rest = [j for j in range(1, d) if j != site]
    m = np.zeros((2 * n, 2 * n), dtype=complex)
    m[:d, :d] = rho
    # transposing the site qubit swaps the vacuum coherence of the site...
    m[0, site] = rho[site, 0]
    m[site, 0] = rho[0, site]
    # ...and moves its coherences with other sites into the double sector
    m[site, rest] = 0.0
    m[rest, site] = 0.0
    for a, k in enumerate(rest):
        m[0, d + a] = rho[site, k]
        m[d + a, 0] = rho[k, site]
    lam = np.linalg.eigvalsh(m)
    return float(-np.sum(lam[lam < 0.0]))


def mutual_information(sigma: np.ndarray, dims: tuple[int, int]) -> float:
    """Total correlation S(A) + S(B) - S(AB) in bits."""
    sig = np.asarray(sigma, dtype=complex)
    rho_a = partial_trace(sig, dims, keep=0)
    rho_b = partial_trace(sig, dims, keep=1)
    return entropy(rho_a) + entropy(rho_b) - entropy(sig)


def _conditional_entropies_general(sigma: np.ndarray, db: int,
                                   thetas: np.ndarray,
                                   phis: np.ndarray) -> np.ndarray:
    """Average conditional entropy of B for qubit measurements on A, any dB."""
    s = np.asarray(sigma, dtype=complex).reshape(2, db, 2, db)
    a_g, a_e = _purepy._outcome_amplitudes(thetas, phis)
    mv = np.stack([a_g, a_e], axis=2)
    m = np.einsum("poa,poc,abcd->pobd", mv.conj(), mv, s)
    lam = np.linalg.eigvalsh(m)
    p = np.sum(lam, axis=-1)
    return _purepy._entropy_terms(lam, p)


def minimize_conditional_entropy(eval_fn, grid: tuple[int, int] = GRID_SHAPE,
                                 refine: bool = True) -> tuple[float, MeasurementBasis]:
    """Minimize an angle-indexed conditional entropy.

    eval_fn(thetas, phis) must accept equal-length angle arrays and return
    the average conditional entropy for each direction.  Scans a uniform
    (theta, phi) grid over [0, pi] x [0, 2 pi), then polishes the best grid
    point with Nelder-Mead.  Returns (value, basis); the polished value is
    never above the grid minimum.
    """
    n_theta, n_phi = grid
    thetas = np.linspace(0.0, np.pi, n_theta)
    phis = np.arange(n_phi) * (2.0 * np.pi / n_phi)
    tt, pp = np.meshgrid(thetas, phis, indexing="ij")
    tt = tt.ravel()
    pp = pp.ravel()
    vals = eval_fn(tt, pp)
    k = int(np.argmin(vals))
    best = float(vals[k])
    angles = (float(tt[k]), float(pp[k]))
    if refine:
        res = minimize(
            lambda x: float(eval_fn(np.array([x[0]]), np.array([x[1]]))[0]),
            x0=np.array(angles), method="Nelder-Mead", options=REFINE_OPTIONS)
        if res.fun < best:
            best = float(res.fun)
            angles = (float(res.x[0]), float(res.x[1]))
    return best, MeasurementBasis(*angles)


def _min_conditional_entropy_pair(sigma: np.ndarray, db: int,
                                  grid: tuple[int, int],
                                  refine: bool) -> tuple[float, MeasurementBasis]:
    if db == 2:
        fn = lambda t, p: _backend.pair_conditional_entropies(sigma, t, p)
    else:
        fn = lambda t, p: _conditional_entropies_general(sigma, db, t, p)
    return minimize_conditional_entropy(fn, grid=grid, refine=refine)


def classical_correlation(sigma: np.ndarray, dims: tuple[int, int] = (2, 2),
                          grid: tuple[int, int] = GRID_SHAPE,
                          refine: bool = True) -> float:
    """Measurement-extractable correlation J = S(B) - min_M sum_a p_a S(B|a).

    Party A must be a qubit; the projective measurement acts on it.
    """
    da, db = dims
    if da != 2:
        raise ValueError("measured party must be a qubit")
    sig = np.asarray(sigma, dtype=complex)
    cond, _ = _min_conditional_entropy_pair(sig, db, grid, refine)
    return entropy(partial_trace(sig, dims, keep=1)) - cond


def discord(sigma: np.ndarray, dims: tuple[int, int] = (2, 2),
            grid: tuple[int, int] = GRID_SHAPE, refine: bool = True) -> float:
    """Quantum discord D = I - J with the measurement on party A.

    Equals S(A) - S(AB) + min_M sum_a p_a S(B|a); the S(B) terms cancel.
    """
    da, db = dims
    if da != 2:
        raise ValueError("measured party must be a qubit")
    sig = np.asarray(sigma, dtype=complex)
    cond, _ = _min_conditional_entropy_pair(sig, db, grid, refine)
    s_a = entropy(partial_trace(sig, dims, keep=0))
    return s_a - entropy(sig) + cond


def discord_site_vs_rest(rho_ns: np.ndarray, site: int,
                         grid: tuple[int, int] = GRID_SHAPE,
                         refine: bool = True) -> float:
    """Discord between one site qubit (measured) and the rest of the network.

    Works on the compact sink-free state: the post-measurement states of R
    are contracted directly in the (N + 1)-level basis, so each direction
    costs two N-dimensional eigensolves instead of 2^(N-1)-dimensional ones.
    """
    rho = np.asarray(rho_ns, dtype=complex)
    n = rho.shape[0] - 1
    if not 1 <= site <= n:
        raise IndexError(f"site {site} out of range for {n} sites")
    cond, _ = minimize_conditional_entropy(
        lambda t, p: _backend.site_conditional_entropies(rho, site, t, p),
        grid=grid, refine=refine)
    s_a = entropy(reduce_site(rho, site))
    return s_a - entropy(rho) + cond
