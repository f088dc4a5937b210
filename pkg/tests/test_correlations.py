"""Correlation measures against fixtures and the embedding oracles."""

import numpy as np
import pytest

import oracles
from excitonkit.correlations import (CorrelationValue, MeasurementBasis,
                                     classical_correlation, discord,
                                     discord_site_vs_rest, entropy,
                                     minimize_conditional_entropy,
                                     mutual_information, negativity,
                                     negativity_site_vs_rest)
from excitonkit.states import (StateError, basis_state, partial_trace,
                               random_subspace_state, reduce_site)

# discord of 0.7 Bell + 0.3 I/4, frozen from the Bell-diagonal closed form
WERNER_07_DISCORD = 0.484030913041


def product_state():
    a = np.diag([0.3, 0.7]).astype(complex)
    b = np.diag([0.6, 0.4]).astype(complex)
    return np.kron(a, b)


def w_compact(n):
    """n-site single-excitation W state in the compact basis."""
    rho = np.zeros((n + 1, n + 1), dtype=complex)
    rho[1:, 1:] = 1.0 / n
    return rho


def test_entropy_fixtures():
    assert entropy(np.outer([1, 0], [1, 0])) == 0.0
    assert entropy(np.eye(2) / 2.0) == pytest.approx(1.0)
    assert entropy(np.diag([0.5, 0.25, 0.25])) == pytest.approx(1.5)
    with pytest.raises(StateError):
        entropy(np.diag([1.05, -0.05]))


def test_measurement_basis_projectors():
    for theta, phi in ((0.3, 1.1), (np.pi / 2, 0.0), (2.9, 5.5)):
        p0, p1 = MeasurementBasis(theta, phi).projectors()
        assert np.allclose(p0 + p1, np.eye(2), atol=1e-14)
        assert np.allclose(p0 @ p0, p0, atol=1e-14)
        assert np.allclose(p1 @ p1, p1, atol=1e-14)
        assert np.allclose(p0 @ p1, 0.0, atol=1e-14)


def test_correlation_value_validation():
    CorrelationValue("negativity", 0.5)
    CorrelationValue("discord", -5e-10)  # inside the rounding floor
    with pytest.raises(ValueError):
        CorrelationValue("negativity", -0.01)
    with pytest.raises(ValueError):
        CorrelationValue("discord", -1e-6)
    with pytest.raises(ValueError):
        CorrelationValue("entropy", 1.0)


def test_negativity_fixtures():
    assert negativity(oracles.bell_state(), (2, 2)) == pytest.approx(0.5, abs=1e-10)
    assert negativity(product_state(), (2, 2)) == pytest.approx(0.0, abs=1e-12)
    # reduced pair of the 3-qubit W state; closed form from the 4x4 spectrum
    pair = partial_trace(oracles.w_state(3), [2, 2, 2], [0, 1])
    assert negativity(pair, (2, 2)) == pytest.approx((np.sqrt(5) - 1) / 6,
                                                     abs=1e-12)


def test_negativity_party_symmetric():
    rng = np.random.default_rng(17)
    for _ in range(5):
        sig = oracles.random_two_qubit_state(rng)
        swapped = sig.reshape(2, 2, 2, 2).transpose(1, 0, 3, 2).reshape(4, 4)
        assert negativity(sig, (2, 2)) == pytest.approx(
            negativity(swapped, (2, 2)), abs=1e-12)
    # and for unequal party dimensions
    arr = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    sig = arr @ arr.conj().T
    sig /= np.trace(sig).real
    swapped = sig.reshape(2, 3, 2, 3).transpose(1, 0, 3, 2).reshape(6, 6)
    assert negativity(sig, (2, 3)) == pytest.approx(
        negativity(swapped, (3, 2)), abs=1e-12)


def test_negativity_site_vs_rest_fixtures():
    assert negativity_site_vs_rest(basis_state(0, 8), 1) == 0.0
    w7 = w_compact(7)
    assert negativity_site_vs_rest(w7, 1) == pytest.approx(np.sqrt(6) / 7,
                                                           abs=1e-9)
    with pytest.raises(IndexError):
        negativity_site_vs_rest(w7, 8)


def test_negativity_site_vs_rest_pure_schmidt():
    """For pure states the negativity is the Schmidt product sqrt(det rho_i)."""
    rng = np.random.default_rng(19)
    for n in (3, 6):
        psi = rng.standard_normal(n + 1) + 1j * rng.standard_normal(n + 1)
        psi /= np.linalg.norm(psi)
        rho = np.outer(psi, psi.conj())
        for site in range(1, n + 1):
            marginal = reduce_site(rho, site)
            expected = np.sqrt(max(np.linalg.det(marginal).real, 0.0))
            assert negativity_site_vs_rest(rho, site) == pytest.approx(
                expected, abs=1e-12)


def test_negativity_site_vs_rest_matches_embedding():
    rng = np.random.default_rng(23)
    for n in range(3, 8):
        for _ in range(5):
            rho = random_subspace_state(n + 1, rng)
            site = int(rng.integers(1, n + 1))
            assert negativity_site_vs_rest(rho, site) == pytest.approx(
                oracles.embedded_negativity(rho, site), abs=1e-12)


def test_mutual_information_fixtures():
    assert mutual_information(product_state(), (2, 2)) == pytest.approx(0.0, abs=1e-12)
    assert mutual_information(oracles.bell_state(), (2, 2)) == pytest.approx(2.0)
    assert mutual_information(oracles.classical_mixture(), (2, 2)) == pytest.approx(1.0)


def test_classical_correlation_fixtures():
    assert classical_correlation(product_state()) == pytest.approx(0.0, abs=1e-9)
    assert classical_correlation(oracles.bell_state()) == pytest.approx(1.0, abs=1e-3)
    # computational basis is on the scan grid, so this one is near-exact
    assert classical_correlation(oracles.classical_mixture()) == pytest.approx(
        1.0, abs=1e-6)
    with pytest.raises(ValueError):
        classical_correlation(np.eye(6) / 6.0, (3, 2))


def test_discord_fixtures():
    assert discord(oracles.bell_state()) == pytest.approx(1.0, abs=1e-3)
    assert discord(oracles.classical_mixture()) == pytest.approx(0.0, abs=1e-6)
    assert discord(product_state()) == pytest.approx(0.0, abs=1e-9)


def test_discord_werner():
    sig = oracles.werner_state(0.7)
    closed = oracles.werner_discord_closed(0.7)
    assert closed == pytest.approx(WERNER_07_DISCORD, abs=1e-10)
    assert discord(sig) == pytest.approx(WERNER_07_DISCORD, abs=1e-6)
    # exhaustive fine grid without refinement lands on the same value
    assert discord(sig, grid=(256, 512), refine=False) == pytest.approx(
        WERNER_07_DISCORD, abs=1e-6)


def test_discord_pure_state_identity():
    """For pure bipartite states discord equals the entanglement entropy."""
    rng = np.random.default_rng(29)
    for _ in range(5):
        sig = oracles.random_two_qubit_state(rng, rank=1)
        s_a = entropy(partial_trace(sig, (2, 2), 0))
        assert discord(sig) == pytest.approx(s_a, abs=1e-5)


def test_discord_nonnegative_random():
    rng = np.random.default_rng(31)
    for _ in range(50):
        val = discord(oracles.random_two_qubit_state(rng))
        assert val >= -1e-9
        CorrelationValue("discord", val)


def test_refinement_never_above_grid():
    rng = np.random.default_rng(37)
    for _ in range(5):
        sig = oracles.random_two_qubit_state(rng)
        assert discord(sig) <= discord(sig, refine=False) + 1e-12


def test_minimize_conditional_entropy_protocol():
    # quadratic landscape with a minimum off the grid
    fn = lambda t, p: (t - 0.8) ** 2 + 0.1 * (1.0 - np.cos(p - 2.0))
    best, basis = minimize_conditional_entropy(fn)
    assert best == pytest.approx(0.0, abs=1e-6)
    assert basis.theta == pytest.approx(0.8, abs=1e-2)
    coarse, _ = minimize_conditional_entropy(fn, refine=False)
    assert best <= coarse


def test_discord_site_vs_rest_fixtures():
    assert discord_site_vs_rest(basis_state(0, 6), 2) == pytest.approx(0.0, abs=1e-9)
    rng = np.random.default_rng(41)
    psi = rng.standard_normal(5) + 1j * rng.standard_normal(5)
    psi /= np.linalg.norm(psi)
    rho = np.outer(psi, psi.conj())
    s_site = entropy(reduce_site(rho, 2))
    assert discord_site_vs_rest(rho, 2) == pytest.approx(s_site, abs=1e-5)
    with pytest.raises(IndexError):
        discord_site_vs_rest(rho, 5)


def test_discord_site_vs_rest_matches_embedding():
    rng = np.random.default_rng(43)
    for n in range(3, 8):
        for _ in range(3):
            rho = random_subspace_state(n + 1, rng)
            site = int(rng.integers(1, n + 1))
            assert discord_site_vs_rest(rho, site) == pytest.approx(
                oracles.embedded_discord(rho, site), abs=1e-8)


def test_oracle_dense_and_factored_routes_agree():
    """The two embedded-discord evaluation routes cross-check each other."""
    rng = np.random.default_rng(47)
    for n in (3, 5, 7):
        rho = random_subspace_state(n + 1, rng)
        site = int(rng.integers(1, n + 1))
        dense = oracles.embedded_discord(rho, site, dense=True)
        fast = oracles.embedded_discord(rho, site)
        assert dense == pytest.approx(fast, abs=1e-10)
