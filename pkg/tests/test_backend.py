"""Compiled kernels against the pure-python fallback."""

import os
import subprocess
import sys

import numpy as np
import pytest

from excitonkit import _backend, _purepy
from excitonkit.evolution import build_liouvillian
from excitonkit.network import build_fmo
from excitonkit.states import basis_state, random_subspace_state

compiled = pytest.importorskip("excitonkit._kernels",
                               reason="compiled extension not built")


def test_backend_selection():
    if os.environ.get("EXCITONKIT_PURE_PYTHON", "") in ("", "0"):
        assert _backend.backend_name() == "compiled"
    else:
        assert _backend.backend_name() == "python"


def test_pure_python_override_in_subprocess():
    env = dict(os.environ, EXCITONKIT_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c",
         "import excitonkit; print(excitonkit.backend_name())"],
        env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_rk4_parity():
    gen = build_liouvillian(build_fmo())
    rho0 = basis_state(1, 9)
    args = (gen.h_rad, gen.diss_rad, gen.deph_rad, gen.sink_rad, gen.k_index,
            rho0, 0.001, 50, 10)
    a = compiled.rk4_evolve(*args)
    b = _purepy.rk4_evolve(*args)
    assert a.shape == b.shape == (6, 9, 9)
    assert np.max(np.abs(a - b)) < 1e-13


def test_lindblad_apply_matches_rk4_backends():
    gen = build_liouvillian(build_fmo())
    rng = np.random.default_rng(1)
    rho = random_subspace_state(9, rng)
    drho = _purepy.lindblad_apply(gen.h_rad, gen.diss_rad, gen.deph_rad,
                                  gen.sink_rad, gen.k_index, np.array(rho))
    assert abs(np.trace(drho)) < 1e-13
    assert np.max(np.abs(drho - drho.conj().T)) < 1e-13


def test_site_conditional_entropy_parity():
    rng = np.random.default_rng(2)
    thetas = rng.uniform(0.0, np.pi, 40)
    phis = rng.uniform(0.0, 2 * np.pi, 40)
    for n in (3, 7):
        rho = np.array(random_subspace_state(n + 1, rng))
        for site in (1, n):
            a = compiled.site_conditional_entropies(rho, site, thetas, phis)
            b = _purepy.site_conditional_entropies(rho, site, thetas, phis)
            assert np.max(np.abs(a - b)) < 1e-12


def test_pair_conditional_entropy_parity():
    rng = np.random.default_rng(3)
    thetas = rng.uniform(0.0, np.pi, 40)
    phis = rng.uniform(0.0, 2 * np.pi, 40)
    arr = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    sigma = arr @ arr.conj().T
    sigma /= np.trace(sigma).real
    a = compiled.pair_conditional_entropies(sigma, thetas, phis)
    b = _purepy.pair_conditional_entropies(sigma, thetas, phis)
    assert np.max(np.abs(a - b)) < 1e-12
