"""Network definitions: Hamiltonian, noise rates, sink wiring, presets.

A network is an N-site single-excitation hopping model.  Site j carries an
on-site energy (diagonal of the Hamiltonian) and couples coherently to the
other sites (off-diagonal entries).  Each site is subject to local
dissipation and dephasing, and one "preferred" site is drained irreversibly
into a sink.  All energies and rates are stored in cm^-1; see
:mod:`excitonkit.units` for the conversion to rad/ps used by the propagator.

Two families of presets are provided: the fully connected network (FCN)
with all couplings equal, and the seven-site FMO pigment network with its
standard site-basis Hamiltonian and optimized dephasing rates.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field

import numpy as np

from .units import rate_from_per_ps

HERMITICITY_TOL = 1e-12


class ConfigError(ValueError):
    """Raised for malformed network or experiment config input."""


@dataclass(frozen=True)
class NetworkSpec:
    """An N-site network with noise rates and sink coupling.

    Fields
    ------
    n_sites : number of sites N.
    hamiltonian : (N, N) Hermitian matrix, cm^-1.  Diagonal entries are
        on-site energies, off-diagonal entries are couplings.
    dissipation_rates : per-site exciton loss rates, cm^-1.
    dephasing_rates : per-site dephasing rates, cm^-1.
    sink_rate : trapping rate from the preferred site into the sink, cm^-1.
    preferred_site : 1-based index of the site wired to the sink.
    label : free-form name.
    """

    n_sites: int
    hamiltonian: np.ndarray
    dissipation_rates: np.ndarray
    dephasing_rates: np.ndarray
    sink_rate: float
    preferred_site: int
    label: str = ""

    def __post_init__(self):
        n = self.n_sites
        if n < 1:
            raise ValueError("n_sites must be positive")
        h = np.asarray(self.hamiltonian, dtype=complex)
        if h.shape != (n, n):
            raise ValueError(f"hamiltonian must be {n}x{n}, got {h.shape}")
        if np.max(np.abs(h - h.conj().T)) > HERMITICITY_TOL:
            raise ValueError("hamiltonian is not Hermitian")
        diss = np.asarray(self.dissipation_rates, dtype=float)
        deph = np.asarray(self.dephasing_rates, dtype=float)
        for name, vec in (("dissipation_rates", diss), ("dephasing_rates", deph)):
            if vec.shape != (n,):
                raise ValueError(f"{name} must have length {n}")
            if np.any(vec < 0):
                raise ValueError(f"{name} must be non-negative")
        if self.sink_rate < 0:
            raise ValueError("sink_rate must be non-negative")
        if not 1 <= self.preferred_site <= n:
            raise ValueError("preferred_site out of range")
        h.setflags(write=False)
        diss.setflags(write=False)
        deph.setflags(write=False)
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "dissipation_rates", diss)
        object.__setattr__(self, "dephasing_rates", deph)

    @property
    def dim(self) -> int:
        """Dimension of the dynamical state space (ground + sites + sink)."""
        return self.n_sites + 2


def build_fcn(n, coupling, onsite=None, diss=None, deph=None,
              sink_rate=50.0, preferred=None, label="fcn") -> NetworkSpec:
    """Build a fully connected network: every off-diagonal coupling equals J.

    Parameters default to the clean 7-site configuration when called as
    ``build_fcn(7, 50.0)``: zero on-site energies, no dissipation or
    dephasing, sink rate 50 cm^-1 on the last site.
    """
    if n < 2:
        raise ValueError("FCN needs at least 2 sites")
    onsite = np.zeros(n) if onsite is None else np.asarray(onsite, dtype=float)
    diss = np.zeros(n) if diss is None else np.asarray(diss, dtype=float)
    deph = np.zeros(n) if deph is None else np.asarray(deph, dtype=float)
    for name, vec in (("onsite", onsite), ("diss", diss), ("deph", deph)):
        if vec.shape != (n,):
            raise ValueError(f"{name} must have length {n}")
    h = np.full((n, n), float(coupling), dtype=complex)
    np.fill_diagonal(h, onsite)
    if preferred is None:
        preferred = n
    return NetworkSpec(n, h, diss, deph, float(sink_rate), preferred, label)


# Seven-site FMO Hamiltonian in the site basis, cm^-1.
FMO_HAMILTONIAN = np.array([
    [215.0, -104.1, 5.1, -4.3, 4.7, -15.1, -7.8],
    [-104.1, 220.0, 32.6, 7.1, 5.4, 8.3, 0.8],
    [5.1, 32.6, 0.0, -46.8, 1.0, -8.1, 5.1],
    [-4.3, 7.1, -46.8, 125.0, -70.7, -14.7, -61.5],
    [4.7, 5.4, 1.0, -70.7, 450.0, 89.7, -2.5],
    [-15.1, 8.3, -8.1, -14.7, 89.7, 330.0, 32.7],
    [-7.8, 0.8, 5.1, -61.5, -2.5, 32.7, 280.0],
])
FMO_HAMILTONIAN.setflags(write=False)

# Optimized per-site dephasing rates, ps^-1.
FMO_DEPHASING_PER_PS = (0.157, 9.432, 7.797, 9.432, 7.797, 0.922, 9.433)
FMO_SINK_RATE_CM = 62.8 / 1.88
FMO_DISSIPATION_CM = 1.0 / (2.0 * 188.0)
FMO_PREFERRED_SITE = 3


def build_fmo() -> NetworkSpec:
    """Build the seven-site FMO network with its standard parameters."""
    deph = np.array([rate_from_per_ps(g) for g in FMO_DEPHASING_PER_PS])
    diss = np.full(7, FMO_DISSIPATION_CM)
    return NetworkSpec(7, FMO_HAMILTONIAN.astype(complex), diss, deph,
                       FMO_SINK_RATE_CM, FMO_PREFERRED_SITE, label="fmo")


def _fcn_clean():
    return build_fcn(7, 50.0, label="fcn-clean")


def _fcn_energy_mismatch():
    onsite = np.zeros(7)
    onsite[0] = 50.0
    return build_fcn(7, 50.0, onsite=onsite, label="fcn-energy-mismatch")


def _fcn_dephasing_mismatch():
    deph = np.zeros(7)
    deph[0] = 50.0
    return build_fcn(7, 50.0, deph=deph, label="fcn-dephasing-mismatch")


PRESETS = {
    "fcn-clean": _fcn_clean,
    "fcn-energy-mismatch": _fcn_energy_mismatch,
    "fcn-dephasing-mismatch": _fcn_dephasing_mismatch,
    "fmo": build_fmo,
}

# Default initial excitation site per preset (FMO variants are selected with
# the experiment's initial-state option: 1, 6, or the equal 1/6 mixture).
PRESET_DEFAULT_INITIAL = {
    "fcn-clean": 1,
    "fcn-energy-mismatch": 1,
    "fcn-dephasing-mismatch": 1,
    "fmo": 1,
}


def get_preset(name: str) -> NetworkSpec:
    try:
        factory = PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset '{name}' (known: {', '.join(sorted(PRESETS))})")
    return factory()


# ---------------------------------------------------------------------------
# Plain-text config serialization
# ---------------------------------------------------------------------------

_RATE_UNITS = ("cm-1", "ps-1")


def _parse_rate_list(raw: str, key: str, n: int | None = None) -> np.ndarray:
    """Parse 'v1 v2 ... unit' where unit is cm-1 or ps-1; returns cm^-1 values."""
    parts = raw.split()
    if not parts or parts[-1] not in _RATE_UNITS:
        raise ConfigError(f"[network] {key}: missing unit suffix (expected one of {_RATE_UNITS})")
    unit = parts[-1]
    try:
        values = np.array([float(p) for p in parts[:-1]])
    except ValueError as exc:
        raise ConfigError(f"[network] {key}: {exc}")
    if n is not None and values.size != n:
        raise ConfigError(f"[network] {key}: expected {n} values, got {values.size}")
    if unit == "ps-1":
        values = np.array([rate_from_per_ps(v) for v in values])
    return values


def network_to_config(spec: NetworkSpec) -> str:
    """Serialize a NetworkSpec to the INI [network] section."""
    lines = ["[network]"]
    lines.append(f"label = {spec.label}")
    lines.append(f"n_sites = {spec.n_sites}")
    ham = " ".join(f"{v:.12g}" for v in spec.hamiltonian.real.ravel())
    lines.append(f"hamiltonian = {ham} cm-1")
    lines.append("diss_rates = " + " ".join(f"{v:.12g}" for v in spec.dissipation_rates) + " cm-1")
    lines.append("deph_rates = " + " ".join(f"{v:.12g}" for v in spec.dephasing_rates) + " cm-1")
    lines.append(f"sink_rate = {spec.sink_rate:.12g} cm-1")
    lines.append(f"preferred_site = {spec.preferred_site}")
    return "\n".join(lines) + "\n"


def network_from_config(text_or_parser) -> NetworkSpec:
    """Parse a NetworkSpec from INI text or a pre-loaded ConfigParser."""
    if isinstance(text_or_parser, configparser.ConfigParser):
        cp = text_or_parser
    else:
        cp = configparser.ConfigParser()
        try:
            cp.read_file(io.StringIO(text_or_parser))
        except configparser.Error as exc:
            raise ConfigError(f"config parse error: {exc}")
    if not cp.has_section("network"):
        raise ConfigError("missing [network] section")
    sec = cp["network"]
    try:
        n = int(sec["n_sites"])
    except (KeyError, ValueError):
        raise ConfigError("[network] n_sites: missing or not an integer")
    for key in ("hamiltonian", "diss_rates", "deph_rates", "sink_rate", "preferred_site"):
        if key not in sec:
            raise ConfigError(f"[network] missing key '{key}'")
    ham_parts = sec["hamiltonian"].split()
    if ham_parts and ham_parts[-1] in _RATE_UNITS:
        if ham_parts[-1] != "cm-1":
            raise ConfigError("[network] hamiltonian: only cm-1 entries are supported")
        ham_parts = ham_parts[:-1]
    try:
        ham = np.array([float(p) for p in ham_parts])
    except ValueError as exc:
        raise ConfigError(f"[network] hamiltonian: {exc}")
    if ham.size != n * n:
        raise ConfigError(f"[network] hamiltonian: expected {n * n} entries, got {ham.size}")
    diss = _parse_rate_list(sec["diss_rates"], "diss_rates", n)
    deph = _parse_rate_list(sec["deph_rates"], "deph_rates", n)
    sink = _parse_rate_list(sec["sink_rate"], "sink_rate", 1)[0]
    try:
        preferred = int(sec["preferred_site"])
    except ValueError:
        raise ConfigError("[network] preferred_site: not an integer")
    label = sec.get("label", "")
    try:
        return NetworkSpec(n, ham.reshape(n, n).astype(complex), diss, deph,
                           float(sink), preferred, label)
    except ValueError as exc:
        raise ConfigError(f"[network] invalid spec: {exc}")
