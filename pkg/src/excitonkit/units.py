"""Unit conversions between spectroscopic wavenumbers and angular rates.

All network parameters (Hamiltonian entries, noise rates) are stored in
cm^-1.  The propagator works in angular frequency units of rad/ps, so that
time is always measured in picoseconds.  The two are related by 2*pi*c with
the speed of light expressed in cm/ps.
"""

# 2*pi*c with c in cm/ps (c = 2.99792458e-2 cm/ps).
CM_TO_RAD_PER_PS = 0.1883651567


def convert_rate(x_cm: float) -> float:
    """Convert an energy or rate in cm^-1 to an angular rate in rad/ps."""
    return CM_TO_RAD_PER_PS * x_cm


def rate_from_per_ps(x_ps: float) -> float:
    """Convert a rate quoted in ps^-1 to the internal cm^-1 unit."""
    return x_ps / CM_TO_RAD_PER_PS
