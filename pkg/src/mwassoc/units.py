"""Physical constants and unit conversions.

Everything inside the package works in atomic units (hartree, bohr, electron
mass, hbar = 1). The functions here convert to and from the units used at the
edges: cm^-1 for energies, Hz/kHz/MHz for frequencies, W/cm^2 for
intensities and MHz/sqrt(W/cm^2) for dipole couplings.

The constants are read once from ``data/constants.txt`` (CODATA 2018).
"""

from dataclasses import dataclass
from importlib import resources
import math

import numpy as np

from .errors import InvalidArgumentError


def _read_table(text):
    values = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        name, _, value = line.partition("=")
        values[name.strip()] = float(value)
    return values


@dataclass(frozen=True)
class PhysicalConstants:
    hartree_in_cm1: float
    hartree_in_hz: float
    bohr_in_m: float
    ea0_in_Cm: float
    planck_h: float
    speed_of_light: float
    eps0: float
    atomic_mass_unit_in_electron_masses: float
    atomic_time_in_s: float

    @property
    def hartree_per_cm1(self):
        """Hartree per cm^-1."""
        return 1.0 / self.hartree_in_cm1

    @property
    def hartree_per_hz(self):
        """Hartree per Hz (i.e. h in atomic units of energy)."""
        return 1.0 / self.hartree_in_hz

    @property
    def cm1_per_hz(self):
        # 1 Hz = 1/(100 c) cm^-1
        return 1.0 / (100.0 * self.speed_of_light)

    @property
    def eps0_c(self):
        return self.eps0 * self.speed_of_light

    @property
    def angstrom_in_bohr(self):
        return 1e-10 / self.bohr_in_m

    @property
    def debye_in_ea0(self):
        return 1e-21 / self.speed_of_light / self.ea0_in_Cm


def _load_constants():
    text = resources.files("mwassoc").joinpath("data/constants.txt").read_text()
    return PhysicalConstants(**_read_table(text))


CONSTANTS = _load_constants()

# Field amplitude (V/m) of a travelling wave carrying 1 W/cm^2 = 1e4 W/m^2.
_FIELD_PER_SQRT_WCM2 = math.sqrt(2.0 * 1e4 / CONSTANTS.eps0_c)

# Cyclic Rabi frequency d*E/h in MHz for d = 1 e*a0 and I = 1 W/cm^2.
RABI_MHZ_PER_AU = CONSTANTS.ea0_in_Cm * _FIELD_PER_SQRT_WCM2 / CONSTANTS.planck_h / 1e6


def _check_finite(x):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f"non-finite value in conversion input: {x!r}")
    return arr if arr.ndim else float(arr)


def cm1_to_hartree(x):
    return _check_finite(x) / CONSTANTS.hartree_in_cm1


def hartree_to_cm1(x):
    return _check_finite(x) * CONSTANTS.hartree_in_cm1


def hz_to_cm1(x):
    return _check_finite(x) * CONSTANTS.cm1_per_hz


def cm1_to_hz(x):
    return _check_finite(x) / CONSTANTS.cm1_per_hz


def hz_to_hartree(x):
    return _check_finite(x) / CONSTANTS.hartree_in_hz


def hartree_to_hz(x):
    return _check_finite(x) * CONSTANTS.hartree_in_hz


def khz_to_omega_au(f_khz):
    """Trap angular frequency in atomic units for a cyclic frequency in kHz.

    With hbar = 1 the angular frequency equals the quantum hbar*omega = h*f
    in hartree.
    """
    return hz_to_hartree(np.asarray(f_khz, dtype=float) * 1e3)


def omega_au_to_khz(omega):
    return hartree_to_hz(omega) / 1e3


def dipole_au_to_rabi_units(d):
    """Convert a dipole in e*a0 to a coupling in MHz/sqrt(W/cm^2).

    The Rabi frequency is taken as the cyclic frequency d*E/h, with E the
    field amplitude of a travelling wave of intensity 1 W/cm^2.
    """
    return _check_finite(d) * RABI_MHZ_PER_AU


def rabi_units_to_dipole_au(x):
    return _check_finite(x) / RABI_MHZ_PER_AU


def amu_to_me(m):
    return _check_finite(m) * CONSTANTS.atomic_mass_unit_in_electron_masses


def reduced_mass(m1_amu, m2_amu):
    """Reduced mass in electron masses from two atomic masses in amu."""
    if m1_amu <= 0 or m2_amu <= 0:
        raise InvalidArgumentError("masses must be positive")
    return amu_to_me(m1_amu * m2_amu / (m1_amu + m2_amu))


def trap_length(mu, omega):
    """Harmonic oscillator length sqrt(1/(mu*omega)) in bohr."""
    if mu <= 0 or omega <= 0:
        raise InvalidArgumentError("trap length needs mu > 0 and omega > 0")
    return math.sqrt(1.0 / (mu * omega))
