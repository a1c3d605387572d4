"""Vibrationally averaged dipole matrix elements and derived couplings."""

from dataclasses import dataclass
import cmath
import math

import numpy as np

from .errors import InvalidArgumentError
from .units import dipole_au_to_rabi_units, hartree_to_cm1


@dataclass(frozen=True)
class TransitionRecord:
    initial_id: tuple
    final_id: tuple
    final_binding_cm1: float
    d_au: float
    d_rabi: float
    angular_C: float = 1.0
    initial_binding_cm1: float = float("nan")
    rabi_MHz: float = float("nan")
    two_level_ok: bool = True


@dataclass(frozen=True)
class RamanRecord:
    intermediate_id: tuple
    intermediate_binding_cm1: float
    d1_au: float
    d2_au: float
    product_au: float
    detuning_MHz: float
    linewidth_MHz: float
    d_eff: complex

    @property
    def deff_mag(self):
        return abs(self.d_eff)

    @property
    def deff_phase(self):
        return cmath.phase(self.d_eff)


def _dipole_values(d, R):
    if hasattr(d, "evaluate"):
        return d.evaluate(R)
    return np.asarray(d(R), dtype=float)


def _same_grid(a, b):
    if a.grid is b.grid:
        return True
    if a.grid is None or b.grid is None:
        return len(a.psi) == len(b.psi)
    return a.grid.n == b.grid.n and np.array_equal(a.grid.nodes, b.grid.nodes)


def signed_dipole(initial, final, d, grid):
    """Signed radial integral of u_f * d(R) * u_i with the grid weights."""
    if not _same_grid(initial, final) or len(initial.psi) != grid.n:
        raise InvalidArgumentError("initial and final states must live on the same grid")
    f = initial.psi * final.psi
    return float(np.dot(grid.weights, f * _dipole_values(d, grid.nodes)))


def transition_dipole(initial, final, d, grid):
    """|<final| d(R) |initial>| in e*a0 with the angular factor set to 1.

    ``d`` is a :class:`~mwassoc.potentials.DipoleCurve` or any callable of R.
    """
    return abs(signed_dipole(initial, final, d, grid))


def expectation(state, f, grid):
    """<state| f(R) |state> by grid quadrature."""
    return float(np.dot(grid.weights, state.psi**2 * _dipole_values(f, grid.nodes)))


def make_record(initial, final, d_au, angular_C=1.0, intensity=None, trap_freq_MHz=None):
    d_rabi = float(dipole_au_to_rabi_units(d_au)) * angular_C
    rabi = two_level = None
    if intensity is not None:
        rabi = rabi_frequency(d_rabi, intensity)
        two_level = two_level_ok(rabi, trap_freq_MHz) if trap_freq_MHz is not None else True
    return TransitionRecord(
        initial_id=initial.ident,
        final_id=final.ident,
        final_binding_cm1=float(hartree_to_cm1(final.binding_energy)),
        d_au=float(d_au),
        d_rabi=d_rabi,
        angular_C=angular_C,
        initial_binding_cm1=float(hartree_to_cm1(initial.binding_energy)),
        rabi_MHz=float("nan") if rabi is None else rabi,
        two_level_ok=True if two_level is None else two_level,
    )


def rabi_frequency(d_rabi, intensity):
    """Rabi frequency in MHz from a coupling in MHz/sqrt(W/cm^2) and an
    intensity in W/cm^2."""
    if not intensity >= 0:
        raise InvalidArgumentError("intensity must be >= 0")
    return d_rabi * math.sqrt(intensity)


def two_level_ok(omega_rabi, trap_freq):
    """True when the Rabi frequency stays strictly below the trap frequency,
    so higher trap levels are not populated during Rabi flopping."""
    if omega_rabi < 0 or trap_freq < 0:
        raise InvalidArgumentError("frequencies must be >= 0")
    return omega_rabi < trap_freq


def raman_effective_dipole(d1, d2, detuning, linewidth, angular_C=1.0):
    """Two-photon coupling C' * d1 * d2 / (detuning + i*linewidth/2)."""
    if linewidth < 0:
        raise InvalidArgumentError("linewidth must be >= 0")
    denom = complex(detuning, linewidth / 2.0)
    if denom == 0:
        raise InvalidArgumentError("detuning and linewidth are both zero: effective dipole is singular")
    return angular_C * d1 * d2 / denom
