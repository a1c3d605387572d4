"""The association studies: microwave, Feshbach-molecule, Raman and the
trap-frequency scaling of the microwave dipole.

Conventions shared by every scan:

* the initial trap level is solved with the harmonic trap, all molecular
  levels without it; binding energies are relative to the trap-free
  asymptote of their own curve;
* all states of one scan share a single grid, so matrix elements are plain
  weighted sums;
* records come back sorted by binding energy, deepest first.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
import os

import numpy as np

from .errors import ClassificationError, ConfigurationError, InvalidArgumentError
from .gridsolve import build_grid, solve_bound_states
from .potentials import ChannelSpec
from .transitions import RamanRecord, make_record, raman_effective_dipole, transition_dipole
from .units import dipole_au_to_rabi_units, hartree_to_cm1, khz_to_omega_au, reduced_mass

WORKERS_ENV = "MWASSOC_WORKERS"
THRESHOLD_WINDOW_CM1 = (0.1, 10.0)


@dataclass(frozen=True)
class ExcitedState:
    """An intermediate electronic state with its transition dipoles to the
    two lower states."""

    curve: object
    dipole_a: object = None
    dipole_X: object = None

    @property
    def label(self):
        return self.curve.label


@dataclass(frozen=True)
class SystemConfig:
    masses_amu: tuple
    potentials: dict
    dipoles: dict
    excited: tuple = ()
    trap_kHz: float = 200.0
    intensity_Wcm2: float = 1e4
    angular_C: float = 1.0
    points: int = 60000
    r_min: float = None
    r_max: float = None

    def __post_init__(self):
        if len(self.masses_amu) != 2:
            raise ConfigurationError("masses_amu needs exactly two masses")
        for key in self.dipoles:
            if key not in self.potentials:
                raise ConfigurationError(f"dipole for unknown state {key!r}")
        if self.trap_kHz < 0:
            raise ConfigurationError("trap_kHz must be >= 0")
        if self.intensity_Wcm2 < 0:
            raise ConfigurationError("intensity_Wcm2 must be >= 0")

    @property
    def mu(self):
        return reduced_mass(*self.masses_amu)

    @property
    def trap_omega(self):
        return float(khz_to_omega_au(self.trap_kHz)) if self.trap_kHz > 0 else 0.0

    @property
    def trap_freq_MHz(self):
        return self.trap_kHz / 1e3

    def curve(self, state):
        try:
            return self.potentials[state]
        except KeyError:
            raise ConfigurationError(f"no potential for state {state!r}") from None

    def dipole(self, state):
        try:
            return self.dipoles[state]
        except KeyError:
            raise ConfigurationError(f"no permanent dipole for state {state!r}") from None

    def channel(self, state, ell, trap=False):
        return ChannelSpec(self.curve(state), self.mu, ell, self.trap_omega if trap else 0.0)

    def grid_for(self, channel, extra=()):
        return build_grid(channel, self.r_min, self.r_max, self.points, extra_channels=extra)


def _molecular(states):
    return [s for s in states if s.classification == "molecular"]


def _sorted(records):
    return sorted(records, key=lambda r: (r.final_binding_cm1, r.final_id))


@dataclass(frozen=True)
class MicrowaveStates:
    grid: object
    initial: object
    finals: list


def microwave_states(sys, state="a"):
    """Grid, lowest trap level (l=0, trap on) and molecular l=1 levels (trap off)."""
    if not sys.trap_kHz > 0:
        raise InvalidArgumentError("microwave scans need trap_kHz > 0")
    ch_trap = sys.channel(state, 0, trap=True)
    ch_final = sys.channel(state, 1, trap=False)
    grid = sys.grid_for(ch_trap)
    asym = ch_trap.curve.asymptote
    trap_levels = [
        s
        for s in solve_bound_states(ch_trap, grid, e_max=asym + 6.0 * sys.trap_omega)
        if s.classification == "trap_dominated"
    ]
    if not trap_levels:
        raise ClassificationError(f"no trap-dominated l=0 level found for state {state!r}")
    finals = _molecular(solve_bound_states(ch_final, grid))
    return MicrowaveStates(grid, trap_levels[0], finals)


def scan_microwave(sys, state="a", window_cm1=None, states=None):
    """One record per molecular l=1 level: |<v,l=1| d |trap,l=0>|.

    ``window_cm1 = (lo, hi)`` keeps only finals with lo < E_b < hi (cm^-1).
    ``states`` reuses a :class:`MicrowaveStates` computed earlier.
    """
    ms = states or microwave_states(sys, state)
    dip = sys.dipole(state)
    records = []
    for f in ms.finals:
        eb = hartree_to_cm1(f.binding_energy)
        if window_cm1 is not None and not (window_cm1[0] < eb < window_cm1[1]):
            continue
        d = transition_dipole(ms.initial, f, dip, ms.grid)
        records.append(
            make_record(ms.initial, f, d, sys.angular_C, sys.intensity_Wcm2, sys.trap_freq_MHz)
        )
    return _sorted(records)


@dataclass(frozen=True)
class FeshbachStates:
    grid: object
    initial: object
    finals: list
    s_levels: list


def feshbach_states(sys, from_top=0, state="a"):
    if from_top not in (0, 1):
        raise InvalidArgumentError("from_top must be 0 (last bound level) or 1 (second from last)")
    ch0 = sys.channel(state, 0)
    ch1 = sys.channel(state, 1)
    sizing = sys.channel(state, 0, trap=True) if sys.trap_kHz > 0 else ch0
    grid = sys.grid_for(sizing)
    s_levels = _molecular(solve_bound_states(ch0, grid))
    if len(s_levels) < 2:
        raise ClassificationError(f"state {state!r} supports fewer than two bound l=0 levels")
    initial = s_levels[-1 - from_top]
    finals = [s for s in _molecular(solve_bound_states(ch1, grid)) if s.energy < initial.energy]
    return FeshbachStates(grid, initial, finals, s_levels)


def scan_feshbach(sys, from_top=0, state="a", states=None):
    """Transfer from the last (``from_top=0``) or second-to-last l=0 level
    to every more deeply bound l=1 level, trap off."""
    fs = states or feshbach_states(sys, from_top, state)
    dip = sys.dipole(state)
    records = [
        make_record(
            fs.initial,
            f,
            transition_dipole(fs.initial, f, dip, fs.grid),
            sys.angular_C,
            sys.intensity_Wcm2,
            sys.trap_freq_MHz if sys.trap_kHz > 0 else None,
        )
        for f in fs.finals
    ]
    return _sorted(records)


def _excited(sys, labels):
    available = {e.label: e for e in sys.excited}
    if labels is None:
        chosen = list(sys.excited)
    else:
        missing = [l for l in labels if l not in available]
        if missing:
            raise ConfigurationError(f"unknown intermediate state(s): {', '.join(missing)}")
        chosen = [available[l] for l in labels]
    if not chosen:
        raise ConfigurationError("no intermediate (excited) states configured")
    for e in chosen:
        if e.dipole_a is None or e.dipole_X is None:
            leg = "a" if e.dipole_a is None else "X"
            raise ConfigurationError(f"missing transition dipole between {leg!r} and {e.label!r}")
    return chosen


def _pick(levels, v, what):
    for s in levels:
        if s.v == v:
            return s
    raise InvalidArgumentError(f"{what}: no bound level with v={v}")


def scan_raman(
    sys,
    detuning_MHz,
    linewidth_MHz,
    initial_v=None,
    final_v=0,
    intermediates=None,
    initial_state="a",
    final_state="X",
):
    """Two-photon pathway (initial_state, v, l=1) -> intermediate -> (final_state, v, l=1).

    Intermediate levels are solved with l=1 and no rotational structure.
    ``initial_v=None`` picks the level with the largest microwave dipole
    from the lowest trap level.
    """
    chosen = _excited(sys, intermediates)
    raman_effective_dipole(1.0, 1.0, detuning_MHz, linewidth_MHz)  # validates the pair
    if initial_v is None:
        mw = scan_microwave(sys, initial_state)
        initial_v = max(mw, key=lambda r: r.d_au).final_id[1]

    ch_i = sys.channel(initial_state, 1)
    ch_f = sys.channel(final_state, 1)
    ch_x = [ChannelSpec(e.curve, sys.mu, 1, 0.0) for e in chosen]
    grid = sys.grid_for(ch_i, extra=[ch_f] + ch_x)
    initial = _pick(_molecular(solve_bound_states(ch_i, grid)), initial_v, f"initial state {initial_state!r}")
    final = _pick(
        _molecular(solve_bound_states(ch_f, grid, max_states=final_v + 1)), final_v, f"final state {final_state!r}"
    )

    records = []
    for e, ch in zip(chosen, ch_x):
        for lvl in _molecular(solve_bound_states(ch, grid)):
            d1 = transition_dipole(initial, lvl, e.dipole_a, grid)
            d2 = transition_dipole(lvl, final, e.dipole_X, grid)
            deff = raman_effective_dipole(
                float(dipole_au_to_rabi_units(d1)),
                float(dipole_au_to_rabi_units(d2)),
                detuning_MHz,
                linewidth_MHz,
                sys.angular_C,
            )
            records.append(
                RamanRecord(
                    intermediate_id=lvl.ident,
                    intermediate_binding_cm1=float(hartree_to_cm1(lvl.binding_energy)),
                    d1_au=d1,
                    d2_au=d2,
                    product_au=d1 * d2,
                    detuning_MHz=detuning_MHz,
                    linewidth_MHz=linewidth_MHz,
                    d_eff=deff,
                )
            )
    return sorted(records, key=lambda r: (r.intermediate_binding_cm1, r.intermediate_id))


@dataclass(frozen=True)
class ScalingResult:
    freqs_kHz: np.ndarray
    d_au: np.ndarray
    slope: float
    intercept: float
    residuals: np.ndarray
    final_v: int
    final_binding_cm1: float

    def ratio(self, f_lo, f_hi):
        """d(f_hi)/d(f_lo) for two frequencies that were part of the study."""
        lookup = dict(zip(self.freqs_kHz.tolist(), self.d_au.tolist()))
        return lookup[f_hi] / lookup[f_lo]


def _workers():
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def _scaling_point(args):
    sys, state, final_v = args
    ms = microwave_states(sys, state)
    final = _pick(ms.finals, final_v, f"scaling final state at {sys.trap_kHz} kHz")
    d = transition_dipole(ms.initial, final, sys.dipole(state), ms.grid)
    return d, hartree_to_cm1(final.binding_energy)


def scaling_study(sys, trap_freqs_kHz, target_binding_cm1=-1.0, state="a", final_v=None):
    """Fit log|d| against log(omega) for a fixed weakly bound l=1 final level.

    The final level is the one closest to ``target_binding_cm1`` (or
    ``final_v``); its binding must lie in the threshold window 0.1-10 cm^-1.
    """
    freqs = np.asarray(sorted(trap_freqs_kHz), dtype=float)
    if np.any(freqs <= 0) or not np.all(np.isfinite(freqs)):
        raise InvalidArgumentError("trap frequencies must be positive")
    if len(np.unique(freqs)) < 4:
        raise InvalidArgumentError("scaling study needs at least 4 distinct trap frequencies")
    if freqs[-1] / freqs[0] < 10.0:
        raise InvalidArgumentError("trap frequencies must span at least one decade")

    if final_v is None:
        ms = microwave_states(replace(sys, trap_kHz=float(freqs[0])), state)
        best = min(ms.finals, key=lambda s: abs(hartree_to_cm1(s.binding_energy) - target_binding_cm1))
        final_v = best.v
    jobs = [(replace(sys, trap_kHz=float(f)), state, final_v) for f in freqs]
    n = min(_workers(), len(jobs))
    if n > 1:
        with ProcessPoolExecutor(max_workers=n) as pool:
            results = list(pool.map(_scaling_point, jobs))
    else:
        results = [_scaling_point(j) for j in jobs]
    d = np.array([r[0] for r in results])
    eb = float(results[0][1])
    lo, hi = THRESHOLD_WINDOW_CM1
    if not lo <= abs(eb) <= hi:
        raise InvalidArgumentError(
            f"final level v={final_v} (E_b={eb:.6g} cm^-1) is outside the threshold window {lo}-{hi} cm^-1"
        )
    if np.any(d <= 0):
        raise InvalidArgumentError("a transition dipole vanished; cannot fit a power law")
    x = np.log(freqs)
    y = np.log(d)
    slope, intercept = np.polyfit(x, y, 1)
    residuals = y - (slope * x + intercept)
    return ScalingResult(freqs, d, float(slope), float(intercept), residuals, int(final_v), eb)
