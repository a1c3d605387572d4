"""Bound states of a radial channel on a mapped finite-difference grid.

The grid is uniform in a mapped coordinate ``x(R) = integral of rho(R) dR``
where ``rho`` is the local wavenumber at a reference energy, so nodes crowd
into the deep inner well and thin out in the long-range and trap regions.
The second derivative uses the three-point formula on the non-uniform nodes,
symmetrized with the trapezoid weights, which yields a symmetric tridiagonal
matrix. Dirichlet conditions hold at both ends.
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.interpolate import CubicSpline
from scipy.linalg import eigh_tridiagonal
from scipy.optimize import brentq

from .errors import ConfigurationError, InvalidArgumentError, NumericalError
from .potentials import effective_potential

MIN_POINTS = 200
TRAP_LENGTHS_MIN = 6.0
TRAP_LENGTHS_DEFAULT = 8.0
FREE_FLOOR = 1e-9  # hartree; density floor without a trap
CLASS_ENERGY = 1e-8  # hartree below threshold for the classification radius
CLASS_DEFAULT = 100.0  # bohr
NODE_CUTOFF = 1e-12
_FINE = 40001


@dataclass(frozen=True, eq=False)
class RadialGrid:
    nodes: np.ndarray
    weights: np.ndarray
    mapping_desc: dict

    @property
    def n(self):
        return len(self.nodes)

    def integrate(self, f):
        return float(np.dot(self.weights, f))


@dataclass(frozen=True, eq=False)
class BoundState:
    energy: float
    binding_energy: float
    psi: np.ndarray = field(repr=False)
    v: int
    ell: int
    classification: str
    mean_R: float
    label: str = ""
    index: int = 0
    grid: RadialGrid = field(default=None, repr=False)

    @property
    def ident(self):
        return (self.label, self.v, self.ell)


def _trapezoid_weights(R):
    d = np.diff(R)
    w = np.empty_like(R)
    w[0] = d[0] / 2
    w[-1] = d[-1] / 2
    w[1:-1] = (d[:-1] + d[1:]) / 2
    return w


def _reference_energy(channel):
    return channel.curve.asymptote + 5.0 * channel.trap_omega


def _floor_energy(channel):
    return channel.trap_omega if channel.trap_omega > 0 else FREE_FLOOR


def _density(channel, r):
    """Local wavenumber used to place nodes; smooth and strictly positive."""
    e_ref = _reference_energy(channel)
    floor = _floor_energy(channel)
    V = effective_potential(channel, r)
    g = np.sqrt((e_ref - V) ** 2 + floor**2)
    cap = e_ref - V.min() + floor
    return np.sqrt(2.0 * channel.mu * g * cap / (g + cap))


def wkb_decay_radius(channel, e_ref, decay=30.0, r_floor=1e-5):
    """Radius inside the repulsive wall where a state at ``e_ref`` has decayed
    by ``exp(-decay)`` in amplitude."""
    r_probe = np.geomspace(r_floor, 1e4, 20001)
    V = effective_potential(channel, r_probe)
    allowed = np.nonzero(V < e_ref)[0]
    if len(allowed) == 0:
        return r_floor
    i0 = allowed[0]
    kappa = np.sqrt(2.0 * channel.mu * np.clip(V[: i0 + 1] - e_ref, 0.0, None))
    phase = cumulative_trapezoid(kappa[::-1], r_probe[: i0 + 1][::-1], initial=0.0)
    phase = -phase[::-1]
    inside = np.nonzero(phase >= decay)[0]
    return float(r_probe[inside[-1]]) if len(inside) else r_floor


def default_r_min(channel):
    return wkb_decay_radius(channel, _reference_energy(channel))


def default_r_max(channel):
    if channel.trap_omega > 0:
        return TRAP_LENGTHS_DEFAULT * channel.trap_length
    # weakest level kept accurate: binding CLASS_ENERGY
    e = channel.curve.asymptote - CLASS_ENERGY
    r_tp = outer_turning_point(channel.curve, e) or CLASS_DEFAULT
    kappa = math.sqrt(2.0 * channel.mu * CLASS_ENERGY)
    return r_tp + 30.0 / kappa


def build_grid(channel, r_min=None, r_max=None, n=20000, extra_channels=()):
    """Mapped grid for ``channel``; ``extra_channels`` add their densities so
    that one grid can hold the states of several channels."""
    channels = (channel,) + tuple(extra_channels)
    if r_min is None:
        r_min = min(default_r_min(c) for c in channels)
    if r_max is None:
        r_max = max(default_r_max(c) for c in channels)
    if not (0 < r_min < r_max) or not math.isfinite(r_max):
        raise InvalidArgumentError(f"need 0 < R_min < R_max, got R_min={r_min}, R_max={r_max}")
    if int(n) != n or n < MIN_POINTS:
        raise InvalidArgumentError(f"grid needs at least {MIN_POINTS} points, got {n}")
    n = int(n)
    for c in channels:
        if c.trap_omega > 0 and r_max < TRAP_LENGTHS_MIN * c.trap_length:
            raise ConfigurationError(
                f"grid adequacy: R_max={r_max:.6g} bohr is below {TRAP_LENGTHS_MIN:g} trap lengths "
                f"({TRAP_LENGTHS_MIN * c.trap_length:.6g} bohr) for trap omega={c.trap_omega:.6g} au"
            )
    r = np.geomspace(r_min, r_max, _FINE)
    rho = np.sqrt(sum(_density(c, r) ** 2 for c in channels))
    if not np.all(np.isfinite(rho)):
        bad = r[~np.isfinite(rho)][0]
        raise NumericalError(f"non-finite mapping density at R={bad:.6g} bohr")
    x = cumulative_trapezoid(rho, r, initial=0.0)
    inverse = CubicSpline(x, r)
    nodes = inverse(np.linspace(0.0, x[-1], n))
    nodes[0], nodes[-1] = r_min, r_max
    if np.any(np.diff(nodes) <= 0):
        raise NumericalError("mapped grid is not monotone; increase the number of points")
    desc = {
        "kind": "local-wavenumber",
        "R_min": float(r_min),
        "R_max": float(r_max),
        "N": n,
        "phase_span": float(x[-1]),
        "channels": [
            {"label": c.curve.label, "ell": c.ell, "trap_omega": c.trap_omega, "mu": c.mu}
            for c in channels
        ],
    }
    return RadialGrid(nodes, _trapezoid_weights(nodes), desc)


def outer_turning_point(curve, energy, r_hi=1e4):
    """Outermost R with V(R) = energy on a curve, or None if V > energy everywhere."""
    r = np.geomspace(0.5, r_hi, 40001)
    below = np.nonzero(curve.evaluate(r) < energy)[0]
    if len(below) == 0:
        return None
    i = below[-1]
    if i == len(r) - 1:
        return None
    return brentq(lambda x: curve.evaluate(x) - energy, r[i], r[i + 1], xtol=1e-12)


def classification_radius(curve):
    r_tp = outer_turning_point(curve, curve.asymptote - CLASS_ENERGY)
    return 3.0 * r_tp if r_tp is not None else CLASS_DEFAULT


def count_nodes(state, cutoff=NODE_CUTOFF):
    """Interior sign changes of u, ignoring samples below ``cutoff*max|u|``."""
    u = np.asarray(state.psi if hasattr(state, "psi") else state)
    keep = u[np.abs(u) >= cutoff * np.abs(u).max()]
    return int(np.count_nonzero(np.signbit(keep[1:]) != np.signbit(keep[:-1])))


def mean_radius(state, grid):
    return grid.integrate(grid.nodes * state.psi**2)


def _hamiltonian(channel, grid):
    R = grid.nodes
    V = effective_potential(channel, R[1:-1]) - channel.curve.asymptote
    if not np.all(np.isfinite(V)):
        bad = R[1:-1][~np.isfinite(V)][0]
        raise NumericalError(f"non-finite potential at R={bad:.6g} bohr")
    d = np.diff(R)
    w = grid.weights[1:-1]
    k = 1.0 / (2.0 * channel.mu)
    diag = V + k * (1.0 / d[:-1] + 1.0 / d[1:]) / w
    off = -k / (d[1:-1] * np.sqrt(w[:-1] * w[1:]))
    if not (np.all(np.isfinite(diag)) and np.all(np.isfinite(off))):
        raise NumericalError("non-finite Hamiltonian entries")
    return diag, off, V


def _rayleigh(u, Vw, d, mu):
    """<u|H|u> with the kinetic term as a sum of squares (no cancellation).

    ``Vw`` holds weight times potential on every node.
    """
    kin = np.sum(np.diff(u) ** 2 / d) / (2.0 * mu)
    return kin + np.dot(Vw, u * u)


def solve_bound_states(channel, grid, e_max=None, max_states=None, label=None):
    """All eigenstates of ``channel`` on ``grid`` with energy below ``e_max``.

    ``e_max`` defaults to the trap-free asymptote. States are returned sorted
    by energy, normalized to ``sum(w*u**2) = 1``, with the innermost lobe
    positive.
    """
    if e_max is None:
        e_max = channel.curve.asymptote
    asym = channel.curve.asymptote
    diag, off, V = _hamiltonian(channel, grid)
    lower = float(V.min()) - 1e-12
    upper = e_max - asym
    if upper <= lower:
        return []
    try:
        evals, vecs = eigh_tridiagonal(diag, off, select="v", select_range=(lower, upper))
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"tridiagonal eigensolver failed: {exc}") from None
    if max_states is not None:
        evals, vecs = evals[:max_states], vecs[:, :max_states]

    w = grid.weights
    d = np.diff(grid.nodes)
    Vfull = np.concatenate(([0.0], V * grid.weights[1:-1], [0.0]))
    r_class = classification_radius(channel.curve)
    label = channel.curve.label if label is None else label
    out = []
    for i in range(len(evals)):
        u = np.zeros(grid.n)
        u[1:-1] = vecs[:, i] / np.sqrt(w[1:-1])
        u /= math.sqrt(np.dot(w, u * u))
        big = np.nonzero(np.abs(u) > 1e-3 * np.abs(u).max())[0][0]
        if u[big] < 0:
            u = -u
        energy = _rayleigh(u, Vfull, d, channel.mu) + asym
        mR = float(np.dot(w, grid.nodes * u * u))
        out.append(
            BoundState(
                energy=float(energy),
                binding_energy=float(energy - asym),
                psi=u,
                v=count_nodes(u),
                ell=channel.ell,
                classification="trap_dominated" if mR > r_class else "molecular",
                mean_R=mR,
                label=label,
                index=i,
                grid=grid,
            )
        )
    out.sort(key=lambda s: s.energy)
    return out


@dataclass(frozen=True)
class ConvergenceReport:
    energies: np.ndarray
    refined: np.ndarray
    drift: np.ndarray
    max_rel_drift: float
    base_desc: dict
    refined_desc: dict


def convergence_check(channel, e_target, n=20000, r_min=None, r_max=None):
    """Re-solve with N and R_max doubled and report the relative energy drift
    of every state below ``e_target``."""
    g1 = build_grid(channel, r_min, r_max, n)
    g2 = build_grid(channel, g1.mapping_desc["R_min"], 2.0 * g1.mapping_desc["R_max"], 2 * n)
    s1 = solve_bound_states(channel, g1, e_target)
    s2 = solve_bound_states(channel, g2, e_target)
    m = min(len(s1), len(s2))
    if m == 0:
        raise NumericalError("no states below e_target to compare")
    e1 = np.array([s.energy for s in s1[:m]])
    e2 = np.array([s.energy for s in s2[:m]])
    ref = np.abs(e1 - channel.curve.asymptote)
    drift = np.abs(e2 - e1) / np.where(ref > 0, ref, 1.0)
    return ConvergenceReport(e1, e2, drift, float(drift.max()), g1.mapping_desc, g2.mapping_desc)
