"""Diatomic potential curves, dipole curves and radial channels.

A tabulated potential is evaluated in three zones: an exponential wall
``asymptote + A*exp(-b*R)`` inside the first tabulated point, a cubic
spline over the table, and the dispersion tail
``asymptote - c6/R**6 - c8/R**8`` from the last tabulated point outwards.
The spline is blended into the tail over the last two tabulated intervals
with a C1 smoothstep, so the stitched curve is C1 at both zone boundaries.

File formats are described in ``docs/formats.md``.
"""

from dataclasses import dataclass
import math
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import InvalidArgumentError, ParseError
from .units import CONSTANTS

MIN_POINTS = 8
MIN_DIPOLE_POINTS = 4


def _check_radius(R):
    R = np.asarray(R, dtype=float)
    if np.any(~np.isfinite(R)) or np.any(R <= 0):
        raise InvalidArgumentError("R must be finite and > 0")
    return R


def _smoothstep(t):
    t = np.clip(t, 0.0, 1.0)
    return t * t * (3.0 - 2.0 * t)


class PotentialCurve:
    """An electronic potential V(R) in hartree, R in bohr.

    Use :func:`make_morse`, :func:`make_flat` or :func:`load_tabulated`
    rather than constructing one directly.
    """

    def __init__(self, label, asymptote, c6=0.0, c8=0.0, points=None, morse=None):
        self.label = label
        self.asymptote = float(asymptote)
        self.c6 = float(c6)
        self.c8 = float(c8)
        self.morse = morse
        self.points = None
        self.wall_params = None
        self.zone_bounds = None
        self._spline = None
        if points is not None:
            R, V = (np.array(a, dtype=float) for a in points)
            self.points = (R, V)
            self._build_zones(R, V)

    @property
    def form(self):
        if self.morse is not None:
            return "morse"
        if self.points is not None:
            return "tabulated"
        return "flat"

    def _build_zones(self, R, V):
        y0, y1 = V[0] - self.asymptote, V[1] - self.asymptote
        if not (y0 > y1 > 0):
            raise InvalidArgumentError(
                "the two innermost points must be repulsive (above the asymptote) "
                "and decreasing for the exponential wall fit"
            )
        b = math.log(y0 / y1) / (R[1] - R[0])
        A = y0 * math.exp(b * R[0])
        self.wall_params = (A, b)
        self.zone_bounds = (R[0], R[-1])
        # not-a-knot inside; the wall is blended in over the first interval
        # so its secant slope error stays there instead of leaking inward
        self._spline = CubicSpline(R, V, bc_type=("not-a-knot", (2, 0.0)))
        self._wall_end = R[1]
        self._blend_start = R[-3]

    def tail(self, R):
        R = np.asarray(R, dtype=float)
        return self.asymptote - self.c6 / R**6 - self.c8 / R**8

    def evaluate(self, R):
        R = _check_radius(R)
        if self.morse is not None:
            De, Re, a = self.morse
            return self.asymptote + De * ((1.0 - np.exp(-a * (R - Re))) ** 2 - 1.0)
        if self.points is None:
            return np.full_like(R, self.asymptote) if R.ndim else self.asymptote
        scalar = R.ndim == 0
        R = np.atleast_1d(R)
        out = np.empty_like(R)
        r_in, r_out = self.zone_bounds
        A, b = self.wall_params
        wall = R < r_in
        out[wall] = self.asymptote + A * np.exp(-b * R[wall])
        outer = R >= r_out
        out[outer] = self.tail(R[outer])
        mid = ~(wall | outer)
        Rm = R[mid]
        vs = self._spline(Rm)
        s = _smoothstep((Rm - self._blend_start) / (r_out - self._blend_start))
        vs = (1.0 - s) * vs + s * self.tail(Rm)
        w = _smoothstep((Rm - r_in) / (self._wall_end - r_in))
        out[mid] = (1.0 - w) * (self.asymptote + A * np.exp(-b * Rm)) + w * vs
        return float(out[0]) if scalar else out

    __call__ = evaluate

    def __repr__(self):
        return f"PotentialCurve(label={self.label!r}, form={self.form!r}, asymptote={self.asymptote!r})"


def make_morse(De, Re, a, asymptote=0.0, label="morse"):
    """Analytic Morse curve ``asymptote + De*((1 - exp(-a(R-Re)))**2 - 1)``."""
    if not (De > 0 and Re > 0 and a > 0):
        raise InvalidArgumentError("Morse parameters De, Re, a must all be positive")
    return PotentialCurve(label, asymptote, morse=(float(De), float(Re), float(a)))


def make_flat(asymptote=0.0, label="flat"):
    """A curve that is constant everywhere; with a trap this is a pure oscillator."""
    return PotentialCurve(label, asymptote)


def evaluate(curve, R):
    return curve.evaluate(R)


@dataclass(frozen=True)
class ChannelSpec:
    """One radial eigenproblem: reduced mass (electron masses), partial wave,
    trap angular frequency (atomic units, 0 for no trap) and potential."""

    curve: PotentialCurve
    mu: float
    ell: int = 0
    trap_omega: float = 0.0

    def __post_init__(self):
        if not self.mu > 0:
            raise InvalidArgumentError("reduced mass must be positive")
        if int(self.ell) != self.ell or self.ell < 0:
            raise InvalidArgumentError("ell must be a non-negative integer")
        if not self.trap_omega >= 0:
            raise InvalidArgumentError("trap_omega must be >= 0")

    @property
    def trap_length(self):
        if self.trap_omega == 0:
            return math.inf
        return math.sqrt(1.0 / (self.mu * self.trap_omega))

    def with_(self, **changes):
        fields = dict(curve=self.curve, mu=self.mu, ell=self.ell, trap_omega=self.trap_omega)
        fields.update(changes)
        return ChannelSpec(**fields)


def effective_potential(channel, R):
    """Curve plus centrifugal term plus isotropic harmonic trap (hbar = 1)."""
    R = _check_radius(R)
    mu = channel.mu
    v = channel.curve.evaluate(R)
    if channel.ell:
        v = v + channel.ell * (channel.ell + 1) / (2.0 * mu * R**2)
    if channel.trap_omega:
        v = v + 0.5 * mu * channel.trap_omega**2 * R**2
    return v


class DipoleCurve:
    """Dipole function d(R) in e*a0.

    Inside the table a natural cubic spline is used. Below the first point the
    value is held constant; beyond the last point it decays to zero as
    ``d_last * (R_last/R)**tail_power``.
    """

    def __init__(self, points, kind="permanent", couples=("", ""), label="", tail_power=7.0):
        if kind not in ("permanent", "transition"):
            raise InvalidArgumentError(f"unknown dipole kind {kind!r}")
        R, d = (np.array(a, dtype=float) for a in points)
        if len(R) < MIN_DIPOLE_POINTS:
            raise InvalidArgumentError(f"a dipole curve needs at least {MIN_DIPOLE_POINTS} points")
        if np.any(np.diff(R) <= 0):
            raise InvalidArgumentError("dipole R values must be strictly increasing")
        if tail_power <= 0:
            raise InvalidArgumentError("tail_power must be positive")
        self.points = (R, d)
        self.kind = kind
        self.couples = tuple(couples)
        self.label = label or "-".join(c for c in self.couples if c)
        self.tail_power = float(tail_power)
        self._spline = CubicSpline(R, d, bc_type="natural")

    def evaluate(self, R):
        R = _check_radius(R)
        scalar = R.ndim == 0
        R = np.atleast_1d(R)
        Rt, dt = self.points
        out = np.empty_like(R)
        inner = R < Rt[0]
        outer = R > Rt[-1]
        mid = ~(inner | outer)
        out[inner] = dt[0]
        out[outer] = dt[-1] * (Rt[-1] / R[outer]) ** self.tail_power
        out[mid] = self._spline(R[mid])
        return float(out[0]) if scalar else out

    __call__ = evaluate

    def scaled(self, k):
        """Copy with every tabulated value multiplied by ``k``."""
        R, d = self.points
        return DipoleCurve((R, k * d), self.kind, self.couples, self.label, self.tail_power)

    def __repr__(self):
        return f"DipoleCurve(label={self.label!r}, kind={self.kind!r}, n={len(self.points[0])})"


def evaluate_dipole(curve, R):
    return curve.evaluate(R)


# --------------------------------------------------------------------------
# file formats

_R_UNITS = {"bohr": 1.0, "angstrom": CONSTANTS.angstrom_in_bohr}
_V_UNITS = {"hartree": 1.0, "cm-1": 1.0 / CONSTANTS.hartree_in_cm1}
_D_UNITS = {"au": 1.0, "debye": CONSTANTS.debye_in_ea0}


def _split_file(text, source):
    """Return (header dict with line numbers, data rows with line numbers)."""
    header = {}
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" in line:
            if rows:
                raise ParseError("header line after data", lineno, source)
            key, _, value = line.partition("=")
            key = key.strip()
            if key in header:
                raise ParseError(f"duplicate header field {key!r}", lineno, source)
            header[key] = (value.strip(), lineno)
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"expected two columns, got {len(parts)}", lineno, source)
        try:
            rows.append((float(parts[0]), float(parts[1]), lineno))
        except ValueError:
            raise ParseError(f"cannot parse numbers in {line!r}", lineno, source) from None
    return header, rows


def _data_line(rows, text):
    return rows[0][2] if rows else len(text.splitlines()) + 1


def _require(header, key, rows, text, source):
    if key not in header:
        raise ParseError(f"missing header field {key!r}", _data_line(rows, text), source)
    return header[key]


def _float_field(header, key, rows, text, source, default=None):
    if key not in header:
        if default is not None:
            return default, None
        _require(header, key, rows, text, source)
    value, lineno = header[key]
    try:
        x = float(value)
    except ValueError:
        raise ParseError(f"{key} is not a number: {value!r}", lineno, source) from None
    if not math.isfinite(x):
        raise ParseError(f"{key} must be finite", lineno, source)
    return x, lineno


def _unit_field(header, key, table, rows, text, source, default=None):
    if key not in header and default is not None:
        return table[default]
    value, lineno = _require(header, key, rows, text, source)
    if value not in table:
        raise ParseError(f"{key} must be one of {sorted(table)}, got {value!r}", lineno, source)
    return table[value]


def _check_columns(rows, source, minimum):
    if len(rows) < minimum:
        line = rows[-1][2] if rows else None
        raise ParseError(f"need at least {minimum} data points, got {len(rows)}", line, source)
    for prev, row in zip(rows, rows[1:]):
        if not row[0] > prev[0]:
            raise ParseError(f"R values must be strictly increasing (R={row[0]!r})", row[2], source)


_POTENTIAL_KEYS = {"label", "form", "unit_R", "unit_V", "asymptote", "c6", "c8", "De", "Re", "a"}
_DIPOLE_KEYS = {"label", "kind", "couples", "unit_R", "unit_d", "tail_power"}


def load_tabulated(source, name=None):
    """Parse potential-file content and return a :class:`PotentialCurve`.

    ``name`` is only used in error messages.
    """
    text = source
    header, rows = _split_file(text, name)
    for key, (_, lineno) in header.items():
        if key not in _POTENTIAL_KEYS:
            raise ParseError(f"unknown header field {key!r}", lineno, name)
    label = _require(header, "label", rows, text, name)[0]
    form = header.get("form", ("tabulated", None))[0]
    if form not in ("tabulated", "morse", "flat"):
        raise ParseError(f"unknown form {form!r}", header["form"][1], name)
    r_unit = _unit_field(header, "unit_R", _R_UNITS, rows, text, name, default="bohr" if form == "flat" else None)
    v_unit = _unit_field(header, "unit_V", _V_UNITS, rows, text, name, default="hartree" if form == "flat" else None)
    asymptote = _float_field(header, "asymptote", rows, text, name)[0] * v_unit

    if form != "tabulated":
        if rows:
            raise ParseError(f"form={form} takes no data lines", rows[0][2], name)
        if form == "flat":
            return make_flat(asymptote, label)
        De, ln = _float_field(header, "De", rows, text, name)
        Re = _float_field(header, "Re", rows, text, name)[0] * r_unit
        a = _float_field(header, "a", rows, text, name)[0] / r_unit
        try:
            return make_morse(De * v_unit, Re, a, asymptote, label)
        except InvalidArgumentError as exc:
            raise ParseError(str(exc), ln, name) from None

    c6, ln6 = _float_field(header, "c6", rows, text, name)
    c8, ln8 = _float_field(header, "c8", rows, text, name, default=0.0)
    if c6 < 0:
        raise ParseError("c6 must be non-negative", ln6, name)
    if c8 < 0:
        raise ParseError("c8 must be non-negative", ln8, name)
    _check_columns(rows, name, MIN_POINTS)
    R = np.array([r[0] for r in rows]) * r_unit
    V = np.array([r[1] for r in rows]) * v_unit
    if R[0] <= 0:
        raise ParseError("R values must be positive", rows[0][2], name)
    try:
        return PotentialCurve(label, asymptote, c6, c8, points=(R, V))
    except InvalidArgumentError as exc:
        raise ParseError(str(exc), rows[0][2], name) from None


def load_dipole(source, name=None):
    """Parse dipole-file content and return a :class:`DipoleCurve`."""
    text = source
    header, rows = _split_file(text, name)
    for key, (_, lineno) in header.items():
        if key not in _DIPOLE_KEYS:
            raise ParseError(f"unknown header field {key!r}", lineno, name)
    kind, kind_line = _require(header, "kind", rows, text, name)
    if kind not in ("permanent", "transition"):
        raise ParseError(f"kind must be permanent or transition, got {kind!r}", kind_line, name)
    couples_raw, couples_line = _require(header, "couples", rows, text, name)
    couples = tuple(c.strip() for c in couples_raw.split(","))
    if len(couples) != 2 or not all(couples):
        raise ParseError("couples must name two states separated by a comma", couples_line, name)
    if kind == "permanent" and couples[0] != couples[1]:
        raise ParseError("a permanent dipole couples a state to itself", couples_line, name)
    r_unit = _unit_field(header, "unit_R", _R_UNITS, rows, text, name)
    d_unit = _unit_field(header, "unit_d", _D_UNITS, rows, text, name, default="au")
    tail_power, tp_line = _float_field(header, "tail_power", rows, text, name, default=7.0)
    if tail_power <= 0:
        raise ParseError("tail_power must be positive", tp_line, name)
    _check_columns(rows, name, MIN_DIPOLE_POINTS)
    R = np.array([r[0] for r in rows]) * r_unit
    d = np.array([r[1] for r in rows]) * d_unit
    if R[0] <= 0:
        raise ParseError("R values must be positive", rows[0][2], name)
    label = header.get("label", ("", None))[0]
    return DipoleCurve((R, d), kind, couples, label, tail_power)


def read_potential(path):
    path = Path(path)
    return load_tabulated(path.read_text(), name=str(path))


def read_dipole(path):
    path = Path(path)
    return load_dipole(path.read_text(), name=str(path))


def format_table(header, R, values, comment=None):
    """Render a potential or dipole file from header pairs and two columns."""
    lines = [f"# {comment}"] if comment else []
    lines += [f"{k}={v}" for k, v in header]
    lines += [f"{r:.12g} {x:.15e}" for r, x in zip(R, values)]
    return "\n".join(lines) + "\n"
