"""Command-line front end.

    mwassoc levels --model krb_like --state a --ell 1 --no-trap
    mwassoc scan-microwave --config run.yaml --output mw.csv
    mwassoc scaling --model krb_like --format json

Exit status: 0 on success, 2 for configuration, parse or argument errors,
3 for numerical failures. Diagnostics go to stderr.
"""

import argparse
import csv
import io
import json
import os
from pathlib import Path
import sys
import tempfile

from . import __version__
from .config import FORMATS, apply_overrides, bundled_model, load_config, load_system
from .errors import ConfigurationError, InvalidArgumentError, NumericalError
from .gridsolve import TRAP_LENGTHS_MIN, default_r_max, solve_bound_states
from .potentials import ChannelSpec, read_dipole, read_potential
from .scans import scaling_study, scan_feshbach, scan_microwave, scan_raman
from .units import cm1_to_hartree, hartree_to_cm1, khz_to_omega_au, reduced_mass

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

# with the trap on, `levels` lists everything up to this many trap quanta
LEVELS_TRAP_QUANTA = 13.0

C1_REL_TOL = 1e-6
C1_ABS_TOL = 1e-12
STITCH_VALUE_TOL = 1e-3
STITCH_SLOPE_TOL = 2e-2

LEVELS_COLUMNS = ["label", "v", "l", "E_cm1", "E_b_cm1", "mean_R_bohr", "classification"]
SCAN_COLUMNS = ["state", "v", "l", "E_b_cm1", "d_au", "d_MHz_per_sqrtWcm2", "rabi_MHz", "two_level_ok"]
RAMAN_COLUMNS = ["intermediate", "v", "E_b_cm1", "d1_au", "d2_au", "product_au", "deff_mag", "deff_phase"]
SCALING_COLUMNS = ["omega_kHz", "d_au"]


class Table:
    def __init__(self, columns, rows, summary=None):
        self.columns = columns
        self.rows = rows
        self.summary = summary or {}


# --------------------------------------------------------------------------
# formatting


def format_value(x):
    """CSV text for one cell: 10 significant digits, true/false, no locale."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        return format(x, ".10g")
    return str(x)


def json_value(x):
    """The same rounding as :func:`format_value`, as a JSON scalar."""
    if isinstance(x, (bool, int, str)):
        return x
    return float(format(x, ".10g"))


def render_csv(table):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([format_value(x) for x in row])
    if table.summary:
        buf.write("# " + " ".join(f"{k}={format_value(v)}" for k, v in table.summary.items()) + "\n")
    return buf.getvalue()


def render_json(table, command):
    doc = {
        "command": command,
        "columns": table.columns,
        "rows": [{c: json_value(x) for c, x in zip(table.columns, row)} for row in table.rows],
        "summary": {k: json_value(v) for k, v in table.summary.items()},
    }
    return json.dumps(doc, indent=1, allow_nan=False) + "\n"


def write_atomic(path, text):
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# --------------------------------------------------------------------------
# commands


def cmd_levels(cfg):
    system = load_system(cfg)
    channel = system.channel(cfg.state, cfg.ell, trap=cfg.trap)
    asym = channel.curve.asymptote
    if cfg.e_max_cm1 is not None:
        e_max = float(cm1_to_hartree(cfg.e_max_cm1))
    elif cfg.trap and system.trap_omega > 0:
        e_max = asym + LEVELS_TRAP_QUANTA * system.trap_omega
    else:
        e_max = asym
    grid = system.grid_for(channel)
    states = solve_bound_states(channel, grid, e_max=e_max, max_states=cfg.max_states)
    rows = [
        [
            s.label,
            int(s.v),
            int(s.ell),
            float(hartree_to_cm1(s.energy)),
            float(hartree_to_cm1(s.binding_energy)),
            float(s.mean_R),
            s.classification,
        ]
        for s in states
    ]
    return Table(LEVELS_COLUMNS, rows)


def _scan_rows(records):
    return [
        [
            r.final_id[0],
            int(r.final_id[1]),
            int(r.final_id[2]),
            r.final_binding_cm1,
            r.d_au,
            r.d_rabi,
            r.rabi_MHz,
            bool(r.two_level_ok),
        ]
        for r in records
    ]


def cmd_scan_microwave(cfg):
    system = load_system(cfg)
    return Table(SCAN_COLUMNS, _scan_rows(scan_microwave(system, cfg.state)))


def cmd_scan_feshbach(cfg):
    system = load_system(cfg)
    return Table(SCAN_COLUMNS, _scan_rows(scan_feshbach(system, cfg.from_top, cfg.state)))


def cmd_scan_raman(cfg):
    if cfg.detuning_MHz is None or cfg.linewidth_MHz is None:
        raise ConfigurationError("scan-raman needs detuning_MHz and linewidth_MHz")
    system = load_system(cfg)
    records = scan_raman(
        system,
        cfg.detuning_MHz,
        cfg.linewidth_MHz,
        initial_v=cfg.initial_v,
        final_v=cfg.final_v,
        intermediates=cfg.intermediates,
    )
    rows = [
        [
            r.intermediate_id[0],
            int(r.intermediate_id[1]),
            r.intermediate_binding_cm1,
            r.d1_au,
            r.d2_au,
            r.product_au,
            r.deff_mag,
            r.deff_phase,
        ]
        for r in records
    ]
    return Table(RAMAN_COLUMNS, rows)


def cmd_scaling(cfg):
    system = load_system(cfg)
    res = scaling_study(system, cfg.freqs_kHz, cfg.target_binding_cm1, cfg.state, cfg.final_v_scaling)
    rows = [[float(f), float(d)] for f, d in zip(res.freqs_kHz, res.d_au)]
    summary = {
        "exponent": float(res.slope),
        "intercept": float(res.intercept),
        "final_v": int(res.final_v),
        "final_E_b_cm1": float(res.final_binding_cm1),
    }
    return Table(SCALING_COLUMNS, rows, summary)


# --------------------------------------------------------------------------
# validate


def one_sided_slopes(f, x, rel=1e-6):
    """Second-order one-sided derivatives of ``f`` just left and right of ``x``."""
    h = rel * x
    f0 = f(x)
    left = (3.0 * f0 - 4.0 * f(x - h) + f(x - 2.0 * h)) / (2.0 * h)
    right = (-3.0 * f0 + 4.0 * f(x + h) - f(x + 2.0 * h)) / (2.0 * h)
    return left, right


def slope_jump_ok(left, right):
    """C1 tolerance: 1e-6 of the local slope, or 1e-12 hartree/bohr where it vanishes."""
    return abs(right - left) <= max(C1_REL_TOL * max(abs(left), abs(right)), C1_ABS_TOL)


def check_stitching(curve):
    """The tabulated zone must join the wall and the dispersion tail with a
    continuous first derivative."""
    if curve.form != "tabulated":
        return f"{curve.form} curve, nothing to stitch"
    R, V = curve.points
    worst = 0.0
    for x in (float(R[0]), float(R[1]), float(R[-3]), float(R[-1])):
        left, right = one_sided_slopes(curve.evaluate, x)
        jump = abs(right - left)
        worst = max(worst, jump)
        if not slope_jump_ok(left, right):
            raise ConfigurationError(
                f"{curve.label}: slope jumps from {left:.6g} to {right:.6g} hartree/bohr at R={x:.6g} bohr"
            )
    # the blend is C1 by construction; a large data/tail mismatch still means
    # the table and the c6/c8 header disagree
    x = float(R[-1])
    gap = curve.tail(x) - curve.asymptote
    slope_tail = 6.0 * curve.c6 / x**7 + 8.0 * curve.c8 / x**9
    dv = abs(V[-1] - curve.tail(x)) / abs(gap) if gap else abs(V[-1] - curve.asymptote)
    ds = abs(curve._spline(x, 1) - slope_tail) / abs(slope_tail) if slope_tail else 0.0
    if dv > STITCH_VALUE_TOL or ds > STITCH_SLOPE_TOL:
        raise ConfigurationError(
            f"{curve.label}: table disagrees with the c6/c8 tail at R={x:.6g} bohr "
            f"(relative value {dv:.3g}, slope {ds:.3g})"
        )
    return f"max slope jump {worst:.1e} hartree/bohr; tail mismatch value {dv:.1e}, slope {ds:.1e}"


def check_dipole_continuity(dip):
    R = dip.points[0]
    scale = max(float(abs(dip.points[1]).max()), 1e-300)
    worst = 0.0
    for x in (float(R[0]), float(R[-1])):
        eps = 1e-9 * x
        jump = abs(dip.evaluate(x + eps) - dip.evaluate(x - eps)) / scale
        worst = max(worst, jump)
        if jump > 1e-7:
            raise ConfigurationError(f"{dip.label}: d(R) jumps by {jump:.3g} (relative) at R={x:.6g} bohr")
    return f"max relative jump {worst:.2e}"


def check_grid_adequacy(cfg, curve):
    if not cfg.trap_kHz > 0:
        return "no trap"
    channel = ChannelSpec(curve, reduced_mass(*cfg.masses_amu), 0, float(khz_to_omega_au(cfg.trap_kHz)))
    r_max = cfg.r_max if cfg.r_max is not None else default_r_max(channel)
    need = TRAP_LENGTHS_MIN * channel.trap_length
    if r_max < need:
        raise ConfigurationError(
            f"grid adequacy: R_max={r_max:.6g} bohr is below {TRAP_LENGTHS_MIN:g} trap lengths ({need:.6g} bohr)"
        )
    return f"R_max={r_max:.6g} bohr >= {need:.6g} bohr"


def run_checks(cfg):
    """Run every validation check; return a list of (name, ok, detail)."""
    results = []

    def run(name, fn, *args):
        try:
            detail = fn(*args)
        except (ConfigurationError, InvalidArgumentError, OSError) as exc:
            results.append((name, False, str(exc)))
            return None
        results.append((name, True, detail if isinstance(detail, str) else "ok"))
        return detail

    def load(reader, path):
        p = cfg.resolve(path)
        return reader(p)

    curves, dipoles, excited = {}, {}, []
    for key, path in cfg.potentials.items():
        curves[key] = run(f"file format: potential {key}", lambda p=path: load(read_potential, p))
    for key, path in cfg.dipoles.items():
        dipoles[key] = run(f"file format: dipole {key}", lambda p=path: load(read_dipole, p))
    for i, e in enumerate(cfg.excited):
        curve = run(f"file format: excited {i} potential", lambda p=e["potential"]: load(read_potential, p))
        legs = {}
        for leg in ("dipole_a", "dipole_X"):
            if e.get(leg):
                legs[leg] = run(f"file format: excited {i} {leg}", lambda p=e[leg]: load(read_dipole, p))
        excited.append((curve, legs))

    def labels():
        bad = []
        for key, dip in dipoles.items():
            curve = curves.get(key)
            if dip is None or curve is None:
                continue
            if set(dip.couples) != {curve.label}:
                bad.append(f"dipole {key} couples {dip.couples}, potential label is {curve.label!r}")
        for curve, legs in excited:
            for leg, dip in legs.items():
                lower = curves.get(leg[-1])
                if curve is None or dip is None or lower is None:
                    continue
                if set(dip.couples) != {lower.label, curve.label}:
                    bad.append(f"{dip.label} couples {dip.couples}, expected {lower.label!r} and {curve.label!r}")
        if bad:
            raise ConfigurationError("; ".join(bad))
        return "all dipole labels resolve"

    run("label resolution", labels)
    all_curves = list(curves.values()) + [c for c, _ in excited]
    for curve in all_curves:
        if curve is not None:
            run(f"C1 stitching: {curve.label}", check_stitching, curve)
    all_dipoles = list(dipoles.values()) + [d for _, legs in excited for d in legs.values()]
    for dip in all_dipoles:
        if dip is not None:
            run(f"dipole continuity: {dip.label}", check_dipole_continuity, dip)
    for key, curve in curves.items():
        if curve is not None:
            run(f"grid adequacy: {key}", check_grid_adequacy, cfg, curve)
    return results


def cmd_validate(cfg, out=None):
    out = out or sys.stdout
    results = run_checks(cfg)
    for name, ok, detail in results:
        print(f"{'ok  ' if ok else 'FAIL'} {name}: {detail}", file=out)
    failed = [r for r in results if not r[1]]
    if failed:
        name, _, detail = failed[0]
        raise ConfigurationError(f"validation failed at check '{name}': {detail}")
    print(f"all {len(results)} checks passed", file=out)


COMMANDS = {
    "levels": cmd_levels,
    "scan-microwave": cmd_scan_microwave,
    "scan-feshbach": cmd_scan_feshbach,
    "scan-raman": cmd_scan_raman,
    "scaling": cmd_scaling,
}


# --------------------------------------------------------------------------
# argument parsing


def _float_list(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _str_list(text):
    return [x.strip() for x in text.split(",") if x.strip()]


def _add_common(p):
    src = p.add_argument_group("input")
    src.add_argument("--config", help="YAML run configuration")
    src.add_argument("--model", help="bundled model name (krb_like, rbcs_like) used when --config is absent")
    out = p.add_argument_group("output")
    out.add_argument("--output", help="output file (default: stdout)")
    out.add_argument("--format", choices=FORMATS)
    sysg = p.add_argument_group("system overrides")
    sysg.add_argument("--trap-kHz", dest="trap_kHz", type=float)
    sysg.add_argument("--intensity-Wcm2", dest="intensity_Wcm2", type=float)
    sysg.add_argument("--angular-C", dest="angular_C", type=float)
    sysg.add_argument("--points", type=int)
    sysg.add_argument("--r-min", dest="r_min", type=float)
    sysg.add_argument("--r-max", dest="r_max", type=float)


def build_parser():
    parser = argparse.ArgumentParser(prog="mwassoc", description="Bound levels and dipole couplings of trapped atom pairs.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("levels", help="bound levels of one channel")
    _add_common(p)
    p.add_argument("--state")
    p.add_argument("--ell", type=int)
    p.add_argument("--trap", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--e-max-cm1", dest="e_max_cm1", type=float)
    p.add_argument("--max-states", dest="max_states", type=int)

    p = sub.add_parser("scan-microwave", help="trap level to molecular l=1 levels")
    _add_common(p)
    p.add_argument("--state")

    p = sub.add_parser("scan-feshbach", help="last (or second-last) l=0 level to deeper l=1 levels")
    _add_common(p)
    p.add_argument("--state")
    p.add_argument("--from-top", dest="from_top", type=int)

    p = sub.add_parser("scan-raman", help="two-photon a -> intermediate -> X pathways")
    _add_common(p)
    p.add_argument("--initial-v", dest="initial_v", type=int)
    p.add_argument("--final-v", dest="final_v", type=int)
    p.add_argument("--intermediates", type=_str_list, help="comma-separated excited-state labels")
    p.add_argument("--detuning-MHz", dest="detuning_MHz", type=float)
    p.add_argument("--linewidth-MHz", dest="linewidth_MHz", type=float)

    p = sub.add_parser("scaling", help="power-law fit of d against trap frequency")
    _add_common(p)
    p.add_argument("--state")
    p.add_argument("--freqs-kHz", dest="freqs_kHz", type=_float_list, help="comma-separated frequencies")
    p.add_argument("--target-binding-cm1", dest="target_binding_cm1", type=float)
    p.add_argument("--final-v-scaling", dest="final_v_scaling", type=int)

    p = sub.add_parser("validate", help="check data files, stitching and grid adequacy")
    _add_common(p)
    return parser


_NOT_OVERRIDES = {"command", "config", "model"}


def resolve_config(args):
    if args.config and args.model:
        raise ConfigurationError("give either --config or --model, not both")
    if args.config:
        cfg = load_config(args.config)
    elif args.model:
        cfg = load_config(bundled_model(args.model))
    else:
        raise ConfigurationError("no configuration: pass --config PATH or --model NAME")
    overrides = {k: v for k, v in vars(args).items() if k not in _NOT_OVERRIDES}
    return apply_overrides(cfg, overrides)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        if args.command == "validate":
            cmd_validate(cfg)
            return EXIT_OK
        table = COMMANDS[args.command](cfg)
        text = render_csv(table) if cfg.format == "csv" else render_json(table, args.command)
        if cfg.output:
            write_atomic(cfg.output, text)
        else:
            sys.stdout.write(text)
    except (ConfigurationError, InvalidArgumentError) as exc:
        print(f"mwassoc {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"mwassoc {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"mwassoc {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
