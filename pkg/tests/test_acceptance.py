"""Acceptance criteria, one test group per criterion.

Each test carries a ``criterion`` marker; the terminal summary prints one
PASS/FAIL line per criterion (see conftest.py).
"""

import io
import json
import csv
import math
import time

import numpy as np
import pytest

from mwassoc.cli import main
from mwassoc.config import bundled_model, load_config, load_system
from mwassoc.gridsolve import build_grid, count_nodes, solve_bound_states
from mwassoc.potentials import ChannelSpec, make_flat, make_morse
from mwassoc.scans import scaling_study, scan_feshbach, scan_microwave
from mwassoc.transitions import (
    rabi_frequency,
    raman_effective_dipole,
    signed_dipole,
    two_level_ok,
)
from mwassoc.units import cm1_to_hartree, khz_to_omega_au, reduced_mass

MU = reduced_mass(38.9637064864, 86.909180531)
W200 = float(khz_to_omega_au(200.0))
MODELS = ("krb_like", "rbcs_like")


def criterion(n, title):
    return pytest.mark.criterion(n, title)


# ---------------------------------------------------------------- 1


@criterion(1, "pure-trap s and p levels (2n+3/2, 2n+5/2) hbar*omega to 1e-6 in < 10 s")
@pytest.mark.parametrize("ell, offset", [(0, 1.5), (1, 2.5)])
def test_c1_oscillator(ell, offset):
    t0 = time.perf_counter()
    ch = ChannelSpec(make_flat(), MU, ell, W200)
    grid = build_grid(ch, n=20000)
    states = solve_bound_states(ch, grid, e_max=14 * W200)
    elapsed = time.perf_counter() - t0
    E = np.array([s.energy for s in states[:6]]) / W200
    expected = 2 * np.arange(6) + offset
    err = np.max(np.abs(E / expected - 1))
    print(f"criterion 1 l={ell}: max rel err {err:.2e}, {elapsed:.2f} s")
    assert len(states) >= 6
    assert err < 1e-6
    assert elapsed < 10.0


# ---------------------------------------------------------------- 2

DE = float(cm1_to_hartree(252.0))
RE, A = 10.85, 0.33


@pytest.fixture(scope="module")
def morse():
    ch = ChannelSpec(make_morse(DE, RE, A), MU)
    grid = build_grid(ch, n=100000)
    return grid, solve_bound_states(ch, grid)


@criterion(2, "Morse spectrum to 1e-6 for v <= 0.8 v_max, nodes = v, orthonormal to 1e-8")
def test_c2_morse_spectrum(morse):
    _, states = morse
    lam = math.sqrt(2 * MU * DE) / A
    v_max = int(math.floor(lam - 0.5))
    v = np.arange(int(0.8 * v_max) + 1)
    w0 = A * math.sqrt(2 * DE / MU)
    exact = -DE + w0 * (v + 0.5) - (w0 * (v + 0.5)) ** 2 / (4 * DE)
    E = np.array([s.energy for s in states[: len(v)]])
    err = np.max(np.abs(E / exact - 1))
    print(f"criterion 2: {len(states)} levels (v_max={v_max}), max rel err {err:.2e} for v <= {v[-1]}")
    assert len(states) == v_max + 1
    assert err < 1e-6


@criterion(2, "Morse spectrum to 1e-6 for v <= 0.8 v_max, nodes = v, orthonormal to 1e-8")
def test_c2_morse_nodes(morse):
    _, states = morse
    assert [count_nodes(s) for s in states] == list(range(len(states)))
    assert [s.v for s in states] == list(range(len(states)))


@criterion(2, "Morse spectrum to 1e-6 for v <= 0.8 v_max, nodes = v, orthonormal to 1e-8")
def test_c2_morse_orthonormal(morse):
    grid, states = morse
    U = np.array([s.psi for s in states]) * np.sqrt(grid.weights)
    defect = np.max(np.abs(U @ U.T - np.eye(len(states))))
    print(f"criterion 2: orthonormality defect {defect:.2e}")
    assert defect < 1e-8


# ---------------------------------------------------------------- 3

D0 = 0.37


def constant_dipole(r):
    return np.full_like(r, D0)


@criterion(3, "constant-d normalization and orthogonality; Gaussian <0,0|R|0,1> to 1e-6")
def test_c3_constant_dipole(morse):
    grid, states = morse
    subset = states[::3]
    diag, off = [], []
    for i, a in enumerate(subset):
        for b in subset[i:]:
            d = signed_dipole(a, b, constant_dipole, grid)
            (diag if a is b else off).append(d)
    diag_err = np.max(np.abs(np.array(diag) / D0 - 1))
    off_max = np.max(np.abs(off))
    print(f"criterion 3: normalization err {diag_err:.2e}, max off-diagonal {off_max / D0:.2e} d0")
    assert diag_err < 1e-8
    assert off_max < 1e-8 * D0


@criterion(3, "constant-d normalization and orthogonality; Gaussian <0,0|R|0,1> to 1e-6")
def test_c3_gaussian_closed_form():
    ch0 = ChannelSpec(make_flat(), MU, 0, W200)
    ch1 = ch0.with_(ell=1)
    grid = build_grid(ch0, n=60000, extra_channels=[ch1])
    s = solve_bound_states(ch0, grid, e_max=2 * W200)[0]
    p = solve_bound_states(ch1, grid, e_max=3 * W200)[0]
    a = math.sqrt(1 / (MU * W200))
    # u_s = 2 a^-3/2 pi^-1/4 R e^{-x^2/2}, u_p = sqrt(8/3) a^-5/2 pi^-1/4 R^2 e^{-x^2/2}
    exact = a * math.sqrt(3.0 / 2.0)
    got = abs(signed_dipole(s, p, lambda r: r, grid))
    print(f"criterion 3: <0,0|R|0,1> = {got:.10g} bohr, closed form {exact:.10g}")
    assert got == pytest.approx(exact, rel=1e-6)


# ---------------------------------------------------------------- 4


@criterion(4, "omega^(3/4) scaling on the KRb-like model: exponent in [0.73, 0.77], 16x ratio 8 +- 3%, < 5 min")
def test_c4_scaling():
    t0 = time.perf_counter()
    cfg = load_config(bundled_model("krb_like"))
    result = scaling_study(load_system(cfg), cfg.freqs_kHz, cfg.target_binding_cm1, "a")
    elapsed = time.perf_counter() - t0
    ratio = result.ratio(50.0, 800.0)
    print(
        f"criterion 4: exponent {result.slope:.4f}, d(800)/d(50) {ratio:.4f}, "
        f"final v={result.final_v} E_b={result.final_binding_cm1:.4g} cm^-1, {elapsed:.1f} s"
    )
    assert 0.73 <= result.slope <= 0.77
    assert ratio == pytest.approx(8.0, rel=0.03)
    assert elapsed < 300.0


# ---------------------------------------------------------------- 5


@criterion(5, "Rabi bound: rabi_frequency(1e-3, 1e4) = 0.1 MHz, two_level_ok(0.1, 0.2)")
def test_c5_rabi():
    assert rabi_frequency(1e-3, 1e4) == 0.1
    assert two_level_ok(0.1, 0.2) is True


# ---------------------------------------------------------------- 6


@criterion(6, "Raman |d_eff| = d1 d2 / sqrt(D^2 + g^2/4) to 1e-12 over 100 points, decreasing in |D|")
def test_c6_raman_formula():
    rng = np.random.default_rng(7)
    d1, d2 = 0.013, 0.0042
    deltas = rng.uniform(-1e3, 1e3, 100)
    gammas = rng.uniform(0.0, 50.0, 100)
    got = np.array([abs(raman_effective_dipole(d1, d2, D, g)) for D, g in zip(deltas, gammas)])
    exact = d1 * d2 / np.sqrt(deltas**2 + gammas**2 / 4)
    err = np.max(np.abs(got / exact - 1))
    print(f"criterion 6: max rel err {err:.2e} over {len(deltas)} points")
    assert err < 1e-12


@criterion(6, "Raman |d_eff| = d1 d2 / sqrt(D^2 + g^2/4) to 1e-12 over 100 points, decreasing in |D|")
@pytest.mark.parametrize("sign", [1.0, -1.0])
def test_c6_raman_monotone(sign):
    deltas = sign * np.linspace(0.0, 1e3, 100)
    mags = np.array([abs(raman_effective_dipole(0.013, 0.0042, D, 6.0)) for D in deltas])
    assert np.all(np.diff(mags) < 0)


# ---------------------------------------------------------------- 7


@pytest.fixture(scope="module")
def systems():
    return {m: load_system(load_config(bundled_model(m))) for m in MODELS}


@pytest.fixture(scope="module")
def microwave(systems):
    return {(m, s): scan_microwave(systems[m], s) for m in MODELS for s in ("a", "X")}


@criterion(7, "Feshbach enhancement: last bound l=0 level beats the trap level by >= 5x")
@pytest.mark.parametrize("model", MODELS)
def test_c7_feshbach_enhancement(systems, microwave, model):
    fb = max(r.d_au for r in scan_feshbach(systems[model], 0, "a"))
    mw = max(r.d_au for r in microwave[(model, "a")])
    print(f"criterion 7 {model}: max|d| Feshbach {fb:.4g}, trap {mw:.4g}, ratio {fb / mw:.1f}")
    assert fb > mw
    assert fb >= 5 * mw


# ---------------------------------------------------------------- 8


@criterion(8, "microwave |d| vs E_b has an interior maximum and spans >= 2 decades")
@pytest.mark.parametrize("model", MODELS)
@pytest.mark.parametrize("state", ["a", "X"])
def test_c8_figure_shape(microwave, model, state):
    d = np.array([r.d_au for r in microwave[(model, state)]])
    interior = np.flatnonzero((d[1:-1] > d[:-2]) & (d[1:-1] > d[2:]))
    decades = math.log10(d.max() / d.min())
    print(f"criterion 8 {model} {state}: {len(d)} levels, {len(interior)} interior maxima, {decades:.1f} decades")
    assert len(interior) >= 1
    assert decades >= 2.0


# ---------------------------------------------------------------- 9


def run_cli(tmp_path, name, *argv):
    path = tmp_path / name
    assert main([*argv, "--output", str(path)]) == 0
    return path


@criterion(9, "byte-identical reruns, CSV/JSON agree to 1e-12, validate passes on bundled data")
@pytest.mark.parametrize(
    "argv",
    [
        ["levels", "--model", "krb_like", "--no-trap", "--ell", "1"],
        ["scan-microwave", "--model", "krb_like"],
        ["scan-raman", "--model", "rbcs_like"],
    ],
    ids=["levels", "microwave", "raman"],
)
def test_c9_determinism_and_formats(tmp_path, argv):
    first = run_cli(tmp_path, "a.csv", *argv).read_bytes()
    second = run_cli(tmp_path, "b.csv", *argv).read_bytes()
    assert first == second
    doc = json.loads(run_cli(tmp_path, "c.json", *argv, "--format", "json").read_text())
    lines = [l for l in first.decode().splitlines() if not l.startswith("#")]
    rows = list(csv.DictReader(io.StringIO("\n".join(lines))))
    assert list(rows[0]) == doc["columns"]
    assert len(rows) == len(doc["rows"])
    for rc, rj in zip(rows, doc["rows"]):
        for k, v in rj.items():
            if isinstance(v, bool):
                assert rc[k] == str(v).lower()
            elif isinstance(v, (int, float)):
                assert float(rc[k]) == pytest.approx(v, rel=1e-12, abs=0)
            else:
                assert rc[k] == v


@criterion(9, "byte-identical reruns, CSV/JSON agree to 1e-12, validate passes on bundled data")
@pytest.mark.parametrize("model", MODELS)
def test_c9_validate_bundled(capsys, model):
    assert main(["validate", "--model", model]) == 0
    assert "checks passed" in capsys.readouterr().out


@criterion(9, "byte-identical reruns, CSV/JSON agree to 1e-12, validate passes on bundled data")
@pytest.mark.parametrize("name", ["trap.yaml", "morse.yaml"])
def test_c9_validate_fixtures(capsys, fixtures, name):
    assert main(["validate", "--config", str(fixtures / name)]) == 0
    assert "checks passed" in capsys.readouterr().out
