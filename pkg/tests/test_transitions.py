import math

from hypothesis import given, strategies as st
import numpy as np
import pytest
from scipy.integrate import quad

from mwassoc import InvalidArgumentError
from mwassoc.gridsolve import build_grid, solve_bound_states
from mwassoc.potentials import ChannelSpec, make_flat, make_morse
from mwassoc.transitions import (
    expectation,
    make_record,
    rabi_frequency,
    raman_effective_dipole,
    signed_dipole,
    transition_dipole,
    two_level_ok,
)
from mwassoc.units import RABI_MHZ_PER_AU, cm1_to_hartree, khz_to_omega_au, reduced_mass

MU = reduced_mass(38.9637064864, 86.909180531)
W = float(khz_to_omega_au(200.0))
D0 = 0.37


@pytest.fixture(scope="module")
def trap_states():
    ch0 = ChannelSpec(make_flat(), MU, 0, W)
    grid = build_grid(ch0, n=60000, extra_channels=[ch0.with_(ell=1)])
    s = solve_bound_states(ch0, grid, e_max=8 * W)
    p = solve_bound_states(ch0.with_(ell=1), grid, e_max=8 * W)
    return grid, s, p


@pytest.fixture(scope="module")
def morse_states():
    ch = ChannelSpec(make_morse(float(cm1_to_hartree(252.0)), 10.85, 0.33), MU)
    grid = build_grid(ch, n=40000)
    return grid, solve_bound_states(ch, grid)


def const(r):
    return np.full_like(r, D0)


def test_constant_dipole_normalization_and_orthogonality(morse_states):
    grid, states = morse_states
    for i, a in enumerate(states):
        for b in states[i:]:
            d = signed_dipole(a, b, const, grid)
            if a is b:
                assert d == pytest.approx(D0, rel=1e-8)
            else:
                assert abs(d) < 1e-8 * D0


def test_gaussian_dipole_closed_form(trap_states):
    grid, s, p = trap_states
    a = math.sqrt(1 / (MU * W))
    closed = a * math.sqrt(1.5)
    # independent quadrature of the analytic ground states
    n0 = math.sqrt(4 / (math.sqrt(math.pi) * a**3))
    n1 = math.sqrt(8 / (3 * math.sqrt(math.pi) * a**5))
    numeric = quad(lambda r: n0 * n1 * r**4 * math.exp(-r * r / a**2), 0, 20 * a, epsabs=0, epsrel=1e-13)[0]
    assert numeric == pytest.approx(closed, rel=1e-12)
    got = transition_dipole(s[0], p[0], lambda r: r, grid)
    assert got == pytest.approx(closed, rel=1e-6)


def test_dipole_is_symmetric(trap_states):
    grid, s, p = trap_states
    f = lambda r: np.exp(-r / 2000.0)
    for i in range(3):
        assert signed_dipole(s[i], p[i], f, grid) == signed_dipole(p[i], s[i], f, grid)


def test_expectation_matches_mean_radius(trap_states):
    grid, s, _ = trap_states
    assert expectation(s[0], lambda r: r, grid) == pytest.approx(s[0].mean_R, rel=1e-14)


def test_mismatched_grids_rejected(trap_states, morse_states):
    grid, s, _ = trap_states
    _, m = morse_states
    with pytest.raises(InvalidArgumentError):
        transition_dipole(s[0], m[0], const, grid)


def test_record_fields(trap_states):
    grid, s, p = trap_states
    rec = make_record(s[0], p[0], 2e-3, angular_C=0.5, intensity=1e4, trap_freq_MHz=0.2)
    assert rec.d_rabi == pytest.approx(2e-3 * RABI_MHZ_PER_AU * 0.5, rel=1e-15)
    assert rec.rabi_MHz == pytest.approx(rec.d_rabi * 100.0, rel=1e-15)
    assert rec.two_level_ok is (rec.rabi_MHz < 0.2)
    assert rec.initial_id == (s[0].label, 0, 0)
    assert rec.final_id == (p[0].label, 0, 1)


# ---------------------------------------------------------------- Rabi / two-level


def test_rabi_example():
    assert rabi_frequency(1e-3, 1e4) == 0.1


def test_two_level_example():
    assert two_level_ok(0.1, 0.2) is True
    assert two_level_ok(0.2, 0.2) is False


def test_rabi_rejects_negative_intensity():
    with pytest.raises(InvalidArgumentError):
        rabi_frequency(1.0, -1.0)


@given(d=st.floats(min_value=1e-12, max_value=1e3), i=st.floats(min_value=0, max_value=1e8))
def test_rabi_quadruple_intensity_doubles(d, i):
    np.testing.assert_allclose(rabi_frequency(d, 4 * i), 2 * rabi_frequency(d, i), rtol=1e-15)


# ---------------------------------------------------------------- Raman


def test_raman_magnitude_sweep():
    rng = np.random.default_rng(7)
    d1, d2 = 0.8, 1.7
    for delta, gamma in zip(rng.uniform(-500, 500, 100), rng.uniform(0, 50, 100)):
        got = abs(raman_effective_dipole(d1, d2, delta, gamma))
        assert got == pytest.approx(d1 * d2 / math.sqrt(delta**2 + gamma**2 / 4), rel=1e-12)


def test_raman_monotone_in_detuning():
    deltas = np.linspace(0.0, 1000.0, 200)
    for sign in (1, -1):
        mags = [abs(raman_effective_dipole(1.0, 1.0, sign * d, 3.0)) for d in deltas]
        assert np.all(np.diff(mags) < 0)


def test_raman_tenfold_detuning():
    base = abs(raman_effective_dipole(1.0, 2.0, 100.0, 0.01))
    far = abs(raman_effective_dipole(1.0, 2.0, 1000.0, 0.01))
    assert base / far == pytest.approx(10.0, rel=1e-2)


def test_raman_phase():
    d = raman_effective_dipole(1.0, 1.0, 10.0, 4.0)
    assert np.angle(d) == pytest.approx(-math.atan2(2.0, 10.0), rel=1e-14)


@pytest.mark.parametrize("delta, gamma", [(0.0, 0.0), (1.0, -1.0)])
def test_raman_invalid(delta, gamma):
    with pytest.raises(InvalidArgumentError):
        raman_effective_dipole(1.0, 1.0, delta, gamma)


@given(
    d1=st.floats(-10, 10), d2=st.floats(-10, 10), k=st.floats(-5, 5),
    delta=st.floats(1.0, 1e3), gamma=st.floats(0, 100),
)
def test_raman_bilinear(d1, d2, k, delta, gamma):
    base = raman_effective_dipole(d1, d2, delta, gamma)
    np.testing.assert_allclose(raman_effective_dipole(k * d1, d2, delta, gamma), k * base, rtol=1e-13, atol=1e-300)
    np.testing.assert_allclose(raman_effective_dipole(d1, k * d2, delta, gamma), k * base, rtol=1e-13, atol=1e-300)
