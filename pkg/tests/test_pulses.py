import math
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from noonsim.pulses import (
    Gaussian,
    PulseDomainError,
    PulseError,
    Steep,
    Tabulated,
    adiabaticity_report,
    derivative,
    evaluate,
    pulse_from_config,
    pulse_table,
    pulse_to_config,
)


def test_gaussian_values():
    p = Gaussian()
    assert evaluate(p, 30.0) == pytest.approx(1000.0)
    assert evaluate(p, 20.0) == pytest.approx(1000.0 / math.e)
    assert evaluate(p, 0.0) == pytest.approx(1000.0 * math.exp(-9.0))
    assert derivative(p, 30.0) == pytest.approx(0.0)


def test_steep_values_by_hand():
    p = Steep()
    for t in (0.0, 0.5, 1.0, 1.9):
        expected = -3.0 * (math.tanh(4.0 * (t - 0.5)) + 1.0 / (t - 2.01))
        assert evaluate(p, t) == pytest.approx(expected, rel=1e-14)
    gated = Steep(gated=True)
    t = 0.3
    assert evaluate(gated, t) == pytest.approx(-3.0 * (math.tanh(4 * (t - 0.5)) + 1) / (t - 2.01))


def test_steep_grows_toward_the_pole():
    p = Steep()
    assert evaluate(p, 2.0) > 100 * evaluate(p, 1.5)


def test_domain_errors():
    with pytest.raises(PulseDomainError):
        evaluate(Steep(), 2.005)
    with pytest.raises(PulseDomainError):
        evaluate(Gaussian(), 31.0)
    with pytest.raises(PulseError):
        Steep(window=(0.0, 2.01))


@settings(max_examples=60, deadline=None)
@given(t=st.floats(0.05, 1.95), gated=st.booleans())
def test_steep_derivative_matches_finite_difference(t, gated):
    p = Steep(gated=gated)
    h = 1e-6
    fd = (p._value(t + h) - p._value(t - h)) / (2 * h)
    assert derivative(p, t) == pytest.approx(fd, rel=1e-5, abs=1e-5)


@settings(max_examples=60, deadline=None)
@given(t=st.floats(0.1, 29.9), w=st.floats(1.0, 20.0))
def test_gaussian_derivative_matches_finite_difference(t, w):
    p = Gaussian(width=w)
    h = 1e-5
    fd = (p._value(t + h) - p._value(t - h)) / (2 * h)
    assert derivative(p, t) == pytest.approx(fd, rel=1e-5, abs=1e-6)


def test_gaussian_scaling_stretches_time():
    p = Gaussian()
    q = p.scaled(2.0)
    assert q.window == (0.0, 60.0)
    assert evaluate(q, 40.0) == pytest.approx(evaluate(p, 20.0))
    assert abs(derivative(q, 40.0)) == pytest.approx(abs(derivative(p, 20.0)) / 2)


def test_tabulated_interpolation():
    t = tuple(np.linspace(0, 1, 11))
    v = tuple(np.asarray(t) ** 2)
    lin = Tabulated(t, v)
    assert evaluate(lin, 0.05) == pytest.approx(0.005)
    cub = Tabulated(t, v, interpolation="cubic")
    assert evaluate(cub, 0.55) == pytest.approx(0.55 ** 2, rel=1e-3)
    assert derivative(cub, 0.5) == pytest.approx(1.0, rel=1e-3)
    assert lin.window == (0.0, 1.0)
    with pytest.raises(PulseError):
        Tabulated((0.0, 0.0), (1.0, 2.0))
    with pytest.raises(PulseError):
        Tabulated((0.0,), (1.0,))


@pytest.mark.parametrize("pulse", [Gaussian(), Steep(), Steep(gated=True), Tabulated((0.0, 1.0), (1.0, 2.0))])
def test_config_round_trip(pulse):
    assert pulse_from_config(pulse_to_config(pulse)) == pulse


def test_unknown_variant():
    with pytest.raises(PulseError):
        pulse_from_config({"variant": "square"})


def test_pulse_table_columns():
    tab = pulse_table(Steep(), 0.5)
    assert tab.shape == (5, 3)
    np.testing.assert_allclose(tab[:, 0], [0, 0.5, 1, 1.5, 2.0])
    np.testing.assert_allclose(tab[:, 1], evaluate(Steep(), tab[:, 0]))


def test_adiabaticity_margins():
    p = Gaussian()
    t = np.linspace(0, 30, 7)
    traj = SimpleNamespace(times=t, n_ph_cond=np.full_like(t, 2.0))
    rep = adiabaticity_report(p, traj, g=1.0, Gamma=1.0)
    # |dOmega/dt / Omega| = 2 |t - t0| / w^2 for a Gaussian
    rate = 2 * np.abs(t - 30) / 100
    with np.errstate(divide="ignore"):
        np.testing.assert_allclose(rep.margin_empty, np.where(rate > 0, 1 / rate, np.inf))
    np.testing.assert_allclose(rep.margin_photon, 2 * rep.margin_empty)
    assert rep.min_margin_empty == pytest.approx(100 / 60)
    assert rep.time_of_min_empty == 0.0
    assert rep.summary()["flagged_zero_field"] == 0


def test_adiabaticity_flags_zero_field():
    p = Tabulated((0.0, 1.0, 2.0), (0.0, 1.0, 2.0))
    t = np.array([0.0, 1.0, 2.0])
    rep = adiabaticity_report(p, SimpleNamespace(times=t, n_ph_cond=np.zeros(3)), 1.0, 1.0)
    assert list(rep.flagged) == [0.0]
    assert math.isnan(rep.margin_empty[0])
    assert math.isfinite(rep.min_margin_empty)
