import cmath
import importlib
import math

import numpy as np
import pytest

from merolab import evaluate, parse
from merolab.expr import OVERFLOW, POLE, evaluate_many, log_modulus, log_polar

# the package re-exports the evaluate *function* under the same name as the
# submodule, so reach the module itself through importlib
ev = importlib.import_module("merolab.expr.evaluate")


def test_plain_values():
    assert evaluate(parse("z^2 + 1"), 2j) == pytest.approx(-3.0)
    assert evaluate(parse("exp(z)"), 1 + 0j) == pytest.approx(math.e)
    assert evaluate(parse("sin(z)"), 0.5 + 0j) == pytest.approx(math.sin(0.5))


def test_pole_and_overflow_sentinels():
    assert evaluate(parse("1/z"), 0j) is POLE
    assert evaluate(parse("1/(z*(z-1)*(z-2))"), 1 + 0j) is POLE
    assert evaluate(parse("exp(z)"), 800 + 0j) is OVERFLOW


def test_tan_at_float_pole_reports_pole():
    # the closest double to pi/2 sits ~6e-17 off the true pole, but the
    # evaluator still reports the pole marker there
    assert evaluate(parse("tan(z)"), complex(math.pi / 2, 0)) is POLE
    v = evaluate(parse("tan(z)"), 1.5 + 0j)
    assert isinstance(v, complex) and v.real == pytest.approx(math.tan(1.5))


def test_evaluate_many_flags():
    vals, flags = evaluate_many(parse("1/z"), np.array([1 + 0j, 0j, 2 + 0j]))
    assert list(flags) == [0, 1, 0]
    assert vals[0] == pytest.approx(1.0)
    assert vals[2] == pytest.approx(0.5)
    _, flags = evaluate_many(parse("exp(z)"), np.array([0j, 800 + 0j]))
    assert list(flags) == [0, 2]


def test_log_modulus_exact_for_exp():
    pts = np.array([1.0e6 + 1.0j, 1.0e8 - 3.0j, -5.0e5 + 0j])
    lm = log_modulus(parse("exp(z)"), pts)
    assert np.allclose(lm, pts.real, rtol=1e-14, atol=1e-12)


def test_log_polar_phase_for_exp():
    lm, ph = log_polar(parse("exp(z)"), np.array([1.0e6 + 1.0j]))
    assert lm[0] == pytest.approx(1.0e6)
    assert complex(ph[0]) == pytest.approx(cmath.exp(1j))


def test_log_modulus_product_combines():
    f = parse("z^2 * exp(z)")
    pts = np.array([1000.0 + 0j, 2000.0 + 500.0j])
    expected = 2.0 * np.log(np.abs(pts)) + pts.real
    assert np.allclose(log_modulus(f, pts), expected, rtol=1e-12)


def test_log_modulus_sum_dominated_by_exponential():
    fatou = parse("z + 1 + exp(-z)")
    lm = log_modulus(fatou, np.array([-1000.0 + 0j]))
    assert lm[0] == pytest.approx(1000.0, abs=1e-9)
    lm = log_modulus(fatou, np.array([1000.0 + 0j]))
    assert lm[0] == pytest.approx(math.log(1001.0), abs=1e-9)


def test_lacunary_partial_sum_oracle(lacunary2):
    # independent oracle: direct partial sums of sum 2^(-n^2) z^n
    for z in (1.0 + 0j, 2.0 + 0j, 0.5 + 0.5j, -3.0 + 1.0j):
        oracle = sum(2.0 ** (-(n * n)) * z**n for n in range(60))
        assert evaluate(lacunary2, z) == pytest.approx(oracle, rel=1e-13)


def test_lacunary_peak_term_growth(lacunary2):
    # log M(r) tracks the largest term (log r)^2 / (4 log 2) for large r
    r = 2.0**40
    lm = float(log_modulus(lacunary2, np.array([r + 0j]))[0])
    peak = math.log(r) ** 2 / (4.0 * math.log(2.0))
    assert peak <= lm <= peak + math.log(64.0)


def test_canprod_small_radius_oracle(canprod4):
    # independent oracle: explicit factors to k=300, then the zeta tail
    zeta4 = math.pi**4 / 90.0
    ks = np.arange(1, 301, dtype=np.float64)
    for z in (3.0 + 4.0j, -7.0 + 1.0j, 10.0 + 0j):
        head = np.log(1.0 + z / ks**4).sum()
        tail = z * (zeta4 - float((ks**-4).sum()))
        oracle = (head + tail).real
        got = float(log_modulus(canprod4, np.array([z]))[0])
        assert got == pytest.approx(oracle, abs=1e-10)


def test_canprod_zero_on_negative_axis(canprod4):
    assert evaluate(canprod4, -16.0 + 0j) == 0
    lm = log_modulus(canprod4, np.array([-16.0 + 0j, -81.0 + 0j]))
    assert np.isneginf(lm).all()


def test_canprod_gamma_route_agrees_with_factor_route(canprod4, monkeypatch):
    pts = np.array([1.0e4 + 0j, 8000.0 + 6000.0j, -9999.5 + 11.0j])
    factor_route = log_modulus(canprod4, pts).copy()
    monkeypatch.setattr(ev, "_GAMMA_SWITCH", 8)
    gamma_route = log_modulus(canprod4, pts)
    assert np.allclose(gamma_route, factor_route, rtol=0, atol=1e-8)


def test_canprod_asymptotic_slope(canprod4):
    # log max term ~ pi sqrt(2) r^(1/4) on the positive axis
    r = 1.0e24
    lm = float(log_modulus(canprod4, np.array([r + 0j]))[0])
    assert lm == pytest.approx(math.pi * math.sqrt(2.0) * r**0.25, rel=1e-3)


def test_canprod_gamma_route_zero(canprod4):
    # -2^80 = -(2^20)^4 is exactly representable, and its factor count
    # pushes the evaluation onto the gamma route
    z = -(2.0**80)
    lm = float(log_modulus(canprod4, np.array([z + 0j]))[0])
    assert lm == -math.inf
