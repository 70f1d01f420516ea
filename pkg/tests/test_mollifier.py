"""Gaussian-mollified lifts: quadrature oracle, exact identities, bounds."""

import math
from fractions import Fraction as F

import numpy as np
import pytest
from scipy.integrate import quad

from circlespec import (JumpPLFunction, approx_bound_check, estimate_C0,
                        eval_dtau_delta, eval_tau, eval_tau_delta,
                        eval_tau_delta_inv, map_T_delta, mollify,
                        random_jump_pl)
from circlespec.mollifier import (apply_P_delta, pl_float_evaluator,
                                  sup_g_delta_N)


@pytest.fixture(scope="module")
def m05(keller):
    return mollify(keller, 0.05)


def dtau_exact(lift, y):
    """Raw lift derivative at y, extended with period p."""
    y = y % float(lift.p)
    for k in range(lift.num_pieces):
        if float(lift.breaks[k]) <= y < float(lift.breaks[k + 1]):
            return float(lift.slopes[k])
    return float(lift.slopes[-1])


def test_dtau_matches_quadrature(keller, m05):
    d = 0.05
    for x in (0.03, 1 / 6, 0.25, 0.9, 1.51):
        want, err = quad(
            lambda u: math.exp(-u * u / (2 * d * d)) / (d * math.sqrt(2 * math.pi))
            * dtau_exact(keller, x - u), -10 * d, 10 * d,
            limit=300, epsabs=1e-13)
        got = float(eval_dtau_delta(m05, x))
        assert got == pytest.approx(want, abs=1e-9)


def test_periodicity(m05):
    xs = np.linspace(0.0, 2.0, 37)
    assert np.allclose(eval_dtau_delta(m05, xs + 2.0),
                       eval_dtau_delta(m05, xs), rtol=0, atol=1e-14)
    assert np.allclose(eval_tau_delta(m05, xs + 2.0),
                       eval_tau_delta(m05, xs) + 1.0, rtol=0, atol=1e-12)


def test_dtau_stays_inside_slope_hull(m05):
    xs = np.linspace(0.0, 2.0, 4001)
    vals = eval_dtau_delta(m05, xs)
    assert np.all(vals > 1 / 3 - 1e-12)
    assert np.all(vals < 2 / 3 + 1e-12)
    # at a break it sits at the slope midpoint, up to the 3.3-sigma tails
    # of the neighbouring jumps
    mid = float(eval_dtau_delta(m05, 1 / 6))
    assert mid == pytest.approx((2 / 3 + 1 / 3) / 2, abs=2e-4)


def test_tau_delta_monotone_and_total_rise(m05):
    xs = np.linspace(0.0, 2.0, 2001)
    ys = eval_tau_delta(m05, xs)
    assert np.all(np.diff(ys) > 0)
    assert float(ys[-1] - ys[0]) == pytest.approx(1.0, abs=1e-12)


def test_tau_delta_near_tau_away_from_breaks(keller):
    # mid-sixth points sit 8 standard deviations from every break at
    # delta = 0.01, so the smoothing is invisible there
    m = mollify(keller, 0.01)
    for x in (F(1, 12), F(5, 12), F(17, 12)):
        assert float(eval_tau_delta(m, float(x))) == pytest.approx(
            float(eval_tau(keller, x)), abs=1e-8)


def test_inverse_roundtrip(m05):
    ys = np.linspace(0.0, 1.0, 501, endpoint=False)
    xs = eval_tau_delta_inv(m05, ys)
    assert np.max(np.abs(eval_tau_delta(m05, xs) - ys)) < 1e-12
    assert np.max(np.abs(map_T_delta(m05, eval_tau_delta(m05, xs) % 1.0)
                         - xs % 1.0)) < 1e-10


def test_doubling_is_fixed_by_mollification(doubling):
    m = mollify(doubling, 0.02)
    xs = np.linspace(0.0, 2.0, 101)
    assert np.allclose(eval_dtau_delta(m, xs), 0.5, rtol=0, atol=1e-13)
    assert np.allclose(eval_tau_delta(m, xs), xs / 2, rtol=0, atol=1e-13)


def test_partition_of_unity(keller):
    # sum of branch weights is identically one, mollified or not
    m = mollify(keller, 0.01)
    xs = np.linspace(0.0, 1.0, 97, endpoint=False)
    vals = apply_P_delta(m, lambda y: np.ones_like(y), xs)
    assert np.allclose(vals, 1.0, rtol=0, atol=1e-10)


def test_c0_estimate_stable(keller):
    for d in (0.1, 0.01):
        est = estimate_C0(keller, d)
        assert est.sup_inv > 0 and est.int_dtau > 0
        assert est.C0 == max(est.sup_inv, est.int_dtau)
        assert 1.3 < est.C0 < 2.0


def test_approx_bound_battery(keller):
    rng = np.random.default_rng(13)
    fs = [JumpPLFunction.sawtooth(),
          JumpPLFunction.indicator(F(1, 6), F(1, 2)),
          random_jump_pl(rng, max_breaks=8)]
    c0 = estimate_C0(keller, 0.1)
    for f in fs:
        chk = approx_bound_check(keller, 0.1, f, c0=c0)
        assert chk.passed
        assert 0 < chk.lhs <= chk.rhs
        assert chk.rhs == pytest.approx(2 * c0.C0 * 0.1 * chk.norm3, rel=1e-12)


def test_mollified_weight_cocycle(keller):
    m = mollify(keller, 0.01)
    for k in (1, 2):
        assert sup_g_delta_N(m, k) == pytest.approx((2 / 3) ** k, abs=2e-3)


def test_delta_validation(keller):
    with pytest.raises(ValueError):
        mollify(keller, 0.0)
    with pytest.raises(ValueError):
        mollify(keller, 1.5)


def test_pl_evaluator_matches_exact_values():
    f = JumpPLFunction.sawtooth()
    ev = pl_float_evaluator(f)
    xs = np.array([0.125, 0.5, 0.875])
    assert np.allclose(ev(xs), xs, rtol=0, atol=1e-15)
