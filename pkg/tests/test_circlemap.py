"""Lift construction, evaluation oracles, Markov detection."""

from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from circlespec import (LiftError, build_lift, derivative_inf, doubling_lift,
                        eval_tau, eval_tau_inv, keller_rugh, lift_from_json,
                        lift_to_json, map_T, markov_check, natural_grid,
                        singular_set, weight_g)

# Frozen by hand from the slope list (2/3,1/3,1/2,1/2,2/3,1/3,
# 1/3,2/3,1/2,1/2,1/3,2/3), each piece of width 1/6.
TAU_AT_SIXTHS = (F(0), F(1, 9), F(1, 6), F(1, 4), F(1, 3), F(4, 9), F(1, 2),
                 F(5, 9), F(2, 3), F(3, 4), F(5, 6), F(8, 9), F(1))

SLOPES = (F(2, 3), F(1, 3), F(1, 2), F(1, 2), F(2, 3), F(1, 3),
          F(1, 3), F(2, 3), F(1, 2), F(1, 2), F(1, 3), F(2, 3))


def test_keller_shape(keller):
    assert keller.p == 2
    assert keller.num_pieces == 12
    assert keller.breaks == tuple(F(k, 6) for k in range(13))
    assert keller.slopes == SLOPES
    assert keller.min_slope() == F(1, 3)
    assert keller.max_slope() == F(2, 3)


def test_tau_table(keller):
    for k, want in enumerate(TAU_AT_SIXTHS):
        assert eval_tau(keller, F(k, 6)) == want
    # interior points, frozen independently
    assert eval_tau(keller, F(1, 12)) == F(1, 18)
    assert eval_tau(keller, F(7, 12)) == F(7, 24)
    assert eval_tau(keller, F(23, 12)) == F(17, 18)


def test_tau_inverse_roundtrip(keller):
    for num in range(0, 97):
        x = F(num, 48)
        assert eval_tau_inv(keller, eval_tau(keller, x)) == x


def test_map_T_inverts_tau_mod_one(keller):
    for num in range(1, 48):
        x = F(num, 48)
        assert map_T(keller, eval_tau(keller, x) % 1) == x % 1


# forward tau-images of the lift breakpoints: where the weight dips to zero
S_KELLER = tuple(sorted({v % 1 for v in TAU_AT_SIXTHS}))


def test_weight_on_image_circle(keller):
    # g(y) = tau'(tau^{-1}(y)): the slope of the piece whose image covers y
    assert weight_g(keller, F(1, 18)) == F(2, 3)
    assert weight_g(keller, F(1, 5)) == F(1, 2)
    assert weight_g(keller, F(19, 18)) == F(2, 3)   # mod-1 wrap
    for y in S_KELLER:
        assert weight_g(keller, y) == 0


def test_singular_set(keller):
    assert len(S_KELLER) == 12
    assert singular_set(keller) == S_KELLER


def test_derivative_inf_keller(keller):
    # a slope-2/3 branch chains to itself, so the normalized sup weight
    # stays at 2/3 for every horizon
    for k in (1, 2, 3):
        rep = derivative_inf(keller, k)
        assert rep.inf == F(3, 2) ** k
        assert rep.theta == pytest.approx(2 / 3, abs=1e-12)


def test_derivative_inf_doubling(doubling):
    rep = derivative_inf(doubling, 1)
    assert rep.inf == 2
    assert rep.theta == 0.5


def test_markov_keller(keller):
    rep = markov_check(keller)
    assert rep.markov and rep.q == 6
    assert natural_grid(keller) == 6


def test_markov_doubling(doubling):
    rep = markov_check(doubling)
    assert rep.markov and rep.q == 1


def test_non_markov_example():
    # tau(1/2) = 7/20 is not a multiple of any tested grid step
    lift = build_lift(2, (0, F(1, 2), 2), (F(7, 10), F(13, 30)))
    rep = markov_check(lift)
    assert not rep.markov
    assert "7/20" in rep.message or rep.message


@pytest.mark.parametrize("p,breaks,slopes", [
    (0, (0, 1), (F(1, 2),)),                      # degree too small
    (2, (0, 1), (F(1, 2), F(1, 2))),              # length mismatch
    (2, (0, F(3), 2), (F(1, 2), F(1, 2))),        # breaks not ascending
    (2, (0, 1, 2), (F(3, 2), F(-1, 2))),          # slope outside (0, 1]
    (2, (0, 1, 2), (F(1, 3), F(1, 3))),           # total rise != 1
])
def test_build_lift_rejects(p, breaks, slopes):
    with pytest.raises(LiftError):
        build_lift(p, breaks, slopes)


def test_json_roundtrip(keller, doubling):
    for lift in (keller, doubling):
        assert lift_from_json(lift_to_json(lift)) == lift


# random admissible lifts: pieces on a coarse grid, last slope solved so
# the total rise is exactly 1
@st.composite
def lifts(draw):
    p = draw(st.integers(min_value=1, max_value=3))
    q = draw(st.sampled_from([2, 3, 4, 6]))
    n = p * q
    cuts = sorted(draw(st.sets(st.integers(min_value=1, max_value=n - 1),
                               min_size=0, max_size=3)))
    edges = [F(0)] + [F(c, q) for c in cuts] + [F(p)]
    widths = [edges[i + 1] - edges[i] for i in range(len(edges) - 1)]
    slopes = []
    remaining = F(1)
    for i, w in enumerate(widths):
        lo = remaining - sum(widths[i + 1:])       # later pieces give <= 1 each
        lo = max(lo / w, F(1, 100))
        hi = min(F(1), remaining / w)
        if lo > hi:
            lo = hi
        num = draw(st.integers(min_value=0, max_value=24))
        s = lo + (hi - lo) * F(num, 24)
        if i == len(widths) - 1:
            s = remaining / w
        slopes.append(s)
        remaining -= s * w
    return build_lift(p, edges, slopes)


@given(lift=lifts(), num=st.integers(min_value=0, max_value=240))
@settings(max_examples=60, deadline=None)
def test_random_lift_invariants(lift, num):
    x = F(num, 240) * lift.p / 1
    y = eval_tau(lift, x)
    assert 0 <= y <= 1
    assert eval_tau_inv(lift, y) == x
    if num + 1 <= 240:
        assert eval_tau(lift, x + F(lift.p, 240)) > y   # strictly increasing
    g = weight_g(lift, x)
    assert 0 <= g <= 1
    assert lift_from_json(lift_to_json(lift)) == lift
