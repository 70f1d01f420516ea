"""BV calculus: exact operator action, variation bookkeeping, LY data."""

from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from circlespec import (LAMBDA2, JumpPLFunction, KappaError, NotMarkovError,
                        ProjectionDivergence, Surd, apply_P, apply_P_iterates,
                        build_lift, check_ly_sequence, ly_constants,
                        project_phi2, random_jump_pl, sup_gN, var_g, var_gN)
from circlespec.bvcalc import cosine_interpolant

from test_steptransfer import M_ORACLE

seeds = st.integers(min_value=0, max_value=10 ** 6)


def rand_f(seed, max_breaks=12):
    return random_jump_pl(np.random.default_rng(seed), max_breaks=max_breaks)


# -- basic geometry --------------------------------------------------------

def test_indicator():
    f = JumpPLFunction.indicator(F(1, 6), F(1, 2))
    assert f.value(F(1, 4)) == 1
    assert f.value(F(1, 6)) == 0       # endpoints carry the dip convention
    assert f.value(F(3, 4)) == 0
    assert f.integral() == F(1, 3)
    assert f.l1_norm() == F(1, 3)
    assert f.variation() == 2


def test_sawtooth():
    f = JumpPLFunction.sawtooth()
    assert f.value(F(1, 4)) == F(1, 4)
    assert f.value(0) == 0
    assert f.limit(0, "-") == 1
    assert f.integral() == F(1, 2)
    assert f.sup_norm() == 1
    assert f.variation() == 2          # the run up plus the wrap jump


def test_variation_counts_dips_twice():
    # a single detached point on a flat function oscillates down and up
    f = JumpPLFunction((F(0), F(1, 2)), (F(3), F(3)), (F(3), F(3)),
                       (F(3), F(0)))
    assert f.variation() == 6
    assert f.variation((F(1, 4), F(3, 4))) == 6
    assert f.variation((F(0), F(1, 4))) == 0


def test_l1_with_sign_change():
    # line from -1 to 1 on each half: |f| integrates to 1/2
    f = JumpPLFunction((F(0), F(1, 2)), (F(-1), F(-1)), (F(1), F(1)),
                       (F(0), F(0)))
    assert f.l1_norm() == F(1, 2)
    assert f.integral() == 0


@given(seed=seeds)
@settings(max_examples=40, deadline=None)
def test_refine_is_invisible(seed):
    f = rand_f(seed)
    g = f.refine([F(1, 7), F(3, 7), F(6, 7)])
    assert g.n >= f.n
    assert f.equals(g)
    assert g.variation() == f.variation()
    assert g.integral() == f.integral()
    assert g.l1_norm() == f.l1_norm()
    assert g.sup_norm() == f.sup_norm()
    assert f.simplify().equals(f)


@given(seed=seeds)
@settings(max_examples=40, deadline=None)
def test_norm_inequalities(seed):
    f = rand_f(seed)
    g = rand_f(seed + 1)
    s = f.sub(g)
    assert s.variation() <= f.variation() + g.variation()
    assert s.l1_norm() <= f.l1_norm() + g.l1_norm()
    assert f.l1_norm() <= f.sup_norm()
    assert f.scale(F(-3)).variation() == 3 * f.variation()


def test_essentially_equals_ignores_point_values():
    f = JumpPLFunction.constant(F(2))
    g = JumpPLFunction((F(0), F(1, 3)), (F(2), F(2)), (F(2), F(2)),
                       (F(0), F(7)))
    assert g.essentially_equals(f)
    assert not g.equals(f)


# -- exact operator action -------------------------------------------------

def test_P_one_is_one_off_the_grid(keller):
    one = JumpPLFunction.constant(F(1))
    p1 = apply_P(keller, one)
    assert p1.essentially_equals(one)
    for k in range(6):
        assert p1.value(F(k, 6)) == 0
    assert p1.variation() == 12        # six unit dips, each counted twice


def test_P_on_basis_indicators_matches_matrix(keller):
    # dual route: the exact PL action must reproduce the step matrix rows
    for i in range(6):
        f = JumpPLFunction.indicator(F(i, 6), F(i + 1, 6))
        got = apply_P(keller, f)
        bps = [F(k, 6) for k in range(6)]
        want = JumpPLFunction(bps, M_ORACLE[i], M_ORACLE[i], [F(0)] * 6)
        assert got.equals(want)


def test_phi2_is_an_exact_eigenfunction(keller, phi2_pair):
    lam2, phi = phi2_pair
    image = apply_P(keller, phi)
    assert image.equals(phi.scale(lam2))
    assert phi.integral() == 0
    assert phi.variation() == Surd(20, 4)


@given(seed=seeds)
@settings(max_examples=25, deadline=None)
def test_P_preserves_mean_and_contracts_norms(keller, seed):
    f = rand_f(seed)
    pf = apply_P(keller, f)
    assert pf.integral() == f.integral()
    assert pf.l1_norm() <= f.l1_norm()
    assert pf.sup_norm() <= f.sup_norm()


def test_P_is_linear(keller):
    f = rand_f(7)
    g = rand_f(8)
    lhs = apply_P(keller, f.sub(g))
    rhs = apply_P(keller, f).sub(apply_P(keller, g))
    assert lhs.equals(rhs)


def test_apply_P_iterates(keller):
    f = rand_f(3, max_breaks=5)
    seq = apply_P_iterates(keller, f, 3)
    assert len(seq) == 4
    assert seq[0] is f
    assert seq[3].equals(apply_P(keller, apply_P(keller, apply_P(keller, f))))


# -- weight cocycle and LY constants --------------------------------------

def test_weight_cocycle_keller(keller):
    for N in range(1, 7):
        assert sup_gN(keller, N) == F(2, 3) ** N
    assert var_g(keller) == 12
    assert var_gN(keller, 1) == var_g(keller)


def test_ly_constants_frozen(keller):
    c = ly_constants(keller, 0.7)
    assert c.M == 15
    assert c.lam == 3
    assert c.D == 12
    assert len(c.D_list) == 15
    assert c.sup_g == tuple(F(2, 3) ** n for n in range(1, 16))
    assert c.F == pytest.approx(3 / 0.7 ** 14, rel=1e-12)


def test_ly_constants_other_kappa(keller):
    c = ly_constants(keller, 0.69)
    assert c.M == 21
    assert c.F > 0


def test_kappa_rejections(keller):
    for bad in (0.0, 1.0, -0.3, 1.7):
        with pytest.raises(KappaError):
            ly_constants(keller, bad)
    with pytest.raises(KappaError):
        ly_constants(keller, 0.6)      # 2 sup g_M decays exactly like (2/3)^M


def test_ly_needs_markov():
    lift = build_lift(2, (0, F(1, 2), 2), (F(7, 10), F(13, 30)))
    with pytest.raises(NotMarkovError):
        ly_constants(lift, 0.7)


def test_ly_sequence_small_battery(keller):
    consts = ly_constants(keller, 0.7)
    rng = np.random.default_rng(13)
    for _ in range(5):
        f = random_jump_pl(rng, max_breaks=10)
        checks = check_ly_sequence(keller, f, 8, consts)
        assert len(checks) == 8
        assert all(c.passed for c in checks)


# -- spectral projection surrogate ----------------------------------------

def test_projection_kills_constants(keller):
    res = project_phi2(keller, JumpPLFunction.constant(F(5)), 6)
    assert res.sup == 0
    assert all(i == 0 for i in res.increments)


def test_projection_fixes_phi2(keller, phi2_pair):
    _, phi = phi2_pair
    res = project_phi2(keller, phi, 5)
    assert res.function.equals(phi)
    # increments are float diagnostics, so exact zero is not guaranteed
    assert res.increment < 1e-12


def test_projection_converges_on_cosine(keller):
    f, _ = cosine_interpolant(k=1, n_grid=256)
    res = project_phi2(keller, f, 10)
    assert res.sup > 0
    assert res.increment < res.increments[0]
    assert res.increments[-1] < res.increments[-3]


def test_projection_divergence_guard(keller):
    # normalizing by a rate smaller than the essential decay must trip it
    with pytest.raises(ProjectionDivergence):
        project_phi2(keller, JumpPLFunction.sawtooth(), 14, lam=F(1, 2))
