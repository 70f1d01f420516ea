"""Gaussian mollification of piecewise-linear lifts, in closed form.

tau_delta is the convolution of tau with a Gaussian of width delta,
normalized so tau_delta(0) = 0.  Because tau-dot is piecewise constant the
convolution is a finite sum of normal-CDF terms, so tau_delta, its
derivative and (via safeguarded Newton) its inverse are evaluated without
quadrature.  Periodic images are truncated once their tail mass drops
below 1e-16.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import ndtr

from .circlemap import PiecewiseLinearLift, eval_tau

SQRT2PI = math.sqrt(2.0 * math.pi)


class NewtonError(RuntimeError):
    """Inverse iteration failed to reach tolerance; bad delta/K configuration."""


def _phi(t):
    return np.exp(-0.5 * t * t) / SQRT2PI


def _antideriv(t):
    """A(t) = t*Phi(t) + phi(t), the antiderivative of the normal CDF."""
    return t * ndtr(t) + _phi(t)


class MollifiedLift:
    """A lift plus delta; evaluates tau_delta and friends.

    Immutable after construction.  The flattened term arrays hold one
    (lo, hi, slope) triple per lift piece per periodic image |j| <= K.
    """

    __slots__ = ("base", "delta", "K", "newton_tol",
                 "_lo", "_hi", "_s", "_tau_const",
                 "_breaks_f", "_cum_f", "_slopes_f", "smin", "smax")

    def __init__(self, base: PiecewiseLinearLift, delta: float,
                 K: int = None, newton_tol: float = 1e-14):
        if not delta > 0:
            raise ValueError("delta must be positive")
        p = base.p
        if K is None:
            K = max(2, math.ceil(12.0 * delta / p) + 1)
        self.base = base
        self.delta = float(delta)
        self.K = int(K)
        self.newton_tol = float(newton_tol)

        los, his, ss = [], [], []
        for k in range(len(base.slopes)):
            a, b = float(base.breaks[k]), float(base.breaks[k + 1])
            s = float(base.slopes[k])
            for j in range(-self.K, self.K + 1):
                los.append(a + j * p)
                his.append(b + j * p)
                ss.append(s)
        self._lo = np.array(los)
        self._hi = np.array(his)
        self._s = np.array(ss)
        d = self.delta
        # per-term offset making tau_delta(0) = 0 exactly
        self._tau_const = _antideriv(-self._lo / d) - _antideriv(-self._hi / d)

        self._breaks_f = np.array([float(b) for b in base.breaks])
        self._cum_f = np.array([float(c) for c in base.cum])
        self._slopes_f = np.array([float(s) for s in base.slopes])
        self.smin = float(base.min_slope())
        self.smax = float(base.max_slope())

    def __repr__(self):
        return "MollifiedLift(p=%d, delta=%g, K=%d)" % (
            self.base.p, self.delta, self.K)


def mollify(lift: PiecewiseLinearLift, delta: float, K: int = None,
            newton_tol: float = 1e-14) -> MollifiedLift:
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    return MollifiedLift(lift, delta, K=K, newton_tol=newton_tol)


def _reduce_mod_p(x, p):
    x = np.asarray(x, dtype=float)
    n = np.floor(x / p)
    return x - n * p, n


def eval_dtau_delta(m: MollifiedLift, x):
    """tau_delta'(x) = sum of slope-weighted CDF differences; p-periodic."""
    xr, _ = _reduce_mod_p(x, m.base.p)
    d = m.delta
    out = np.empty_like(xr)
    flat = xr.reshape(-1)
    res = out.reshape(-1)
    step = max(1, 2 ** 22 // max(1, m._lo.size))
    for i in range(0, flat.size, step):
        xs = flat[i:i + step, None]
        res[i:i + step] = np.sum(
            m._s * (ndtr((xs - m._lo) / d) - ndtr((xs - m._hi) / d)), axis=1)
    if np.ndim(x) == 0:
        return float(out)
    return out


def eval_tau_delta(m: MollifiedLift, x):
    """tau_delta(x); exact periodic extension tau_delta(x+p) = tau_delta(x)+1."""
    xr, n = _reduce_mod_p(x, m.base.p)
    d = m.delta
    out = np.empty_like(xr)
    flat = xr.reshape(-1)
    res = out.reshape(-1)
    step = max(1, 2 ** 22 // max(1, m._lo.size))
    for i in range(0, flat.size, step):
        xs = flat[i:i + step, None]
        res[i:i + step] = np.sum(
            m._s * d * (_antideriv((xs - m._lo) / d)
                        - _antideriv((xs - m._hi) / d)
                        - m._tau_const), axis=1)
    out = out + n
    if np.ndim(x) == 0:
        return float(out)
    return out


def _tau_inv_exact_float(m: MollifiedLift, y):
    """Float evaluation of the exact piecewise inverse, as a Newton seed."""
    k = np.clip(np.searchsorted(m._cum_f, y, side="right") - 1,
                0, m._slopes_f.size - 1)
    return m._breaks_f[k] + (y - m._cum_f[k]) / m._slopes_f[k]


def eval_tau_delta_inv(m: MollifiedLift, y, max_iter: int = 200):
    """Solve tau_delta(x) = y; returns x with y reduced mod 1 into [0, p).

    Newton from the exact-lift inverse seed, with a bisection safeguard;
    the global derivative bounds make the bracketed iteration convergent.
    """
    scalar = np.ndim(y) == 0
    y = np.atleast_1d(np.asarray(y, dtype=float))
    n = np.floor(y)
    yr = y - n
    p = float(m.base.p)
    lo = np.zeros_like(yr)
    hi = np.full_like(yr, p)
    x = np.clip(_tau_inv_exact_float(m, yr), 0.0, p)
    tol = m.newton_tol
    dmin = max(0.5 * m.smin, 1e-12)
    fx = eval_tau_delta(m, x) - yr
    for _ in range(max_iter):
        if np.all(np.abs(fx) < tol):
            break
        lo = np.where(fx < 0, np.maximum(lo, x), lo)
        hi = np.where(fx > 0, np.minimum(hi, x), hi)
        deriv = np.maximum(eval_dtau_delta(m, x), dmin)
        xn = x - fx / deriv
        bad = (xn <= lo) | (xn >= hi) | ~np.isfinite(xn)
        xn = np.where(bad, 0.5 * (lo + hi), xn)
        x = np.where(np.abs(fx) < tol, x, xn)
        fx = eval_tau_delta(m, x) - yr
    else:
        raise NewtonError("tau_delta inverse: tolerance %g not reached in %d "
                          "iterations at delta=%g" % (tol, max_iter, m.delta))
    out = x + n * p
    if scalar:
        return float(out[0])
    return out


def map_T_delta(m: MollifiedLift, y):
    """The mollified circle map T_delta(y) = tau_delta^{-1}(y) mod 1."""
    return eval_tau_delta_inv(m, y) % 1.0


def apply_P_delta(m: MollifiedLift, f: Callable, x):
    """(P_delta f)(x) = sum_j tau_delta'(x+j) f(tau_delta(x+j) mod 1)."""
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    acc = np.zeros_like(x)
    for j in range(m.base.p):
        w = eval_dtau_delta(m, x + j)
        y = eval_tau_delta(m, x + j) % 1.0
        acc += w * np.asarray(f(y), dtype=float)
    if scalar:
        return float(acc[0])
    return acc


def apply_P_delta_n(m: MollifiedLift, f: Callable, x, n: int,
                    grid: int = 8192) -> np.ndarray:
    """P_delta^n f sampled at x, via grid-resampled repeated application.

    Each application is exact at the grid nodes; between nodes the iterate
    is linearly interpolated before the next application.
    """
    xs = np.arange(grid) / grid
    vals = np.asarray(f(xs), dtype=float)
    for _ in range(n):
        cur = vals
        g = lambda y, c=cur: np.interp(y, xs, c, period=1.0)
        vals = apply_P_delta(m, g, xs)
    return np.interp(np.asarray(x, dtype=float) % 1.0, xs, vals, period=1.0)


def grid_variation_Pn(m: MollifiedLift, f, n: int, grid: int) -> float:
    """Grid lower bound for var(P_delta^n f); f is a JumpPLFunction.

    A grid sum of |increments| never exceeds the true variation, so checks
    that pass against this value are sound.
    """
    ev = pl_float_evaluator(f)
    xs = np.arange(grid) / grid
    vals = np.asarray(ev(xs), dtype=float)
    for _ in range(n):
        cur = vals
        g = lambda y, c=cur: np.interp(y, xs, c, period=1.0)
        vals = apply_P_delta(m, g, xs)
    return float(np.sum(np.abs(np.diff(vals))) + abs(vals[0] - vals[-1]))


def pl_float_evaluator(f) -> Callable:
    """Vectorized float evaluator of a JumpPLFunction (ignores point values).

    Point values sit on a null set; for quadrature and grid work the
    one-sided limits are the right values.
    """
    n = f.n
    bps = np.array([float(b) for b in f.bps])
    starts = np.array([float(v) for v in f.starts])
    ends = np.array([float(v) for v in f.ends])
    widths = np.array([float(f.width(i)) for i in range(n)])

    def ev(x):
        x = np.asarray(x, dtype=float) % 1.0
        i = np.searchsorted(bps, x, side="right") - 1
        i = np.where(i < 0, n - 1, i)
        off = x - bps[i]
        off = np.where(off < 0, off + 1.0, off)
        t = off / widths[i]
        return starts[i] + (ends[i] - starts[i]) * t

    return ev


# ---------------------------------------------------------------------------
# Approximation bound  ||P_delta f - P f||_1 <= 2 C0 delta |||f|||
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class C0Estimate:
    sup_inv: float    # sup |tau_delta^{-1} - tau^{-1}| / delta
    int_dtau: float   # int_0^p |tau_delta' - tau'| / delta
    C0: float         # max of the two


def estimate_C0(lift: PiecewiseLinearLift, delta: float,
                grid: int = 1 << 16) -> C0Estimate:
    """Estimate the approximation constant from its two defining quantities.

    Both are measured on dense grids refined near the lift breakpoints,
    where all the delta-scale structure lives.
    """
    m = mollify(lift, delta)
    p = lift.p
    # sup |tau_delta^{-1}(y) - tau^{-1}(y)| over y in [0,1)
    ys = np.arange(grid) / grid
    extra = []
    for b in lift.breaks:     # inverse displacement peaks near tau(breaks)
        yb = float(eval_tau(lift, b) % 1)
        extra.append(yb + delta * np.linspace(-6, 6, 121))
    ys = np.concatenate([ys] + extra) % 1.0
    a = float(np.max(np.abs(eval_tau_delta_inv(m, ys)
                            - _tau_inv_exact_float(m, ys)))) / delta
    # int_0^p |tau_delta' - tau'| via per-piece midpoint sums on fine grids
    total = 0.0
    for k in range(len(lift.slopes)):
        lo, hi = float(lift.breaks[k]), float(lift.breaks[k + 1])
        n_sub = max(2048, int((hi - lo) / max(delta / 32.0, 1e-6)))
        xs = lo + (hi - lo) * (np.arange(n_sub) + 0.5) / n_sub
        diff = np.abs(eval_dtau_delta(m, xs) - float(lift.slopes[k]))
        total += float(np.sum(diff)) * (hi - lo) / n_sub
    b_q = total / delta
    return C0Estimate(sup_inv=a, int_dtau=b_q, C0=max(a, b_q))


@dataclass(frozen=True)
class ApproxCheck:
    delta: float
    lhs: float          # int |P_delta f - P f|
    rhs: float          # 2 C0 delta |||f|||
    norm3: float        # |||f||| = var f + ||f||_1
    C0: float
    passed: bool


_GL_CACHE = {}


def _gl_nodes(order: int):
    if order not in _GL_CACHE:
        _GL_CACHE[order] = np.polynomial.legendre.leggauss(order)
    return _GL_CACHE[order]


def approx_bound_check(lift: PiecewiseLinearLift, delta: float, f,
                       c0: C0Estimate = None, order: int = 32) -> ApproxCheck:
    """Check ||P_delta f - P f||_1 <= 2 C0 delta (var f + ||f||_1).

    The integrand is piecewise smooth between the breakpoints of the exact
    Pf with features on scale delta, so panels are split at those points
    and subdivided to width ~ delta before Gauss-Legendre quadrature.
    """
    from .bvcalc import apply_P  # local import: bvcalc pulls this module too
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0,1)")
    if c0 is None:
        c0 = estimate_C0(lift, delta)
    m = mollify(lift, delta)
    pf = apply_P(lift, f)
    ev_f = pl_float_evaluator(f)
    ev_pf = pl_float_evaluator(pf)

    cuts = sorted({float(b) for b in pf.bps} | {0.0, 1.0})
    if cuts[0] > 0.0:
        cuts = [0.0] + cuts
    if cuts[-1] < 1.0:
        cuts = cuts + [1.0]
    nodes, weights = _gl_nodes(order)
    h_max = max(delta / 2.0, 1.0 / 4096.0)
    lhs = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        if b <= a:
            continue
        n_sub = max(1, math.ceil((b - a) / h_max))
        edges = np.linspace(a, b, n_sub + 1)
        mid = 0.5 * (edges[:-1] + edges[1:])
        half = 0.5 * (edges[1:] - edges[:-1])
        xs = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
        diff = np.abs(apply_P_delta(m, ev_f, xs) - ev_pf(xs))
        lhs += float(np.sum(diff.reshape(n_sub, -1) * weights[None, :]
                            * half[:, None]))
    norm3 = float(f.variation() + f.l1_norm())
    rhs = 2.0 * c0.C0 * delta * norm3
    return ApproxCheck(delta=delta, lhs=lhs, rhs=rhs, norm3=norm3,
                       C0=c0.C0, passed=lhs <= rhs)


# ---------------------------------------------------------------------------
# Mollified derivative / cocycle bounds
# ---------------------------------------------------------------------------

def chain_sup_profile(m: MollifiedLift, k_max: int,
                      grid: Optional[int] = None) -> List[float]:
    """[sup g_{delta,k} for k = 1..k_max] by dynamic programming on a grid.

    V_r(x) = max_j tau_delta'(x+j) V_{r-1}(tau_delta(x+j)), V_0 = 1; the
    grid max of V_k equals sup g_{delta,k} = 1 / inf |(T_delta^k)'| up to
    interpolation error.
    """
    if grid is None:
        grid = (1 << 14) * k_max
    xs = np.arange(grid) / grid
    p = m.base.p
    dt = [eval_dtau_delta(m, xs + j) for j in range(p)]
    ta = [eval_tau_delta(m, xs + j) % 1.0 for j in range(p)]
    v = np.ones_like(xs)
    sups = []
    for _ in range(k_max):
        nxt = np.full_like(xs, -np.inf)
        for j in range(p):
            cand = dt[j] * np.interp(ta[j], xs, v, period=1.0)
            np.maximum(nxt, cand, out=nxt)
        v = nxt
        sups.append(float(np.max(v)))
    return sups


def _chain_sup(m: MollifiedLift, k: int, grid: int) -> float:
    return chain_sup_profile(m, k, grid)[-1]


def derivative_inf_delta(m: MollifiedLift, k: int, grid: int = None) -> float:
    """Grid minimum of |(T_delta^k)'|; theta_k estimate is inf^(-1/k)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if grid is None:
        grid = (1 << 14) * k
    return 1.0 / _chain_sup(m, k, grid)


def sup_g_delta_N(m: MollifiedLift, N: int, grid: int = None) -> float:
    """Grid estimate of ||g_{delta,N}||_inf."""
    if N < 1:
        raise ValueError("N must be >= 1")
    if grid is None:
        grid = (1 << 14) * N
    return _chain_sup(m, N, grid)
