"""Exact bounded-variation calculus for piecewise-linear circle functions.

The working type is :class:`JumpPLFunction`: finitely many breakpoints on
the circle, an affine function on each open piece, and an explicit point
value at every breakpoint.  Jumps and the dips to zero at singular points
are therefore first-class: the pointwise total variation counts them all,
which is the convention the transfer-operator estimates depend on.

Everything here is exact.  Values are ``Fraction`` or quadratic
:class:`~circlespec.surd.Surd` scalars; floating point appears only in
reported diagnostics (slacks, error proxies), never in the operator
arithmetic.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Callable, Iterable, List, Optional, Sequence, Tuple, Union

from .circlemap import (BranchSystem, NotMarkovError, PiecewiseLinearLift,
                        branch_system, eval_tau, eval_tau_inv)
from .steptransfer import StepFunction
from .surd import Surd

Scalar = Union[Fraction, Surd]

LAMBDA2 = Surd(Fraction(-1, 6), Fraction(-1, 6), 13)   # -(1+sqrt(13))/6
LAMBDA2_INV = Surd(Fraction(1, 2), Fraction(-1, 2), 13)  # (1-sqrt(13))/2


def _sign(x) -> int:
    if isinstance(x, Surd):
        return x.sign()
    return (x > 0) - (x < 0)


def _as_scalar(x) -> Scalar:
    if isinstance(x, Surd):
        return x
    return Fraction(x)


class JumpPLFunction:
    """Piecewise-affine circle function with explicit jump data.

    ``bps`` are sorted breakpoints in [0, 1); piece i lives on the open arc
    from bps[i] to bps[i+1] (cyclically) with one-sided limits ``starts[i]``
    at its left end and ``ends[i]`` at its right end; ``points[i]`` is the
    value exactly at bps[i].  Instances are treated as immutable.
    """

    __slots__ = ("bps", "starts", "ends", "points", "_slopes")

    def __init__(self, bps, starts, ends, points):
        bps = tuple(Fraction(b) % 1 for b in bps)
        if len(bps) == 0:
            raise ValueError("need at least one breakpoint")
        if any(not a < b for a, b in zip(bps, bps[1:])):
            raise ValueError("breakpoints must be strictly increasing in [0,1)")
        n = len(bps)
        if not (len(starts) == len(ends) == len(points) == n):
            raise ValueError("starts, ends, points must match breakpoints")
        self.bps = bps
        self.starts = tuple(_as_scalar(v) for v in starts)
        self.ends = tuple(_as_scalar(v) for v in ends)
        self.points = tuple(_as_scalar(v) for v in points)
        self._slopes = None

    # -- constructors ------------------------------------------------------

    @classmethod
    def constant(cls, c) -> "JumpPLFunction":
        return cls((Fraction(0),), (c,), (c,), (c,))

    @classmethod
    def from_step(cls, step: StepFunction) -> "JumpPLFunction":
        """Embed a grid step function, zero point values at the grid."""
        q = step.q
        bps = [Fraction(k, q) for k in range(q)]
        vals = list(step.values)
        zeros = [Fraction(0)] * q
        return cls(bps, vals, vals, zeros)

    @classmethod
    def indicator(cls, a, b) -> "JumpPLFunction":
        """1 on the arc (a, b), 0 outside and at the endpoints."""
        a = Fraction(a) % 1
        b = Fraction(b) % 1
        if a == b:
            raise ValueError("empty indicator arc")
        one, zero = Fraction(1), Fraction(0)
        if a < b:
            return cls((a, b), (one, zero), (one, zero), (zero, zero))
        return cls((b, a), (zero, one), (zero, one), (zero, zero))

    @classmethod
    def from_samples(cls, xs: Sequence, ys: Sequence) -> "JumpPLFunction":
        """Continuous interpolant through (xs[i], ys[i]), cyclic closure."""
        n = len(xs)
        starts = list(ys)
        ends = [ys[(i + 1) % n] for i in range(n)]
        return cls(xs, starts, ends, list(ys))

    @classmethod
    def sawtooth(cls) -> "JumpPLFunction":
        """x mod 1, with value 0 at the wrap point."""
        z = Fraction(0)
        return cls((z,), (z,), (Fraction(1),), (z,))

    # -- geometry ----------------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.bps)

    def width(self, i: int) -> Fraction:
        n = self.n
        if n == 1:
            return Fraction(1)
        nxt = self.bps[(i + 1) % n]
        w = nxt - self.bps[i]
        return w if w > 0 else w + 1

    def piece_slopes(self) -> tuple:
        if self._slopes is None:
            self._slopes = tuple((self.ends[i] - self.starts[i]) / self.width(i)
                                 for i in range(self.n))
        return self._slopes

    def _piece_of(self, x: Fraction) -> Tuple[int, Fraction]:
        """Piece index containing x (not a breakpoint) and offset from its left end."""
        i = bisect_right(self.bps, x) - 1
        if i < 0:
            i = self.n - 1
        off = x - self.bps[i]
        if off < 0:
            off += 1
        return i, off

    def _bp_index(self, x: Fraction) -> Optional[int]:
        i = bisect_right(self.bps, x) - 1
        if i >= 0 and self.bps[i] == x:
            return i
        return None

    # -- evaluation --------------------------------------------------------

    def value(self, x) -> Scalar:
        x = Fraction(x) % 1
        j = self._bp_index(x)
        if j is not None:
            return self.points[j]
        i, off = self._piece_of(x)
        return self.starts[i] + self.piece_slopes()[i] * off

    def limit(self, x, side: str) -> Scalar:
        """One-sided limit at x; side is '+' or '-'."""
        x = Fraction(x) % 1
        j = self._bp_index(x)
        if j is None:
            return self.value(x)
        if side == "+":
            return self.starts[j]
        if side == "-":
            return self.ends[(j - 1) % self.n]
        raise ValueError("side must be '+' or '-'")

    def __call__(self, x):
        return float(self.value(x))

    # -- integrals and norms ----------------------------------------------

    def integral(self) -> Scalar:
        half = Fraction(1, 2)
        total = Fraction(0)
        for i in range(self.n):
            total = total + self.width(i) * half * (self.starts[i] + self.ends[i])
        return total

    def l1_norm(self) -> Scalar:
        half = Fraction(1, 2)
        total = Fraction(0)
        for i in range(self.n):
            s, e, w = self.starts[i], self.ends[i], self.width(i)
            ss, se = _sign(s), _sign(e)
            if ss * se >= 0:
                total = total + w * half * (abs(s) + abs(e))
            else:
                t0 = w * s / (s - e)   # zero crossing offset
                total = total + half * (abs(s) * t0 + abs(e) * (w - t0))
        return total

    def sup_norm(self) -> Scalar:
        best = abs(self.points[0])
        for seq in (self.starts, self.ends, self.points):
            for v in seq:
                a = abs(v)
                if a > best:
                    best = a
        return best

    def variation(self, interval: Optional[Tuple] = None) -> Scalar:
        """Pointwise total variation, on the circle or a closed sub-interval.

        Every breakpoint contributes its full oscillation through the point
        value, so dips to zero at singular points are counted twice, once
        down and once up.
        """
        if interval is None:
            total = Fraction(0)
            n = self.n
            for i in range(n):
                total = total + abs(self.ends[i] - self.starts[i])
            for i in range(n):
                left = self.ends[(i - 1) % n]
                total = total + abs(self.points[i] - left) + abs(self.starts[i] - self.points[i])
            return total
        a, b = Fraction(interval[0]), Fraction(interval[1])
        if not 0 <= a < b <= 1:
            raise ValueError("interval must satisfy 0 <= a < b <= 1")
        g = self.refine([a % 1, b % 1])
        ia = g._bp_index(a % 1)
        ib = g._bp_index(b % 1)
        total = abs(g.starts[ia] - g.points[ia])
        i = ia
        while True:
            total = total + abs(g.ends[i] - g.starts[i])
            j = (i + 1) % g.n
            total = total + abs(g.points[j] - g.ends[i])
            if j == ib:
                break
            total = total + abs(g.starts[j] - g.points[j])
            i = j
        return total

    def bv_norm(self) -> Scalar:
        """Variation plus L1 norm, the working strong norm."""
        return self.variation() + self.l1_norm()

    # -- structural operations --------------------------------------------

    def refine(self, new_points: Iterable) -> "JumpPLFunction":
        pts = sorted({Fraction(x) % 1 for x in new_points} - set(self.bps))
        if not pts:
            return self
        bps = list(self.bps)
        starts = list(self.starts)
        ends = list(self.ends)
        points = list(self.points)
        for x in pts:
            i = bisect_right(bps, x) - 1
            wrap = i < 0           # x precedes bps[0]: split the wrap piece
            if wrap:
                i = len(bps) - 1
            # split piece i at x
            w = bps[(i + 1) % len(bps)] - bps[i]
            if w <= 0:
                w += 1
            off = x - bps[i]
            if off < 0:
                off += 1
            v = starts[i] + (ends[i] - starts[i]) * off / w
            if wrap:
                # the half [x, bps[0]] becomes the new first piece
                bps.insert(0, x)
                starts.insert(0, v)
                ends.insert(0, ends[i])
                points.insert(0, v)
                ends[i + 1] = v
            else:
                bps.insert(i + 1, x)
                starts.insert(i + 1, v)
                ends.insert(i + 1, ends[i])
                ends[i] = v
                points.insert(i + 1, v)
        return JumpPLFunction(bps, starts, ends, points)

    def simplify(self) -> "JumpPLFunction":
        """Drop breakpoints where the function is continuous with equal slopes."""
        n = self.n
        if n == 1:
            return self
        keep = []
        for i in range(n):
            prev = (i - 1) % n
            cont = (self.ends[prev] == self.points[i] == self.starts[i])
            if cont:
                wp, wi = self.width(prev), self.width(i)
                same = (self.ends[prev] - self.starts[prev]) * wi == \
                       (self.ends[i] - self.starts[i]) * wp
            else:
                same = False
            if not (cont and same):
                keep.append(i)
        if len(keep) == n:
            return self
        if not keep:
            # globally affine and continuous on the circle: constant
            return JumpPLFunction.constant(self.points[0])
        bps = [self.bps[i] for i in keep]
        starts = [self.starts[i] for i in keep]
        points = [self.points[i] for i in keep]
        ends = [self.ends[(j - 1) % self.n] for j in keep[1:] + keep[:1]]
        return JumpPLFunction(bps, starts, ends, points)

    def scale(self, c) -> "JumpPLFunction":
        return JumpPLFunction(self.bps, [c * v for v in self.starts],
                              [c * v for v in self.ends], [c * v for v in self.points])

    def add_const(self, c) -> "JumpPLFunction":
        return JumpPLFunction(self.bps, [v + c for v in self.starts],
                              [v + c for v in self.ends], [v + c for v in self.points])

    def sub(self, other: "JumpPLFunction") -> "JumpPLFunction":
        a = self.refine(other.bps)
        b = other.refine(self.bps)
        return JumpPLFunction(a.bps,
                              [x - y for x, y in zip(a.starts, b.starts)],
                              [x - y for x, y in zip(a.ends, b.ends)],
                              [x - y for x, y in zip(a.points, b.points)])

    def equals(self, other: "JumpPLFunction") -> bool:
        a = self.refine(other.bps)
        b = other.refine(self.bps)
        return (a.bps == b.bps and a.starts == b.starts
                and a.ends == b.ends and a.points == b.points)

    def essentially_equals(self, other: "JumpPLFunction") -> bool:
        """Equality off the stored points: one-sided limits agree everywhere.

        Point values may differ on the breakpoint set (a Lebesgue-null set),
        which is exactly the slack the operator's dip convention needs.
        """
        a = self.refine(other.bps)
        b = other.refine(self.bps)
        return a.bps == b.bps and a.starts == b.starts and a.ends == b.ends

    def __repr__(self):
        return "JumpPLFunction(n=%d, bv=%.6g)" % (self.n, float(self.bv_norm()))


def variation(f: JumpPLFunction, interval: Optional[Tuple] = None) -> Scalar:
    return f.variation(interval)


# ---------------------------------------------------------------------------
# Exact transfer operator on JumpPLFunction
# ---------------------------------------------------------------------------

def apply_P(lift: PiecewiseLinearLift, f: JumpPLFunction,
            simplify: bool = True) -> JumpPLFunction:
    """Exact transfer-operator image of f.

    (Pf)(x) = sum over branches j of tau'(x+j) f(tau(x+j) mod 1), with the
    weight set to zero whenever x+j is a breakpoint or integer (the
    singular convention), which makes Pf vanish wherever every preimage is
    singular.  Breakpoints of Pf: lift breakpoints mod 1 plus the unique
    tau-preimage of every breakpoint of f.
    """
    p = lift.p
    pts = {b % 1 for b in lift.breaks}
    for y in f.bps:
        pts.add(eval_tau_inv(lift, y) % 1)
    bps = sorted(pts)
    n = len(bps)
    sing = set(lift.breaks) | {Fraction(k) for k in range(p)}

    # tau values at piece edges, per branch, reusing the shared edge
    starts = [Fraction(0)] * n
    ends = [Fraction(0)] * n
    points = [Fraction(0)] * n
    widths = []
    for i in range(n):
        w = (bps[(i + 1) % n] - bps[i]) % 1
        widths.append(w if w != 0 else Fraction(1))
    for j in range(p):
        edge_tau = [eval_tau(lift, bps[i] + j) for i in range(n)]
        closing = eval_tau(lift, bps[0] + j + 1)   # end of the wrap piece
        for i in range(n):
            u = bps[i]
            s = lift.slopes[lift.piece_index((u + j + widths[i] / 2) % p)]
            y_u = edge_tau[i]
            y_v = edge_tau[i + 1] if i + 1 < n else closing
            starts[i] = starts[i] + s * f.limit(y_u % 1, "+")
            ends[i] = ends[i] + s * f.limit(y_v % 1, "-")
            w_pt = Fraction(0) if (u + j) in sing else \
                lift.slopes[lift.piece_index(u + j)]
            if w_pt != 0:
                points[i] = points[i] + w_pt * f.value(y_u % 1)
    out = JumpPLFunction(bps, starts, ends, points)
    return out.simplify() if simplify else out


def apply_P_iterates(lift: PiecewiseLinearLift, f: JumpPLFunction,
                     n: int) -> List[JumpPLFunction]:
    """[f, Pf, ..., P^n f] with shared work; n+1 entries."""
    out = [f]
    for _ in range(n):
        out.append(apply_P(lift, out[-1]))
    return out


# ---------------------------------------------------------------------------
# Weight cocycle g_N: sup, variation, cylinders
# ---------------------------------------------------------------------------

def _int_cells(bs: BranchSystem):
    """Integer-scaled cell data: (den, slope_nums, mden, measure_nums)."""
    den = math.lcm(*(c.slope.denominator for c in bs.cells))
    mden = math.lcm(*(c.measure.denominator for c in bs.cells))
    s_num = [int(c.slope * den) for c in bs.cells]
    m_num = [int(c.measure * mden) for c in bs.cells]
    return den, s_num, mden, m_num


def sup_gN(lift: PiecewiseLinearLift, N: int) -> Fraction:
    """Exact sup of g_N = product of g along length-N orbit segments.

    Equals the maximum slope product over admissible cell chains; for a
    Markov cell structure this is attained on a cylinder, in general it is
    a sound upper bound realized up to cell-boundary effects.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    bs = branch_system(lift)
    den, s_num, _, _ = _int_cells(bs)
    best = list(s_num)
    for _ in range(N - 1):
        best = [s_num[i] * max(best[j] for j in bs.successors[i])
                for i in range(len(s_num))]
    return Fraction(max(best), den ** N)


def var_g(lift: PiecewiseLinearLift) -> Fraction:
    """Pointwise variation of g on the circle: twice the sum of cell slopes."""
    bs = branch_system(lift)
    return 2 * sum(c.slope for c in bs.cells)


def var_gN(lift: PiecewiseLinearLift, N: int) -> Fraction:
    """Exact pointwise variation of g_N; checks the cocycle variation bounds.

    With the dip convention each level-N cylinder contributes twice its
    plateau, so var(g_N) = 2 * sum over admissible words of the slope
    product.  Requires a Markov cell structure.  The result is verified
    against var(g)^N and 2^(N-1) var(g)^N before returning.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    bs = branch_system(lift)
    if not bs.markov:
        raise NotMarkovError("cylinder enumeration needs Markov branch cells")
    den, s_num, _, _ = _int_cells(bs)
    w = list(s_num)
    for _ in range(N - 1):
        w = [s_num[i] * sum(w[j] for j in bs.successors[i])
             for i in range(len(s_num))]
    total = Fraction(2 * sum(w), den ** N)
    vg = var_g(lift)
    if total > vg ** N or total > 2 ** (N - 1) * vg ** N:
        raise RuntimeError("cocycle variation bound violated; internal error")
    return total


def _cylinders_int(bs: BranchSystem, N: int, s_num, m_num):
    """Yield (width_num, plateau_num) in spatial order.

    width = width_num / (mden * den^(N-1)), plateau = plateau_num / den^N.
    """
    succ = bs.successors
    for i0 in range(len(s_num)):
        stack = [(i0, 1, s_num[i0])]
        while stack:
            i, d, prod = stack.pop()
            if d == N:
                yield (m_num[i] * (prod // s_num[i]), prod)
                continue
            for j in reversed(succ[i]):
                stack.append((j, d + 1, prod * s_num[j]))


@dataclass(frozen=True)
class LYConstants:
    """Uniform Lasota-Yorke data at contraction target kappa.

    M is the smallest horizon with 2 ||g_M||_inf < kappa^M; lam is the
    uniform partition variation cap (3 works for every admissible lift
    since slopes never exceed 1); D_list holds the exact partition
    constants D_1..D_M; F is the final prefactor
    max(D / (1 - kappa^M), lam / kappa^(M-1)).
    """

    kappa: float
    M: int
    lam: Fraction
    D_list: tuple
    D: Fraction
    F: float
    sup_g: tuple


class KappaError(ValueError):
    """kappa is not attainable: no horizon M satisfies 2||g_M|| < kappa^M."""


def ly_constants(lift: PiecewiseLinearLift, kappa: float,
                 M_cap: int = 64) -> LYConstants:
    """Compute the explicit Lasota-Yorke constants for var(P^n f).

    The greedy partition scan closes an atom just before its accumulated
    variation would exceed lam - ||g_N||_inf, then D_N is the exact maximum
    of atom variation over atom measure.
    """
    if not 0 < kappa < 1:
        raise KappaError("kappa must lie in (0, 1)")
    bs = branch_system(lift)
    if not bs.markov:
        raise NotMarkovError("ly_constants needs Markov branch cells")
    kf = Fraction(kappa)
    den, s_num, mden, m_num = _int_cells(bs)

    sup_list = []
    best = list(s_num)
    M = None
    for N in range(1, M_cap + 1):
        supN = Fraction(max(best), den ** N)
        sup_list.append(supN)
        if 2 * supN < kf ** N:
            M = N
            break
        best = [s_num[i] * max(best[j] for j in bs.successors[i])
                for i in range(len(s_num))]
    if M is None:
        raise KappaError(
            "no M <= %d with 2 sup g_M < kappa^M; kappa=%g is at or below the "
            "expansion exponent" % (M_cap, kappa))

    lam = Fraction(3)
    D_list = []
    for N in range(1, M + 1):
        capf = lam - sup_list[N - 1]
        cap_scaled_num = capf.numerator * den ** N
        cap_scaled_den = capf.denominator
        # atom variation (scaled by den^N) must stay <= cap
        best_D = Fraction(0)
        var_acc = 0
        meas_acc = 0
        for width, plateau in _cylinders_int(bs, N, s_num, m_num):
            contrib = 2 * plateau
            if var_acc > 0 and (var_acc + contrib) * cap_scaled_den > cap_scaled_num:
                cand = Fraction(var_acc * mden, den * meas_acc)
                if cand > best_D:
                    best_D = cand
                var_acc, meas_acc = contrib, width
            else:
                var_acc += contrib
                meas_acc += width
        if meas_acc > 0:
            cand = Fraction(var_acc * mden, den * meas_acc)
            if cand > best_D:
                best_D = cand
        D_list.append(best_D)
    D = max(D_list)
    F = max(float(D) / (1.0 - kappa ** M), float(lam) / kappa ** (M - 1))
    return LYConstants(kappa=kappa, M=M, lam=lam, D_list=tuple(D_list), D=D,
                       F=F, sup_g=tuple(sup_list))


# ---------------------------------------------------------------------------
# Lasota-Yorke inequality checks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LYCheck:
    n: int
    lhs: float
    rhs: float
    slack: float
    exact: bool

    @property
    def passed(self) -> bool:
        return self.lhs <= self.rhs


def check_ly_sequence(lift: PiecewiseLinearLift, f: JumpPLFunction, n_max: int,
                      consts: LYConstants) -> List[LYCheck]:
    """var(P^n f) <= F (kappa^n var f + ||f||_1) for n = 1..n_max, exactly.

    The left side is the exact pointwise variation of the exact iterate;
    only the final comparison against the float right side leaves exact
    arithmetic.
    """
    var0 = float(f.variation())
    l1 = float(f.l1_norm())
    out = []
    g = f
    for n in range(1, n_max + 1):
        g = apply_P(lift, g)
        lhs = float(g.variation())
        rhs = consts.F * (consts.kappa ** n * var0 + l1)
        out.append(LYCheck(n=n, lhs=lhs, rhs=rhs, slack=rhs - lhs, exact=True))
    return out


def check_ly(system, f: JumpPLFunction, n: int, consts: LYConstants,
             grid: int = 4096) -> LYCheck:
    """Single Lasota-Yorke check at horizon n.

    Accepts an exact lift (exact variation) or a mollified lift, for which
    the left side is a grid lower bound of the variation of P_delta^n f;
    a failing grid check is refined twice before being reported.
    """
    from .mollifier import MollifiedLift, grid_variation_Pn  # local: avoid cycle
    if isinstance(system, PiecewiseLinearLift):
        return check_ly_sequence(system, f, n, consts)[-1]
    if not isinstance(system, MollifiedLift):
        raise TypeError("expected a lift or a mollified lift")
    var0 = float(f.variation())
    l1 = float(f.l1_norm())
    rhs = consts.F * (consts.kappa ** n * var0 + l1)
    m = grid
    lhs = grid_variation_Pn(system, f, n, m)
    while lhs > rhs and m < 4 * grid:
        m *= 2
        lhs = grid_variation_Pn(system, f, n, m)
    return LYCheck(n=n, lhs=lhs, rhs=rhs, slack=rhs - lhs, exact=False)


# ---------------------------------------------------------------------------
# Spectral projector surrogate
# ---------------------------------------------------------------------------

class ProjectionDivergence(RuntimeError):
    """Cauchy increments failed to decay: input outside the method's domain."""


@dataclass(frozen=True)
class ProjectionResult:
    function: JumpPLFunction     # lambda2^{-n} (P^n f - m(f))
    increment: float             # sup |z_n - z_{n-1}|, the error proxy
    increments: tuple
    n: int

    @property
    def sup(self) -> float:
        return float(self.function.sup_norm())


def _sup_abs_diff(f: JumpPLFunction, g: JumpPLFunction, coef: float) -> float:
    """Float sup over the circle of |f - coef*g|; exactness not needed here."""
    pts = sorted(set(f.bps) | set(g.bps))
    best = 0.0
    for x in pts:
        for side in ("+", "-"):
            d = abs(float(f.limit(x, side)) - coef * float(g.limit(x, side)))
            if d > best:
                best = d
        d = abs(float(f.value(x)) - coef * float(g.value(x)))
        if d > best:
            best = d
    return best


def project_phi2(lift: PiecewiseLinearLift, f: JumpPLFunction, n: int,
                 lam: Optional[Scalar] = None) -> ProjectionResult:
    """Iterative surrogate for the rank-one spectral projector at lambda2.

    Returns z_n = lam^{-n} (P^n f - m(f) 1) with the last Cauchy increment
    sup |z_n - z_{n-1}| as an error proxy; for inputs with a component on
    the second eigenfunction the iterates converge geometrically at rate
    (2/3) / |lam|.  Persistent increment growth raises
    :class:`ProjectionDivergence`.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if lam is None:
        lam = LAMBDA2
    lam_f = float(lam)
    mean = f.integral()
    w = f.add_const(-mean)
    increments = []
    prev = w
    for k in range(1, n + 1):
        w = apply_P(lift, w)
        inc = _sup_abs_diff(w, prev, lam_f) / abs(lam_f) ** k
        increments.append(inc)
        prev = w
        if k >= 8 and increments[-1] > increments[-4] > 0 and \
                increments[-1] > 4 * min(x for x in increments if x > 0):
            raise ProjectionDivergence(
                "increments rising at step %d: %.3g" % (k, increments[-1]))
    scale = lam ** (-n) if isinstance(lam, Surd) else Fraction(lam) ** (-n)
    z = w.scale(scale)
    return ProjectionResult(function=z, increment=increments[-1],
                            increments=tuple(increments), n=n)


# ---------------------------------------------------------------------------
# Interpolants and batteries
# ---------------------------------------------------------------------------

def pl_interpolant(func: Callable[[float], float], n_grid: int,
                   value_den: int = 2 ** 32) -> JumpPLFunction:
    """Exact piecewise-linear interpolant of a smooth 1-periodic function.

    Samples at k/n_grid are snapped to the lattice Z/value_den, so the
    result is honestly rational while staying within 1/value_den of the
    samples.
    """
    xs = [Fraction(k, n_grid) for k in range(n_grid)]
    ys = [Fraction(round(func(k / n_grid) * value_den), value_den)
          for k in range(n_grid)]
    return JumpPLFunction.from_samples(xs, ys)


def interpolation_var_bound(second_deriv_sup: float, n_grid: int) -> float:
    """Certified variation error of the interpolant: h * sup|f''|."""
    return second_deriv_sup / n_grid


def cosine_interpolant(k: int = 1, n_grid: int = 4096) -> Tuple[JumpPLFunction, float]:
    """Interpolant of cos(2 pi k x) plus its certified variation error."""
    f = pl_interpolant(lambda x: math.cos(2 * math.pi * k * x), n_grid)
    return f, interpolation_var_bound((2 * math.pi * k) ** 2, n_grid)


def random_jump_pl(rng, max_breaks: int = 20) -> JumpPLFunction:
    """Seeded random test function with jumps, dips and slopes.

    Breakpoints on the 1/1024 grid, values on the 1/64 lattice in [-2, 2],
    point values sometimes dipped to zero, sometimes detached.
    """
    n = int(rng.integers(2, max_breaks + 1))
    ks = rng.choice(1024, size=n, replace=False)
    bps = sorted(Fraction(int(k), 1024) for k in ks)
    rnd_val = lambda: Fraction(int(rng.integers(-128, 129)), 64)
    starts = [rnd_val() for _ in range(n)]
    ends = [rnd_val() for _ in range(n)]
    points = []
    for i in range(n):
        mode = rng.integers(0, 3)
        if mode == 0:
            points.append(Fraction(0))
        elif mode == 1:
            points.append(starts[i])
        else:
            points.append(rnd_val())
    return JumpPLFunction(bps, starts, ends, points)
