"""Piecewise-linear lifts of expanding circle maps, in exact rational arithmetic.

A lift is a strictly increasing piecewise-linear tau: R -> R with
tau(x + p) = tau(x) + 1 and tau(0) = 0 for an integer period p >= 1.  The
induced circle map T sends x to tau^{-1}(x) mod 1 and is a p-branched
expanding covering when every slope lies in (0, 1).  The transfer operator
studied throughout the package is the one with weight g = tau' o tau^{-1},
set to zero on the finite singular set S (the tau-images of the breakpoints
and of the integers).

All coordinates here are ``Fraction`` values and every operation is exact;
floating point enters only in the diagnostics that are floats by nature
(theta exponents).
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, NamedTuple, Optional, Sequence, Union

RationalLike = Union[int, str, Fraction]


class LiftError(ValueError):
    """Raised when lift data violates the normalization contract."""


class NotMarkovError(ValueError):
    """Raised when an operation needs a Markov grid the lift does not have."""


def _frac(x: RationalLike) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class PiecewiseLinearLift:
    """Exact lift data: breakpoints of [0, p], one slope per piece.

    ``cum[i]`` caches tau(breaks[i]); the normalization pins cum[0] = 0 and
    cum[-1] = 1 so that tau maps [0, p] onto [0, 1].
    """

    p: int
    breaks: tuple
    slopes: tuple
    cum: tuple

    @property
    def num_pieces(self) -> int:
        return len(self.slopes)

    def piece_index(self, x0: Fraction) -> int:
        """Index of the piece whose closure contains x0 in [0, p]."""
        i = bisect_right(self.breaks, x0) - 1
        return min(max(i, 0), len(self.slopes) - 1)

    def min_slope(self) -> Fraction:
        return min(self.slopes)

    def max_slope(self) -> Fraction:
        return max(self.slopes)


def build_lift(p: int, breaks: Sequence[RationalLike], slopes: Sequence[RationalLike]) -> PiecewiseLinearLift:
    """Validate and construct a lift.

    Requirements: breaks strictly increasing from 0 to p, all slopes in
    (0, 1], and sum(slope * width) = 1 so that tau(p) = 1.  Violations raise
    :class:`LiftError`.
    """
    p = int(p)
    if p < 1:
        raise LiftError("period p must be a positive integer")
    bs = tuple(_frac(b) for b in breaks)
    ss = tuple(_frac(s) for s in slopes)
    if len(bs) < 2 or len(ss) != len(bs) - 1:
        raise LiftError("need K+1 breaks and K slopes")
    if bs[0] != 0 or bs[-1] != p:
        raise LiftError("breaks must start at 0 and end at p")
    for a, b in zip(bs, bs[1:]):
        if not a < b:
            raise LiftError("breaks must be strictly increasing")
    for s in ss:
        if not (0 < s <= 1):
            raise LiftError("slopes must lie in (0, 1]")
    total = sum(s * (b - a) for s, a, b in zip(ss, bs, bs[1:]))
    if total != 1:
        raise LiftError("slope-weighted widths must sum to 1, got %s" % total)
    cum = [Fraction(0)]
    for s, a, b in zip(ss, bs, bs[1:]):
        cum.append(cum[-1] + s * (b - a))
    return PiecewiseLinearLift(p=p, breaks=bs, slopes=ss, cum=tuple(cum))


def keller_rugh() -> PiecewiseLinearLift:
    """The canonical 2-branch example on the grid of sixths.

    Twelve pieces with slopes (2/3, 1/3, 1/2, 1/2, 2/3, 1/3, 1/3, 2/3, 1/2,
    1/2, 1/3, 2/3); opposite pieces pair to slope sum 1, so Lebesgue measure
    is invariant.  T has a fixed point at 0 with multiplier 3/2.
    """
    breaks = [Fraction(k, 6) for k in range(13)]
    slopes = [Fraction(n, d) for n, d in
              [(2, 3), (1, 3), (1, 2), (1, 2), (2, 3), (1, 3),
               (1, 3), (2, 3), (1, 2), (1, 2), (1, 3), (2, 3)]]
    return build_lift(2, breaks, slopes)


def doubling_lift() -> PiecewiseLinearLift:
    """Lift of the angle-doubling map: constant slope 1/2 over [0, 2]."""
    return build_lift(2, [0, 2], [Fraction(1, 2)])


def eval_tau(lift: PiecewiseLinearLift, x: RationalLike) -> Fraction:
    """tau(x) for any rational x, using tau(x + p) = tau(x) + 1."""
    x = _frac(x)
    n = x // lift.p
    x0 = x - n * lift.p
    i = lift.piece_index(x0)
    return lift.cum[i] + lift.slopes[i] * (x0 - lift.breaks[i]) + n


def eval_tau_inv(lift: PiecewiseLinearLift, y: RationalLike) -> Fraction:
    """The unique x with tau(x) = y; exact, inverse of :func:`eval_tau`."""
    y = _frac(y)
    n = y // 1
    y0 = y - n
    i = bisect_right(lift.cum, y0) - 1
    i = min(max(i, 0), len(lift.slopes) - 1)
    return lift.breaks[i] + (y0 - lift.cum[i]) / lift.slopes[i] + n * lift.p


def map_T(lift: PiecewiseLinearLift, x: RationalLike) -> Fraction:
    """The circle map T(x) = tau^{-1}(x) mod 1, on representatives in [0, 1)."""
    x0 = _frac(x) % 1
    w = eval_tau_inv(lift, x0)
    return w % 1


def singular_set(lift: PiecewiseLinearLift) -> tuple:
    """S: tau-images (mod 1) of the breakpoints and integers of [0, p)."""
    cuts = set(lift.breaks[:-1]) | {Fraction(k) for k in range(lift.p)}
    return tuple(sorted(eval_tau(lift, c) % 1 for c in cuts))


def weight_g(lift: PiecewiseLinearLift, x: RationalLike) -> Fraction:
    """Transfer-operator weight g(x) = tau'(tau^{-1}(x)), zero on S.

    The zero convention at the singular points makes g well defined
    everywhere and pins the pointwise-variation bookkeeping used by the BV
    module.
    """
    x0 = _frac(x) % 1
    w = eval_tau_inv(lift, x0)
    if w == w // 1 or w in lift.breaks:
        return Fraction(0)
    return lift.slopes[lift.piece_index(w)]


def branch_points(lift: PiecewiseLinearLift, x: RationalLike) -> tuple:
    """The p preimages of x under T: tau(x0 + j) mod 1 for j = 0..p-1."""
    x0 = _frac(x) % 1
    return tuple(eval_tau(lift, x0 + j) % 1 for j in range(lift.p))


# ---------------------------------------------------------------------------
# Branch cells and symbolic structure
# ---------------------------------------------------------------------------

class Cell(NamedTuple):
    """One monotone branch piece, viewed on the image circle.

    ``lo``/``hi`` bound the cell D = (tau(a), tau(b)) in [0, 1]; ``a``/``b``
    are the matching lift coordinates; ``slope`` is tau' there; the T-image
    of the cell is (a - shift, b - shift) with the integer ``shift``.
    """

    lo: Fraction
    hi: Fraction
    a: Fraction
    b: Fraction
    slope: Fraction
    shift: int

    @property
    def measure(self) -> Fraction:
        return self.hi - self.lo

    @property
    def image_lo(self) -> Fraction:
        return self.a - self.shift

    @property
    def image_hi(self) -> Fraction:
        return self.b - self.shift


@dataclass(frozen=True)
class BranchSystem:
    """Branch decomposition of T with successor structure.

    ``beta`` is the coarse branch partition [tau(k-1), tau(k)], k = 1..p.
    ``cells`` refines it at every breakpoint image and tiles [0, 1] in
    order.  ``successors[i]`` lists cells meeting T(cells[i]) in positive
    measure; ``markov`` says whether every T-image is an exact union of
    cells, which is what the symbolic cylinder machinery requires.
    """

    lift: PiecewiseLinearLift
    S: tuple
    beta: tuple
    cells: tuple
    successors: tuple
    markov: bool

    def branches(self, x: RationalLike) -> tuple:
        return branch_points(self.lift, x)


def branch_system(lift: PiecewiseLinearLift) -> BranchSystem:
    # cut the lift pieces at the integers so no cell straddles a branch
    cuts = sorted(set(lift.breaks) | {Fraction(k) for k in range(lift.p + 1)})
    cells = []
    for a, b in zip(cuts, cuts[1:]):
        mid = (a + b) / 2
        s = lift.slopes[lift.piece_index(mid)]
        cells.append(Cell(lo=eval_tau(lift, a), hi=eval_tau(lift, b),
                          a=a, b=b, slope=s, shift=int(a // 1)))
    edges = sorted({c.lo for c in cells} | {cells[-1].hi})
    markov = True
    succ = []
    for c in cells:
        ilo, ihi = c.image_lo, c.image_hi
        if ilo not in edges or ihi not in edges:
            markov = False
        members = tuple(j for j, cj in enumerate(cells)
                        if max(cj.lo, ilo) < min(cj.hi, ihi))
        succ.append(members)
        # exact-union test: successor cells must sit inside the image
        for j in members:
            if cells[j].lo < ilo or cells[j].hi > ihi:
                markov = False
    beta = tuple((eval_tau(lift, k), eval_tau(lift, k + 1)) for k in range(lift.p))
    return BranchSystem(lift=lift, S=singular_set(lift), beta=beta,
                        cells=tuple(cells), successors=tuple(succ), markov=markov)


class DerivativeInf(NamedTuple):
    inf: Fraction      # exact inf over x of |(T^k)'(x)|
    theta: float       # inf ** (-1/k), the k-th root diagnostic
    k: int


def derivative_inf(lift: PiecewiseLinearLift, k: int) -> DerivativeInf:
    """Exact inf |(T^k)'| via the maximal slope product over branch chains.

    (T^k)' along an orbit is the reciprocal of a product of k lift slopes
    taken along an admissible cell chain, so the exact infimum is 1 over the
    maximum product over paths of length k in the successor graph.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    bs = branch_system(lift)
    best = [c.slope for c in bs.cells]
    for _ in range(k - 1):
        nxt = []
        for i, c in enumerate(bs.cells):
            m = max(best[j] for j in bs.successors[i])
            nxt.append(c.slope * m)
        best = nxt
    prod = max(best)
    inf = 1 / prod
    return DerivativeInf(inf=inf, theta=float(prod) ** (1.0 / k), k=k)


# ---------------------------------------------------------------------------
# Markov grid check and reporting
# ---------------------------------------------------------------------------

class BranchImageRow(NamedTuple):
    piece: tuple        # (lo, hi) of the cell on the image circle
    image: tuple        # (lo, hi) of its T-image
    on_grid: bool       # both image endpoints lie on {j/q}


@dataclass(frozen=True)
class MarkovReport:
    markov: bool
    q: Optional[int]
    tested: tuple
    rows: tuple
    message: str


def natural_grid(lift: PiecewiseLinearLift) -> int:
    """lcm of the breakpoint denominators: the finest grid breaks live on."""
    return math.lcm(*(b.denominator for b in lift.breaks))


def _grid_preserves_steps(lift: PiecewiseLinearLift, q: int) -> bool:
    """True iff P maps step functions on {j/q} to step functions on {j/q}.

    Needs every breakpoint on the grid and every tau-image of a grid atom
    inside a single atom (no interior grid crossing).
    """
    for b in lift.breaks:
        if (b * q).denominator != 1:
            return False
    for i in range(q * lift.p):
        lo = Fraction(i, q)
        hi = Fraction(i + 1, q)
        ylo = eval_tau(lift, lo)
        yhi = eval_tau(lift, hi)
        # first grid point strictly above ylo must be >= yhi
        nlo = (ylo * q) // 1 + 1
        if Fraction(nlo, q) < yhi:
            return False
    return True


def markov_check(lift: PiecewiseLinearLift, q: Optional[int] = None,
                 multiples: int = 4) -> MarkovReport:
    """Report whether the step spaces on grid q are preserved.

    With q omitted, the natural grid and its small multiples are tried in
    turn.  The report lists each branch cell with its T-image and whether
    the image endpoints lie on the winning grid (on the natural grid when
    nothing works).
    """
    q0 = natural_grid(lift) if q is None else int(q)
    candidates = [q0] if q is not None else [q0 * m for m in range(1, multiples + 1)]
    found = None
    for cand in candidates:
        if _grid_preserves_steps(lift, cand):
            found = cand
            break
    report_q = found if found is not None else q0
    bs = branch_system(lift)
    rows = []
    for c in bs.cells:
        ilo, ihi = c.image_lo, c.image_hi
        on_grid = ((ilo * report_q).denominator == 1
                   and (ihi * report_q).denominator == 1)
        rows.append(BranchImageRow(piece=(c.lo, c.hi), image=(ilo, ihi), on_grid=on_grid))
    if found is not None:
        msg = "Markov, q=%d" % found
    else:
        msg = "not Markov on tested grids (q in %s)" % (candidates,)
    return MarkovReport(markov=found is not None, q=found, tested=tuple(candidates),
                        rows=tuple(rows), message=msg)
