"""Transfer operator on step functions over a Markov grid, exactly.

When the lift preserves step functions on the atoms I_j = ((j-1)/q, j/q),
the operator restricts to a q x q rational matrix M acting on coefficient
rows, P(sum c_i 1_{I_i}) = sum_j (cM)_j 1_{I_j}.  This module computes M,
its characteristic polynomial and eigen-structure in exact arithmetic
(rational roots and quadratic surds), and the associated step
eigenfunctions with the zero-at-grid-points convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from .circlemap import (NotMarkovError, PiecewiseLinearLift,
                        _grid_preserves_steps, eval_tau, natural_grid)
from .surd import Surd, format_surd

Scalar = Union[Fraction, Surd]


@dataclass(frozen=True)
class TransitionMatrix:
    """Row-indexed rational matrix: entry (i, j) weights 1_{I_j} in P 1_{I_i}."""

    q: int
    rows: tuple

    def entry(self, i: int, j: int) -> Fraction:
        return self.rows[i][j]

    def row_sums(self) -> tuple:
        return tuple(sum(r) for r in self.rows)

    def col_sums(self) -> tuple:
        return tuple(sum(r[j] for r in self.rows) for j in range(self.q))

    def is_doubly_stochastic(self) -> bool:
        one = Fraction(1)
        return all(s == one for s in self.row_sums()) and \
            all(s == one for s in self.col_sums())

    def to_float_array(self) -> np.ndarray:
        return np.array([[float(x) for x in r] for r in self.rows], dtype=float)


def transition_matrix(lift: PiecewiseLinearLift, q: Optional[int] = None) -> TransitionMatrix:
    """Exact transition matrix on the grid of q atoms.

    Raises :class:`NotMarkovError` when the step space is not preserved.
    For each atom and branch the tau-image lands inside a single atom; the
    slope is added to the matching entry.
    """
    if q is None:
        q = natural_grid(lift)
    q = int(q)
    if not _grid_preserves_steps(lift, q):
        raise NotMarkovError("step functions on grid q=%d are not preserved" % q)
    rows: List[List[Fraction]] = [[Fraction(0)] * q for _ in range(q)]
    for m in range(q):
        for j in range(lift.p):
            lo = Fraction(m, q) + j
            hi = Fraction(m + 1, q) + j
            mid = (lo + hi) / 2
            s = lift.slopes[lift.piece_index(mid)]
            y = eval_tau(lift, mid) % 1
            i = int(y * q)
            rows[i][m] += s
    return TransitionMatrix(q=q, rows=tuple(tuple(r) for r in rows))


# ---------------------------------------------------------------------------
# Characteristic polynomial and exact eigenvalues
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CharPoly:
    """Monic characteristic polynomial; coeffs[k] multiplies lambda^k."""

    coeffs: tuple

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x):
        acc = self.coeffs[-1]
        for c in reversed(self.coeffs[:-1]):
            acc = acc * x + c
        return acc

    def deflate(self, root: Fraction) -> "CharPoly":
        """Exact synthetic division by (lambda - root); root must divide exactly."""
        cs = self.coeffs
        n = self.degree
        b = [Fraction(0)] * n
        acc = cs[n]
        for k in range(n - 1, -1, -1):
            b[k] = acc
            acc = cs[k] + root * acc
        if acc != 0:
            raise ValueError("%s is not a root" % root)
        return CharPoly(coeffs=tuple(b))


def char_poly(M: TransitionMatrix) -> CharPoly:
    """det(lambda I - M) by the Faddeev-LeVerrier recursion over Fractions."""
    q = M.q
    A = [[M.rows[i][j] for j in range(q)] for i in range(q)]

    def matmul(X, Y):
        return [[sum(X[i][k] * Y[k][j] for k in range(q)) for j in range(q)]
                for i in range(q)]

    def trace(X):
        return sum(X[i][i] for i in range(q))

    coeffs = [Fraction(1)]           # c_q = 1, then c_{q-1}, ...
    Mk = [[Fraction(0)] * q for _ in range(q)]
    for k in range(1, q + 1):
        # Mk <- A (Mk + c_{q-k+1} I)
        B = [row[:] for row in Mk]
        ck = coeffs[-1]
        for i in range(q):
            B[i][i] += ck
        Mk = matmul(A, B)
        c = -trace(Mk) / k
        coeffs.append(c)
    # coeffs currently highest-to-lowest; store ascending
    return CharPoly(coeffs=tuple(reversed(coeffs)))


class Eigenvalue(NamedTuple):
    value: complex
    multiplicity: int
    exact: Optional[Scalar]   # Fraction or Surd when the factor is solvable
    residual: float           # |p(value)| for numeric roots, 0 for exact

    def exact_str(self) -> Optional[str]:
        return None if self.exact is None else format_surd(self.exact)


def _rational_roots(poly: CharPoly) -> Tuple[list, CharPoly]:
    """Strip exact rational roots (found via numeric candidates), with multiplicity."""
    roots = []
    p = poly
    guard = 0
    while p.degree > 0 and guard < 4 * poly.degree:
        guard += 1
        cand_set = set()
        arr = np.array([float(c) for c in p.coeffs][::-1], dtype=float)
        if p.degree >= 1:
            for z in np.roots(arr):
                if abs(z.imag) < 1e-9:
                    f = Fraction(z.real).limit_denominator(10 ** 6)
                    cand_set.add(f)
                    cand_set.add(Fraction(round(z.real)))
        cand_set.add(Fraction(0))
        hit = None
        for cand in cand_set:
            if p(cand) == 0:
                hit = cand
                break
        if hit is None:
            break
        roots.append(hit)
        p = p.deflate(hit)
    return roots, p


def eigenvalues(M: TransitionMatrix) -> tuple:
    """Eigenvalues of M with multiplicities and exact forms when solvable.

    Rational roots are deflated exactly; a remaining quadratic factor is
    solved in closed form (surds over Q(sqrt(d)) for positive discriminant).
    Anything of higher degree falls back to polished numeric roots with a
    reported residual.
    """
    poly = char_poly(M)
    rational, rest = _rational_roots(poly)
    out: List[Eigenvalue] = []
    counted = {}
    for r in rational:
        counted[r] = counted.get(r, 0) + 1
    for r, mult in sorted(counted.items(), key=lambda kv: -abs(kv[0])):
        out.append(Eigenvalue(value=complex(float(r)), multiplicity=mult,
                              exact=r, residual=0.0))
    if rest.degree == 2:
        c0, c1, c2 = rest.coeffs
        # monic? c2 may differ from 1 after deflation only by exact algebra; normalize
        b = c1 / c2
        c = c0 / c2
        disc = b * b - 4 * c
        if disc > 0:
            num = disc.numerator * disc.denominator
            root = math.isqrt(num)
            if root * root == num:
                sq = Fraction(root, disc.denominator)
                for sgn in (+1, -1):
                    val = (-b + sgn * sq) / 2
                    out.append(Eigenvalue(value=complex(float(val)), multiplicity=1,
                                          exact=val, residual=0.0))
            else:
                d, scale = _squarefree_split(disc)
                for sgn in (+1, -1):
                    exact = Surd(-b / 2, Fraction(sgn) * scale / 2, d)
                    out.append(Eigenvalue(value=complex(float(exact)), multiplicity=1,
                                          exact=exact, residual=0.0))
        elif disc == 0:
            val = -b / 2
            out.append(Eigenvalue(value=complex(float(val)), multiplicity=2,
                                  exact=val, residual=0.0))
        else:
            re = float(-b / 2)
            im = math.sqrt(float(-disc)) / 2
            for sgn in (+1, -1):
                z = complex(re, sgn * im)
                out.append(Eigenvalue(value=z, multiplicity=1, exact=None,
                                      residual=abs(complex(poly(z)))))
    elif rest.degree > 0:
        arr = np.array([float(c) for c in rest.coeffs][::-1], dtype=float)
        for z in np.roots(arr):
            z = complex(z)
            out.append(Eigenvalue(value=z, multiplicity=1, exact=None,
                                  residual=abs(complex(poly(z)))))
    out.sort(key=lambda e: (-abs(e.value), -e.value.real, -e.value.imag))
    return tuple(out)


def _poly_str(coeffs: Sequence[Fraction]) -> str:
    """Human form of sum coeffs[k] lambda^k, highest power first."""
    parts = []
    for k in range(len(coeffs) - 1, -1, -1):
        c = coeffs[k]
        if c == 0:
            continue
        if k == 0:
            mono = ""
        elif k == 1:
            mono = "lambda"
        else:
            mono = "lambda^%d" % k
        mag = abs(c)
        body = mono if (mag == 1 and mono) else \
            ("%s %s" % (mag, mono)).strip()
        if not parts:
            parts.append(body if c > 0 else "-" + body)
        else:
            parts.append(("+ " if c > 0 else "- ") + body)
    return " ".join(parts) if parts else "0"


def factored_str(poly: CharPoly) -> str:
    """Factor out exact rational roots; print the remainder verbatim.

    Example: ``lambda^2 (lambda - 1) (lambda - 2/3) (lambda^2 + 1/3 lambda - 1/3)``.
    """
    rational, rest = _rational_roots(poly)
    counted = {}
    for r in rational:
        counted[r] = counted.get(r, 0) + 1
    parts = []
    for r in sorted(counted, key=lambda v: (-abs(v), v)):
        mult = counted[r]
        if r == 0:
            base = "lambda"
        elif r > 0:
            base = "(lambda - %s)" % r
        else:
            base = "(lambda + %s)" % (-r)
        parts.append(base if mult == 1 else "%s^%d" % (base, mult))
    if rest.degree > 0:
        parts.append("(%s)" % _poly_str(rest.coeffs))
    return " ".join(parts) if parts else "1"


def second_eigenpair(M: TransitionMatrix):
    """Largest subleading exact simple eigenvalue with its left eigenvector.

    Returns (lam, v); raises ValueError when no such eigenvalue exists,
    e.g. for the 1 x 1 doubling matrix.
    """
    eigs = eigenvalues(M)
    top = max(abs(e.value) for e in eigs)
    for e in eigs:
        if abs(e.value) >= top - 1e-12 or e.exact is None:
            continue
        if e.multiplicity != 1:
            continue
        try:
            return e.exact, left_eigenvector(M, e.exact)
        except ValueError:
            continue
    raise ValueError("no exact simple subleading eigenvalue")


def _squarefree_split(x: Fraction):
    """Write sqrt(x) = scale * sqrt(d) with squarefree integer d, rational scale."""
    num = x.numerator * x.denominator
    d = 1
    scale_sq = 1
    n = num
    f = 2
    while f * f <= n:
        e = 0
        while n % f == 0:
            n //= f
            e += 1
        if e:
            scale_sq *= f ** (e - (e % 2))
            if e % 2:
                d *= f
        f += 1
    if n > 1:
        d *= n
    scale = Fraction(math.isqrt(scale_sq), x.denominator)
    return d, scale


def left_eigenvector(M: TransitionMatrix, lam: Scalar) -> tuple:
    """Exact left eigenvector v with vM = lam v, first nonzero entry 1.

    Works over Q or Q(sqrt(d)) by Gaussian elimination on M^T - lam I.
    Raises ValueError when lam is not a simple eigenvalue.
    """
    q = M.q
    if isinstance(lam, Surd):
        lift_scalar = lambda x: Surd(x, 0, lam.d)
    else:
        lam = Fraction(lam)
        lift_scalar = Fraction
    zero = lift_scalar(0)
    A = [[lift_scalar(M.rows[i][j]) for i in range(q)] for j in range(q)]
    for i in range(q):
        A[i][i] = A[i][i] - lam
    # reduce A x = 0 where x is the column form of v
    pivots = []
    row = 0
    for col in range(q):
        piv = None
        for r in range(row, q):
            if A[r][col] != 0:
                piv = r
                break
        if piv is None:
            continue
        A[row], A[piv] = A[piv], A[row]
        inv = A[row][col]
        A[row] = [x / inv for x in A[row]]
        for r in range(q):
            if r != row and A[r][col] != 0:
                f = A[r][col]
                A[r] = [x - f * y for x, y in zip(A[r], A[row])]
        pivots.append(col)
        row += 1
    free = [c for c in range(q) if c not in pivots]
    if len(free) == 0:
        raise ValueError("lam is not an eigenvalue of M")
    if len(free) > 1:
        raise ValueError("eigenvalue is not simple; nullity %d" % len(free))
    fcol = free[0]
    x = [zero] * q
    x[fcol] = lift_scalar(1)
    for r, col in enumerate(pivots):
        x[col] = -A[r][fcol]
    # normalize the first nonzero entry to 1
    lead = next(v for v in x if v != 0)
    x = [v / lead for v in x]
    return tuple(x)


# ---------------------------------------------------------------------------
# Step functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StepFunction:
    """sum_i values[i] 1_{I_i} on atoms I_i = ((i-1)/q, i/q), zero at grid points."""

    q: int
    values: tuple

    def __post_init__(self):
        if len(self.values) != self.q:
            raise ValueError("need exactly q values")

    def at(self, x) -> Scalar:
        x = Fraction(x) % 1
        scaled = x * self.q
        if scaled.denominator == 1:
            return Fraction(0)
        return self.values[int(scaled)]

    def integral(self) -> Scalar:
        total = self.values[0] * Fraction(1, self.q)
        for v in self.values[1:]:
            total = total + v * Fraction(1, self.q)
        return total


def apply_P_step(M: TransitionMatrix, c: Sequence[Scalar]) -> tuple:
    """Coefficient action (cM)_j = sum_i c_i M_{ij}."""
    q = M.q
    if len(c) != q:
        raise ValueError("coefficient length must equal q")
    out = []
    for j in range(q):
        acc = c[0] * M.rows[0][j]
        for i in range(1, q):
            acc = acc + c[i] * M.rows[i][j]
        out.append(acc)
    return tuple(out)


def step_eigenfunction(v: Sequence[Scalar], q: int) -> StepFunction:
    """Package an eigen-row as a step function with the grid-zero convention."""
    return StepFunction(q=q, values=tuple(v))


def essential_discontinuities(f: StepFunction) -> tuple:
    """Grid points where the one-sided limits of f genuinely differ.

    The point values (all zero) are ignored: a grid point with equal limits
    on both sides is an inessential discontinuity of the dipped function.
    """
    out = []
    q = f.q
    for k in range(q):
        left = f.values[(k - 1) % q]
        right = f.values[k]
        if left != right:
            out.append(Fraction(k, q))
    return tuple(out)
