"""Exact arithmetic in a real quadratic field Q(sqrt(d)).

A :class:`Surd` is a number a + b*sqrt(d) with rational a, b and a fixed
non-square integer d > 1.  The class supports mixed arithmetic with
``Fraction`` and ``int``, exact sign tests and total-order comparisons, so
surds can be used as drop-in scalars wherever the piecewise machinery
expects exact values.

Sign determination never touches floating point: the sign of a + b*sqrt(d)
reduces to integer comparisons of a^2 and b^2 d.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational


def _is_square(n: int) -> bool:
    if n < 0:
        return False
    r = math.isqrt(n)
    return r * r == n


class Surd:
    """a + b*sqrt(d) with exact rational a, b."""

    __slots__ = ("a", "b", "d")

    def __init__(self, a, b=0, d=13):
        d = int(d)
        if d <= 1 or _is_square(d):
            raise ValueError("d must be a non-square integer > 1")
        object.__setattr__(self, "a", Fraction(a))
        object.__setattr__(self, "b", Fraction(b))
        object.__setattr__(self, "d", d)

    def __setattr__(self, name, value):
        raise AttributeError("Surd is immutable")

    # -- helpers -----------------------------------------------------------

    def _coerce(self, other):
        """Return other as a Surd over the same radical, or None."""
        if isinstance(other, Surd):
            if other.d != self.d and other.b != 0 and self.b != 0:
                raise ValueError("mixed radicals d=%d and d=%d" % (self.d, other.d))
            d = self.d if self.b != 0 or other.b == 0 else other.d
            if other.d != d:
                return Surd(other.a, 0, d) if other.b == 0 else None
            if self.d != d:
                return other  # self rational, adopt other's radical
            return other
        if isinstance(other, Rational):
            return Surd(other, 0, self.d)
        return None

    def sign(self) -> int:
        """Exact sign in {-1, 0, 1}."""
        a, b = self.a, self.b
        if b == 0:
            return (a > 0) - (a < 0)
        if a == 0:
            return 1 if b > 0 else -1
        if a > 0 and b > 0:
            return 1
        if a < 0 and b < 0:
            return -1
        # opposite signs: compare a^2 with b^2 d
        lhs = a * a
        rhs = b * b * self.d
        if lhs == rhs:
            return 0  # impossible for nonzero a, b with d non-square
        if a > 0:
            return 1 if lhs > rhs else -1
        return -1 if lhs > rhs else 1

    def conjugate(self) -> "Surd":
        return Surd(self.a, -self.b, self.d)

    def is_rational(self) -> bool:
        return self.b == 0

    def as_fraction(self) -> Fraction:
        if self.b != 0:
            raise ValueError("not rational: %r" % (self,))
        return self.a

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        d = self.d if self.b != 0 else o.d
        return Surd(self.a + o.a, self.b + o.b, d)

    __radd__ = __add__

    def __neg__(self):
        return Surd(-self.a, -self.b, self.d)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        d = self.d if self.b != 0 else o.d
        return Surd(self.a * o.a + self.b * o.b * d, self.a * o.b + self.b * o.a, d)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        denom = o.a * o.a - o.b * o.b * o.d
        if denom == 0:
            raise ZeroDivisionError("division by zero surd")
        inv = Surd(o.a / denom, -o.b / denom, o.d if o.b != 0 else self.d)
        return self * inv

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def __abs__(self):
        return -self if self.sign() < 0 else Surd(self.a, self.b, self.d)

    def __pow__(self, n):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return (Surd(1, 0, self.d) / self) ** (-n)
        out = Surd(1, 0, self.d)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    # -- comparisons -------------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, Rational):
            return self.b == 0 and self.a == other
        if isinstance(other, Surd):
            if self.b == 0 and other.b == 0:
                return self.a == other.a
            return self.d == other.d and self.a == other.a and self.b == other.b
        if isinstance(other, float):
            return float(self) == other
        return NotImplemented

    def _cmp(self, other) -> int:
        o = self._coerce(other)
        if o is None:
            raise TypeError("cannot compare Surd with %r" % type(other))
        return (self - o).sign()

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b, self.d))

    # -- conversions -------------------------------------------------------

    def __float__(self):
        return float(self.a) + float(self.b) * math.sqrt(self.d)

    def __complex__(self):
        return complex(float(self))

    def __repr__(self):
        return "Surd(%s, %s, d=%d)" % (self.a, self.b, self.d)

    def __str__(self):
        return format_surd(self)


def format_surd(x) -> str:
    """Canonical display string, e.g. ``(-1-sqrt(13))/6`` or ``2/3``.

    Rational inputs (Fraction or Surd with b = 0) print as plain fractions.
    """
    if isinstance(x, Rational):
        return str(Fraction(x))
    if not isinstance(x, Surd):
        raise TypeError("expected Surd or rational, got %r" % type(x))
    if x.b == 0:
        return str(x.a)
    r = math.lcm(x.a.denominator, x.b.denominator)
    p = x.a.numerator * (r // x.a.denominator)
    q = x.b.numerator * (r // x.b.denominator)
    if abs(q) == 1:
        rad = "sqrt(%d)" % x.d
    else:
        rad = "%d*sqrt(%d)" % (abs(q), x.d)
    if p == 0:
        core = rad if q > 0 else "-" + rad
    else:
        core = "%d%s%s" % (p, "+" if q > 0 else "-", rad)
    if r == 1:
        return core
    return "(%s)/%d" % (core, r)
