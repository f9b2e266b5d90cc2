"""Exact arithmetic in Q(sqrt d) with sign-based comparisons."""

from __future__ import annotations

import math
from fractions import Fraction
from functools import total_ordering
from typing import Union

Rational = Union[int, Fraction]


def _is_square(n: int) -> bool:
    return n >= 0 and math.isqrt(n) ** 2 == n


@total_ordering
class QuadExt:
    """a + b*sqrt(d) with a, b rational and d a positive non-square integer."""

    __slots__ = ("a", "b", "d")

    def __init__(self, a: Rational = 0, b: Rational = 0, d: int = 2):
        if d <= 1 or _is_square(d):
            raise ValueError(f"d = {d} must be a positive non-square")
        self.a = Fraction(a)
        self.b = Fraction(b)
        self.d = d

    def _coerce(self, other) -> "QuadExt":
        if isinstance(other, QuadExt):
            if other.d != self.d:
                raise ValueError(f"mixing sqrt({self.d}) and sqrt({other.d})")
            return other
        if isinstance(other, (int, Fraction)):
            return QuadExt(other, 0, self.d)
        return NotImplemented

    def sign(self) -> int:
        a, b = self.a, self.b
        sa = (a > 0) - (a < 0)
        sb = (b > 0) - (b < 0)
        if sa == sb or sb == 0:
            return sa
        if sa == 0:
            return sb
        # opposite signs: compare a^2 with d b^2
        diff = a * a - self.d * b * b
        sd = (diff > 0) - (diff < 0)
        return sa * sd

    def star(self) -> "QuadExt":
        return QuadExt(self.a, -self.b, self.d)

    def norm(self) -> Fraction:
        return self.a * self.a - self.d * self.b * self.b

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadExt(self.a + o.a, self.b + o.b, self.d)

    __radd__ = __add__

    def __neg__(self):
        return QuadExt(-self.a, -self.b, self.d)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadExt(self.a - o.a, self.b - o.b, self.d)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadExt(self.a * o.a + self.d * self.b * o.b, self.a * o.b + self.b * o.a, self.d)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        n = o.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero in Q(sqrt d)")
        num = self * o.star()
        return QuadExt(num.a / n, num.b / n, self.d)

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def __eq__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return False
        return self.a == o.a and self.b == o.b

    def __lt__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return (self - o).sign() < 0

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b, self.d))

    def __float__(self):
        return float(self.a) + float(self.b) * math.sqrt(self.d)

    def floor(self) -> int:
        k = math.floor(float(self))
        while self < k:
            k -= 1
        while self >= k + 1:
            k += 1
        return k

    def ceil(self) -> int:
        return -((-self).floor())

    def __repr__(self):
        return f"QuadExt({self.a}, {self.b}, d={self.d})"

    def __str__(self):
        return f"{self.a}+{self.b}*sqrt({self.d})"

    @classmethod
    def parse(cls, s: str) -> "QuadExt":
        """Inverse of ``str``: 'a+b*sqrt(d)' with a and b rationals."""
        head, _, rest = s.partition("*sqrt(")
        if not rest.endswith(")"):
            raise ValueError(f"bad QuadExt literal {s!r}")
        d = int(rest[:-1])
        # the split point is the last '+' that is not an exponent or leading sign
        i = head.rfind("+")
        if i <= 0:
            raise ValueError(f"bad QuadExt literal {s!r}")
        return cls(Fraction(head[:i]), Fraction(head[i + 1:]), d)


def sqrt_d(d: int = 2) -> QuadExt:
    return QuadExt(0, 1, d)
