"""Quasimorphisms on free groups as small evaluator trees.

Every node is a frozen dataclass that is callable on reduced words and
returns an exact ``int`` or ``Fraction``.  The hull action

    (g . phi)(h) = phi(h g) - phi(g)

is the ``Acted`` node; ``fingerprint`` restricts a function to a word ball.
"""

from __future__ import annotations

import math
from functools import lru_cache
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence, Union

from .words import (
    GroupSpec,
    RightMulView,
    RightPowerView,
    Word,
    ball,
    ball_size,
    exp_sum,
    format_word,
    inv,
    mul,
    parse_word,
)

Number = Union[int, Fraction]


def normalize(x: Number) -> Number:
    if isinstance(x, Fraction) and x.denominator == 1:
        return x.numerator
    return x


def format_rational(x: Number) -> str:
    return str(Fraction(x))


def floor_half(x: Number) -> int:
    if isinstance(x, int):
        return x // 2
    return math.floor(Fraction(x) / 2)


class Quasimorphism:
    """Base class; subclasses implement ``__call__``."""

    def __call__(self, w: Word) -> Number:
        raise NotImplementedError

    def __add__(self, other: "Quasimorphism") -> "Quasimorphism":
        return Sum((self, other))

    def __neg__(self) -> "Quasimorphism":
        return Scaled(self, -1)

    # Displacement phi(h g) - phi(g) where g is given as a word view
    # (LeftWord, RightMulView, RightPowerView).  Nodes whose displacement only
    # needs a bounded prefix of g, or its exponent sums, override this.
    def disp(self, h: Word, g) -> Number:
        w = g.materialize()
        return normalize(self(mul(h, w)) - self(w))

    @property
    def odd_integer(self) -> bool:
        """True when the node is known to be antisymmetric and integer valued."""
        return False


def count_occurrences(w: Word, pattern: Word) -> int:
    m = len(pattern)
    if m == 0 or m > len(w):
        return 0
    first = pattern[0]
    return sum(1 for i in range(len(w) - m + 1) if w[i] == first and w[i : i + m] == pattern)


@lru_cache(maxsize=1 << 18)
def _counting_disp(pattern: Word, h: Word, pre: Word) -> int:
    ip = inv(pattern)
    hp = mul(h, pre)
    return (count_occurrences(hp, pattern) - count_occurrences(hp, ip)
            - count_occurrences(pre, pattern) + count_occurrences(pre, ip))


@dataclass(frozen=True)
class CountingQM(Quasimorphism):
    """Brooks counting quasimorphism, overlapping occurrences, no cyclic wrap."""

    pattern: Word

    def __post_init__(self):
        if not self.pattern:
            raise ValueError("counting pattern must be nonempty")
        if any(self.pattern[i] == -self.pattern[i + 1] for i in range(len(self.pattern) - 1)):
            raise ValueError(f"pattern {self.pattern} is not reduced")

    def __call__(self, w: Word) -> int:
        return count_occurrences(w, self.pattern) - count_occurrences(w, inv(self.pattern))

    def disp(self, h: Word, g) -> int:
        # occurrences past the first |h| + |pattern| letters of g are unaffected by h
        return _counting_disp(self.pattern, h, g.prefix(len(h) + len(self.pattern)))

    odd_integer = True


@dataclass(frozen=True)
class HomomorphismQM(Quasimorphism):
    weights: tuple[Fraction, ...]

    def __init__(self, weights: Iterable[Number]):
        object.__setattr__(self, "weights", tuple(Fraction(x) for x in weights))

    def __call__(self, w: Word) -> Number:
        total = Fraction(0)
        for x in w:
            a = abs(x)
            if a > len(self.weights):
                continue
            total += self.weights[a - 1] if x > 0 else -self.weights[a - 1]
        return normalize(total)

    def disp(self, h: Word, g) -> Number:
        return self(h)

    @property
    def odd_integer(self) -> bool:
        return all(x.denominator == 1 for x in self.weights)


@dataclass(frozen=True)
class Antisymmetrized(Quasimorphism):
    """phi(g) = floor(inner(g)/2) - floor(inner(g^-1)/2): integer valued and odd."""

    inner: Quasimorphism

    def __call__(self, w: Word) -> int:
        return floor_half(self.inner(w)) - floor_half(self.inner(inv(w)))

    def disp(self, h: Word, g) -> Number:
        # floor(c/2) + ceil(c/2) = c, so odd integer inputs pass through unchanged
        if self.inner.odd_integer:
            return self.inner.disp(h, g)
        return super().disp(h, g)

    odd_integer = True


@dataclass(frozen=True)
class Scaled(Quasimorphism):
    inner: Quasimorphism
    factor: int

    def __call__(self, w: Word) -> Number:
        return self.factor * self.inner(w)

    def disp(self, h: Word, g) -> Number:
        return self.factor * self.inner.disp(h, g)

    @property
    def odd_integer(self) -> bool:
        return self.inner.odd_integer


@dataclass(frozen=True)
class Sum(Quasimorphism):
    terms: tuple[Quasimorphism, ...]

    def __call__(self, w: Word) -> Number:
        return normalize(sum((t(w) for t in self.terms), 0))

    def disp(self, h: Word, g) -> Number:
        return normalize(sum((t.disp(h, g) for t in self.terms), 0))

    @property
    def odd_integer(self) -> bool:
        return all(t.odd_integer for t in self.terms)


@dataclass(frozen=True)
class ZFunction(Quasimorphism):
    """Pullback f o delta along the exponent sum in generator ``gen``.

    ``fn`` must vanish at 0 so the pullback is normalized.
    """

    fn: Callable[[int], Number]
    gen: int = 1

    def __call__(self, w: Word) -> Number:
        return self.fn(exp_sum(w, self.gen))

    def disp(self, h: Word, g) -> Number:
        n = g.exp_sum(self.gen)
        return self.fn(n + exp_sum(h, self.gen)) - self.fn(n)


@dataclass(frozen=True)
class Perturbation(Quasimorphism):
    """base + s o delta, with base valued in 3Z and s valued in {-1, 0, 1}."""

    base: Quasimorphism
    s: Callable[[int], int]
    gen: int = 1

    def __call__(self, w: Word) -> Number:
        return self.base(w) + self.s(exp_sum(w, self.gen))

    def disp(self, h: Word, g) -> Number:
        n = g.exp_sum(self.gen)
        return self.base.disp(h, g) + self.s(n + exp_sum(h, self.gen)) - self.s(n)


@dataclass(frozen=True)
class Acted(Quasimorphism):
    inner: Quasimorphism
    gamma: Word

    def __call__(self, w: Word) -> Number:
        return normalize(self.inner(mul(w, self.gamma)) - self.inner(self.gamma))

    def disp(self, h: Word, g) -> Number:
        return self.inner.disp(h, RightMulView(g, self.gamma))


@dataclass(frozen=True)
class RightLimit(Quasimorphism):
    """Pointwise limit of g^k . inner as k -> infinity, for a single generator g.

    Evaluated at k = |w| + margin and checked against k + 1; raises if the
    value has not stabilised there.
    """

    inner: Quasimorphism
    gen: int
    margin: int = 8

    def __call__(self, w: Word) -> Number:
        vals = []
        for k in (len(w) + self.margin, len(w) + self.margin + 1):
            g = (self.gen,) * k
            vals.append(self.inner(mul(w, g)) - self.inner(g))
        if vals[0] != vals[1]:
            raise ValueError(f"right limit not stabilised at {format_word(w)}")
        return normalize(vals[0])

    def disp(self, h: Word, g) -> Number:
        return self.inner.disp(h, RightPowerView(g, self.gen))


@dataclass(frozen=True)
class Tabulated(Quasimorphism):
    """Function given by an explicit table; words outside the table raise KeyError."""

    table: dict = field(compare=False, hash=False)
    name: str = "table"

    def __call__(self, w: Word) -> Number:
        if not w:
            return 0
        return self.table[w]


def antisymmetrize(phi: Quasimorphism) -> Quasimorphism:
    return Antisymmetrized(phi)


def rescale3(phi: Quasimorphism) -> Quasimorphism:
    return Scaled(phi, 3)


def act(gamma: Word, phi: Quasimorphism) -> Quasimorphism:
    if not gamma:
        return phi
    if isinstance(phi, HomomorphismQM):
        return phi
    return Acted(phi, gamma)


def evaluate(phi: Quasimorphism, w: Word) -> Number:
    return phi(w)


@dataclass(frozen=True)
class DefectResult:
    value: Number
    pair: tuple[Word, Word]
    radius: int


def defect(phi: Quasimorphism, L: int, spec: GroupSpec) -> DefectResult:
    """D_L(phi) = max |phi(gh) - phi(g) - phi(h)| over g, h in B_L, with a maximiser.

    Ties go to the first pair in canonical (g, h) order.
    """
    if L < 1:
        raise ValueError("defect radius must be >= 1")
    words = ball(spec, L)
    vals = [phi(w) for w in words]
    best: Number = -1
    best_pair = ((), ())
    for g, vg in zip(words, vals):
        for h, vh in zip(words, vals):
            d = abs(phi(mul(g, h)) - vg - vh)
            if d > best:
                best, best_pair = d, (g, h)
    return DefectResult(normalize(best), best_pair, L)


def defect_set(phi: Quasimorphism, L: int, spec: GroupSpec) -> list[Number]:
    """Sorted set of values phi(gh) - phi(g) - phi(h) for g, h in B_L."""
    words = ball(spec, L)
    vals = {w: phi(w) for w in words}
    out = set()
    for g in words:
        for h in words:
            out.add(normalize(phi(mul(g, h)) - vals[g] - vals[h]))
    return sorted(out)


@dataclass(frozen=True)
class Fingerprint:
    """Values of a normalized function on B_L, listed in canonical ball order."""

    rank: int
    radius: int
    values: tuple

    def __post_init__(self):
        if len(self.values) != ball_size(self.rank, self.radius):
            raise ValueError("fingerprint length does not match the ball")
        if self.values and self.values[0] != 0:
            raise ValueError("fingerprint must vanish at the identity")

    @property
    def words(self) -> list[Word]:
        return ball(GroupSpec(self.rank), self.radius)

    def table(self) -> dict[Word, Number]:
        return dict(zip(self.words, self.values))

    def as_function(self) -> Tabulated:
        return Tabulated(self.table(), name="fingerprint")

    def restrict(self, L: int) -> "Fingerprint":
        if L > self.radius:
            raise ValueError(f"cannot restrict radius {self.radius} to {L}")
        return Fingerprint(self.rank, L, self.values[: ball_size(self.rank, L)])

    def rows(self) -> list[tuple[str, str]]:
        return [(format_word(w), format_rational(v)) for w, v in zip(self.words, self.values)]

    @classmethod
    def from_rows(cls, rank: int, radius: int, rows: Sequence[tuple[str, str]]) -> "Fingerprint":
        table = {parse_word(w): normalize(Fraction(v)) for w, v in rows}
        words = ball(GroupSpec(rank), radius)
        return cls(rank, radius, tuple(table[w] for w in words))


def fingerprint(phi: Quasimorphism, L: int, spec: GroupSpec) -> Fingerprint:
    return Fingerprint(spec.rank, L, tuple(normalize(phi(w)) for w in ball(spec, L)))


def shifted_fingerprint(big: Fingerprint, gamma: Word, L: int) -> Fingerprint:
    """Fingerprint of gamma . phi on B_L read off a table of phi on B_{L+|gamma|}."""
    if big.radius < L + len(gamma):
        raise ValueError("table radius too small for this shift")
    table = big.table()
    base = table[gamma]
    words = ball(GroupSpec(big.rank), L)
    return Fingerprint(big.rank, L, tuple(normalize(table[mul(w, gamma)] - base) for w in words))
