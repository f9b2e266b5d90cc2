"""Reduced words in the free group F_r.

A word is a plain tuple of nonzero ints: ``i`` stands for the generator
x_i and ``-i`` for its inverse.  Rank 1 is the integers, viewed through
``to_int`` / ``from_int``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

Word = tuple[int, ...]

IDENTITY: Word = ()

DEFAULT_BALL_CAP = 5_000_000


class BallTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class GroupSpec:
    rank: int
    ball_cap: int = DEFAULT_BALL_CAP

    def __post_init__(self):
        if self.rank < 1:
            raise ValueError(f"rank must be >= 1, got {self.rank}")

    def letters(self) -> list[int]:
        """Generators in canonical order 1 < -1 < 2 < -2 < ..."""
        out = []
        for i in range(1, self.rank + 1):
            out += [i, -i]
        return out

    def check(self, w: Iterable[int]) -> None:
        for x in w:
            if x == 0 or abs(x) > self.rank:
                raise ValueError(f"letter {x} out of range for rank {self.rank}")


def letter_key(x: int) -> tuple[int, int]:
    return (abs(x), 0 if x > 0 else 1)


def word_key(w: Word) -> tuple:
    """Sort key for length-then-lex order."""
    return (len(w), tuple(letter_key(x) for x in w))


def reduce(letters: Iterable[int], spec: GroupSpec | None = None) -> Word:
    letters = tuple(letters)
    if spec is not None:
        spec.check(letters)
    elif any(x == 0 for x in letters):
        raise ValueError("0 is not a letter")
    out: list[int] = []
    for x in letters:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def mul(w1: Word, w2: Word) -> Word:
    # both inputs are reduced, so cancellation only happens at the seam
    k = 0
    n1, n2 = len(w1), len(w2)
    while k < n1 and k < n2 and w1[n1 - 1 - k] == -w2[k]:
        k += 1
    return w1[: n1 - k] + w2[k:]


def inv(w: Word) -> Word:
    return tuple(-x for x in reversed(w))


def power(w: Word, n: int) -> Word:
    if n < 0:
        w, n = inv(w), -n
    out = IDENTITY
    for _ in range(n):
        out = mul(out, w)
    return out


def exp_sum(w: Word, i: int) -> int:
    if i <= 0:
        raise ValueError(f"generator index must be positive, got {i}")
    return sum(1 if x == i else -1 for x in w if abs(x) == i)


def ball_size(rank: int, L: int) -> int:
    if L < 0:
        return 0
    if rank == 1:
        return 2 * L + 1
    return 1 + 2 * rank * ((2 * rank - 1) ** L - 1) // (2 * rank - 2)


def ball(spec: GroupSpec, L: int) -> list[Word]:
    """All reduced words of length <= L in length-then-lex order."""
    if L < 0:
        raise ValueError("radius must be >= 0")
    size = ball_size(spec.rank, L)
    if size > spec.ball_cap:
        raise BallTooLarge(
            f"ball of radius {L} in F_{spec.rank} has {size} words (cap {spec.ball_cap})"
        )
    out: list[Word] = [IDENTITY]
    layer: list[Word] = [IDENTITY]
    letters = spec.letters()
    for _ in range(L):
        # extending a lex-sorted layer letter by letter keeps it lex-sorted
        layer = [w + (x,) for w in layer for x in letters if not (w and w[-1] == -x)]
        out.extend(layer)
    return out


def to_int(w: Word) -> int:
    """Integer view of a word in F_1."""
    if any(abs(x) != 1 for x in w):
        raise ValueError(f"{w} is not a word in F_1")
    return exp_sum(w, 1)


def from_int(n: int) -> Word:
    return (1,) * n if n >= 0 else (-1,) * (-n)


def format_word(w: Word) -> str:
    """Dash-joined signed indices, e.g. (1, 2, -1) -> "1-2--1"; identity is "e"."""
    if not w:
        return "e"
    return "-".join(str(x) for x in w)


def parse_word(s: str) -> Word:
    s = s.strip()
    if s in ("", "e"):
        return IDENTITY
    out = []
    negative = False
    for tok in s.split("-"):
        if tok == "":
            if negative:
                raise ValueError(f"malformed word {s!r}")
            negative = True
            continue
        x = int(tok)
        if x <= 0:
            raise ValueError(f"malformed word {s!r}")
        out.append(-x if negative else x)
        negative = False
    if negative:
        raise ValueError(f"malformed word {s!r}")
    return reduce(out)


def parse_letters(s: str, spec: GroupSpec | None = None) -> Word:
    """Parse 'abA' style words: a, b, c... are generators, capitals their inverses."""
    out = []
    for ch in s:
        if not ch.isalpha():
            raise ValueError(f"bad letter {ch!r} in {s!r}")
        i = ord(ch.lower()) - ord("a") + 1
        out.append(i if ch.islower() else -i)
    return reduce(out, spec)


class LeftWord:
    """Mutable reduced word built by left multiplication.

    Letters are stored reversed, so prepending is an append; exponent sums
    are kept up to date.  Hull walks use this to follow g_n = w_n ... w_1.
    """

    def __init__(self, w: Word = IDENTITY):
        self.rev: list[int] = list(reversed(w))
        self.sums: dict[int, int] = {}
        for x in w:
            self.sums[abs(x)] = self.sums.get(abs(x), 0) + (1 if x > 0 else -1)

    def left_mul(self, w: Word) -> None:
        rev, sums = self.rev, self.sums
        for x in reversed(w):
            if rev and rev[-1] == -x:
                rev.pop()
            else:
                rev.append(x)
            sums[abs(x)] = sums.get(abs(x), 0) + (1 if x > 0 else -1)

    @property
    def length(self) -> int:
        return len(self.rev)

    def prefix(self, n: int) -> Word:
        if n <= 0:
            return IDENTITY
        return tuple(reversed(self.rev[-n:]))

    def suffix(self, n: int) -> Word:
        if n <= 0:
            return IDENTITY
        return tuple(reversed(self.rev[:n]))

    def exp_sum(self, i: int) -> int:
        return self.sums.get(i, 0)

    def materialize(self) -> Word:
        return tuple(reversed(self.rev))


class RightMulView:
    """Read-only view of ``base * g`` that only touches the ends of ``base``."""

    def __init__(self, base, g: Word):
        self.base, self.g = base, g
        tail = base.suffix(len(g))
        k = 0
        while k < len(tail) and k < len(g) and tail[len(tail) - 1 - k] == -g[k]:
            k += 1
        self.k = k
        self.rest = g[k:]
        self.length = base.length - k + len(self.rest)

    def prefix(self, n: int) -> Word:
        keep = self.base.length - self.k
        if n <= keep:
            return self.base.prefix(n)
        return (self.base.prefix(keep) + self.rest)[:n]

    def suffix(self, n: int) -> Word:
        rest = self.rest
        if n <= len(rest):
            return rest[len(rest) - n:]
        m = n - len(rest)
        head = self.base.suffix(m + self.k)
        return head[:len(head) - self.k] + rest

    def exp_sum(self, i: int) -> int:
        return self.base.exp_sum(i) + exp_sum(self.g, i)

    def materialize(self) -> Word:
        return mul(self.base.materialize(), self.g)


class RightPowerView:
    """The infinite word ``base * x^k`` as k -> infinity, x a single generator letter."""

    length = None

    def __init__(self, base, letter: int):
        self.base, self.letter = base, letter
        # trailing run of the inverse letter gets absorbed by the infinite power
        n = 1
        while True:
            tail = base.suffix(n)
            j = 0
            while j < len(tail) and tail[len(tail) - 1 - j] == -letter:
                j += 1
            if j < len(tail) or len(tail) < n:
                break
            n *= 2
        self.keep = base.length - j

    def prefix(self, n: int) -> Word:
        if n <= self.keep:
            return self.base.prefix(n)
        return self.base.prefix(self.keep) + (self.letter,) * (n - self.keep)

    def suffix(self, n: int) -> Word:
        return (self.letter,) * n

    def exp_sum(self, i: int) -> int:
        raise ValueError("exponent sums diverge on an infinite word")

    def materialize(self) -> Word:
        raise ValueError("cannot materialize an infinite word")
