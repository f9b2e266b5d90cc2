"""Subsets of Z, the maps eta and xi into bounded functions, the mod-3
splitting of perturbed quasimorphisms, orbit-closure witnesses, and hull
walks with their empirical measures.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Optional, Sequence

from .qm import Number, Perturbation, Quasimorphism, ZFunction, normalize
from .rng import MASK64, SplitMix64, splitmix64
from .walk import StepDistribution
from .words import GroupSpec, LeftWord, ball

QUANT_BITS = 20


class WindowError(KeyError):
    pass


@dataclass(frozen=True)
class BinarySetZ:
    """A subset of Z known on [-window, window], optionally everywhere.

    ``closed_form`` decides membership for any integer.  ``word`` is kept for
    sets read off a one-sided 0/1 sequence (A = {k >= 0 : word[k] == "1"}).
    """

    window: int
    bits: str
    kind: str = "explicit"
    closed_form: Optional[Callable[[int], bool]] = field(default=None, compare=False)
    word: Optional[str] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if len(self.bits) != 2 * self.window + 1:
            raise ValueError("bits must cover [-window, window]")

    def __contains__(self, n: int) -> bool:
        if -self.window <= n <= self.window:
            return self.bits[n + self.window] == "1"
        if self.closed_form is None:
            raise WindowError(f"{n} is outside the window [-{self.window}, {self.window}]")
        return self.closed_form(n)

    def chi(self, n: int) -> int:
        return 1 if n in self else 0

    def members(self) -> list[int]:
        return [n for n in range(-self.window, self.window + 1) if n in self]

    def negate(self) -> "BinarySetZ":
        cf = self.closed_form
        return BinarySetZ(self.window, self.bits[::-1], f"-({self.kind})",
                          None if cf is None else (lambda n: cf(-n)))

    def on_window(self, W: int) -> "BinarySetZ":
        """The same set known on [-W, W]; needs a closed form when W > window."""
        bits = "".join("1" if n in self else "0" for n in range(-W, W + 1))
        return BinarySetZ(W, bits, self.kind, self.closed_form, self.word)


def explicit_set(members: Iterable[int], window: int) -> BinarySetZ:
    m = set(members)
    bits = "".join("1" if n in m else "0" for n in range(-window, window + 1))
    return BinarySetZ(window, bits, "explicit")


def finite_set(members: Iterable[int]) -> BinarySetZ:
    m = frozenset(members)
    w = max((abs(n) for n in m), default=0)
    bits = "".join("1" if n in m else "0" for n in range(-w, w + 1))
    return BinarySetZ(w, bits, "finite", m.__contains__)


def periodic_set(pattern: str, window: int = 0, offset: int = 0) -> BinarySetZ:
    """n is a member iff pattern[(n - offset) % len(pattern)] == '1'."""
    k = len(pattern)

    def cf(n: int) -> bool:
        return pattern[(n - offset) % k] == "1"

    bits = "".join("1" if cf(n) else "0" for n in range(-window, window + 1))
    return BinarySetZ(window, bits, f"periodic({pattern})", cf)


def evens(window: int = 0) -> BinarySetZ:
    return periodic_set("10", window)


def bernoulli_set(q, seed: int, window: int = 0) -> BinarySetZ:
    """Each n is a member with probability q, decided by a splitmix64 hash of (seed, n)."""
    q = Fraction(q)
    if not 0 <= q <= 1:
        raise ValueError("q must lie in [0, 1]")
    threshold = (q * (1 << 64)).__floor__()
    key = splitmix64(seed)

    @lru_cache(maxsize=1 << 16)
    def cf(n: int) -> bool:
        zz = (2 * n) if n >= 0 else (-2 * n - 1)
        return splitmix64((key ^ zz) & MASK64) < threshold

    bits = "".join("1" if cf(n) else "0" for n in range(-window, window + 1))
    return BinarySetZ(window, bits, f"bernoulli({q},{seed})", cf)


def random_window_set(window: int, rng: SplitMix64) -> BinarySetZ:
    bits = "".join(str(rng.next_u64() >> 63) for _ in range(2 * window + 1))
    return BinarySetZ(window, bits, "random")


def generic_word(K: int) -> str:
    """All binary words of lengths 1..K, each length in lexicographic order, concatenated."""
    if K < 1:
        raise ValueError("K must be >= 1")
    return "".join("".join(t) for k in range(1, K + 1) for t in itertools.product("01", repeat=k))


def generic_set(K: int) -> BinarySetZ:
    """A(x) = {k >= 0 : x_k = 1} for the concatenation x = generic_word(K).

    x is finite, so A is a finite subset of N: every n < 0 and every
    n >= len(x) is a non-member.
    """
    x = generic_word(K)

    def cf(n: int) -> bool:
        return 0 <= n < len(x) and x[n] == "1"

    return BinarySetZ(0, x[0], f"generic({K})", cf, x)


def eta(A: BinarySetZ, n: int) -> int:
    return A.chi(n) - A.chi(0)


def xi(A: BinarySetZ, n: int) -> int:
    return A.chi(n) - A.chi(-n)


def eta_function(A: BinarySetZ) -> Callable[[int], int]:
    return lambda n: eta(A, n)


def xi_function(A: BinarySetZ) -> Callable[[int], int]:
    return lambda n: xi(A, n)


def decompose_mod3(v: int) -> tuple[int, int]:
    """Split v = base + s with base in 3Z and s in {-1, 0, 1}."""
    s = (v + 1) % 3 - 1
    return v - s, s


def perturbation_qm(s: Callable[[int], int], gen: int, base: Quasimorphism,
                    spec: Optional[GroupSpec] = None, check_radius: int = 4) -> Perturbation:
    """phi_1 = base + s o delta, after checking base is 3Z-valued on B_check_radius."""
    spec = spec or GroupSpec(max(gen, 1))
    for w in ball(spec, check_radius):
        v = base(w)
        if Fraction(v).denominator != 1 or int(v) % 3:
            raise ValueError(f"base is not 3Z-valued: base({w}) = {v}")
    return Perturbation(base, s, gen)


def find_shift_witness(A: BinarySetZ, target: BinarySetZ, F: Sequence[int],
                       bound: Optional[int] = None) -> int:
    """Smallest k >= 0 with (A - k) cap F = target cap F.

    The search runs to ``bound``, by default the length of A's word plus
    the span of F (past that, A - k misses F entirely).
    """
    F = sorted(set(F))
    want = "".join("1" if f in target else "0" for f in F)
    if bound is None:
        if A.word is None:
            raise ValueError("a search bound is needed for sets without a word")
        bound = len(A.word) + (F[-1] - F[0] if F else 0) + 1
    lo, hi = F[0], F[-1]
    contiguous = F == list(range(lo, hi + 1))
    start = 0
    if A.word is not None and contiguous:
        # small k may reach negative positions; check those directly
        for k in range(0, min(max(0, -lo), bound + 1)):
            if all(A.chi(f + k) == int(b) for f, b in zip(F, want)):
                return k
        start = max(0, -lo)
        padded = A.word + "0" * (hi - lo + 1)
        i = padded.find(want, start + lo)
        if i != -1 and i - lo <= bound:
            return i - lo
        raise LookupError("no shift witness within the construction bound; increase K")
    for k in range(start, bound + 1):
        if all(A.chi(f + k) == int(b) for f, b in zip(F, want)):
            return k
    raise LookupError("no shift witness within the construction bound; increase K")


def so_value(A: BinarySetZ, k: int, n: int) -> int:
    """(k . s_o)(n) for s_o = xi(A), straight from the hull action."""
    return xi(A, n + k) - xi(A, k)


def so_window(A: BinarySetZ, k: int, W: int) -> tuple[int, ...]:
    """Window fingerprint of k . xi(A) in Z-ball order 0, 1, -1, 2, -2, ..."""
    return tuple(so_value(A, k, n) for n in z_ball(W))


def eta_window(B: BinarySetZ, W: int) -> tuple[int, ...]:
    return tuple(eta(B, n) for n in z_ball(W))


def z_ball(W: int) -> list[int]:
    out = [0]
    for n in range(1, W + 1):
        out += [n, -n]
    return out


@dataclass(frozen=True)
class OrbitWitness:
    k: int
    fingerprint: tuple[int, ...]
    target: tuple[int, ...]
    negated_fingerprint: tuple[int, ...]
    negated_target: tuple[int, ...]

    @property
    def match(self) -> bool:
        return self.fingerprint == self.target

    @property
    def negated_match(self) -> bool:
        return self.negated_fingerprint == self.negated_target


def so_orbit_limit(A: BinarySetZ, B: BinarySetZ, W: int, min_k: Optional[int] = None) -> OrbitWitness:
    """Find k > W with (A - k) agreeing with B on [-W, W].

    For such k the set A + k misses [-W, W], so k . xi(A) equals eta(B) on
    the window and (-k) . xi(A) equals -eta(-B) there.  Both identities are
    checked by direct evaluation, not assumed.
    """
    if W < 1:
        raise ValueError("window must be >= 1")
    min_k = W + 1 if min_k is None else max(min_k, W + 1)
    F = list(range(-W, W + 1))
    # shift the search so the smallest admissible k is min_k
    if A.word is None:
        raise ValueError("orbit witnesses need a generic set")
    tail = BinarySetZ(0, "0", A.kind, lambda n: A.chi(n + min_k),
                      A.word[min_k:] if min_k <= len(A.word) else "")
    k = find_shift_witness(tail, B, F) + min_k
    neg_B = B.negate()
    return OrbitWitness(
        k=k,
        fingerprint=so_window(A, k, W),
        target=eta_window(B, W),
        negated_fingerprint=so_window(A, -k, W),
        negated_target=tuple(-eta(neg_B, n) for n in z_ball(W)),
    )


def s_quasimorphism(A: BinarySetZ, gen: int = 1) -> ZFunction:
    """s_o = xi(A) pulled back along the exponent sum in ``gen``."""
    return ZFunction(xi_function(A), gen)


def quantize(v: Number) -> Number:
    if isinstance(v, int) or Fraction(v).denominator == 1:
        return int(v)
    scale = 1 << QUANT_BITS
    return normalize(Fraction(round(Fraction(v) * scale), scale))


@dataclass
class EmpiricalMeasure:
    radius: int
    counts: Counter = field(default_factory=Counter)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def add(self, key: tuple, n: int = 1) -> None:
        self.counts[key] += n

    def merge(self, other: "EmpiricalMeasure") -> "EmpiricalMeasure":
        if other.radius != self.radius:
            raise ValueError("cannot merge histograms with different radii")
        out = EmpiricalMeasure(self.radius, Counter(self.counts))
        out.counts.update(other.counts)
        return out

    def sorted_items(self) -> list[tuple[tuple, int]]:
        return sorted(self.counts.items())

    def rows(self) -> list[tuple[str, int]]:
        return [(",".join(str(Fraction(v)) for v in k), c) for k, c in self.sorted_items()]


def hull_walk(phi: Quasimorphism, p: StepDistribution, steps: int, L: int, seed: int,
              spec: GroupSpec) -> EmpiricalMeasure:
    """Histogram of window fingerprints of x_1, ..., x_steps where x_n = omega_n . x_{n-1}.

    x_n = g_n . phi with g_n = omega_n ... omega_1, so its fingerprint is
    h -> phi(h g_n) - phi(g_n) on B_L.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    rng = SplitMix64(seed)
    cdf = p.sampler()
    atoms = [w for w, _ in p.support]
    words = ball(spec, L)
    hist = EmpiricalMeasure(L)
    g = LeftWord()
    for _ in range(steps):
        g.left_mul(atoms[cdf.draw(rng)])
        hist.add(tuple(quantize(phi.disp(h, g)) if h else 0 for h in words))
    return hist


def tv_distance(h1: EmpiricalMeasure, h2: EmpiricalMeasure) -> Fraction:
    if h1.radius != h2.radius:
        raise ValueError("histograms have different window radii")
    t1, t2 = h1.total, h2.total
    keys = set(h1.counts) | set(h2.counts)
    return sum((abs(Fraction(h1.counts.get(k, 0), t1) - Fraction(h2.counts.get(k, 0), t2))
                for k in keys), Fraction(0)) / 2


def eta_qm(A: BinarySetZ, gen: int = 1) -> ZFunction:
    return ZFunction(eta_function(A), gen)
