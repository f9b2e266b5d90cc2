"""Cut-and-project sets in R over Z[sqrt d], their twists in F_r x R, and
the skew-product patch map.

A model set here is

    P = offset + {m + n sqrt(d) : m, n in Z, lo <= m - n sqrt(d) <= hi}

and every membership test is exact.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Optional

from .qm import Fingerprint, Number, Quasimorphism, defect_set, shifted_fingerprint
from .quadext import QuadExt
from .rng import SplitMix64
from .words import GroupSpec, Word, ball, format_word, inv, mul


_RANGE_CACHE: dict = {}
_TABLE_CACHE: dict = {}
_TABLE_LIMIT = 4096  # translates kept per model set


def _sort_exact(pairs: list, key) -> list:
    """Sort by float value, falling back to exact comparison if floats misorder."""
    pairs.sort(key=lambda mn: float(key(*mn)))
    vals = [key(*mn) for mn in pairs]
    if any(not a < b for a, b in zip(vals, vals[1:])):
        pairs.sort(key=lambda mn: key(*mn))
    return pairs


@dataclass(frozen=True)
class ModelSet:
    d: int = 2
    # plain rationals are accepted and lifted into Q(sqrt d)
    lo: QuadExt = -1
    hi: QuadExt = 1
    offset: QuadExt = 0

    def __post_init__(self):
        for name in ("lo", "hi", "offset"):
            v = getattr(self, name)
            if not isinstance(v, QuadExt):
                object.__setattr__(self, name, QuadExt(v, 0, self.d))
            elif v.d != self.d:
                raise ValueError(f"{name} lives in Q(sqrt {v.d}), not Q(sqrt {self.d})")
        if self.hi < self.lo:
            raise ValueError("empty window")
        # translates share the window, so they share the per-n ranges
        key = (self.d, self.lo, self.hi)
        object.__setattr__(self, "_ranges", _RANGE_CACHE.setdefault(key, {}))
        object.__setattr__(self, "_table", _TABLE_CACHE.setdefault(key, {}))

    @property
    def alpha(self) -> QuadExt:
        return QuadExt(0, 1, self.d)

    def m_range(self, n: int) -> tuple[int, int]:
        """Integers m with m - n sqrt(d) in the window (empty when lo > hi)."""
        r = self._ranges.get(n)
        if r is None:
            shift = n * self.alpha
            r = self._ranges[n] = ((self.lo + shift).ceil(), (self.hi + shift).floor())
        return r

    def contains_pair(self, m: int, n: int) -> bool:
        a, b = self.m_range(n)
        return a <= m <= b

    def contains(self, x) -> bool:
        y = x - self.offset if isinstance(x, QuadExt) else QuadExt(x, 0, self.d) - self.offset
        if y.a.denominator != 1 or y.b.denominator != 1:
            return False
        return self.contains_pair(y.a.numerator, y.b.numerator)

    __contains__ = contains

    def translate(self, t) -> "ModelSet":
        """P + t."""
        return ModelSet(self.d, self.lo, self.hi, self.offset + t)

    def pairs_in(self, lo_t, hi_t) -> list[tuple[int, int]]:
        """Lattice coordinates (m, n) of the points of P in [lo_t, hi_t], sorted by value."""
        U0 = QuadExt(lo_t, 0, self.d) if not isinstance(lo_t, QuadExt) else lo_t
        U1 = QuadExt(hi_t, 0, self.d) if not isinstance(hi_t, QuadExt) else hi_t
        if U1 < U0:
            return []
        # serve queries from a cached enumeration of [-M, M], grown by doubling
        M, pairs, pts = self._table.get(self.offset, (0, [], []))
        if not (-M <= U0 and U1 <= M):
            need = max(abs(float(U0)), abs(float(U1))) + 1
            M = max(2 * M, int(need) + 1, 64)
            pairs = self._pairs_direct(QuadExt(-M, 0, self.d), QuadExt(M, 0, self.d))
            pts = [self.point(*mn) for mn in pairs]
            if len(self._table) >= _TABLE_LIMIT:
                self._table.clear()
            self._table[self.offset] = (M, pairs, pts)
        i = bisect_left(pts, U0)
        j = bisect_right(pts, U1)
        return pairs[i:j]

    def _pairs_direct(self, U0: QuadExt, U1: QuadExt) -> list[tuple[int, int]]:
        U0, U1 = U0 - self.offset, U1 - self.offset
        # n sqrt(d) = (u - v) / 2 with u in [U0, U1] and v in [lo, hi]
        n_lo = ((U0 - self.hi) / (2 * self.alpha)).ceil()
        n_hi = ((U1 - self.lo) / (2 * self.alpha)).floor()
        out = []
        for n in range(n_lo, n_hi + 1):
            shift = n * self.alpha
            a, b = self.m_range(n)
            a = max(a, (U0 - shift).ceil())
            b = min(b, (U1 - shift).floor())
            out.extend((m, n) for m in range(a, b + 1))
        return _sort_exact(out, self.point)

    def point(self, m: int, n: int) -> QuadExt:
        return QuadExt(m, n, self.d) + self.offset

    def points_in(self, lo_t, hi_t) -> list[QuadExt]:
        return [self.point(m, n) for m, n in self.pairs_in(lo_t, hi_t)]

    def enumerate(self, R) -> list[QuadExt]:
        """Points of P in [-R, R], sorted."""
        if R <= 0:
            raise ValueError("R must be positive")
        return self.points_in(-R, R)


def default_model_set(d: int = 2) -> ModelSet:
    return ModelSet(d)


@dataclass(frozen=True)
class GapStats:
    min_gap: QuadExt
    max_gap: QuadExt
    count: int

    def as_dict(self) -> dict:
        return {"min_gap": str(self.min_gap), "max_gap": str(self.max_gap), "points": self.count}


def delone_stats(points: list) -> GapStats:
    """Smallest and largest gap between consecutive points of a sorted list.

    Every gap between consecutive points of a complete enumeration of
    [-R, R] is a genuine gap of the set, so no edge trimming is needed.
    """
    if len(points) < 2:
        raise ValueError("need at least two points")
    gaps = [b - a for a, b in zip(points, points[1:])]
    return GapStats(min(gaps), max(gaps), len(points))


@dataclass
class CheckReport:
    check: str
    params: dict
    ok: bool
    witnesses: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"check": self.check, "params": self.params, "ok": self.ok,
                "witnesses": self.witnesses, **({"details": self.details} if self.details else {})}


def covering_set(P: ModelSet, C) -> list[tuple[int, int]]:
    """F: points of the model set with window W + W - W, cut to [-C, C]."""
    F = ModelSet(P.d, 2 * P.lo - P.hi, 2 * P.hi - P.lo)
    return F.pairs_in(-C, C)


def approx_subgroup_check(P: ModelSet, R, C, max_witnesses: int = 20) -> CheckReport:
    """Check p + q in P + F for all p, q in P cap [-R/2, R/2]."""
    if P.offset != 0:
        raise ValueError("approximate subgroup check needs an untranslated model set")
    F = covering_set(P, C)
    S = P.pairs_in(-Fraction(R) / 2, Fraction(R) / 2)
    witnesses = []
    checked = 0
    for i, (m1, n1) in enumerate(S):
        for m2, n2 in S[i:]:
            checked += 1
            m, n = m1 + m2, n1 + n2
            if not any(P.contains_pair(m - fm, n - fn) for fm, fn in F):
                if len(witnesses) < max_witnesses:
                    witnesses.append([str(P.point(m1, n1)), str(P.point(m2, n2))])
    F_pts = [P.point(*f) for f in F]
    return CheckReport(
        "approx-subgroup", {"d": P.d, "R": str(R), "C": str(C)}, not witnesses, witnesses,
        {"F": [str(f) for f in F_pts], "pairs_checked": checked, "points": len(S)},
    )


@dataclass(frozen=True)
class TwistedSet:
    """P(phi) = {(g, t) : phi(g) + t in P}."""

    phi: Callable[[Word], Number]
    P: ModelSet

    def member(self, g: Word, t) -> bool:
        return self.P.contains(t + self.phi(g) if isinstance(t, QuadExt) else QuadExt(t, 0, self.P.d) + self.phi(g))

    def fiber(self, g: Word, R) -> list[QuadExt]:
        """t in [-R, R] with (g, t) in P(phi), i.e. (P - phi(g)) cap [-R, R]."""
        return self.P.translate(-self.phi(g)).enumerate(R)


def twisted_member(T: TwistedSet, g: Word, t) -> bool:
    return T.member(g, t)


def _int_value(v: Number) -> int:
    if Fraction(v).denominator != 1:
        raise ValueError("twist checks need an integer-valued quasimorphism")
    return int(v)


def twist_approx_check(T: TwistedSet, L: int, R, spec: GroupSpec, C=4,
                       max_witnesses: int = 20) -> CheckReport:
    """Exhaustive check of P(phi) P(phi) in P(phi) ({e} x (F + D_L(phi))) on a finite window.

    Pairs (g1, t1), (g2, t2) range over g_i in B_{L//2} and all fiber
    points t_i in [-R, R]; D_L is the defect set on B_L.
    """
    P, phi = T.P, T.phi
    if P.offset != 0:
        raise ValueError("twist check needs an untranslated model set")
    words = ball(spec, L // 2)
    for g in words:
        if _int_value(phi(g)) != -_int_value(phi(inv(g))):
            raise ValueError(f"phi is not antisymmetric at {format_word(g)}")
    D = [_int_value(x) for x in defect_set(phi, L, spec)]
    F = covering_set(P, C)
    FD = sorted({(fm + dv, fn) for fm, fn in F for dv in D})
    # fiber over g as lattice pairs of P, stored with phi(g) so t = point - phi(g)
    fibers = {}
    for g in words:
        v = _int_value(phi(g))
        fibers[g] = (v, P.pairs_in(v - R, v + R))
    witnesses = []
    checked = 0
    for g1 in words:
        v1, S1 = fibers[g1]
        for g2 in words:
            v2, S2 = fibers[g2]
            g = mul(g1, g2)
            vg = _int_value(phi(g))
            for m1, n1 in S1:
                for m2, n2 in S2:
                    checked += 1
                    # phi(g) + t1 + t2 in lattice coordinates
                    m = vg + (m1 - v1) + (m2 - v2)
                    n = n1 + n2
                    if not any(P.contains_pair(m - a, n - b) for a, b in FD):
                        if len(witnesses) < max_witnesses:
                            witnesses.append({
                                "g1": format_word(g1), "t1": str(P.point(m1, n1) - v1),
                                "g2": format_word(g2), "t2": str(P.point(m2, n2) - v2),
                            })
    return CheckReport(
        "twist-approx", {"L": L, "R": str(R), "C": str(C), "d": P.d}, not witnesses, witnesses,
        {"defect_set": D, "products_checked": checked},
    )


def twist_delone_check(T: TwistedSet, L: int, R, spec: GroupSpec) -> CheckReport:
    """Gap statistics of every fiber over B_L compared with those of P on [-R, R]."""
    ref = delone_stats(T.P.enumerate(R))
    per_fiber = {}
    witnesses = []
    for g in ball(spec, L):
        st = delone_stats(T.fiber(g, R))
        per_fiber[format_word(g)] = [str(st.min_gap), str(st.max_gap)]
        if (st.min_gap, st.max_gap) != (ref.min_gap, ref.max_gap):
            witnesses.append({"word": format_word(g), "min_gap": str(st.min_gap),
                              "max_gap": str(st.max_gap)})
    return CheckReport("twist-delone", {"L": L, "R": str(R), "d": T.P.d}, not witnesses, witnesses,
                       {"reference": ref.as_dict(), "fibers": per_fiber})


Patch = list[tuple[Word, QuadExt]]


def skew_pi(fp: Fingerprint, P: ModelSet, Lw: int, Rt) -> Patch:
    """{(g, t) : g in B_Lw, t in (P - psi(g)) cap [-Rt, Rt]} for the function psi behind fp."""
    if fp.radius < Lw:
        raise ValueError(f"fingerprint radius {fp.radius} < word radius {Lw}")
    out = []
    for g, v in zip(fp.words, fp.values):
        if len(g) > Lw:
            break
        # (P - v) cap [-Rt, Rt] = (P cap [v - Rt, v + Rt]) - v
        for t in P.points_in(v - Rt, v + Rt):
            out.append((g, t - v))
    return out


def patch_rows(patch: Patch) -> list[tuple[str, str]]:
    return [(format_word(g), str(t)) for g, t in patch]


def act_on_patch(patch: Iterable[tuple[Word, QuadExt]], g: Word, t) -> list[tuple[Word, QuadExt]]:
    """(g, t) . Q = Q (g, t)^-1 = {(h g^-1, s - t) : (h, s) in Q}."""
    gi = inv(g)
    return [(mul(h, gi), s - t) for h, s in patch]


def skew_equivariance(big: Fingerprint, P: ModelSet, g: Word, t: QuadExt, Lw: int, Rt) -> bool:
    """pi((g, t).(psi, P)) == (g, t).pi(psi, P) on B_Lw x [-Rt, Rt].

    The action on the skew product is (g, t).(psi, P) = (g.psi, P - psi(g) - t).
    ``big`` must cover B_{Lw + |g|}.
    """
    psi_g = big.table()[g]
    left = skew_pi(shifted_fingerprint(big, g, Lw), P.translate(-(t + psi_g)), Lw, Rt)
    wide = skew_pi(big, P, Lw + len(g), abs(t) + Rt)
    right = [(h, s) for h, s in act_on_patch(wide, g, t) if len(h) <= Lw and abs(s) <= Rt]
    return set(left) == set(right)


def random_equivariance_trials(big: Fingerprint, P: ModelSet, spec: GroupSpec, samples: int,
                               seed: int, Lw: int = 2, Rt=10, max_len: int = 2) -> CheckReport:
    """Seeded equivariance trials with |g| <= max_len and t a point of a fiber."""
    rng = SplitMix64(seed)
    words = ball(spec, max_len)
    fn = big.as_function()
    witnesses = []
    for _ in range(samples):
        g = words[rng.randbelow(len(words))]
        fiber = P.translate(-fn(g)).enumerate(5)
        t = fiber[rng.randbelow(len(fiber))]
        if not skew_equivariance(big, P, g, t, Lw, Rt):
            witnesses.append({"g": format_word(g), "t": str(t)})
    return CheckReport("skew-equivariance", {"samples": samples, "seed": seed, "Lw": Lw,
                                             "Rt": str(Rt)}, not witnesses, witnesses)


def separation_check(fp1: Fingerprint, fp2: Fingerprint) -> Optional[Word]:
    """First word in canonical order where the two fingerprints differ, or None."""
    if (fp1.rank, fp1.radius) != (fp2.rank, fp2.radius):
        raise ValueError("fingerprints have different radii")
    for w, a, b in zip(fp1.words, fp1.values, fp2.values):
        if a != b:
            return w
    return None
