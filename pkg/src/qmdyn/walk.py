"""Random walks on free groups: exact convolution powers, seeded paths,
drift, the averaging operators pi_n and their Cesaro means, and the
left-harmonicity residual of a function on a word ball.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Union

from .qm import Fingerprint, Number, Quasimorphism, Tabulated, normalize
from .rng import InverseCDF, SplitMix64, sub_seed
from .words import IDENTITY, GroupSpec, Word, ball, inv, mul, word_key

DEFAULT_SUPPORT_CAP = 1_000_000


class SupportCapExceeded(ValueError):
    pass


@dataclass(frozen=True)
class StepDistribution:
    """Finitely supported symmetric probability measure on F_r.

    ``support`` is sorted in canonical word order; that order also fixes
    the inverse-CDF sampler.
    """

    support: tuple[tuple[Word, Fraction], ...]

    def __init__(self, atoms: Union[dict, Iterable[tuple[Word, Number]]]):
        items = atoms.items() if isinstance(atoms, dict) else atoms
        merged: dict[Word, Fraction] = {}
        for w, q in items:
            merged[w] = merged.get(w, Fraction(0)) + Fraction(q)
        support = tuple(sorted(merged.items(), key=lambda kv: word_key(kv[0])))
        object.__setattr__(self, "support", support)
        if any(q <= 0 for _, q in support):
            raise ValueError("probabilities must be positive")
        if sum(q for _, q in support) != 1:
            raise ValueError("probabilities must sum to 1")
        if any(merged.get(inv(w)) != q for w, q in support):
            raise ValueError("step distribution is not symmetric")

    @classmethod
    def uniform(cls, rank: int) -> "StepDistribution":
        """Uniform measure on the 2r generators and their inverses."""
        q = Fraction(1, 2 * rank)
        return cls({(x,): q for x in GroupSpec(rank).letters()})

    def as_dict(self) -> dict[Word, Fraction]:
        return dict(self.support)

    def sampler(self) -> InverseCDF:
        return InverseCDF([q for _, q in self.support])


@lru_cache(maxsize=64)
def _conv_power(p: StepDistribution, n: int, cap: int) -> tuple:
    current: dict[Word, Fraction] = {IDENTITY: Fraction(1)}
    for _ in range(n):
        nxt: dict[Word, Fraction] = {}
        for g, a in current.items():
            for s, b in p.support:
                h = mul(g, s)
                nxt[h] = nxt.get(h, 0) + a * b
        if len(nxt) > cap:
            raise SupportCapExceeded(
                f"p^*n support exceeds {cap} atoms; use Monte Carlo mode"
            )
        current = nxt
    return tuple(sorted(current.items(), key=lambda kv: word_key(kv[0])))


def conv_power(p: StepDistribution, n: int, cap: int = DEFAULT_SUPPORT_CAP) -> dict[Word, Fraction]:
    """Exact n-fold convolution p * ... * p, keyed by word in canonical order."""
    if n < 0:
        raise ValueError("n must be >= 0")
    return dict(_conv_power(p, n, cap))


@dataclass(frozen=True)
class PathSample:
    seed: int
    steps: tuple[Word, ...]
    products: tuple[Word, ...]  # Z_0 = e, Z_k = omega_1 ... omega_k

    @property
    def endpoint(self) -> Word:
        return self.products[-1]


def sample_steps(p: StepDistribution, n: int, rng: SplitMix64) -> list[Word]:
    cdf = p.sampler()
    atoms = [w for w, _ in p.support]
    return [atoms[cdf.draw(rng)] for _ in range(n)]


def sample_path(p: StepDistribution, n: int, seed: int) -> PathSample:
    steps = sample_steps(p, n, SplitMix64(seed))
    products = [IDENTITY]
    for s in steps:
        products.append(mul(products[-1], s))
    return PathSample(seed, tuple(steps), tuple(products))


def drift(phi: Callable[[Word], Number], p: StepDistribution, n: int,
          cap: int = DEFAULT_SUPPORT_CAP) -> Number:
    """d_n = sum_g p^*n(g) phi(g)."""
    return normalize(sum((q * phi(g) for g, q in conv_power(p, n, cap).items()), Fraction(0)))


def drift_table(phi, p: StepDistribution, n_max: int) -> list[tuple[int, Number]]:
    return [(n, drift(phi, p, n)) for n in range(n_max + 1)]


@dataclass(frozen=True)
class MCEstimate:
    mean: float
    stderr: float
    samples: int


def avg_pi(phi: Callable[[Word], Number], p: StepDistribution, n: int, gamma: Word,
           cap: int = DEFAULT_SUPPORT_CAP) -> Number:
    """pi_n(phi)(gamma) = sum_g p^*n(g) (phi(g gamma) - phi(g)), exactly."""
    if not gamma:
        return 0
    total = Fraction(0)
    for g, q in conv_power(p, n, cap).items():
        total += q * (phi(mul(g, gamma)) - phi(g))
    return normalize(total)


def avg_pi_mc(phi: Callable[[Word], Number], p: StepDistribution, n: int, gamma: Word,
              samples: int, seed: int, workers: int = 1) -> MCEstimate:
    """Monte Carlo estimate of pi_n(phi)(gamma) with its standard error.

    Sample j belongs to worker j % workers, which draws from its own
    stream seeded with sub_seed(seed, worker); the result is independent of
    how the workers are scheduled.
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    rngs = [SplitMix64(sub_seed(seed, i)) for i in range(workers)]
    cdf = p.sampler()
    atoms = [w for w, _ in p.support]
    total = 0.0
    total_sq = 0.0
    for j in range(samples):
        rng = rngs[j % workers]
        z = IDENTITY
        for _ in range(n):
            z = mul(z, atoms[cdf.draw(rng)])
        x = float(phi(mul(z, gamma)) - phi(z))
        total += x
        total_sq += x * x
    mean = total / samples
    var = max(total_sq / samples - mean * mean, 0.0)
    stderr = math.sqrt(var / (samples - 1)) if samples > 1 else math.inf
    return MCEstimate(mean, stderr, samples)


def cesaro_table(phi: Callable[[Word], Number], p: StepDistribution, N: int,
                 words: list[Word]) -> dict[Word, Fraction]:
    """(1/N) sum_{n=1}^N pi_n(phi)(w) for each w in ``words``."""
    if N < 1:
        raise ValueError("N must be >= 1")
    acc = {w: Fraction(0) for w in words}
    for n in range(1, N + 1):
        for g, q in conv_power(p, n).items():
            base = phi(g)
            for w in words:
                if w:
                    acc[w] += q * (phi(mul(g, w)) - base)
    return {w: normalize(v / N) for w, v in acc.items()}


def cesaro_harmonize(phi: Callable[[Word], Number], p: StepDistribution, N: int, L: int,
                     spec: GroupSpec) -> Fingerprint:
    words = ball(spec, L)
    table = cesaro_table(phi, p, N, words)
    return Fingerprint(spec.rank, L, tuple(table[w] for w in words))


def harmonic_residual(psi: Union[Fingerprint, Callable[[Word], Number]],
                      p: StepDistribution, L: int, spec: GroupSpec) -> Number:
    """max over g in B_L of |sum_s p(s) psi(s^-1 g) - psi(g)|.

    A Fingerprint argument must have radius >= L + max step length.
    """
    if isinstance(psi, Fingerprint):
        if psi.radius < L + max(len(s) for s, _ in p.support):
            raise ValueError("fingerprint radius too small for the residual window")
        psi = psi.as_function()
    worst = Fraction(0)
    for g in ball(spec, L):
        r = abs(sum((q * psi(mul(inv(s), g)) for s, q in p.support), Fraction(0)) - psi(g))
        worst = max(worst, r)
    return normalize(worst)


def to_function(fp: Fingerprint) -> Tabulated:
    return fp.as_function()
