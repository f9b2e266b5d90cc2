import itertools
from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from qmdyn import hull_lab as hl
from qmdyn.qm import CountingQM, rescale3
from qmdyn.rng import SplitMix64
from qmdyn.walk import StepDistribution
from qmdyn.words import GroupSpec, ball, exp_sum, mul

Z = GroupSpec(1)
F2 = GroupSpec(2)
PZ = StepDistribution.uniform(1)


def test_generic_word_small():
    assert hl.generic_word(2) == "0100011011"
    A = hl.generic_set(2)
    assert [n for n in range(-3, 12) if n in A] == [1, 5, 6, 8, 9]


@pytest.mark.parametrize("K", [1, 3, 6])
def test_generic_word_contains_all_words(K):
    x = hl.generic_word(K)
    for k in range(1, K + 1):
        for t in itertools.product("01", repeat=k):
            assert "".join(t) in x


def test_eta_xi_definitions():
    A = hl.finite_set([0, 2, -3])
    assert [hl.eta(A, n) for n in (-3, 0, 1, 2)] == [0, 0, -1, 0]
    assert [hl.xi(A, n) for n in (-3, -2, 0, 2, 3)] == [1, -1, 0, 1, -1]
    assert hl.eta(hl.evens(), 0) == 0


def test_window_error_without_closed_form():
    A = hl.explicit_set([1], 2)
    assert 1 in A and 2 not in A
    with pytest.raises(hl.WindowError):
        3 in A


def test_periodic_and_negate():
    E = hl.evens(3)
    assert E.members() == [-2, 0, 2]
    assert hl.periodic_set("01", 3).members() == [-3, -1, 1, 3]
    A = hl.finite_set([1, 4])
    assert [n for n in range(-5, 6) if n in A.negate()] == [-4, -1]


def test_bernoulli_set_determinism_and_density():
    A = hl.bernoulli_set(Fraction(1, 5), 7)
    B = hl.bernoulli_set(Fraction(1, 5), 7)
    assert [A.chi(n) for n in range(-50, 50)] == [B.chi(n) for n in range(-50, 50)]
    dens = sum(A.chi(n) for n in range(20000)) / 20000
    assert abs(dens - 0.2) < 0.02
    assert not any(hl.bernoulli_set(0, 1).chi(n) for n in range(100))
    assert all(hl.bernoulli_set(1, 1).chi(n) for n in range(100))
    with pytest.raises(ValueError):
        hl.bernoulli_set(Fraction(3, 2), 1)


@given(st.integers(-300, 300))
def test_decompose_mod3(v):
    base, s = hl.decompose_mod3(v)
    assert base + s == v and base % 3 == 0 and s in (-1, 0, 1)


def test_perturbation_requires_3z_base():
    A = hl.generic_set(3)
    with pytest.raises(ValueError):
        hl.perturbation_qm(hl.xi_function(A), 1, CountingQM((1, 2)), F2)
    phi = hl.perturbation_qm(hl.xi_function(A), 1, rescale3(CountingQM((1, 2))), F2)
    for w in ball(F2, 3):
        base, s = hl.decompose_mod3(phi(w))
        assert base == 3 * CountingQM((1, 2))(w)
        assert s == hl.xi(A, exp_sum(w, 1))


def test_find_shift_witness_against_scan():
    A = hl.generic_set(6)
    rng = SplitMix64(4)
    F = list(range(-3, 4))
    found = 0
    for _ in range(60):
        T = hl.random_window_set(3, rng)
        scan = next((j for j in range(len(A.word) + 8)
                     if all(A.chi(f + j) == T.chi(f) for f in F)), None)
        if scan is None:
            with pytest.raises(LookupError):
                hl.find_shift_witness(A, T, F)
        else:
            found += 1
            assert hl.find_shift_witness(A, T, F) == scan
    assert 0 < found < 60


def test_find_shift_witness_noncontiguous_and_failure():
    A = hl.generic_set(4)
    T = hl.explicit_set([3], 3)
    k = hl.find_shift_witness(A, T, [-3, 0, 3])
    assert [A.chi(f + k) for f in (-3, 0, 3)] == [0, 0, 1]
    with pytest.raises(LookupError):
        hl.find_shift_witness(hl.generic_set(2), hl.explicit_set(range(-5, 6), 5), range(-5, 6))


@pytest.mark.parametrize("B", [hl.explicit_set([], 4), hl.evens(4), hl.explicit_set([0, 2], 4)])
def test_orbit_limit_small(B):
    A = hl.generic_set(9)
    w = hl.so_orbit_limit(A, B, 4)
    assert w.k > 4
    assert w.match and w.negated_match
    # independent check of the hull action on the window
    for n in range(-4, 5):
        assert hl.xi(A, n + w.k) - hl.xi(A, w.k) == hl.eta(B, n)


def test_quantize():
    assert hl.quantize(3) == 3
    assert hl.quantize(Fraction(6, 2)) == 3
    assert hl.quantize(Fraction(1, 3)) == Fraction(round(Fraction(1, 3) * 2**20), 2**20)


def naive_hull_walk(phi, p, steps, L, seed, spec):
    # tuple words, evaluated directly
    from qmdyn.rng import SplitMix64 as R
    rng = R(seed)
    cdf = p.sampler()
    atoms = [w for w, _ in p.support]
    words = ball(spec, L)
    g = ()
    c = Counter()
    for _ in range(steps):
        g = mul(atoms[cdf.draw(rng)], g)
        c[tuple(phi(mul(h, g)) - phi(g) for h in words)] += 1
    return c


@pytest.mark.parametrize("phi,spec", [
    (CountingQM((1, 2)), F2),
    (hl.eta_qm(hl.bernoulli_set(Fraction(1, 2), 3)), Z),
])
def test_hull_walk_matches_naive(phi, spec):
    p = StepDistribution.uniform(spec.rank)
    hist = hl.hull_walk(phi, p, 400, 2, 5, spec)
    assert hist.counts == naive_hull_walk(phi, p, 400, 2, 5, spec)
    assert hist.total == 400


def test_tv_distance():
    a = hl.EmpiricalMeasure(1, Counter({(0,): 1, (1,): 1}))
    b = hl.EmpiricalMeasure(1, Counter({(0,): 2}))
    assert hl.tv_distance(a, b) == Fraction(1, 2)
    assert hl.tv_distance(a, a) == 0
    with pytest.raises(ValueError):
        hl.tv_distance(a, hl.EmpiricalMeasure(2, Counter({(0,): 1})))
    assert a.merge(b).counts == Counter({(0,): 3, (1,): 1})


def iid_pattern_tv(q1, q2):
    # TV of the window-2 fingerprint law of eta(B) when B is i.i.d. Bernoulli(q)
    def law(q):
        d = Counter()
        for bits in itertools.product([0, 1], repeat=5):
            b = dict(zip([0, 1, -1, 2, -2], bits))
            pr = Fraction(1)
            for x in bits:
                pr *= q if x else 1 - q
            d[tuple(b[h] - b[0] for h in [0, 1, -1, 2, -2])] += pr
        return d
    a, b = law(q1), law(q2)
    return sum(abs(a[k] - b[k]) for k in set(a) | set(b)) / 2


def test_iid_pattern_tv_oracle():
    assert iid_pattern_tv(Fraction(1, 5), Fraction(4, 5)) == Fraction(348, 625)
    assert iid_pattern_tv(Fraction(1, 2), Fraction(1, 2)) == 0


def test_walk_tv_near_iid_oracle():
    seed = 3
    h1 = hl.hull_walk(hl.eta_qm(hl.bernoulli_set(Fraction(1, 5), seed)), PZ, 20000, 2, seed, Z)
    h2 = hl.hull_walk(hl.eta_qm(hl.bernoulli_set(Fraction(4, 5), seed)), PZ, 20000, 2, seed, Z)
    tv = hl.tv_distance(h1, h2)
    assert abs(float(tv) - 348 / 625) < 0.15
