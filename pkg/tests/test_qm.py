from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from qmdyn import hull_lab
from qmdyn.qm import (
    Acted, Antisymmetrized, CountingQM, Fingerprint, HomomorphismQM, RightLimit, Scaled, Sum,
    ZFunction, act, antisymmetrize, count_occurrences, defect, defect_set, fingerprint,
    floor_half, rescale3, shifted_fingerprint,
)
from qmdyn.rng import SplitMix64
from qmdyn.words import GroupSpec, LeftWord, ball, inv, mul, parse_letters, reduce

F2 = GroupSpec(2)
AB = CountingQM((1, 2))
words2 = st.lists(st.sampled_from([1, -1, 2, -2]), max_size=10).map(reduce)


def test_count_occurrences_overlapping():
    assert count_occurrences((1, 1, 1), (1, 1)) == 2
    assert count_occurrences((1, 2, 1, 2), (1, 2)) == 2
    assert count_occurrences((), (1,)) == 0


def test_counting_values():
    assert AB(parse_letters("ab")) == 1
    assert AB(parse_letters("abab")) == 2
    assert AB(parse_letters("BA")) == -1
    assert AB(parse_letters("abBA")) == 0
    assert AB(parse_letters("aab")) == 1
    with pytest.raises(ValueError):
        CountingQM((1, -1))


@given(words2)
def test_counting_is_odd(w):
    assert AB(inv(w)) == -AB(w)


def test_floor_half():
    assert [floor_half(x) for x in (-3, -2, -1, 0, 1, 2, 3)] == [-2, -1, -1, 0, 0, 1, 1]
    assert floor_half(Fraction(5, 2)) == 1


def test_antisymmetrize_fixes_odd_integer_functions():
    phi = antisymmetrize(AB)
    for w in ball(F2, 4):
        assert phi(w) == AB(w)


def test_antisymmetrize_general():
    f = ZFunction(lambda n: n * n, 1)  # even function: antisymmetrized is zero
    phi = antisymmetrize(f)
    for n in range(-6, 7):
        w = (1,) * n if n >= 0 else (-1,) * -n
        assert phi(w) == 0
        assert phi(inv(w)) == -phi(w)


def brute_defect(phi, L):
    b = ball(F2, L)
    return max(abs(phi(mul(g, h)) - phi(g) - phi(h)) for g in b for h in b)


@pytest.mark.parametrize("L", [1, 2, 3])
def test_defect_matches_brute_force(L):
    res = defect(AB, L, F2)
    assert res.value == brute_defect(AB, L) == 1
    assert res.pair == ((1,), (2,))


def test_defect_of_homomorphism_is_zero():
    phi = HomomorphismQM([1, Fraction(1, 3)])
    assert defect(phi, 3, F2).value == 0
    assert defect_set(phi, 2, F2) == [0]


def test_defect_set_counting():
    assert defect_set(AB, 3, F2) == [-1, 0, 1]


def test_left_action():
    phi = AB
    for g1 in ball(F2, 2):
        for g2 in ball(F2, 1):
            lhs = act(mul(g1, g2), phi)
            rhs = act(g1, act(g2, phi))
            for h in ball(F2, 2):
                assert lhs(h) == rhs(h)


def test_act_fixes_homomorphisms():
    phi = HomomorphismQM([2, -1])
    assert act((1, 2), phi) is phi
    for h in ball(F2, 2):
        assert Acted(phi, (1, 2))(h) == phi(h)


def test_displacement_bounded_by_defect():
    d = defect(AB, 3, F2).value
    for g in ball(F2, 2):
        for h in ball(F2, 2):
            assert abs(act(g, AB)(h) - AB(h)) <= d


def nodes():
    A = hull_lab.generic_set(4)
    B = hull_lab.bernoulli_set(Fraction(1, 3), 5)
    base = rescale3(AB)
    return [
        AB,
        CountingQM((1, 1, -2)),
        HomomorphismQM([1, Fraction(1, 2)]),
        Antisymmetrized(CountingQM((2, 1, 1))),
        Antisymmetrized(ZFunction(lambda n: n * n + n, 2)),
        Sum((AB, Scaled(CountingQM((2, 2)), -2))),
        hull_lab.perturbation_qm(hull_lab.xi_function(A), 1, base, F2),
        Acted(AB, (1, -2, -2)),
        Sum((Scaled(RightLimit(AB, 1), 3), hull_lab.eta_qm(B))),
        Acted(RightLimit(AB, 2), (2, 1)),
    ]


@settings(max_examples=60, deadline=None)
@given(words2, words2)
def test_disp_matches_direct_evaluation(h, g):
    view = LeftWord(g)
    for phi in nodes():
        if isinstance(phi, Sum) and isinstance(phi.terms[0], Scaled) and isinstance(phi.terms[0].inner, RightLimit):
            # displacement of a right limit is the limit of displacements
            k = len(g) + len(h) + 10
            gk = mul(g, (1,) * k)
            inner = phi.terms[0].inner.inner
            expect = 3 * (inner(mul(h, gk)) - inner(gk)) + phi.terms[1].disp(h, view)
            assert phi.disp(h, view) == expect
        elif isinstance(phi, Acted) and isinstance(phi.inner, RightLimit):
            k = len(g) + len(h) + 10
            gk = mul(mul(g, phi.gamma), (2,) * k)
            inner = phi.inner.inner
            assert phi.disp(h, view) == inner(mul(h, gk)) - inner(gk)
        else:
            assert phi.disp(h, view) == phi(mul(h, g)) - phi(g)


def test_right_limit_stabilises():
    lim = RightLimit(AB, 1)
    for w in ball(F2, 3):
        k = len(w) + 20
        g = (1,) * k
        assert lim(w) == AB(mul(w, g)) - AB(g)


def test_fingerprint_round_trip_and_validation():
    fp = fingerprint(AB, 2, F2)
    assert Fingerprint.from_rows(2, 2, fp.rows()) == fp
    assert fp.restrict(1).values == fp.values[:5]
    with pytest.raises(ValueError):
        Fingerprint(2, 1, (0, 1))
    with pytest.raises(ValueError):
        Fingerprint(2, 1, (1, 0, 0, 0, 0))


def test_shifted_fingerprint_matches_acted():
    big = fingerprint(AB, 4, F2)
    rng = SplitMix64(2)
    b2 = ball(F2, 2)
    for _ in range(20):
        gamma = b2[rng.randbelow(len(b2))]
        assert shifted_fingerprint(big, gamma, 2) == fingerprint(act(gamma, AB), 2, F2)
