from __future__ import annotations

from itertools import product

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from conftest import brute_language, even_ok, golden_ok
from soficgibbs import (
    Alphabet,
    NoMagicWord,
    NotPrimitive,
    PeriodTooLarge,
    PresentationError,
    SftApproximation,
    SoficPresentation,
    admissible_words,
    build_sft,
    enumerate_periodic,
    find_magic_word,
    is_magic,
    magic_boundary_constants,
    Potential,
    specification_length,
    specification_witness,
)
from soficgibbs.symbolic import primitivity_exponent


def words(*ss):
    return sorted(tuple(int(c) for c in s) for s in ss)


# -- alphabet ---------------------------------------------------------------


def test_alphabet_round_trip():
    A = Alphabet(("a", "b", "c"))
    assert A.encode("cab") == (2, 0, 1)
    assert A.decode((2, 0, 1)) == "cab"
    assert len(Alphabet.of_size(4)) == 4


def test_alphabet_needs_two_distinct_symbols():
    with pytest.raises(Exception):
        Alphabet(("0",))
    with pytest.raises(Exception):
        Alphabet(("0", "0"))


# -- presentation validation ------------------------------------------------


def test_not_right_resolving_is_rejected():
    with pytest.raises(PresentationError):
        SoficPresentation("01", ["A", "B"], [("A", "0", "A"), ("A", "0", "B"), ("B", "1", "A")])


def test_periodic_graph_is_not_primitive():
    with pytest.raises(NotPrimitive):
        SoficPresentation("01", ["A", "B"], [("A", "0", "B"), ("B", "1", "A")])


def test_stranded_vertices_are_pruned():
    # C has no in-edge and B no edges at all
    P = SoficPresentation("01", ["A", "B", "C"], [("A", "0", "A"), ("A", "1", "A"), ("C", "0", "A")])
    assert len(P.vertices) == 1
    assert admissible_words(P, 2) == words("000", "001", "010", "011", "100", "101", "110", "111")


# -- admissible words -------------------------------------------------------


def test_full_shift_words(full2):
    assert admissible_words(full2, 1) == words("00", "01", "10", "11")


def test_golden_words(golden):
    assert admissible_words(golden, 2) == words("000", "001", "010", "100", "101")


def test_even_words(even):
    got = admissible_words(even, 2)
    assert len(got) == 7
    assert (1, 0, 1) not in got


@pytest.mark.parametrize("n", range(0, 9))
def test_language_matches_brute_force(golden, even, n):
    assert admissible_words(golden, n) == brute_language(golden_ok, n)
    assert admissible_words(even, n) == brute_language(even_ok, n)


def test_golden_beta_shift_is_golden_mean(golden):
    B = SoficPresentation.beta_shift([1, 1])
    for n in range(7):
        assert admissible_words(B, n) == admissible_words(golden, n)


def test_beta_shift_rejects_invalid_expansion():
    with pytest.raises(PresentationError):
        SoficPresentation.beta_shift([1, 2])
    with pytest.raises(PresentationError):
        SoficPresentation.beta_shift([0, 1], period=1)


def test_beta_shift_periodic_expansion_language():
    # quasi-greedy expansion (2,0,1)(0,1)^inf style check: every word is
    # lexicographically at most the expansion along all its suffixes
    B = SoficPresentation.beta_shift([2, 1], period=1)
    t = [2] + [1] * 12
    for w in admissible_words(B, 6):
        for i in range(len(w)):
            assert list(w[i:]) <= t[: len(w) - i]


# -- finite type approximations -------------------------------------------


def test_full_shift_sft_is_full(full2):
    for m in range(4):
        assert len(build_sft(full2, m).admissible_words(6)) == 2**7


def test_even_x1_is_full_shift(even):
    S = build_sft(even, 1)
    assert S.admissible_words(1) == words("00", "01", "10", "11")
    assert len(S.admissible_words(5)) == 64


def test_even_x2_forbids_exactly_101(even):
    S = build_sft(even, 2)
    assert set(product((0, 1), repeat=3)) - set(S.words) == {(1, 0, 1)}
    assert S.is_admissible((1, 0, 0, 0, 1))
    assert not even.is_admissible((1, 0, 0, 0, 1))


@pytest.mark.parametrize("fixture", ["golden", "even"])
def test_language_nesting(fixture, request):
    P = request.getfixturevalue(fixture)
    for m in range(0, 7):
        S, T = build_sft(P, m), build_sft(P, m + 1)
        for n in range(0, 9):
            small = set(T.admissible_words(n))
            big = set(S.admissible_words(n))
            assert small <= big
            if n <= m:
                assert big == set(admissible_words(P, n))


def test_three_letter_nesting():
    P = SoficPresentation.from_forbidden("abc", ["aa", "bcb", "cc"])
    for m in range(0, 5):
        S, T = build_sft(P, m), build_sft(P, m + 1)
        for n in range(0, 7):
            assert set(T.admissible_words(n)) <= set(S.admissible_words(n))
        assert set(S.admissible_words(m)) == set(admissible_words(P, m))


@pytest.mark.parametrize("n", range(0, 8))
def test_hausdorff_surrogate(even, n):
    # X_m agrees with X on words of length n+1 from m = n onwards
    for m in range(n, n + 3):
        assert build_sft(even, m).admissible_words(n) == admissible_words(even, n)


def test_sft_words_are_labels_of_presentation(even):
    for m in range(5):
        assert all(even.is_admissible(w) for w in build_sft(even, m).words)


# -- periodic points --------------------------------------------------------


def test_periodic_full_shift(full2):
    per = enumerate_periodic(build_sft(full2, 0), 1)
    assert sorted(per.points) == words("00", "01", "10", "11")


def test_periodic_golden(golden):
    per = enumerate_periodic(build_sft(golden, 1), 2)
    assert sorted(per.points) == words("000", "001", "010", "100")
    tr = np.trace(np.linalg.matrix_power(np.array([[1, 1], [1, 0]]), 3))
    assert per.trace == tr == 4


def test_periodic_alternating_has_no_odd_points():
    S = SftApproximation.from_words("01", ["01", "10"])
    per = enumerate_periodic(S, 2)
    assert len(per) == 0 == per.trace


def test_periodic_budget():
    S = build_sft(SoficPresentation.full_shift(2), 3)
    with pytest.raises(PeriodTooLarge):
        enumerate_periodic(S, 20, budget=100)


def _cyclic_points(blocks, order, p):
    k = order + 1
    out = []
    for w in product((0, 1), repeat=p + 1):
        ext = w * (k // len(w) + 2)
        if all(ext[i:i + k] in blocks for i in range(p + 1)):
            out.append(w)
    return out


@settings(max_examples=60, deadline=None)
@given(st.sets(st.tuples(st.integers(0, 1), st.integers(0, 1), st.integers(0, 1)), min_size=1),
       st.integers(0, 7))
def test_periodic_points_match_cyclic_oracle(blocks, p):
    try:
        S = SftApproximation("01", 2, blocks)
    except PresentationError:
        assume(False)
    per = enumerate_periodic(S, p)
    assert sorted(per.points) == _cyclic_points(set(blocks), 2, p)
    A = S.transition_matrix().toarray()
    assert len(per) == int(np.trace(np.linalg.matrix_power(A, p + 1)))


# -- magic words ------------------------------------------------------------


def test_full_shift_magic_word_is_empty(full2):
    assert find_magic_word(full2) == ()


def test_even_magic_word_is_one(even):
    assert find_magic_word(even) == (1,)
    assert is_magic(even, (1,))
    assert not is_magic(even, (0,))


def test_letter_graph_every_letter_is_magic(golden):
    G = build_sft(golden, 1).presentation
    for a in range(2):
        assert is_magic(G, (a,))
        states = frozenset(range(len(G.vertices)))
        assert len(G.step(states, a)) == 1


@pytest.mark.parametrize("forbidden", [["11"], ["111"], ["101"], ["00", "111"], ["1001"]])
def test_found_magic_words_pass_the_direct_check(forbidden):
    P = SoficPresentation.from_forbidden("01", forbidden)
    w = find_magic_word(P)
    assert is_magic(P, w)


def test_magic_search_budget():
    P = SoficPresentation.from_forbidden("01", ["101"])
    assert find_magic_word(P) == (1,)
    with pytest.raises(NoMagicWord):
        find_magic_word(P, max_states=1)


# -- specification ----------------------------------------------------------


def test_specification_lengths(full2, golden, even):
    assert specification_length(full2) == 0
    assert specification_length(golden) == 1
    assert specification_length(even) == 1


def test_primitivity_exponent_matches_power_check():
    A = np.array([[1, 1], [1, 0]])
    assert primitivity_exponent(A) == 2
    assert np.all(np.linalg.matrix_power(A, 2) > 0)
    assert not np.all(A > 0)


def _all_words(P, upto):
    return [w for n in range(upto) for w in admissible_words(P, n)]


@pytest.mark.parametrize("fixture", ["full2", "golden", "even"])
def test_specification_witness_with_symmetric_gaps(fixture, request):
    P = request.getfixturevalue(fixture)
    ell = specification_length(P)
    ws = _all_words(P, 4)
    for k in range(ell + 1, ell + 4):
        for a in ws:
            for b in ws:
                c = specification_witness(P, a, b, k)
                assert c is not None, (a, b, k)
                assert len(c) == len(a) + len(b) + 2 * k
                assert c[: len(a)] == a and c[len(a) + k: len(a) + k + len(b)] == b
                assert P.is_admissible(c * 3)


def test_specification_witness_golden_at_ell(golden):
    ws = _all_words(golden, 4)
    assert all(specification_witness(golden, a, b, 1) is not None for a in ws for b in ws)


def test_literal_single_gap_period_fails_on_golden(golden):
    # a period of |a|+|b|+k leaves no room between b and the next copy of a
    for k in range(1, 5):
        assert specification_witness(golden, (1,), (1,), k, closing_gap=0) is None


def test_even_shift_needs_gap_two_for_some_pairs(even):
    a, b = (1, 0), (0, 1)
    assert specification_witness(even, a, b, 1) is None
    assert specification_witness(even, a, b, 2) is not None


# -- magic boundary constants -----------------------------------------------


def test_boundary_constants_full_shift(full2, zero2):
    mc = magic_boundary_constants(full2, zero2)
    assert mc.k == 1 and mc.ell == 0
    assert mc.epsilon == pytest.approx(1.0)
    assert mc.theta_X == pytest.approx(0.5)
    assert mc.C_X == pytest.approx(1.0)
    assert mc.m_X == 2


def test_boundary_constants_even_shift(even, zero2):
    mc = magic_boundary_constants(even, zero2)
    assert 0 < mc.theta_X < 1
    assert np.isfinite([mc.epsilon, mc.C_X]).all()
    assert mc.k >= mc.ell + 1


def test_boundary_constants_zero_norm_three_letters():
    mc = magic_boundary_constants(SoficPresentation.full_shift(3), Potential.zero(Alphabet.of_size(3)))
    assert mc.C_X == 1.0
    assert mc.epsilon == pytest.approx(0.5)
