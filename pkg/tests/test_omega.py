import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from traverse_lab.acceptance import brute_force_flip_parity
from traverse_lab.omega import (OmegaWord, as_word, chain_bound, enumerate_admissible, enumerate_by_norm,
                                flip_sign_exponent, group_reversal_parity, is_admissible, mirror, norm,
                                reduced_norm)

words = st.lists(st.integers(1, 6), min_size=1, max_size=7).map(tuple)


@pytest.mark.parametrize("w, n, r", [("11", 2, 0), ("121", 4, 1), ("2", 2, 1), ("1221", 6, 2)])
def test_norms(w, n, r):
    assert norm(w) == n
    assert reduced_norm(w) == r


@pytest.mark.parametrize("w, ok", [("121", True), ("2", True), ("12", False), ("11", True),
                                   ("1", False), ("131", False), ("4", True), ("1241", True)])
def test_admissible(w, ok):
    assert is_admissible(w) is ok


def test_mirror_examples():
    assert mirror("121") == as_word("121")
    assert mirror((1, 2, 1, 2, 1)) == OmegaWord((1, 2, 1, 2, 1))
    assert mirror((3, 2, 1)) == OmegaWord((1, 2, 3))


@pytest.mark.parametrize("w, eps", [("2", 0), ("121", 0), ("1221", 1)])
def test_flip_sign_examples(w, eps):
    assert flip_sign_exponent(w) == eps


def test_flip_sign_matches_brute_force_up_to_norm_10():
    ws = enumerate_by_norm(10)
    assert len(ws) > 50
    for w in ws:
        assert flip_sign_exponent(w) == brute_force_flip_parity(w), str(w)


def _inversions(perm):
    return sum(1 for i, j in itertools.combinations(range(len(perm)), 2) if perm[i] > perm[j])


@given(st.lists(st.integers(0, 4), max_size=6))
def test_group_reversal_parity_counts_inversions(sizes):
    blocks, k = [], 0
    for g in sizes:
        blocks.append(list(range(k, k + g)))
        k += g
    perm = [x for b in reversed(blocks) for x in b]
    assert group_reversal_parity(sizes) == _inversions(perm) % 2


@pytest.mark.parametrize("m, b", [(1, 0), (2, 1), (3, 1), (4, 2), (5, 2)])
def test_chain_bound(m, b):
    assert chain_bound(m) == b


def test_chain_bound_rejects_zero():
    with pytest.raises(ValueError):
        chain_bound(0)


def test_enumeration_examples():
    assert {str(w) for w in enumerate_admissible(1, 3)} == {"11", "2", "121"}
    assert {str(w) for w in enumerate_admissible(0, 2)} == {"11"}
    assert enumerate_admissible(0, 1) == []


def test_enumeration_matches_exhaustive_filter():
    oracle = set()
    for q in range(1, 5):
        for e in itertools.product(range(1, 5), repeat=q):
            if sum(x - 1 for x in e) <= 3 and is_admissible(e):
                oracle.add(e)
    assert {w.entries for w in enumerate_admissible(3, 4)} == oracle


def test_enumerate_by_norm():
    assert all(norm(w) <= 10 and is_admissible(w) for w in enumerate_by_norm(10))
    assert {str(w) for w in enumerate_by_norm(4)} == {"11", "2", "4", "13", "31", "121"}


def test_enumeration_rejects_negative():
    with pytest.raises(ValueError):
        enumerate_admissible(-1, 2)


@given(words)
def test_mirror_is_involution(w):
    assert mirror(mirror(w)) == OmegaWord(w)


@given(words)
def test_norm_identity(w):
    assert norm(w) == reduced_norm(w) + len(w)


@given(words)
def test_admissibility_closed_under_mirror(w):
    assert is_admissible(w) == is_admissible(mirror(w))


@given(words)
def test_flip_sign_is_mirror_invariant_for_admissible(w):
    if is_admissible(w):
        assert flip_sign_exponent(w) in (0, 1)
        assert brute_force_flip_parity(w) == flip_sign_exponent(w)


def test_word_parse_and_order():
    assert str(OmegaWord.parse("1 2 1")) == "121"
    assert OmegaWord.parse("11") < OmegaWord.parse("121")
    assert np.array_equal(list(as_word([1, 2, 1])), [1, 2, 1])
