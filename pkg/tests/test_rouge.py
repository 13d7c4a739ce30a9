import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from dialsumm.corpus import tokenize
from dialsumm.rouge import RougeScore, rouge_multi, rouge_n

tokens = st.lists(st.sampled_from(list("abcde")), max_size=12)


def test_identity():
    s = rouge_n(["a", "b", "c"], ["a", "b", "c"], 2)
    assert (s.precision, s.recall, s.f1) == (1.0, 1.0, 1.0)


def test_unigram_fixture():
    s = rouge_n(tokenize("the cat sat on the mat"), tokenize("the cat was on the mat"), 1)
    assert s.precision == 5 / 6 and s.recall == 5 / 6
    assert s.f1 == pytest.approx(5 / 6, abs=1e-15)


def test_bigram_fixture():
    s = rouge_n(tokenize("the cat sat"), tokenize("the cat ran"), 2)
    assert (s.precision, s.recall, s.f1) == (0.5, 0.5, 0.5)


def test_clipping():
    s = rouge_n(["the"] * 4, ["the", "cat"], 1)
    assert s.precision == 0.25 and s.recall == 0.5


def test_empty_sides():
    assert rouge_n([], ["a"], 1) == RougeScore(1, 0.0, 0.0, 0.0)
    assert rouge_n(["a"], ["a"], 2) == RougeScore(2, 0.0, 0.0, 0.0)


def test_bad_n():
    with pytest.raises(ValueError):
        rouge_n(["a"], ["a"], 3)


@given(tokens, tokens, st.sampled_from([1, 2]))
def test_matches_oracle_and_bounds(cand, ref, n):
    s = rouge_n(cand, ref, n)
    assert (s.precision, s.recall, s.f1) == oracles.rouge_brute(cand, ref, n)
    assert 0 <= s.precision <= 1 and 0 <= s.recall <= 1 and 0 <= s.f1 <= 1


@given(tokens, tokens, st.randoms())
def test_unigram_order_free(cand, ref, rnd):
    shuffled = list(cand)
    rnd.shuffle(shuffled)
    assert rouge_n(shuffled, ref, 1) == rouge_n(cand, ref, 1)


@given(tokens, tokens)
def test_single_reference_multi_equals_single(cand, ref):
    for mode in ("best", "average"):
        assert rouge_multi(cand, [ref], 1, mode) == rouge_n(cand, ref, 1)


def test_multi_best_picks_identity():
    cand = ["a", "b"]
    assert rouge_multi(cand, [["a", "b"], ["x", "y"]], 1, "best").f1 == 1.0


def test_multi_average():
    s = rouge_multi(["a", "b"], [["a", "b"], ["x", "y"]], 1, "average")
    assert (s.precision, s.recall, s.f1) == (0.5, 0.5, 0.5)


def test_multi_errors():
    with pytest.raises(ValueError):
        rouge_multi(["a"], [], 1)
    with pytest.raises(ValueError):
        rouge_multi(["a"], [["a"]], 1, "median")
