
import pytest
from hypothesis import given, strategies as st

from multireward.metrics import (RougeScore, SaliencyWeights, f_score, lcs_alignment, lcs_len,
                                 novel_ngram_pct, rouge_l, rouge_n, rouge_sal, union_lcs)

from .oracles import brute_lcs, lexmin_alignment, all_alignment_union


def test_lcs_examples():
    assert lcs_len(list("abcd"), list("abcd")) == 4
    assert lcs_len(list("abcde"), list("ace")) == brute_lcs(list("abcde"), list("ace")) == 3
    assert lcs_len(["a", "b"], ["c", "d"]) == 0
    assert lcs_len([], ["a"]) == 0


seqs = st.lists(st.sampled_from("abcd"), max_size=7)


@given(seqs, seqs)
def test_lcs_matches_oracle(a, b):
    assert lcs_len(a, b) == brute_lcs(a, b)


@given(seqs, seqs)
def test_alignment_is_optimal_and_lexmin(a, b):
    pairs = lcs_alignment(a, b)
    assert len(pairs) == brute_lcs(a, b)
    assert all(a[i] == b[j] for i, j in pairs)
    assert tuple(i for i, _ in pairs) == lexmin_alignment(a, b)


def test_union_lcs_example():
    r = ["w1", "w2", "w3", "w4", "w5"]
    C = [["w1", "w2", "w6", "w7", "w8"], ["w1", "w3", "w8", "w9", "w5"]]
    matched = union_lcs(r, C)
    assert {r[i] for i in matched} == {"w1", "w2", "w3", "w5"}
    assert matched == all_alignment_union(r, C)


def test_union_lcs_degenerate():
    r = list("abcd")
    assert union_lcs(r, [r]) == {0, 1, 2, 3}
    assert union_lcs(r, [list("xyz")]) == set()


@given(seqs, st.lists(seqs, max_size=3))
def test_union_bounds_and_subset(r, C):
    matched = union_lcs(r, C)
    assert len(matched) <= len(r)
    assert len(matched) >= max([lcs_len(r, c) for c in C], default=0)
    assert matched <= all_alignment_union(r, C)


def test_rouge_l_examples():
    ref = [["a", "b", "c", "d"]]
    assert rouge_l(ref, ref).as_tuple() == (1.0, 1.0, 1.0)
    s = rouge_l(ref, [["a", "b", "x"]], beta=1)
    assert s.precision == pytest.approx(2 / 3, abs=1e-15)
    assert s.recall == pytest.approx(1 / 2, abs=1e-15)
    assert s.f == pytest.approx(4 / 7, abs=1e-15)
    assert rouge_l(ref, []) == RougeScore(0.0, 0.0, 0.0)


def test_rouge_l_requires_reference():
    with pytest.raises(ValueError):
        rouge_l([], [["a"]])
    with pytest.raises(ValueError):
        rouge_l([["a"]], [["a"]], beta=0)


def test_rouge_l_clips_repeated_hits():
    # one candidate token is the LCS of two reference sentences
    s = rouge_l([["a"], ["a"]], [["a"]])
    assert s.precision == 1.0 and s.recall == 0.5


def test_rouge_l_beta_weights_recall():
    ref, cand = [list("abcd")], [list("abx")]
    p, r = 2 / 3, 1 / 2
    assert rouge_l(ref, cand, beta=2.0).f == pytest.approx(5 * p * r / (r + 4 * p))


def test_rouge_sal_example():
    eta = SaliencyWeights({"a": 0.8, "b": 0.5, "c": 0.2})
    s = rouge_sal([["a", "b", "c"]], [["a", "c"]], eta, eta)
    assert s.precision == pytest.approx(1.0, abs=1e-12)
    assert s.recall == pytest.approx(1.0 / 1.5, abs=1e-12)
    assert s.f == pytest.approx(0.8, abs=1e-12)


def test_rouge_sal_unit_weights_equal_rouge_l():
    ref, cand = [list("abcd"), list("efg")], [list("axcf"), list("gb")]
    one = SaliencyWeights.constant(1.0)
    assert rouge_sal(ref, cand, one, one) == rouge_l(ref, cand)


def test_rouge_sal_identity_any_weights():
    ref = [list("abca"), list("dd")]
    eta = SaliencyWeights({"a": 0.9, "b": 0.1, "c": 0.4, "d": 0.05})
    assert rouge_sal(ref, ref, eta, eta).as_tuple() == pytest.approx((1.0, 1.0, 1.0), abs=1e-12)


def test_rouge_sal_degenerate_weights():
    zero = SaliencyWeights({"a": 0.0, "b": 0.0})
    with pytest.raises(ValueError, match="degenerate reference weights"):
        rouge_sal([["a"]], [["a"]], zero, zero)
    ok = SaliencyWeights({"a": 1.0, "b": 0.0})
    assert rouge_sal([["a"]], [["b"]], ok, ok).precision == 0.0
    assert rouge_sal([["a"]], [], ok, ok).f == 0.0


def test_saliency_weights_default_is_mean():
    eta = SaliencyWeights({"a": 0.2, "b": 0.6})
    assert eta["zzz"] == pytest.approx(0.4)
    with pytest.raises(ValueError):
        SaliencyWeights({"a": 1.5})


def test_rouge_n_examples():
    ref = [["a", "b", "b"]]
    assert rouge_n(ref, ref, 1).as_tuple() == (1.0, 1.0, 1.0)
    s = rouge_n(ref, [["b", "b", "b"]], 1)
    assert (s.precision, s.recall) == pytest.approx((2 / 3, 2 / 3))
    assert rouge_n(ref, ref, 4) == RougeScore(0.0, 0.0, 0.0)
    assert rouge_n(ref, [], 1) == RougeScore(0.0, 0.0, 0.0)


def test_rouge_n_no_cross_sentence_ngrams():
    assert rouge_n([["a", "b"]], [["a"], ["b"]], 2).f == 0.0


def test_novel_ngram_examples():
    src = [["a", "b", "c", "d"]]
    assert novel_ngram_pct(src, [["a", "b", "c"]], 2) == 0.0
    assert novel_ngram_pct(src, [["x", "y"]], 1) == 100.0
    assert novel_ngram_pct(src, [["a", "b", "e"]], 2) == 50.0
    with pytest.raises(ValueError, match="summary too short for n"):
        novel_ngram_pct(src, [["a"]], 2)


sent_lists = st.lists(st.lists(st.sampled_from("abcde"), min_size=1, max_size=6),
                      min_size=1, max_size=3)
weights = st.fixed_dictionaries({t: st.floats(0.01, 1.0) for t in "abcde"})


@given(sent_lists, sent_lists, weights)
def test_scores_bounded(ref, cand, w):
    eta = SaliencyWeights(w)
    for s in (rouge_l(ref, cand), rouge_sal(ref, cand, eta, eta), rouge_n(ref, cand, 1),
              rouge_n(ref, cand, 2)):
        for v in s.as_tuple():
            assert 0.0 <= v <= 1.0 + 1e-12
        assert (s.f == 0.0) == (s.precision == 0.0 or s.recall == 0.0)
        perfect = abs(s.precision - 1) < 1e-12 and abs(s.recall - 1) < 1e-12
        assert (abs(s.f - 1.0) < 1e-12) == perfect


@given(sent_lists, sent_lists, st.floats(0.05, 1.0))
def test_rouge_sal_constant_weights_match_rouge_l(ref, cand, c):
    eta = SaliencyWeights.constant(c)
    a, b = rouge_sal(ref, cand, eta, eta), rouge_l(ref, cand)
    assert a.as_tuple() == pytest.approx(b.as_tuple(), abs=1e-12)


@given(sent_lists, sent_lists, weights, st.sampled_from([0.1, 0.5, 3.0, 10.0]))
def test_rouge_sal_scale_invariant(ref, cand, w, lam):
    eta = SaliencyWeights(w)
    a = rouge_sal(ref, cand, eta, eta)
    b = rouge_sal(ref, cand, eta.scaled(lam), eta.scaled(lam))
    assert a.as_tuple() == pytest.approx(b.as_tuple(), abs=1e-12)


@given(st.lists(st.sampled_from("abcde"), min_size=1, max_size=8),
       st.lists(st.sampled_from("abcde"), min_size=1, max_size=8))
def test_rouge_l_swap_symmetry_single_sentence(a, b):
    fwd, back = rouge_l([a], [b]), rouge_l([b], [a])
    assert fwd.precision == pytest.approx(back.recall, abs=1e-15)
    assert fwd.recall == pytest.approx(back.precision, abs=1e-15)


def test_f_score_zero_cases():
    assert f_score(0.0, 1.0) == 0.0
    assert f_score(1.0, 0.0) == 0.0
    assert f_score(1.0, 1.0) == 1.0
