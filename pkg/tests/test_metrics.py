from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from core_model import AlignmentError, PreconditionError, WordFrequencyTable
from metrics import (
    KEEP_SPACES,
    ChrfConfig,
    bins_to_frame,
    chrf,
    clipped_unigram_scores,
    corpus_statistics,
    corpus_unigram_scores,
    evaluate,
    f1_by_frequency_rank,
    format_plot_data,
    per_category_f1,
)


def brute_force_precision(hyp, ref):
    """Clipped precision by removing matched tokens from a copy of the reference"""
    if not hyp:
        return None
    pool = list(ref)
    matched = 0
    for token in hyp:
        if token in pool:
            pool.remove(token)
            matched += 1
    return matched / len(hyp)


def brute_force_chrf(hyp, ref, max_n, beta):
    precisions, recalls = [], []
    for n in range(1, max_n + 1):
        h = [hyp[i:i + n] for i in range(len(hyp) - n + 1)]
        r = [ref[i:i + n] for i in range(len(ref) - n + 1)]
        if not h and not r:
            continue
        if not h or not r:
            precisions.append(0.0)
            recalls.append(0.0)
            continue
        pool = list(r)
        matched = 0
        for gram in h:
            if gram in pool:
                pool.remove(gram)
                matched += 1
        precisions.append(matched / len(h))
        recalls.append(matched / len(r))
    if not precisions:
        return 0.0
    p = sum(precisions) / len(precisions)
    r = sum(recalls) / len(recalls)
    if beta ** 2 * p + r == 0:
        return 0.0
    return 100 * (1 + beta ** 2) * p * r / (beta ** 2 * p + r)


class TestUnigrams:
    def test_clipped_fixture(self):
        p, r, f1 = clipped_unigram_scores(["a", "b", "b", "d"], ["a", "b", "c"])
        assert p == pytest.approx(0.5, abs=1e-12)
        assert r == pytest.approx(2 / 3, abs=1e-12)
        assert f1 == pytest.approx(4 / 7, abs=1e-12)

    def test_empty_inputs(self):
        assert clipped_unigram_scores([], []) == (1.0, 1.0, 1.0)
        assert clipped_unigram_scores([], ["a"]) == (0.0, 0.0, 0.0)
        assert clipped_unigram_scores(["a"], ["b"]) == (0.0, 0.0, 0.0)

    def test_clipping_is_per_sentence(self):
        scores = corpus_unigram_scores(["a a", "b"], ["a", "a b"])
        assert scores.matches == 2
        assert scores.precision == pytest.approx(2 / 3)

    def test_line_count_mismatch(self):
        with pytest.raises(AlignmentError):
            corpus_unigram_scores(["a"], ["a", "b"])

    @given(hyp=st.lists(st.sampled_from("abcd"), max_size=12), ref=st.lists(st.sampled_from("abcd"), max_size=12))
    @settings(max_examples=300)
    def test_matches_brute_force(self, hyp, ref):
        expected = brute_force_precision(hyp, ref)
        p, _, _ = clipped_unigram_scores(hyp, ref)
        if expected is not None:
            assert p == pytest.approx(expected, abs=1e-12)


class TestCategories:
    def test_rare_includes_oov(self):
        train = WordFrequencyTable({"the": 10, "cat": 1})
        scores = per_category_f1(["the cat dog"], ["the cat bird"], train, rare_rank=1)
        assert scores["all"].matches == 2
        assert (scores["rare"].hyp_total, scores["rare"].ref_total, scores["rare"].matches) == (2, 2, 1)
        assert (scores["oov"].hyp_total, scores["oov"].ref_total, scores["oov"].matches) == (1, 1, 0)

    def test_bins(self):
        train = WordFrequencyTable({"the": 10, "a": 10, "cat": 2, "sat": 1})
        hyp = ["the cat sat on a mat", "a dog"]
        ref = ["the cat sat on the mat", "a cat"]
        bins = f1_by_frequency_rank(hyp, ref, train)
        assert [b.frequency for b in bins] == [10, 2, 1, 0]
        assert [(b.rank_start, b.rank_end) for b in bins] == [(1, 2), (3, 3), (4, 4), (5, None)]
        assert bins[-1].n_types == 2                       # on, mat
        total = corpus_unigram_scores(hyp, ref)
        assert sum(b.scores.matches for b in bins) == total.matches
        assert sum(b.scores.hyp_total for b in bins) == total.hyp_total
        assert sum(b.scores.ref_total for b in bins) == total.ref_total

    def test_plot_data(self):
        train = WordFrequencyTable({"a": 3})
        bins = f1_by_frequency_rank(["a b"], ["a c"], train)
        assert format_plot_data(bins) == "1\t3\t1.000000\t1\n2\t0\t0.000000\t1\n"
        assert list(bins_to_frame(bins)["freq"]) == [3, 0]

    def test_bins_follow_reference_frequencies(self):
        train = WordFrequencyTable({"a": 10, "b": 10, "c": 1, "d": 1, "x": 5})
        bins = f1_by_frequency_rank(["a b c d e x"], ["a b c d e"], train)
        reference = [b for b in bins if not b.hypothesis_only]
        assert [(b.frequency, b.n_types) for b in reference] == [(10, 2), (1, 2), (0, 1)]
        extra = bins[-1]
        assert extra.hypothesis_only
        assert (extra.scores.hyp_total, extra.scores.ref_total, extra.types.hyp_total) == (1, 0, 1)
        assert format_plot_data(bins) == "1\t10\t1.000000\t2\n4\t1\t1.000000\t2\n6\t0\t1.000000\t1\n"
        assert list(bins_to_frame(bins)["freq"]) == [10, 1, 0, ""]

    def test_type_level_scores(self):
        train = WordFrequencyTable({"a": 5, "b": 5, "c": 5})
        [only] = f1_by_frequency_rank(["a a a b", "c"], ["a a b b", "a"], train)
        assert (only.scores.matches, only.scores.hyp_total, only.scores.ref_total) == (3, 5, 5)
        assert only.f1 == pytest.approx(0.6)
        assert (only.types.matches, only.types.hyp_total, only.types.ref_total) == (2, 3, 2)
        assert only.type_f1 == pytest.approx(0.8)
        row = bins_to_frame([only]).iloc[0]
        assert row["f1"] == pytest.approx(0.6)
        assert row["type_f1"] == pytest.approx(0.8)
        assert (row["n_types"], row["hyp_types"]) == (2, 3)

    def test_frequent_words_score_higher(self):
        train = WordFrequencyTable({"the": 9, "cat": 3, "zebra": 1})
        hyp = ["the cat zebra foo", "the dog bar"]
        ref = ["the cat zebra qux", "the cat zebra zebra"]
        bins = f1_by_frequency_rank(hyp, ref, train)
        assert [b.frequency for b in bins] == [9, 3, 1, 0]
        f1s = [b.f1 for b in bins]
        assert all(a > b for a, b in zip(f1s, f1s[1:]))

    @given(hyp=st.lists(st.lists(st.sampled_from("abcdefg"), max_size=6).map(" ".join), min_size=1, max_size=5),
           ref=st.lists(st.lists(st.sampled_from("abcdefg"), max_size=6).map(" ".join), min_size=5, max_size=5))
    @settings(max_examples=200)
    def test_bins_add_up_to_the_corpus(self, hyp, ref):
        ref = ref[:len(hyp)]
        train = WordFrequencyTable({"a": 4, "b": 4, "c": 2, "d": 1})
        bins = f1_by_frequency_rank(hyp, ref, train)
        total = corpus_unigram_scores(hyp, ref)
        assert sum(b.scores.matches for b in bins) == total.matches
        assert sum(b.scores.hyp_total for b in bins) == total.hyp_total
        assert sum(b.scores.ref_total for b in bins) == total.ref_total
        ref_types = {w for line in ref for w in line.split()}
        assert sum(b.n_types for b in bins) == len(ref_types)
        assert all(b.n_types > 0 for b in bins if not b.hypothesis_only)
        assert sum(b.hypothesis_only for b in bins) <= 1


class TestChrf:
    def test_identical(self):
        assert chrf("the cat sat", "the cat sat") == pytest.approx(100.0)

    def test_derived_fixture(self):
        cfg = ChrfConfig(beta=3.0, max_n=3)
        score = chrf("ab", "abc", cfg)
        assert score == pytest.approx(100 * 1260 / 3105, abs=1e-9)
        assert score == pytest.approx(brute_force_chrf("ab", "abc", 3, 3.0), abs=1e-9)
        assert chrf("abc", "ab", cfg) == pytest.approx(brute_force_chrf("abc", "ab", 3, 3.0), abs=1e-9)

    def test_empty(self):
        assert chrf("", "") == 0.0
        assert chrf("", "abc") == 0.0

    def test_whitespace_policy(self):
        assert chrf("a b", "ab") == pytest.approx(100.0)
        assert chrf("a b", "ab", ChrfConfig(whitespace_policy=KEEP_SPACES)) < 100.0

    def test_invalid_config(self):
        with pytest.raises(PreconditionError):
            ChrfConfig(beta=0)
        with pytest.raises(PreconditionError):
            ChrfConfig(max_n=0)

    @given(hyp=st.text(alphabet="abcж", max_size=10), ref=st.text(alphabet="abcж", max_size=10),
           max_n=st.integers(min_value=1, max_value=6), beta=st.sampled_from([1.0, 2.0, 3.0]))
    @settings(max_examples=300)
    def test_matches_brute_force(self, hyp, ref, max_n, beta):
        expected = brute_force_chrf(hyp, ref, max_n, beta)
        assert chrf([hyp], [ref], ChrfConfig(beta=beta, max_n=max_n)) == pytest.approx(expected, abs=1e-9)


class TestReports:
    def test_corpus_statistics(self):
        stats = corpus_statistics(["a b a", "c"], ["a d", "e"])
        assert (stats.tokens, stats.types, stats.unk) == (4, 3, 2)

    def test_evaluate(self):
        report = evaluate(["a b b d"], ["a b c"])
        assert report.unigram.f1 == pytest.approx(4 / 7)
        assert report.chrf is not None
        text = report.format_tsv()
        assert "f1\t0.571429" in text

    def test_bins_need_training_data(self):
        with pytest.raises(PreconditionError):
            evaluate(["a"], ["a"], metrics=("bins",))

    def test_categories_and_bins_in_report(self):
        train = WordFrequencyTable({"a": 2, "b": 1})
        report = evaluate(["a b"], ["a c"], train, metrics=("f1", "bins"), rare_rank=1)
        assert set(report.categories) == {"all", "rare", "oov"}
        assert report.chrf is None
        assert "rank_start" in report.format_tsv()


def test_counter_helper_sanity():
    # brute force helpers agree with Counter clipping on a hand example
    assert brute_force_precision(["a", "a", "b"], ["a"]) == pytest.approx(sum((Counter("aab") & Counter("a")).values()) / 3)
