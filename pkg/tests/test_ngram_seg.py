import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from core_model import PreconditionError, ReservedMarkerError, WordFrequencyTable, build_word_frequency_table, revert_segmentation
from ngram_seg import NgramConfig, segment_corpus_ngrams, segment_ngrams

_CHARS = st.one_of(
    st.characters(blacklist_categories=("Zs", "Zl", "Zp", "Cc", "Cs")),
    st.sampled_from("@</w>"),
)
_token = st.text(_CHARS, min_size=1, max_size=12).filter(lambda w: "@@" not in w and "</w>" not in w)
_line = st.lists(_token, max_size=6).map(" ".join)
_corpus = st.lists(st.lists(st.text("abcde", min_size=1, max_size=9), min_size=1, max_size=6).map(" ".join),
                   min_size=1, max_size=8)


def token_count(lines, cfg):
    return sum(1 for _ in segment_corpus_ngrams(lines, cfg, workers=1).units)


def test_bigrams():
    assert segment_ngrams("lower", NgramConfig(2)).symbols == ("lo", "we", "r</w>")
    assert segment_corpus_ngrams(["lower"], NgramConfig(2)).to_lines() == ["lo@@ we@@ r"]


def test_detached_end_of_word():
    cfg = NgramConfig(2, attach_eow=False)
    assert segment_ngrams("lower", cfg).symbols == ("lo", "we", "r", "</w>")
    assert segment_corpus_ngrams(["lower"], cfg).to_lines() == ["lo@@ we@@ r"]


def test_shortlist_keeps_frequent_words():
    table = WordFrequencyTable({"the": 10, "and": 10, "lower": 1})
    cfg = NgramConfig.from_table(1, 1, table)
    assert cfg.shortlist == {"and"}
    assert segment_corpus_ngrams(["and the"], cfg).to_lines() == ["and t@@ h@@ e"]


def test_invalid_config():
    with pytest.raises(PreconditionError):
        NgramConfig(0)
    with pytest.raises(PreconditionError):
        NgramConfig(1, shortlist_size=-1)


def test_reserved_marker():
    with pytest.raises(ReservedMarkerError):
        segment_corpus_ngrams(["a@@b"], NgramConfig(1))


def test_trigrams_need_fewer_tokens():
    lines = ["the lowest newer wider widest", "low lower"]
    uni = segment_corpus_ngrams(lines, NgramConfig(1))
    tri = segment_corpus_ngrams(lines, NgramConfig(3))
    assert len(list(tri.units)) < len(list(uni.units))


@given(lines=st.lists(_line, min_size=1, max_size=10), n=st.integers(min_value=1, max_value=4),
       k=st.integers(min_value=0, max_value=3), attach=st.booleans())
@settings(max_examples=300)
def test_revert_of_segment_is_identity(lines, n, k, attach):
    table = build_word_frequency_table(lines)
    cfg = NgramConfig.from_table(n, k, table, attach_eow=attach)
    segmented = segment_corpus_ngrams(lines, cfg, workers=2)
    assert revert_segmentation(segmented.to_lines()) == lines


@given(lines=_corpus)
@settings(max_examples=200)
def test_larger_shortlist_never_adds_tokens(lines):
    table = build_word_frequency_table(lines)
    counts = [token_count(lines, NgramConfig.from_table(2, k, table)) for k in range(len(table) + 2)]
    assert all(a >= b for a, b in zip(counts, counts[1:]))
    assert counts[-1] == table.total_tokens


@given(lines=_corpus)
@settings(max_examples=200)
def test_token_count_falls_as_n_grows(lines):
    words = [w for line in lines for w in line.split()]
    longest = max(len(w) for w in words)
    counts = {n: token_count(lines, NgramConfig(n)) for n in range(1, longest + 2)}
    for n in range(1, longest + 1):
        assert counts[n] == sum(math.ceil(len(w) / n) for w in words)
        if any(math.ceil(len(w) / n) > math.ceil(len(w) / (n + 1)) for w in words):
            assert counts[n] > counts[n + 1]
        else:
            assert counts[n] == counts[n + 1]
    assert counts[1] == sum(len(w) for w in words)
    assert counts[longest] == len(words)
