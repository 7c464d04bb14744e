#!/usr/bin/env python3
"""
Evaluation metrics for segmented MT output

- clipped unigram precision / recall / F1 (1-gram BLEU precision without
  brevity penalty; clipping per sentence pair, counts summed over the corpus)
- the same restricted to word categories (all, rare, OOV) by training rank
- unigram F1 per bin of reference words sharing one training frequency,
  over tokens and over types
- chrF (character n-gram F-beta, beta=3 by default)
- corpus statistics: #tokens, #types, #UNK

All metrics consume reverted (unsegmented) text except corpus_statistics,
which counts written units.
"""

from __future__ import annotations

import logging
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from config import CHRF_BETA, CHRF_MAX_N, RARE_RANK
from core_model import AlignmentError, PreconditionError, SegmentedText, WordFrequencyTable

logger = logging.getLogger(__name__)

Line = Union[str, Sequence[str]]

CATEGORY_ALL = "all"
CATEGORY_RARE = "rare"
CATEGORY_OOV = "oov"

STRIP_SPACES = "strip-spaces"
KEEP_SPACES = "keep-spaces"


def _tokens(line: Line) -> List[str]:
    return line.split() if isinstance(line, str) else list(line)


def _as_lines(text: Union[str, Sequence[Line]]) -> List[Line]:
    return text.split("\n") if isinstance(text, str) else list(text)


def _check_parallel(hyp: Sequence, ref: Sequence):
    if len(hyp) != len(ref):
        raise AlignmentError(f"hypothesis has {len(hyp)} lines, reference has {len(ref)}")


# Clipped unigrams

@dataclass
class UnigramScores:
    matches: int = 0
    hyp_total: int = 0
    ref_total: int = 0

    @property
    def precision(self) -> float:
        if self.hyp_total == 0:
            return 1.0 if self.ref_total == 0 else 0.0
        return self.matches / self.hyp_total

    @property
    def recall(self) -> float:
        if self.ref_total == 0:
            return 1.0 if self.hyp_total == 0 else 0.0
        return self.matches / self.ref_total

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r > 0 else 0.0

    def add(self, other: "UnigramScores"):
        self.matches += other.matches
        self.hyp_total += other.hyp_total
        self.ref_total += other.ref_total


def clipped_counts(hyp: Sequence[str], ref: Sequence[str],
                   keep: Optional[Callable[[str], bool]] = None) -> UnigramScores:
    """Per-sentence clipped counts, optionally restricted to words passing keep"""
    hyp_counts = Counter(w for w in hyp if keep is None or keep(w))
    ref_counts = Counter(w for w in ref if keep is None or keep(w))
    matches = sum(min(c, ref_counts[w]) for w, c in hyp_counts.items())
    return UnigramScores(matches, sum(hyp_counts.values()), sum(ref_counts.values()))


def clipped_unigram_scores(hyp: Sequence[str], ref: Sequence[str]) -> Tuple[float, float, float]:
    """(precision, recall, F1) of one token list against another"""
    s = clipped_counts(hyp, ref)
    return s.precision, s.recall, s.f1


def corpus_unigram_scores(hyp_lines: Sequence[Line], ref_lines: Sequence[Line],
                          keep: Optional[Callable[[str], bool]] = None) -> UnigramScores:
    _check_parallel(hyp_lines, ref_lines)
    total = UnigramScores()
    for hyp, ref in zip(hyp_lines, ref_lines):
        total.add(clipped_counts(_tokens(hyp), _tokens(ref), keep))
    return total


def per_category_f1(hyp_lines: Sequence[Line], ref_lines: Sequence[Line], train: WordFrequencyTable,
                    rare_rank: int = RARE_RANK) -> Dict[str, UnigramScores]:
    """
    all: every word; rare: not among the rare_rank most frequent training
    words (OOVs included); oov: absent from training
    """
    ranks = train.ranks()
    categories = {
        CATEGORY_ALL: None,
        CATEGORY_RARE: lambda w: ranks.get(w, rare_rank + 1) > rare_rank,
        CATEGORY_OOV: lambda w: w not in ranks,
    }
    return {name: corpus_unigram_scores(hyp_lines, ref_lines, keep) for name, keep in categories.items()}


# Frequency bins

@dataclass
class FrequencyBin:
    """
    Words of one training frequency. scores counts tokens (clipped per
    sentence pair); types counts distinct words, a type matching when it is
    clipped-matched in at least one sentence pair. frequency is None for the
    row of hypothesis words whose frequency no reference word shares.
    """
    frequency: Optional[int]          # 0 = OOV
    rank_start: Optional[int]
    rank_end: Optional[int]
    scores: UnigramScores = field(default_factory=UnigramScores)
    types: UnigramScores = field(default_factory=UnigramScores)

    @property
    def hypothesis_only(self) -> bool:
        return self.frequency is None

    @property
    def n_types(self) -> int:
        """Reference types in the bin"""
        return self.types.ref_total

    @property
    def f1(self) -> float:
        return self.scores.f1

    @property
    def type_f1(self) -> float:
        return self.types.f1


def _rank_ranges(train: WordFrequencyTable) -> Dict[int, Tuple[int, int]]:
    ranges: Dict[int, Tuple[int, int]] = {}
    for rank, (_, count) in enumerate(train.sorted_items(), start=1):
        start, _ = ranges.get(count, (rank, rank))
        ranges[count] = (start, rank)
    return ranges


def f1_by_frequency_rank(hyp_lines: Sequence[Line], ref_lines: Sequence[Line],
                         train: WordFrequencyTable) -> List[FrequencyBin]:
    """
    One bin per training frequency of a reference word, most frequent first,
    OOVs last. Hypothesis tokens of a frequency no reference word has go to a
    trailing hypothesis-only row, so all rows together add up to the corpus
    counts and aggregate to corpus F1.
    """
    _check_parallel(hyp_lines, ref_lines)
    tokens: Dict[int, UnigramScores] = defaultdict(UnigramScores)
    hyp_types: Dict[int, set] = defaultdict(set)
    ref_types: Dict[int, set] = defaultdict(set)
    matched_types: Dict[int, set] = defaultdict(set)
    for hyp, ref in zip(hyp_lines, ref_lines):
        hyp_counts = Counter(_tokens(hyp))
        ref_counts = Counter(_tokens(ref))
        for word in hyp_counts.keys() | ref_counts.keys():
            freq = train.get(word)
            h, r = hyp_counts[word], ref_counts[word]
            tokens[freq].add(UnigramScores(min(h, r), h, r))
            if h:
                hyp_types[freq].add(word)
            if r:
                ref_types[freq].add(word)
            if h and r:
                matched_types[freq].add(word)

    def type_scores(freq: int) -> UnigramScores:
        return UnigramScores(len(matched_types[freq]), len(hyp_types[freq]), len(ref_types[freq]))

    ranges = _rank_ranges(train)
    bins: List[FrequencyBin] = []
    for freq in sorted(ref_types, key=lambda f: (f == 0, -f)):
        start, end = ranges.get(freq, (len(train) + 1, None))
        bins.append(FrequencyBin(freq, start, end, tokens[freq], type_scores(freq)))

    leftover = sorted(f for f in tokens if f not in ref_types)
    if leftover:
        extra = FrequencyBin(None, None, None)
        for freq in leftover:
            extra.scores.add(tokens[freq])
            extra.types.add(type_scores(freq))
        bins.append(extra)
    return bins


def bins_to_frame(bins: Sequence[FrequencyBin]) -> pd.DataFrame:
    """
    f1/precision/recall are token-level, type_f1/type_precision/type_recall
    type-level; n_types and hyp_types count distinct words. The
    hypothesis-only row has an empty freq.
    """
    def blank(value):
        return "" if value is None else value

    return pd.DataFrame(
        [{
            "rank_start": blank(b.rank_start),
            "rank_end": blank(b.rank_end),
            "freq": blank(b.frequency),
            "f1": b.f1,
            "precision": b.scores.precision,
            "recall": b.scores.recall,
            "type_f1": b.type_f1,
            "type_precision": b.types.precision,
            "type_recall": b.types.recall,
            "n_types": b.n_types,
            "hyp_types": b.types.hyp_total,
            "ref_tokens": b.scores.ref_total,
            "hyp_tokens": b.scores.hyp_total,
        } for b in bins],
        columns=["rank_start", "rank_end", "freq", "f1", "precision", "recall",
                 "type_f1", "type_precision", "type_recall", "n_types", "hyp_types",
                 "ref_tokens", "hyp_tokens"],
    )


def format_plot_data(bins: Sequence[FrequencyBin]) -> str:
    """rank<TAB>freq<TAB>f1<TAB>n per reference bin, f1 over tokens"""
    return "".join(f"{b.rank_start}\t{b.frequency}\t{b.f1:.6f}\t{b.n_types}\n"
                   for b in bins if not b.hypothesis_only)


# chrF

@dataclass(frozen=True)
class ChrfConfig:
    beta: float = CHRF_BETA
    max_n: int = CHRF_MAX_N
    whitespace_policy: str = STRIP_SPACES

    def __post_init__(self):
        if self.beta <= 0:
            raise PreconditionError(f"beta must be > 0, got {self.beta}")
        if self.max_n < 1:
            raise PreconditionError(f"max_n must be >= 1, got {self.max_n}")
        if self.whitespace_policy not in (STRIP_SPACES, KEEP_SPACES):
            raise PreconditionError(f"unknown whitespace policy {self.whitespace_policy!r}")


def char_ngrams(text: str, n: int) -> Counter:
    return Counter(text[i:i + n] for i in range(len(text) - n + 1))


def _prepare(line: Line, cfg: ChrfConfig) -> str:
    text = line if isinstance(line, str) else " ".join(line)
    if cfg.whitespace_policy == STRIP_SPACES:
        return "".join(text.split())
    return text


def chrf_statistics(hyp_lines: Sequence[Line], ref_lines: Sequence[Line], cfg: ChrfConfig) -> np.ndarray:
    """Array of shape (max_n, 3): matches, hypothesis n-grams, reference n-grams per order"""
    _check_parallel(hyp_lines, ref_lines)
    stats = np.zeros((cfg.max_n, 3), dtype=np.int64)
    for hyp, ref in zip(hyp_lines, ref_lines):
        hyp_text, ref_text = _prepare(hyp, cfg), _prepare(ref, cfg)
        for n in range(1, cfg.max_n + 1):
            h, r = char_ngrams(hyp_text, n), char_ngrams(ref_text, n)
            stats[n - 1] += (sum(min(c, r[g]) for g, c in h.items()), sum(h.values()), sum(r.values()))
    return stats


def chrf_from_statistics(stats: np.ndarray, beta: float) -> float:
    matches, hyp_total, ref_total = stats[:, 0], stats[:, 1], stats[:, 2]
    included = (hyp_total > 0) | (ref_total > 0)
    if not included.any():
        return 0.0
    both = (hyp_total > 0) & (ref_total > 0)
    precision = np.divide(matches, hyp_total, out=np.zeros(len(stats)), where=both)
    recall = np.divide(matches, ref_total, out=np.zeros(len(stats)), where=both)
    p = precision[included].mean()
    r = recall[included].mean()
    beta2 = beta ** 2
    denom = beta2 * p + r
    if denom == 0:
        return 0.0
    return 100.0 * (1 + beta2) * p * r / denom


def chrf(hyp: Union[str, Sequence[Line]], ref: Union[str, Sequence[Line]],
         cfg: Optional[ChrfConfig] = None) -> float:
    """
    chrF-beta in [0, 100]. Orders missing on both sides are skipped, orders
    missing on one side score 0, the rest are averaged uniformly.
    """
    cfg = cfg or ChrfConfig()
    stats = chrf_statistics(_as_lines(hyp), _as_lines(ref), cfg)
    return float(chrf_from_statistics(stats, cfg.beta))


# Corpus statistics

@dataclass(frozen=True)
class CorpusStats:
    tokens: int
    types: int
    unk: int


def _units(corpus: Union[SegmentedText, Iterable[Line]]) -> Iterable[str]:
    if isinstance(corpus, SegmentedText):
        return corpus.units
    return (unit for line in corpus for unit in _tokens(line))


def corpus_statistics(train: Union[SegmentedText, Iterable[Line]],
                      test: Optional[Union[SegmentedText, Iterable[Line]]] = None) -> CorpusStats:
    """#tokens and #types of the training side; #UNK = test units never seen in training"""
    counts = Counter(_units(train))
    unk = 0
    if test is not None:
        unk = sum(1 for unit in _units(test) if unit not in counts)
    return CorpusStats(sum(counts.values()), len(counts), unk)


# Report

@dataclass
class EvalReport:
    unigram: Optional[UnigramScores] = None
    chrf: Optional[float] = None
    categories: Dict[str, UnigramScores] = field(default_factory=dict)
    bins: List[FrequencyBin] = field(default_factory=list)

    def to_frame(self) -> pd.DataFrame:
        rows = []
        if self.unigram is not None:
            rows += [("precision", self.unigram.precision), ("recall", self.unigram.recall),
                     ("f1", self.unigram.f1)]
        if self.chrf is not None:
            rows.append(("chrf", self.chrf))
        for name, scores in self.categories.items():
            rows += [(f"{name}_precision", scores.precision), (f"{name}_recall", scores.recall),
                     (f"{name}_f1", scores.f1)]
        return pd.DataFrame(rows, columns=["metric", "value"])

    def format_tsv(self) -> str:
        text = self.to_frame().to_csv(sep="\t", index=False, float_format="%.6f")
        if self.bins:
            text += "\n" + bins_to_frame(self.bins).to_csv(sep="\t", index=False, float_format="%.6f")
        return text


def evaluate(hyp_lines: Sequence[Line], ref_lines: Sequence[Line],
             train: Optional[WordFrequencyTable] = None, metrics: Sequence[str] = ("f1", "chrf"),
             chrf_cfg: Optional[ChrfConfig] = None, rare_rank: int = RARE_RANK) -> EvalReport:
    _check_parallel(hyp_lines, ref_lines)
    report = EvalReport()
    if "f1" in metrics:
        report.unigram = corpus_unigram_scores(hyp_lines, ref_lines)
        if train is not None:
            report.categories = per_category_f1(hyp_lines, ref_lines, train, rare_rank)
    if "chrf" in metrics:
        report.chrf = chrf(hyp_lines, ref_lines, chrf_cfg)
    if "bins" in metrics:
        if train is None:
            raise PreconditionError("frequency bins need a training corpus")
        report.bins = f1_by_frequency_rank(hyp_lines, ref_lines, train)
    return report
