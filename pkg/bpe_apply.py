#!/usr/bin/env python3
"""
BPE Merge Applier
Segments arbitrary text with a learned merge table

A word is split into characters plus the end-of-word marker and merged with
the learned rules in rank order, which reproduces the training-time
segmentation of every word in the learning dictionary. With a network
vocabulary, symbols outside it are split back along their merges until every
part is known; single unknown characters are passed through and reported.
"""

from __future__ import annotations

import bisect
import logging
import threading
from collections import Counter, defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Tuple, Union

from bpe_learn import merge_symbols
from config import CONTINUATION, VOCAB_THRESHOLD, WORKERS
from core_model import (
    ConsistencyError,
    MergeTable,
    PreconditionError,
    SegmentedText,
    SymbolSequence,
    check_token,
    initial_symbolization,
    read_lines,
    serialize_segmentation,
)

logger = logging.getLogger(__name__)

Pair = Tuple[str, str]


@dataclass(frozen=True)
class SymbolVocabulary:
    """Written units ("low@@", "er") kept in the network vocabulary, with training counts"""

    counts: Mapping[str, int]
    threshold: int = 0

    def __post_init__(self):
        if self.threshold < 0:
            raise PreconditionError(f"threshold must be >= 0, got {self.threshold}")
        kept = {unit: c for unit, c in self.counts.items() if c >= self.threshold}
        object.__setattr__(self, "counts", kept)

    def __contains__(self, unit: object) -> bool:
        return unit in self.counts

    def __len__(self) -> int:
        return len(self.counts)

    def sorted_items(self) -> List[Tuple[str, int]]:
        return sorted(self.counts.items(), key=lambda kv: (-kv[1], kv[0]))


@dataclass(frozen=True)
class SplitResult:
    symbols: Tuple[str, ...]
    unknown: Tuple[str, ...] = ()


@dataclass
class UnknownReport:
    """Characters left outside the vocabulary after splitting"""
    characters: Counter = field(default_factory=Counter)
    unknown_tokens: int = 0
    total_tokens: int = 0

    @property
    def rate(self) -> float:
        """Unknown units in percent of all written units"""
        return 100.0 * self.unknown_tokens / self.total_tokens if self.total_tokens else 0.0

    def add(self, other: "UnknownReport"):
        self.characters.update(other.characters)
        self.unknown_tokens += other.unknown_tokens
        self.total_tokens += other.total_tokens

    def format(self) -> str:
        lines = [f"unknown units: {self.unknown_tokens}/{self.total_tokens} ({self.rate:.2f}%)"]
        for char, count in sorted(self.characters.items(), key=lambda kv: (-kv[1], kv[0])):
            lines.append(f"  {char!r}\t{count}")
        return "\n".join(lines)


def written_unit(symbol: str, final: bool, eow: str, marker: str = CONTINUATION) -> str:
    text = symbol[:-len(eow)] if symbol.endswith(eow) else symbol
    return text if final else text + marker


class BPEApplier:
    """
    Applies one merge table. Per-word results are cached; the cache is shared
    between threads behind a lock.
    """

    def __init__(self, merges: MergeTable, marker: str = CONTINUATION):
        self.merges = merges
        self.eow = merges.eow
        self.marker = marker
        # A pair can be learned again after a later merge recreates it, so
        # every pair maps to all of its ranks.
        self.ranks: Dict[Pair, List[int]] = defaultdict(list)
        self.reverse: Dict[str, Pair] = {}
        for rule in merges:
            self.ranks[rule.pair].append(rule.rank)
            self.reverse[rule.result] = rule.pair  # highest rank wins
        self._cache: Dict[str, Tuple[str, ...]] = {}
        self._lock = threading.Lock()

    def _next_rank(self, pair: Pair, after: int) -> Optional[int]:
        ranks = self.ranks.get(pair)
        if not ranks:
            return None
        i = bisect.bisect_right(ranks, after)
        return ranks[i] if i < len(ranks) else None

    def apply_merges(self, word: str) -> SymbolSequence:
        """
        Merge the lowest-ranked applicable pair until none applies.

        The next merge must rank above the previous one, which replays the
        learner's pass over its rules exactly.
        """
        symbols = initial_symbolization(word, eow=self.eow).symbols
        last = -1
        while len(symbols) > 1:
            best_rank = None
            best_pair = None
            for pair in zip(symbols, symbols[1:]):
                rank = self._next_rank(pair, last)
                if rank is not None and (best_rank is None or rank < best_rank):
                    best_rank, best_pair = rank, pair
            if best_pair is None:
                break
            symbols = merge_symbols(symbols, best_pair)
            last = best_rank
        return SymbolSequence(symbols, self.eow)

    def split_to_known(self, symbol: str, vocab: SymbolVocabulary, final: bool = True) -> SplitResult:
        """
        Reverse the highest-ranked merge that formed symbol until every part
        is in vocab. Concatenating the result gives symbol back.
        """
        if written_unit(symbol, final, self.eow, self.marker) in vocab:
            return SplitResult((symbol,))

        core = symbol[:-len(self.eow)] if symbol.endswith(self.eow) else symbol
        if len(core) <= 1:
            return SplitResult((symbol,), (core,) if core else ())

        pair = self.reverse.get(symbol)
        if pair is not None and pair[1] != self.eow:
            left = self.split_to_known(pair[0], vocab, final=False)
            right = self.split_to_known(pair[1], vocab, final=final)
            return SplitResult(left.symbols + right.symbols, left.unknown + right.unknown)

        if symbol.endswith(self.eow):
            # "er</w>" formed by (er, </w>), or a detached marker folded onto its word
            inner = self.split_to_known(core, vocab, final=True)
            return SplitResult(inner.symbols[:-1] + (inner.symbols[-1] + self.eow,), inner.unknown)

        raise ConsistencyError(f"symbol {symbol!r} is not produced by the merge table")

    def _merged(self, word: str) -> Tuple[str, ...]:
        with self._lock:
            hit = self._cache.get(word)
        if hit is not None:
            return hit
        symbols = list(self.apply_merges(word).symbols)
        if symbols[-1] == self.eow and len(symbols) > 1:
            symbols.pop()
            symbols[-1] += self.eow
        value = tuple(symbols)
        with self._lock:
            self._cache[word] = value
        return value

    def segment_word(self, word: str, vocab: Optional[SymbolVocabulary] = None) -> Tuple[SymbolSequence, Tuple[str, ...]]:
        """Merged symbols of word (detached marker folded), split to vocab if given, plus unknown characters"""
        symbols = self._merged(word)
        unknown: Tuple[str, ...] = ()
        if vocab is not None:
            parts: List[str] = []
            for i, symbol in enumerate(symbols):
                result = self.split_to_known(symbol, vocab, final=i == len(symbols) - 1)
                parts.extend(result.symbols)
                unknown += result.unknown
            symbols = tuple(parts)
        return SymbolSequence(symbols, self.eow), unknown

    def segment_line(self, line: str, vocab: Optional[SymbolVocabulary] = None,
                     line_no: int = 1) -> Tuple[Tuple[str, ...], UnknownReport]:
        units: List[str] = []
        report = UnknownReport()
        for token in line.split():
            check_token(token, line_no, self.marker, self.eow)
            seq, unknown = self.segment_word(token, vocab)
            word_units = serialize_segmentation(seq, self.marker)
            units.extend(word_units)
            report.total_tokens += len(word_units)
            report.unknown_tokens += len(unknown)
            report.characters.update(unknown)
        return tuple(units), report


def apply_merges(word: str, merges: MergeTable) -> SymbolSequence:
    return BPEApplier(merges).apply_merges(word)


def split_to_known(symbol: str, merges: MergeTable, vocab: SymbolVocabulary, final: bool = True) -> SplitResult:
    return BPEApplier(merges).split_to_known(symbol, vocab, final)


def apply_to_corpus(lines: Iterable[str], merges: Union[MergeTable, BPEApplier],
                    vocab: Optional[SymbolVocabulary] = None,
                    workers: int = WORKERS) -> Tuple[SegmentedText, UnknownReport]:
    """Segment every line; unknown characters are only reported when a vocabulary is given"""
    applier = merges if isinstance(merges, BPEApplier) else BPEApplier(merges)
    numbered = list(enumerate(lines, start=1))

    def one(item):
        line_no, line = item
        return applier.segment_line(line, vocab, line_no)

    if workers <= 1:
        results = [one(item) for item in numbered]
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(one, numbered))

    report = UnknownReport()
    for _, partial in results:
        report.add(partial)
    if report.unknown_tokens:
        logger.warning(f"{report.unknown_tokens} unknown units ({report.rate:.2f}% of output)")
    return SegmentedText(tuple(units for units, _ in results)), report


def build_network_vocabulary(segmented: Union[SegmentedText, Iterable[str]],
                             threshold: int = VOCAB_THRESHOLD) -> SymbolVocabulary:
    """Count written units of a segmented training corpus and drop those below threshold"""
    counts: Counter = Counter()
    if isinstance(segmented, SegmentedText):
        counts.update(segmented.units)
    else:
        for line in segmented:
            counts.update(line.split())
    vocab = SymbolVocabulary(counts, threshold)
    logger.info(f"Network vocabulary: {len(vocab)} of {len(counts)} units with count >= {threshold}")
    return vocab


def write_vocabulary(vocab: SymbolVocabulary, path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for unit, count in vocab.sorted_items():
            f.write(f"{unit} {count}\n")


def parse_vocabulary(lines: Iterable[str], threshold: int = 0) -> SymbolVocabulary:
    counts: Dict[str, int] = {}
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        parts = line.split(" ")
        if len(parts) != 2 or not parts[1].isdigit():
            raise PreconditionError(f"line {line_no}: expected 'symbol count', got {line!r}")
        counts[parts[0]] = int(parts[1])
    return SymbolVocabulary(counts, threshold)


def read_vocabulary(path: Union[str, Path], threshold: int = 0) -> SymbolVocabulary:
    return parse_vocabulary(read_lines(path), threshold)
