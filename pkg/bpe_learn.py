#!/usr/bin/env python3
"""
BPE Merge Learner
Learns an ordered merge table from a word frequency table

Each iteration counts adjacent symbol pairs (weighted by word frequency),
picks the most frequent one and replaces it with the concatenated symbol:

    l o w e r </w>   --(e, r)-->   l o w er </w>

Ties are broken by the smallest (left, right) pair in code point order, so
output is identical across runs and platforms.

Two learners produce byte-identical tables:
- learn_bpe: recounts every pair of every word on every iteration
- learn_bpe_indexed: indexes pairs once, then only touches the words that
  contain the merged pair, keeping a lazy max-heap of pair counts
"""

from __future__ import annotations

import heapq
import logging
from collections import Counter, defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Set, Tuple, Union

from config import EOW, LOG_EVERY, MERGE_FILE_VERSION, MIN_FREQUENCY
from core_model import (
    MergeFileError,
    MergeRule,
    MergeTable,
    PreconditionError,
    WordFrequencyTable,
    initial_symbolization,
    read_lines,
)

logger = logging.getLogger(__name__)

Pair = Tuple[str, str]
Symbols = Tuple[str, ...]
PairCounts = Dict[Pair, int]
SymbolVocab = Dict[Symbols, int]

STOP_REQUESTED = "requested merges reached"
STOP_NO_PAIRS = "no pairs left"
STOP_MIN_FREQUENCY = "best pair below min_frequency"


@dataclass(frozen=True)
class LearnConfig:
    num_merges: int
    min_frequency: int = MIN_FREQUENCY

    def __post_init__(self):
        if self.num_merges < 1:
            raise PreconditionError(f"num_merges must be >= 1, got {self.num_merges}")
        if self.min_frequency < 1:
            raise PreconditionError(f"min_frequency must be >= 1, got {self.min_frequency}")


@dataclass(frozen=True)
class MergeStep:
    """What one executed merge did to the training table"""
    rank: int
    pair: Pair
    count: int
    tokens_after: int
    vocab_size_after: int


def symbolize_table(table: WordFrequencyTable, eow: str = EOW) -> SymbolVocab:
    """Word table -> {(l, o, w, </w>): count}"""
    return {initial_symbolization(word, eow=eow).symbols: count for word, count in table.entries.items()}


def count_pair_frequencies(vocab: SymbolVocab) -> PairCounts:
    """Weighted adjacent-pair counts, overlapping occurrences included"""
    pairs: PairCounts = defaultdict(int)
    for symbols, freq in vocab.items():
        for i in range(len(symbols) - 1):
            pairs[symbols[i], symbols[i + 1]] += freq
    return dict(pairs)


def merge_symbols(symbols: Symbols, pair: Pair) -> Symbols:
    """Replace left-to-right, non-overlapping occurrences of pair"""
    left, right = pair
    out: List[str] = []
    i = 0
    n = len(symbols)
    while i < n:
        if i < n - 1 and symbols[i] == left and symbols[i + 1] == right:
            out.append(left + right)
            i += 2
        else:
            out.append(symbols[i])
            i += 1
    return tuple(out)


def merge_pair(pair: Pair, vocab: SymbolVocab) -> SymbolVocab:
    """Apply one merge to every word; word frequencies are unchanged"""
    merged = {merge_symbols(symbols, pair): freq for symbols, freq in vocab.items()}
    if merged == vocab:
        logger.warning(f"Merge {pair} does not occur in any word, nothing changed")
    return merged


def select_best(pairs: PairCounts) -> Tuple[Pair, int]:
    """Highest count; among equal counts the smallest (left, right)"""
    pair, count = min(pairs.items(), key=lambda kv: (-kv[1], kv[0]))
    return pair, count


def token_count(vocab: SymbolVocab) -> int:
    return sum(len(symbols) * freq for symbols, freq in vocab.items())


def symbol_vocabulary(vocab: SymbolVocab) -> Set[str]:
    return {s for symbols in vocab for s in symbols}


def _check_table(table: WordFrequencyTable):
    if len(table) == 0:
        raise PreconditionError("cannot learn merges from an empty word table")


def _log_progress(rank: int, cfg: LearnConfig, pair: Pair, count: int):
    logger.debug(f"merge {rank}: {pair[0]!r} + {pair[1]!r} (count {count})")
    if LOG_EVERY and (rank + 1) % LOG_EVERY == 0:
        logger.info(f"Learned {rank + 1}/{cfg.num_merges} merges")


def learn_bpe(table: WordFrequencyTable, cfg: LearnConfig,
              trace: Optional[List[MergeStep]] = None, eow: str = EOW) -> MergeTable:
    """
    Reference learner: count, select, merge, repeat.

    Stops after cfg.num_merges merges, when no pair is left, or when the best
    pair is seen fewer than cfg.min_frequency times.
    """
    _check_table(table)
    vocab = symbolize_table(table, eow)
    rules: List[MergeRule] = []
    stop_reason = STOP_REQUESTED

    for rank in range(cfg.num_merges):
        pairs = count_pair_frequencies(vocab)
        if not pairs:
            stop_reason = STOP_NO_PAIRS
            break
        best, count = select_best(pairs)
        if count < cfg.min_frequency:
            stop_reason = STOP_MIN_FREQUENCY
            break
        vocab = merge_pair(best, vocab)
        rules.append(MergeRule(best[0], best[1], rank))
        _log_progress(rank, cfg, best, count)
        if trace is not None:
            trace.append(MergeStep(rank, best, count, token_count(vocab), len(symbol_vocabulary(vocab))))

    if stop_reason != STOP_REQUESTED:
        logger.info(f"Stopped early after {len(rules)} merges: {stop_reason}")
    return MergeTable(tuple(rules), eow=eow, requested=cfg.num_merges, stop_reason=stop_reason)


class PairIndex:
    """
    Incrementally maintained pair statistics.

    counts: pair -> weighted count
    where:  pair -> ids of words containing the pair
    heap:   (-count, left, right) entries; an entry is live only while its
            count equals counts[pair], stale ones are skipped on pop
    """

    def __init__(self, vocab: SymbolVocab, track_symbols: bool = False):
        self.words: List[Symbols] = list(vocab.keys())
        self.freqs: List[int] = list(vocab.values())
        self.counts: PairCounts = defaultdict(int)
        self.where: Dict[Pair, Set[int]] = defaultdict(set)
        self.track_symbols = track_symbols
        self.symbol_counts: Counter = Counter()
        self.tokens = 0

        for wid, (symbols, freq) in enumerate(zip(self.words, self.freqs)):
            for pair, occ in _pairs_of(symbols).items():
                self.counts[pair] += occ * freq
                self.where[pair].add(wid)
            self.tokens += len(symbols) * freq
            if track_symbols:
                for s in symbols:
                    self.symbol_counts[s] += freq

        self.heap = [(-count, pair[0], pair[1]) for pair, count in self.counts.items()]
        heapq.heapify(self.heap)

    def pop_best(self) -> Optional[Tuple[Pair, int]]:
        while self.heap:
            neg, left, right = self.heap[0]
            if self.counts.get((left, right), 0) == -neg:
                return (left, right), -neg
            heapq.heappop(self.heap)
        return None

    def merge(self, pair: Pair):
        changed: Set[Pair] = set()
        for wid in sorted(self.where.get(pair, ())):
            old = self.words[wid]
            new = merge_symbols(old, pair)
            freq = self.freqs[wid]
            old_pairs = _pairs_of(old)
            new_pairs = _pairs_of(new)
            for p in old_pairs.keys() | new_pairs.keys():
                delta = new_pairs.get(p, 0) - old_pairs.get(p, 0)
                if delta:
                    self.counts[p] += delta * freq
                    changed.add(p)
                if p not in new_pairs:
                    self.where[p].discard(wid)
                elif p not in old_pairs:
                    self.where[p].add(wid)
            self.tokens -= (len(old) - len(new)) * freq
            if self.track_symbols:
                self.symbol_counts.subtract({s: c * freq for s, c in Counter(old).items()})
                self.symbol_counts.update({s: c * freq for s, c in Counter(new).items()})
            self.words[wid] = new

        for p in changed:
            count = self.counts[p]
            if count > 0:
                heapq.heappush(self.heap, (-count, p[0], p[1]))
            else:
                del self.counts[p]
                self.where.pop(p, None)

    def vocab_size(self) -> int:
        return sum(1 for c in self.symbol_counts.values() if c > 0)


def _pairs_of(symbols: Symbols) -> Counter:
    return Counter(zip(symbols, symbols[1:]))


def learn_bpe_indexed(table: WordFrequencyTable, cfg: LearnConfig,
                      trace: Optional[List[MergeStep]] = None, eow: str = EOW) -> MergeTable:
    """Same output as learn_bpe; cost per merge is proportional to the words containing the pair"""
    _check_table(table)
    index = PairIndex(symbolize_table(table, eow), track_symbols=trace is not None)
    rules: List[MergeRule] = []
    stop_reason = STOP_REQUESTED

    for rank in range(cfg.num_merges):
        found = index.pop_best()
        if found is None:
            stop_reason = STOP_NO_PAIRS
            break
        best, count = found
        if count < cfg.min_frequency:
            stop_reason = STOP_MIN_FREQUENCY
            break
        index.merge(best)
        rules.append(MergeRule(best[0], best[1], rank))
        _log_progress(rank, cfg, best, count)
        if trace is not None:
            trace.append(MergeStep(rank, best, count, index.tokens, index.vocab_size()))

    if stop_reason != STOP_REQUESTED:
        logger.info(f"Stopped early after {len(rules)} merges: {stop_reason}")
    return MergeTable(tuple(rules), eow=eow, requested=cfg.num_merges, stop_reason=stop_reason)


def replay_merges(table: WordFrequencyTable, merges: MergeTable) -> SymbolVocab:
    """Final training-time segmentation of every word in the table"""
    vocab = symbolize_table(table, merges.eow)
    for rule in merges:
        vocab = {merge_symbols(symbols, rule.pair): freq for symbols, freq in vocab.items()}
    return vocab


# Merge file

def format_merge_table(merges: MergeTable) -> str:
    lines = [f"#bpe {merges.version} merges={merges.executed} eow={merges.eow}"]
    lines.extend(f"{rule.left} {rule.right}" for rule in merges)
    return "\n".join(lines) + "\n"


def write_merge_table(merges: MergeTable, path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(format_merge_table(merges))
    logger.info(f"Wrote {merges.executed} merges to {path}")


def parse_merge_table(lines: Iterable[str]) -> MergeTable:
    lines = iter(lines)
    header = next(lines, None)
    if header is None:
        raise MergeFileError(1, "", "empty merge file")
    fields = header.split(" ")
    meta = dict(f.split("=", 1) for f in fields[2:] if "=" in f)
    if len(fields) != 4 or fields[0] != "#bpe" or fields[1] != MERGE_FILE_VERSION \
            or "merges" not in meta or "eow" not in meta or not meta["merges"].isdigit():
        raise MergeFileError(1, header, "bad header")

    rules: List[MergeRule] = []
    for line_no, line in enumerate(lines, start=2):
        parts = line.split(" ")
        if len(parts) != 2 or not parts[0] or not parts[1]:
            raise MergeFileError(line_no, line, "expected 'left right'")
        rules.append(MergeRule(parts[0], parts[1], len(rules)))

    if len(rules) != int(meta["merges"]):
        raise MergeFileError(1, header, f"header announces {meta['merges']} merges, file has {len(rules)}")
    return MergeTable(tuple(rules), eow=meta["eow"], version=fields[1])


def read_merge_table(path: Union[str, Path]) -> MergeTable:
    try:
        return parse_merge_table(read_lines(path))
    except MergeFileError as e:
        if e.path is not None:
            raise
        raise MergeFileError(e.line_no, e.text, e.detail, path) from None


if __name__ == "__main__":
    # Figure-1 style dictionary
    demo = WordFrequencyTable({"low": 1, "lowest": 1, "newer": 1, "wider": 1})
    merges = learn_bpe_indexed(demo, LearnConfig(num_merges=10))
    print(format_merge_table(merges), end="")
