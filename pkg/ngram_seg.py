#!/usr/bin/env python3
"""
Character n-gram segmentation baseline

Words are cut into consecutive chunks of n characters, left to right, the last
chunk holding the 1..n remaining characters. The k most frequent training
words (the shortlist) stay whole. Chunks never cross word boundaries and the
word-final chunk carries the end-of-word marker, so the original tokenization
can be restored.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import FrozenSet, Iterable, List, Optional

from config import EOW, WORKERS
from core_model import PreconditionError, SegmentedText, SymbolSequence, WordFrequencyTable, segment_lines

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class NgramConfig:
    n: int
    shortlist_size: int = 0
    shortlist: FrozenSet[str] = field(default_factory=frozenset)
    attach_eow: bool = True
    eow: str = EOW

    def __post_init__(self):
        if self.n < 1:
            raise PreconditionError(f"n must be >= 1, got {self.n}")
        if self.shortlist_size < 0:
            raise PreconditionError(f"shortlist size must be >= 0, got {self.shortlist_size}")
        object.__setattr__(self, "shortlist", frozenset(self.shortlist))

    @classmethod
    def from_table(cls, n: int, shortlist_size: int = 0,
                   table: Optional[WordFrequencyTable] = None, **kwargs) -> "NgramConfig":
        """Shortlist = the k most frequent words, ties broken lexicographically"""
        shortlist: FrozenSet[str] = frozenset()
        if shortlist_size and table is not None:
            shortlist = frozenset(word for word, _ in table.sorted_items()[:shortlist_size])
        logger.debug(f"n={n}, shortlist of {len(shortlist)} words")
        return cls(n, shortlist_size, shortlist, **kwargs)


def segment_ngrams(word: str, cfg: NgramConfig) -> SymbolSequence:
    """"lower", n=2 -> [lo, we, r</w>]"""
    if not word:
        raise PreconditionError("cannot segment an empty word")
    if word in cfg.shortlist:
        chunks: List[str] = [word]
    else:
        chunks = [word[i:i + cfg.n] for i in range(0, len(word), cfg.n)]
    if cfg.attach_eow:
        chunks[-1] += cfg.eow
    else:
        chunks.append(cfg.eow)
    return SymbolSequence(tuple(chunks), cfg.eow)


def segment_corpus_ngrams(lines: Iterable[str], cfg: NgramConfig, workers: int = WORKERS) -> SegmentedText:
    return segment_lines(lines, lambda word: segment_ngrams(word, cfg), workers)
