#!/usr/bin/env python3
"""
Core data model for subword segmentation

Words, symbol sequences, merge rules and segmented text, plus the lossless
round trip between whitespace-tokenized text and segmented text:

    "lower"  ->  [low, er</w>]  ->  "low@@ er"  ->  "lower"

Non-final written units carry the continuation marker, the word-final unit
carries none. The end-of-word marker only exists inside symbol sequences.
"""

from __future__ import annotations

import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Callable, Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from config import CONTINUATION, EOW, MERGE_FILE_VERSION, WORKERS

logger = logging.getLogger(__name__)


# Errors

class SegmentationError(ValueError):
    """Base class for every error raised by the toolkit"""


class PreconditionError(SegmentationError):
    pass


class ReservedMarkerError(SegmentationError):
    """Input token contains the continuation or end-of-word marker"""

    def __init__(self, token: str, line_no: Optional[int] = None):
        self.token = token
        self.line_no = line_no
        where = f"line {line_no}: " if line_no is not None else ""
        super().__init__(f"{where}token {token!r} contains a reserved marker")


class DecodingError(SegmentationError):
    def __init__(self, line_no: int, detail: str, path: Optional[Union[str, Path]] = None):
        self.line_no = line_no
        self.path = path
        prefix = f"{path}:{line_no}" if path is not None else f"line {line_no}"
        super().__init__(f"{prefix}: invalid UTF-8 ({detail})")


class MalformedSegmentationError(SegmentationError):
    def __init__(self, line_no: int, unit: str):
        self.line_no = line_no
        self.unit = unit
        super().__init__(f"line {line_no}: word left open by unit {unit!r}")


class MergeFileError(SegmentationError):
    def __init__(self, line_no: int, text: str, detail: str, path: Optional[Union[str, Path]] = None):
        self.line_no = line_no
        self.text = text
        self.detail = detail
        self.path = path
        prefix = f"{path}:{line_no}" if path is not None else f"line {line_no}"
        super().__init__(f"{prefix}: {detail}: {text!r}")


class ConsistencyError(SegmentationError):
    pass


class AlignmentError(SegmentationError):
    pass


# Word frequencies

@dataclass(frozen=True)
class WordFrequencyTable:
    """Distinct word -> positive count"""

    entries: Mapping[str, int]

    def __post_init__(self):
        for word, count in self.entries.items():
            if not word or any(ch.isspace() for ch in word):
                raise PreconditionError(f"invalid word key {word!r}")
            if count < 1:
                raise PreconditionError(f"count for {word!r} must be >= 1, got {count}")
        object.__setattr__(self, "entries", MappingProxyType(dict(self.entries)))

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, word: object) -> bool:
        return word in self.entries

    def __iter__(self) -> Iterator[str]:
        return iter(self.entries)

    def get(self, word: str, default: int = 0) -> int:
        return self.entries.get(word, default)

    @property
    def total_tokens(self) -> int:
        return sum(self.entries.values())

    def sorted_items(self) -> List[Tuple[str, int]]:
        """Descending count, ties broken lexicographically"""
        return sorted(self.entries.items(), key=lambda kv: (-kv[1], kv[0]))

    def ranks(self) -> Dict[str, int]:
        """1-based frequency rank of every word"""
        return {word: i for i, (word, _) in enumerate(self.sorted_items(), start=1)}

    def merged(self, other: "WordFrequencyTable") -> "WordFrequencyTable":
        counts = Counter(self.entries)
        counts.update(other.entries)
        return WordFrequencyTable(counts)

    def scaled(self, factor: int) -> "WordFrequencyTable":
        return WordFrequencyTable({w: c * factor for w, c in self.entries.items()})


def decode_lines(raw_lines: Iterable[Union[str, bytes]], path: Optional[Union[str, Path]] = None) -> Iterator[str]:
    """Yield text lines, decoding bytes as UTF-8 and naming the failing line"""
    for line_no, raw in enumerate(raw_lines, start=1):
        if isinstance(raw, bytes):
            try:
                raw = raw.decode("utf-8")
            except UnicodeDecodeError as e:
                raise DecodingError(line_no, e.reason, path) from e
        yield raw.rstrip("\r\n")


def read_lines(path: Union[str, Path]) -> Iterator[str]:
    """Stream a UTF-8 file line by line"""
    with open(path, "rb") as f:
        yield from decode_lines(f, path)


def _count_chunk(lines: Sequence[str]) -> Counter:
    counts: Counter = Counter()
    for line in lines:
        counts.update(line.split())
    return counts


def _chunks(lines: Sequence[str], n: int) -> List[Sequence[str]]:
    size = max(1, -(-len(lines) // n))
    return [lines[i:i + size] for i in range(0, len(lines), size)]


def build_word_frequency_table(tokenized_lines: Iterable[Union[str, bytes]],
                               workers: int = WORKERS) -> WordFrequencyTable:
    """
    Count every whitespace-delimited token.

    With workers > 1 the lines are counted in chunks on a thread pool and the
    per-chunk Counters are summed; addition is commutative so the table does
    not depend on chunking or line order.
    """
    lines = list(decode_lines(tokenized_lines))
    if workers <= 1 or len(lines) < 2:
        counts = _count_chunk(lines)
    else:
        counts = Counter()
        with ThreadPoolExecutor(max_workers=workers) as ex:
            for partial in ex.map(_count_chunk, _chunks(lines, workers)):
                counts.update(partial)
    logger.debug(f"Counted {sum(counts.values())} tokens, {len(counts)} types")
    return WordFrequencyTable(counts)


def write_word_frequencies(table: WordFrequencyTable, path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for word, count in table.sorted_items():
            f.write(f"{word} {count}\n")


def read_word_frequencies(lines: Iterable[str]) -> WordFrequencyTable:
    """Parse "word count" lines (the dictionary-input format)"""
    counts: Counter = Counter()
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 2 or not parts[1].isdigit() or int(parts[1]) < 1:
            raise PreconditionError(f"line {line_no}: expected 'word count', got {line!r}")
        counts[parts[0]] += int(parts[1])
    return WordFrequencyTable(counts)


# Symbols and merges

@dataclass(frozen=True)
class SymbolSequence:
    """A word as subword symbols; only the last one ends with the EOW marker"""

    symbols: Tuple[str, ...]
    eow: str = EOW

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(self.symbols))
        if not self.symbols or not self.symbols[-1].endswith(self.eow):
            raise PreconditionError(f"last symbol must end with {self.eow!r}: {self.symbols!r}")
        if any(self.eow in s for s in self.symbols[:-1]):
            raise PreconditionError(f"only the last symbol may carry {self.eow!r}: {self.symbols!r}")

    def __len__(self) -> int:
        return len(self.symbols)

    def __iter__(self) -> Iterator[str]:
        return iter(self.symbols)

    @property
    def word(self) -> str:
        return "".join(self.symbols)[:-len(self.eow)]


def initial_symbolization(word: str, attached: bool = False, eow: str = EOW) -> SymbolSequence:
    """One symbol per character plus the end-of-word marker ("low" -> l o w </w>)"""
    if not word:
        raise PreconditionError("cannot symbolize an empty word")
    if any(ch.isspace() for ch in word):
        raise PreconditionError(f"word contains whitespace: {word!r}")
    chars = list(word)
    if attached:
        chars[-1] += eow
        return SymbolSequence(tuple(chars), eow)
    return SymbolSequence(tuple(chars) + (eow,), eow)


@dataclass(frozen=True)
class MergeRule:
    left: str
    right: str
    rank: int

    @property
    def pair(self) -> Tuple[str, str]:
        return self.left, self.right

    @property
    def result(self) -> str:
        return self.left + self.right


@dataclass(frozen=True)
class MergeTable:
    """Learned merge rules in rank (= learning = application) order"""

    rules: Tuple[MergeRule, ...] = ()
    eow: str = EOW
    version: str = MERGE_FILE_VERSION
    requested: Optional[int] = None
    stop_reason: str = ""

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))
        for i, rule in enumerate(self.rules):
            if rule.rank != i:
                raise PreconditionError(f"rule {rule.pair} has rank {rule.rank}, expected {i}")

    def __len__(self) -> int:
        return len(self.rules)

    def __iter__(self) -> Iterator[MergeRule]:
        return iter(self.rules)

    @property
    def executed(self) -> int:
        return len(self.rules)

    @property
    def pairs(self) -> List[Tuple[str, str]]:
        return [r.pair for r in self.rules]

    @classmethod
    def from_pairs(cls, pairs: Iterable[Tuple[str, str]], **meta) -> "MergeTable":
        return cls(tuple(MergeRule(l, r, i) for i, (l, r) in enumerate(pairs)), **meta)


# Segmented text

@dataclass(frozen=True)
class SegmentedText:
    """Lines of written units ("low@@", "er")"""

    lines: Tuple[Tuple[str, ...], ...] = field(default_factory=tuple)

    def __len__(self) -> int:
        return len(self.lines)

    def __iter__(self) -> Iterator[Tuple[str, ...]]:
        return iter(self.lines)

    def to_lines(self) -> List[str]:
        return [" ".join(units) for units in self.lines]

    @property
    def units(self) -> Iterator[str]:
        for line in self.lines:
            yield from line


def serialize_segmentation(seq: SymbolSequence, marker: str = CONTINUATION) -> List[str]:
    """[low, er</w>] -> ["low@@", "er"]; a detached trailing EOW folds into its predecessor"""
    symbols = list(seq.symbols)
    if symbols[-1] == seq.eow and len(symbols) > 1:
        symbols.pop()
        symbols[-1] += seq.eow
    units = [s + marker for s in symbols[:-1]]
    units.append(symbols[-1][:-len(seq.eow)])
    return units


def check_token(token: str, line_no: Optional[int] = None,
                marker: str = CONTINUATION, eow: str = EOW) -> str:
    if marker in token or eow in token:
        raise ReservedMarkerError(token, line_no)
    return token


def segment_lines(lines: Iterable[str], segment_word: Callable[[str], SymbolSequence],
                  workers: int = WORKERS, marker: str = CONTINUATION) -> SegmentedText:
    """Segment every token of every line; output line order matches input order"""

    def one_line(numbered: Tuple[int, str]) -> Tuple[str, ...]:
        line_no, line = numbered
        units: List[str] = []
        for token in line.split():
            check_token(token, line_no, marker)
            units.extend(serialize_segmentation(segment_word(token), marker))
        return tuple(units)

    numbered = list(enumerate(lines, start=1))
    if workers <= 1:
        return SegmentedText(tuple(one_line(n) for n in numbered))
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return SegmentedText(tuple(ex.map(one_line, numbered)))


def split_words(units: Sequence[str], line_no: int = 1, marker: str = CONTINUATION) -> List[List[str]]:
    """Group written units into words, markers stripped: "pra@@ krit@@ i" -> [[pra, krit, i]]"""
    words: List[List[str]] = []
    current: List[str] = []
    for unit in units:
        if unit.endswith(marker):
            current.append(unit[:-len(marker)])
        else:
            current.append(unit)
            words.append(current)
            current = []
    if current:
        raise MalformedSegmentationError(line_no, units[-1])
    return words


def revert_line(units: Union[str, Sequence[str]], line_no: int = 1, marker: str = CONTINUATION) -> str:
    if isinstance(units, str):
        units = units.split()
    return " ".join("".join(parts) for parts in split_words(units, line_no, marker))


def revert_segmentation(lines: Iterable[Union[str, Sequence[str]]], marker: str = CONTINUATION) -> List[str]:
    """Join every "u1@@ u2@@ ... uk" run back into one token"""
    return [revert_line(line, line_no, marker) for line_no, line in enumerate(lines, start=1)]
