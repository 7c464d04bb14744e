#!/usr/bin/env python3
"""
Joint BPE
One encoding learned on source and target vocabularies together

Without a bridge both sides share the table learned on the summed word
counts. With the ISO 9 bridge the Cyrillic target vocabulary is transliterated
to Latin before learning; the target side then gets every learned rule twice,
back-transliterated to Cyrillic and as learned (for Latin words inside the
Cyrillic text), interleaved by the rank they were learned at.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

from bpe_learn import LearnConfig, learn_bpe_indexed, write_merge_table
from core_model import (
    AlignmentError,
    MergeRule,
    MergeTable,
    PreconditionError,
    WordFrequencyTable,
    split_words,
)
from translit import (
    LAT2CYR,
    TransliterationTable,
    cyrillic_to_latin,
    transliterate_rule,
)

logger = logging.getLogger(__name__)

BRIDGE_ISO9 = "iso9"

Learner = Callable[[WordFrequencyTable, LearnConfig], MergeTable]


@dataclass
class JointMerges:
    source: MergeTable
    target: MergeTable
    bridged: bool = False
    dropped: List[MergeRule] = field(default_factory=list)

    def __iter__(self) -> Iterator[MergeTable]:
        yield self.source
        yield self.target


def transliterate_table(table: WordFrequencyTable,
                        translit_table: Optional[TransliterationTable] = None) -> WordFrequencyTable:
    counts: Counter = Counter()
    for word, count in table.entries.items():
        counts[cyrillic_to_latin(word, translit_table)] += count
    return WordFrequencyTable(counts)


def bridge_target_rules(merges: MergeTable,
                        translit_table: Optional[TransliterationTable] = None) -> Tuple[MergeTable, List[MergeRule]]:
    """Back-transliterated rule, then the Latin rule, for every learned rank"""
    pairs: List[Tuple[str, str]] = []
    dropped: List[MergeRule] = []
    for rule in merges:
        cyr = transliterate_rule(rule, LAT2CYR, merges.eow, translit_table)
        if cyr is None:
            dropped.append(rule)
        elif cyr != rule.pair:
            pairs.append(cyr)
        pairs.append(rule.pair)
    if dropped:
        logger.warning(f"{len(dropped)} rules have no Cyrillic counterpart; only their Latin form is kept")
    target = MergeTable.from_pairs(pairs, eow=merges.eow, version=merges.version,
                                   requested=merges.requested, stop_reason=merges.stop_reason)
    return target, dropped


def learn_joint(src_table: WordFrequencyTable, tgt_table: WordFrequencyTable, cfg: LearnConfig,
                bridge: Optional[str] = None, learner: Learner = learn_bpe_indexed,
                translit_table: Optional[TransliterationTable] = None) -> JointMerges:
    if not len(src_table) or not len(tgt_table):
        raise PreconditionError("joint learning needs non-empty source and target tables")
    if bridge not in (None, BRIDGE_ISO9):
        raise PreconditionError(f"unknown bridge {bridge!r}")

    if bridge is None:
        merges = learner(src_table.merged(tgt_table), cfg)
        logger.info(f"Joint encoding: {merges.executed} merges shared by both sides")
        return JointMerges(merges, merges)

    latin_tgt = transliterate_table(tgt_table, translit_table)
    merges = learner(src_table.merged(latin_tgt), cfg)
    target, dropped = bridge_target_rules(merges, translit_table)
    logger.info(f"Bridged joint encoding: {merges.executed} source merges, {target.executed} target merges")
    return JointMerges(merges, target, bridged=True, dropped=dropped)


def learn_separate(src_table: WordFrequencyTable, tgt_table: WordFrequencyTable, cfg: LearnConfig,
                   learner: Learner = learn_bpe_indexed) -> JointMerges:
    """Independent encodings, one per side"""
    return JointMerges(learner(src_table, cfg), learner(tgt_table, cfg))


def write_joint(result: JointMerges, path: Union[str, Path]) -> List[Path]:
    """One shared file, or <path>.src and <path>.tgt when the sides differ"""
    path = Path(path)
    if result.source is result.target:
        write_merge_table(result.source, path)
        return [path]
    src_path = path.with_name(path.name + ".src")
    tgt_path = path.with_name(path.name + ".tgt")
    write_merge_table(result.source, src_path)
    write_merge_table(result.target, tgt_path)
    return [src_path, tgt_path]


# Consistency

@dataclass
class ConsistencyReport:
    pairs_checked: int = 0
    consistent: int = 0
    mismatches: List[Tuple[int, List[str], List[str]]] = field(default_factory=list)

    @property
    def score(self) -> float:
        return self.consistent / self.pairs_checked if self.pairs_checked else 1.0


def split_points(units: Sequence[str], translit_table: Optional[TransliterationTable] = None) -> List[int]:
    """Character offsets of the internal boundaries, measured on the Latin form"""
    points: List[int] = []
    offset = 0
    for unit in units[:-1]:
        offset += len(cyrillic_to_latin(unit, translit_table))
        points.append(offset)
    return points


def segmentation_consistency_report(src_lines: Sequence[Union[str, Sequence[str]]],
                                    tgt_lines: Sequence[Union[str, Sequence[str]]],
                                    alignments: Iterable[Tuple[int, int, int]],
                                    translit_table: Optional[TransliterationTable] = None) -> ConsistencyReport:
    """
    alignments: (line index, source word index, target word index), 0-based,
    naming cognate pairs. A pair is consistent when both sides split at the
    same offsets once the target is transliterated.
    """
    if len(src_lines) != len(tgt_lines):
        raise AlignmentError(f"source has {len(src_lines)} lines, target has {len(tgt_lines)}")

    def words(line, line_no):
        units = line.split() if isinstance(line, str) else list(line)
        return split_words(units, line_no)

    report = ConsistencyReport()
    cache = {}
    for line_idx, src_idx, tgt_idx in alignments:
        if line_idx not in cache:
            cache[line_idx] = (words(src_lines[line_idx], line_idx + 1), words(tgt_lines[line_idx], line_idx + 1))
        src_words, tgt_words = cache[line_idx]
        src_units, tgt_units = src_words[src_idx], tgt_words[tgt_idx]
        report.pairs_checked += 1
        if split_points(src_units, translit_table) == split_points(tgt_units, translit_table):
            report.consistent += 1
        else:
            report.mismatches.append((line_idx, src_units, tgt_units))
    return report
