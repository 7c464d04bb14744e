#!/usr/bin/env python3
"""
ISO 9 Transliteration
Cyrillic <-> Latin, one Cyrillic letter to one Latin letter (system A)

"Клаустрофобия" -> "Klaustrofobiâ" -> "Клаустрофобия"

Characters outside the table pass through unchanged, so mixed-alphabet text
keeps its Latin words. Cyrillic text is NFC-normalized before mapping. Some
Latin images are a base letter plus a combining mark (ґ -> g̀), so Latin input
is matched longest first, exactly as cyrillic_to_latin wrote it; stress marks
stay separate marks in both directions ("моло́ко" <-> "molóko").

Not covered by the shipped table:
- uppercase Ъ and Ь. ISO 9 gives them the caseless images of ъ and ь, so they
  pass through unchanged ("ОБЪЕКТ" -> "OBЪEKT") and round-trip as such.
- г, ф, Г, Ф followed by a combining grave. The result equals the image of
  ґ, ѳ, Ґ, Ѳ and reads back as that letter.
"""

from __future__ import annotations

import logging
import unicodedata
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from config import ISO9_TABLE
from core_model import MergeRule, MergeTable, PreconditionError, read_lines

logger = logging.getLogger(__name__)

CYR2LAT = "cyr2lat"
LAT2CYR = "lat2cyr"
DIRECTIONS = (CYR2LAT, LAT2CYR)


@dataclass(frozen=True)
class TransliterationTable:
    forward: Dict[str, str]
    inverse: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        inverse: Dict[str, str] = {}
        for cyr, lat in self.forward.items():
            if len(cyr) != 1 or not lat:
                raise PreconditionError(f"bad table entry {cyr!r} -> {lat!r}")
            if lat in inverse:
                raise PreconditionError(f"{lat!r} is the image of both {inverse[lat]!r} and {cyr!r}")
            inverse[lat] = cyr
        object.__setattr__(self, "inverse", inverse)

    @property
    def max_latin_len(self) -> int:
        return max((len(lat) for lat in self.inverse), default=1)


@dataclass
class LatinResult:
    text: str
    untranslatable: List[Tuple[int, int]] = field(default_factory=list)


@dataclass
class TranslitReport:
    dropped: List[MergeRule] = field(default_factory=list)


def parse_table(lines) -> TransliterationTable:
    forward: Dict[str, str] = {}
    for line_no, line in enumerate(lines, start=1):
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise PreconditionError(f"line {line_no}: expected 'cyrillic<TAB>latin', got {line!r}")
        cyr, lat = (unicodedata.normalize("NFC", p) for p in parts)
        forward[cyr] = lat
    return TransliterationTable(forward)


@lru_cache(maxsize=8)
def load_table(path: Union[str, Path] = ISO9_TABLE) -> TransliterationTable:
    table = parse_table(read_lines(path))
    logger.debug(f"Loaded {len(table.forward)} transliteration pairs from {path}")
    return table


def cyrillic_to_latin(text: str, table: Optional[TransliterationTable] = None) -> str:
    table = table or load_table()
    text = unicodedata.normalize("NFC", text)
    return "".join(table.forward.get(ch, ch) for ch in text)


def _split_precomposed(ch: str, table: TransliterationTable) -> str:
    """ó -> o + U+0301 when ó has no Cyrillic preimage but o does"""
    if ch in table.inverse:
        return ch
    decomposed = unicodedata.normalize("NFD", ch)
    for size in range(len(decomposed) - 1, 0, -1):
        head = unicodedata.normalize("NFC", decomposed[:size])
        if head in table.inverse:
            return head + decomposed[size:]
    return ch


def latin_to_cyrillic_report(text: str, table: Optional[TransliterationTable] = None) -> LatinResult:
    """
    Invert cyrillic_to_latin. Latin text is matched as written, so a stress
    mark after an image stays a separate mark. Table-domain Cyrillic letters
    cannot come out of cyrillic_to_latin; such spans are left unchanged and
    flagged with offsets into text.
    """
    table = table or load_table()
    chars: List[str] = []
    origin: List[int] = []
    for pos, ch in enumerate(text):
        for piece in _split_precomposed(ch, table):
            chars.append(piece)
            origin.append(pos)
    stream = "".join(chars)
    longest = table.max_latin_len
    out: List[str] = []
    spans: List[Tuple[int, int]] = []
    i = 0
    while i < len(stream):
        for size in range(min(longest, len(stream) - i), 0, -1):
            piece = stream[i:i + size]
            if piece in table.inverse:
                out.append(table.inverse[piece])
                i += size
                break
        else:
            ch = stream[i]
            if ch in table.forward:
                pos = origin[i]
                if spans and spans[-1][1] == pos:
                    spans[-1] = (spans[-1][0], pos + 1)
                else:
                    spans.append((pos, pos + 1))
            out.append(ch)
            i += 1
    if spans:
        logger.debug(f"Untranslatable spans in {text!r}: {spans}")
    return LatinResult("".join(out), spans)


def latin_to_cyrillic(text: str, table: Optional[TransliterationTable] = None) -> str:
    return latin_to_cyrillic_report(text, table).text


def transliterate(text: str, direction: str, table: Optional[TransliterationTable] = None) -> str:
    if direction == CYR2LAT:
        return cyrillic_to_latin(text, table)
    if direction == LAT2CYR:
        return latin_to_cyrillic(text, table)
    raise PreconditionError(f"unknown direction {direction!r}, expected one of {DIRECTIONS}")


def _map_symbol(symbol: str, direction: str, eow: str, table: Optional[TransliterationTable]) -> str:
    if symbol.endswith(eow):
        return transliterate(symbol[:-len(eow)], direction, table) + eow
    return transliterate(symbol, direction, table)


def transliterate_rule(rule: MergeRule, direction: str, eow: str,
                       table: Optional[TransliterationTable] = None) -> Optional[Tuple[str, str]]:
    """Mapped (left, right), or None when the mapping does not invert"""
    back = LAT2CYR if direction == CYR2LAT else CYR2LAT
    left = _map_symbol(rule.left, direction, eow, table)
    right = _map_symbol(rule.right, direction, eow, table)
    if _map_symbol(left, back, eow, table) != rule.left or _map_symbol(right, back, eow, table) != rule.right:
        return None
    if _map_symbol(rule.result, direction, eow, table) != left + right:
        return None
    return left, right


def transliterate_merge_table(merges: MergeTable, direction: str,
                              table: Optional[TransliterationTable] = None) -> Tuple[MergeTable, TranslitReport]:
    """
    Map both sides of every rule. A rule is kept only if both sides map back
    to themselves and the mapped sides still concatenate to the mapped result;
    kept rules are renumbered in their original order.
    """
    pairs: List[Tuple[str, str]] = []
    report = TranslitReport()
    for rule in merges:
        mapped = transliterate_rule(rule, direction, merges.eow, table)
        if mapped is not None:
            pairs.append(mapped)
        else:
            report.dropped.append(rule)
    if report.dropped:
        logger.warning(f"Dropped {len(report.dropped)} rules that do not transliterate back ({direction})")
    return MergeTable.from_pairs(pairs, eow=merges.eow, version=merges.version,
                                 requested=merges.requested, stop_reason=merges.stop_reason), report
