#!/usr/bin/env python3
"""
Segmentation scheme comparison
#tokens / #types on the training corpus and #UNK on the test corpus, one row
per scheme:

    scheme         tokens  types  unk
    none              ...    ...  ...
    char:1            ...    ...  ...
    bpe:merges.txt    ...    ...  ...

Schemes produced by external tools are compared from pre-segmented files.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import pandas as pd

from bpe_apply import apply_to_corpus, build_network_vocabulary
from bpe_learn import read_merge_table
from config import WORKERS
from core_model import MergeTable, PreconditionError, build_word_frequency_table, read_lines
from metrics import corpus_statistics
from ngram_seg import NgramConfig, segment_corpus_ngrams

logger = logging.getLogger(__name__)

KIND_NONE = "none"
KIND_CHAR = "char"
KIND_BPE = "bpe"
KIND_JOINT = "joint"
KIND_PRESEGMENTED = "pre"
KINDS = (KIND_NONE, KIND_CHAR, KIND_BPE, KIND_JOINT, KIND_PRESEGMENTED)


@dataclass
class Scheme:
    name: str
    kind: str
    n: int = 1
    shortlist: int = 0
    merges: Optional[MergeTable] = None
    train_segmented: List[str] = field(default_factory=list)
    test_segmented: List[str] = field(default_factory=list)


def parse_scheme(text: str) -> Scheme:
    """
    none | char:N[:K] | bpe:MERGES | joint:MERGES | pre:TRAIN_SEGMENTED:TEST_SEGMENTED
    """
    kind, _, rest = text.partition(":")
    if kind == KIND_NONE and not rest:
        return Scheme(text, kind)
    if kind == KIND_CHAR and rest:
        parts = rest.split(":")
        if len(parts) > 2 or not all(p.isdigit() for p in parts):
            raise PreconditionError(f"bad n-gram scheme {text!r}, expected char:N[:K]")
        return Scheme(text, kind, n=int(parts[0]), shortlist=int(parts[1]) if len(parts) == 2 else 0)
    if kind in (KIND_BPE, KIND_JOINT) and rest:
        return Scheme(text, kind, merges=read_merge_table(rest))
    if kind == KIND_PRESEGMENTED and rest.count(":") == 1:
        train_path, test_path = rest.split(":")
        return Scheme(text, kind, train_segmented=list(read_lines(train_path)),
                      test_segmented=list(read_lines(test_path)))
    raise PreconditionError(f"unknown scheme {text!r}, expected one of {KINDS}")


def _segment(scheme: Scheme, train: Sequence[str], test: Sequence[str]):
    if scheme.kind == KIND_NONE:
        return list(train), list(test)
    if scheme.kind == KIND_CHAR:
        table = build_word_frequency_table(train) if scheme.shortlist else None
        cfg = NgramConfig.from_table(scheme.n, scheme.shortlist, table)
        return segment_corpus_ngrams(train, cfg, workers=1), segment_corpus_ngrams(test, cfg, workers=1)
    if scheme.kind in (KIND_BPE, KIND_JOINT):
        # test units are split back to units seen in training
        train_seg, _ = apply_to_corpus(train, scheme.merges, workers=1)
        vocab = build_network_vocabulary(train_seg)
        test_seg, _ = apply_to_corpus(test, scheme.merges, vocab, workers=1)
        return train_seg, test_seg
    return scheme.train_segmented, scheme.test_segmented


def scheme_row(scheme: Scheme, train: Sequence[str], test: Sequence[str]) -> dict:
    train_seg, test_seg = _segment(scheme, train, test)
    stats = corpus_statistics(train_seg, test_seg)
    logger.info(f"{scheme.name}: {stats.tokens} tokens, {stats.types} types, {stats.unk} UNK")
    return {"scheme": scheme.name, "tokens": stats.tokens, "types": stats.types, "unk": stats.unk}


def compare_schemes(train: Sequence[str], test: Sequence[str], schemes: Sequence[Scheme],
                    workers: int = WORKERS) -> pd.DataFrame:
    """One row per scheme, in the order given"""
    train, test = list(train), list(test)
    if workers <= 1:
        rows = [scheme_row(s, train, test) for s in schemes]
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(lambda s: scheme_row(s, train, test), schemes))
    return pd.DataFrame(rows, columns=["scheme", "tokens", "types", "unk"])


def format_table(frame: pd.DataFrame) -> str:
    return frame.to_string(index=False) + "\n"


def format_tsv(frame: pd.DataFrame) -> str:
    return frame.to_csv(sep="\t", index=False)
