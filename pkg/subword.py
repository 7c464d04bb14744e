#!/usr/bin/env python3
"""
Subword segmentation toolkit, command line

    python3 subword.py learn --input train.de train.en --output merges.txt --merges 30000
    python3 subword.py apply --merges merges.txt --input test.de --output test.seg.de
    python3 subword.py revert --input out.seg.de --output out.de

Every command reads and writes UTF-8; "-" means standard input/output.
Exit codes: 0 success, 2 usage or format error, 1 internal error.
"""

import argparse
import logging
import sys
from contextlib import contextmanager
from concurrent.futures import ThreadPoolExecutor
from itertools import islice
from typing import Iterable, Iterator, List, Optional, TextIO

import pandas as pd

from config import CHRF_BETA, CHRF_MAX_N, CONTINUATION, MIN_FREQUENCY, RARE_RANK, VOCAB_THRESHOLD, WORKERS
from core_model import (
    SegmentationError,
    WordFrequencyTable,
    build_word_frequency_table,
    check_token,
    decode_lines,
    read_lines,
    read_word_frequencies,
    revert_line,
    serialize_segmentation,
)
from bpe_learn import (
    LearnConfig,
    MergeStep,
    format_merge_table,
    learn_bpe,
    learn_bpe_indexed,
    parse_merge_table,
    read_merge_table,
)
from bpe_apply import BPEApplier, UnknownReport, build_network_vocabulary, read_vocabulary
from ngram_seg import NgramConfig, segment_ngrams
from translit import DIRECTIONS, load_table, transliterate, transliterate_merge_table
from joint_bpe import BRIDGE_ISO9, learn_joint, learn_separate, write_joint
from metrics import KEEP_SPACES, STRIP_SPACES, ChrfConfig, evaluate, f1_by_frequency_rank, format_plot_data
from stats import compare_schemes, format_table, format_tsv, parse_scheme

logger = logging.getLogger("subword")

STDIO = "-"
BATCH_LINES = 10000


# I/O helpers

def _read(path: str) -> Iterator[str]:
    if path == STDIO:
        return decode_lines(sys.stdin.buffer, "<stdin>")
    return read_lines(path)


@contextmanager
def _output(path: str):
    if path == STDIO:
        yield sys.stdout
        sys.stdout.flush()
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            yield f


def _positive_int(value: str) -> int:
    try:
        n = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {value!r}")
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {n}")
    return n


def _word_table(paths: Iterable[str], dict_input: bool = False, workers: int = WORKERS) -> WordFrequencyTable:
    table = WordFrequencyTable({})
    for path in paths:
        part = read_word_frequencies(_read(path)) if dict_input else build_word_frequency_table(_read(path), workers)
        logger.info(f"{path}: {len(part)} types, {part.total_tokens} tokens")
        table = table.merged(part)
    return table


def _load_merges(path: str):
    return parse_merge_table(_read(path)) if path == STDIO else read_merge_table(path)


def _translit_table(path):
    return load_table(path) if path else None


# Commands

def cmd_learn(args) -> None:
    table = _word_table(args.input, args.dict_input, args.workers)
    cfg = LearnConfig(num_merges=args.merges, min_frequency=args.min_frequency)
    learner = learn_bpe if args.naive else learn_bpe_indexed
    trace: Optional[List[MergeStep]] = [] if args.trace else None
    merges = learner(table, cfg, trace=trace)
    with _output(args.output) as out:
        out.write(format_merge_table(merges))
    logger.info(f"Learned {merges.executed} of {args.merges} merges from {len(table)} types")
    if args.trace:
        frame = pd.DataFrame([{
            "rank": step.rank,
            "left": step.pair[0],
            "right": step.pair[1],
            "count": step.count,
            "tokens_after": step.tokens_after,
            "vocab_size_after": step.vocab_size_after,
        } for step in trace], columns=["rank", "left", "right", "count", "tokens_after", "vocab_size_after"])
        frame.to_csv(args.trace, sep="\t", index=False)


def _apply_stream(lines: Iterable[str], applier: BPEApplier, vocab, workers: int, out: TextIO) -> UnknownReport:
    """Segment line by line; with workers > 1 bounded batches go through the pool, order kept"""
    report = UnknownReport()
    numbered = enumerate(lines, start=1)

    def one(item):
        line_no, line = item
        return applier.segment_line(line, vocab, line_no)

    if workers <= 1:
        results = map(one, numbered)
        for units, partial in results:
            out.write(" ".join(units) + "\n")
            report.add(partial)
        return report

    with ThreadPoolExecutor(max_workers=workers) as ex:
        for batch in iter(lambda: list(islice(numbered, BATCH_LINES)), []):
            for units, partial in ex.map(one, batch):
                out.write(" ".join(units) + "\n")
                report.add(partial)
    return report


def cmd_apply(args) -> None:
    applier = BPEApplier(_load_merges(args.merges), marker=args.separator)
    vocab = read_vocabulary(args.vocabulary, args.vocab_threshold) if args.vocabulary else None
    with _output(args.output) as out:
        report = _apply_stream(_read(args.input), applier, vocab, args.workers, out)
    if vocab is not None:
        print(report.format(), file=sys.stderr)


def cmd_revert(args) -> None:
    with _output(args.output) as out:
        for line_no, line in enumerate(_read(args.input), start=1):
            out.write(revert_line(line, line_no, args.separator) + "\n")


def cmd_vocab(args) -> None:
    vocab = build_network_vocabulary(_read(args.input), args.threshold)
    with _output(args.output) as out:
        for unit, count in vocab.sorted_items():
            out.write(f"{unit} {count}\n")


def cmd_segment_ngrams(args) -> None:
    table = None
    if args.shortlist:
        train = args.train or args.input
        if train == STDIO:
            args.parser.error("--shortlist needs --train when the input is standard input")
        table = _word_table([train])
    cfg = NgramConfig.from_table(args.n, args.shortlist, table, attach_eow=not args.detached_eow)
    with _output(args.output) as out:
        for line_no, line in enumerate(_read(args.input), start=1):
            units: List[str] = []
            for token in line.split():
                check_token(token, line_no, args.separator)
                units.extend(serialize_segmentation(segment_ngrams(token, cfg), args.separator))
            out.write(" ".join(units) + "\n")


def cmd_joint_learn(args) -> None:
    src = _word_table(args.src, args.dict_input, args.workers)
    tgt = _word_table(args.tgt, args.dict_input, args.workers)
    cfg = LearnConfig(num_merges=args.merges, min_frequency=args.min_frequency)
    if args.separate:
        if args.bridge:
            args.parser.error("--separate and --bridge are mutually exclusive")
        result = learn_separate(src, tgt, cfg)
    else:
        result = learn_joint(src, tgt, cfg, bridge=args.bridge, translit_table=_translit_table(args.table))
    for path in write_joint(result, args.output):
        logger.info(f"Wrote {path}")
    if result.dropped:
        logger.warning(f"{len(result.dropped)} rules kept in Latin form only on the target side")


def cmd_translit(args) -> None:
    table = _translit_table(args.table)
    if args.merge_file:
        merges, report = transliterate_merge_table(_load_merges(args.input), args.direction, table)
        with _output(args.output) as out:
            out.write(format_merge_table(merges))
        for rule in report.dropped:
            logger.info(f"dropped rule {rule.rank}: {rule.left} {rule.right}")
        return
    with _output(args.output) as out:
        for line in _read(args.input):
            out.write(transliterate(line, args.direction, table) + "\n")


def cmd_stats(args) -> None:
    schemes = [parse_scheme(text) for text in (args.scheme or ["none"])]
    frame = compare_schemes(list(_read(args.train)), list(_read(args.test)), schemes, args.workers)
    with _output(args.output) as out:
        out.write(format_tsv(frame) if args.tsv else format_table(frame))


def _eval_inputs(args):
    hyp, ref = list(_read(args.hyp)), list(_read(args.ref))
    if args.segmented:
        hyp = [revert_line(line, i, args.separator) for i, line in enumerate(hyp, start=1)]
        ref = [revert_line(line, i, args.separator) for i, line in enumerate(ref, start=1)]
    return hyp, ref


def cmd_eval(args) -> None:
    metrics = args.metric or ["f1", "chrf"]
    if "bins" in metrics and not args.train:
        args.parser.error("--metric bins requires --train")
    hyp, ref = _eval_inputs(args)
    train = _word_table([args.train]) if args.train else None
    chrf_cfg = ChrfConfig(beta=args.beta, max_n=args.max_n, whitespace_policy=args.whitespace)
    report = evaluate(hyp, ref, train, metrics, chrf_cfg, args.rare_rank)
    with _output(args.output) as out:
        out.write(report.format_tsv())


def cmd_plot_data(args) -> None:
    hyp, ref = _eval_inputs(args)
    bins = f1_by_frequency_rank(hyp, ref, _word_table([args.train]))
    with _output(args.output) as out:
        out.write("rank\tfreq\tf1\tn\n")
        out.write(format_plot_data(bins))


# Parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="subword.py",
        description="Learn and apply BPE merge tables, segment, transliterate and evaluate.",
        epilog="""
Examples:
  python3 subword.py learn --input corpus.tok --output merges.txt --merges 30000
      Learn up to 30000 merges (stops early when pairs run out).
  python3 subword.py learn --input train.en train.de --output joint.txt --merges 90000
      Joint encoding learned on the concatenation of both sides.
  python3 subword.py apply --merges merges.txt --input test.tok --output test.seg
      Segment text into "low@@ er" style units.
  python3 subword.py revert --input out.seg --output out.tok
      Join "@@" units back into words.
  python3 subword.py eval --hyp out.tok --ref ref.tok --metric chrf
      chrF3 of a translation.
        """,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, func, help_text, epilog=None):
        p = sub.add_parser(name, help=help_text, description=help_text, epilog=epilog,
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        p.set_defaults(func=func, parser=p)
        return p

    def io(p, input_help="Input file, - for stdin"):
        p.add_argument("--input", default=STDIO, help=input_help)
        p.add_argument("--output", default=STDIO, help="Output file, - for stdout")

    def separator(p):
        p.add_argument("--separator", default=CONTINUATION, help=f"Continuation marker (default {CONTINUATION})")

    def workers(p):
        p.add_argument("--workers", type=_positive_int, default=WORKERS, help="Worker threads")

    p = command("learn", cmd_learn, "Learn a BPE merge table", epilog="""
Examples:
  python3 subword.py learn --input corpus.tok --output merges.txt --merges 10
  python3 subword.py learn --input vocab.txt --dict-input --output merges.txt --merges 10
        """)
    p.add_argument("--input", nargs="+", action="extend", required=True,
                   help="Tokenized text files (or word-frequency files with --dict-input)")
    p.add_argument("--output", default=STDIO, help="Merge file, - for stdout")
    p.add_argument("--merges", type=_positive_int, required=True, help="Number of merge operations")
    p.add_argument("--min-frequency", type=_positive_int, default=MIN_FREQUENCY,
                   help=f"Stop when the best pair is rarer (default {MIN_FREQUENCY})")
    p.add_argument("--dict-input", action="store_true", help="Inputs are 'word count' lines")
    p.add_argument("--naive", action="store_true", help="Use the recounting reference learner")
    p.add_argument("--trace", help="Write per-merge statistics as TSV to this file")
    workers(p)

    p = command("apply", cmd_apply, "Segment text with a merge table", epilog="""
Examples:
  python3 subword.py apply --merges merges.txt --input test.tok --output test.seg
  python3 subword.py apply --merges merges.txt --vocabulary vocab.txt --vocab-threshold 50 < test.tok
        """)
    io(p)
    p.add_argument("--merges", required=True, help="Merge file")
    p.add_argument("--vocabulary", help="Network vocabulary ('unit count' lines)")
    p.add_argument("--vocab-threshold", type=int, default=VOCAB_THRESHOLD,
                   help="Ignore vocabulary units seen fewer times")
    separator(p)
    workers(p)

    p = command("revert", cmd_revert, "Undo segmentation")
    io(p)
    separator(p)

    p = command("vocab", cmd_vocab, "Count the units of a segmented corpus")
    io(p, "Segmented text, - for stdin")
    p.add_argument("--threshold", type=int, default=0, help="Drop units seen fewer times")

    p = command("segment-ngrams", cmd_segment_ngrams, "Character n-gram segmentation")
    io(p)
    p.add_argument("--n", type=_positive_int, required=True, help="Chunk length")
    p.add_argument("--shortlist", type=int, default=0, help="Keep the K most frequent words whole")
    p.add_argument("--train", help="Corpus the shortlist is taken from (default: the input)")
    p.add_argument("--detached-eow", action="store_true", help="End-of-word marker as its own symbol")
    separator(p)

    p = command("joint-learn", cmd_joint_learn, "Learn one encoding on source and target", epilog="""
Examples:
  python3 subword.py joint-learn --src train.en --tgt train.de --output joint.txt --merges 90000
  python3 subword.py joint-learn --src train.en --tgt train.ru --bridge iso9 --output joint.txt --merges 90000
      Writes joint.txt.src and joint.txt.tgt.
        """)
    p.add_argument("--src", nargs="+", action="extend", required=True, help="Source-side files")
    p.add_argument("--tgt", nargs="+", action="extend", required=True, help="Target-side files")
    p.add_argument("--output", required=True, help="Merge file (or prefix of .src/.tgt)")
    p.add_argument("--merges", type=_positive_int, required=True, help="Number of merge operations")
    p.add_argument("--min-frequency", type=_positive_int, default=MIN_FREQUENCY)
    p.add_argument("--bridge", choices=[BRIDGE_ISO9], help="Transliterate the target side to Latin")
    p.add_argument("--separate", action="store_true", help="Learn one independent table per side")
    p.add_argument("--dict-input", action="store_true", help="Inputs are 'word count' lines")
    p.add_argument("--table", help="Transliteration table overriding the shipped one")
    workers(p)

    p = command("translit", cmd_translit, "ISO 9 transliteration")
    io(p)
    p.add_argument("--direction", choices=DIRECTIONS, required=True)
    p.add_argument("--merge-file", action="store_true", help="Input is a merge file; map its rules")
    p.add_argument("--table", help="Transliteration table overriding the shipped one")

    p = command("stats", cmd_stats, "Token/type/UNK counts per segmentation scheme", epilog="""
Schemes:
  none | char:N[:K] | bpe:MERGES | joint:MERGES | pre:TRAIN_SEGMENTED:TEST_SEGMENTED
Example:
  python3 subword.py stats --train train.tok --test test.tok --scheme none --scheme char:3 --scheme bpe:merges.txt
        """)
    p.add_argument("--train", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--scheme", action="append", help="Segmentation scheme, repeatable (default: none)")
    p.add_argument("--tsv", action="store_true", help="Tab-separated output")
    p.add_argument("--output", default=STDIO)
    workers(p)

    def eval_inputs(p):
        p.add_argument("--hyp", required=True, help="Hypothesis file")
        p.add_argument("--ref", required=True, help="Reference file")
        p.add_argument("--segmented", action="store_true", help="Revert both files before scoring")
        p.add_argument("--output", default=STDIO)
        separator(p)

    p = command("eval", cmd_eval, "Score a translation")
    eval_inputs(p)
    p.add_argument("--train", help="Training corpus (needed for categories and bins)")
    p.add_argument("--metric", action="append", choices=["f1", "chrf", "bins"],
                   help="Repeatable (default: f1 and chrf)")
    p.add_argument("--beta", type=float, default=CHRF_BETA)
    p.add_argument("--max-n", type=_positive_int, default=CHRF_MAX_N)
    p.add_argument("--whitespace", choices=[STRIP_SPACES, KEEP_SPACES], default=STRIP_SPACES)
    p.add_argument("--rare-rank", type=_positive_int, default=RARE_RANK)

    p = command("plot-data", cmd_plot_data, "Unigram F1 per training-frequency bin")
    eval_inputs(p)
    p.add_argument("--train", required=True, help="Training corpus")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (SegmentationError, OSError, UnicodeDecodeError) as e:
        print(f"{args.command}: {e}", file=sys.stderr)
        return 2
    except Exception:
        logger.exception(f"{args.command} failed")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
