"""Command-line pipeline: train, generate, filter, rank, study tooling.

Stages read newline-delimited UTF-8 words on stdin and write them on
stdout so they compose under shell pipes. Exit codes: 0 success, 1 usage
error, 2 data/format error, 3 generation exhausted.

Environment knobs (kept out of the flag surface on purpose):
  NONWORDS_ALPHABET   training/enumeration alphabet (default: Swedish, 29 letters)
  NONWORDS_WORKERS    worker threads for batch generation (default: 1)
"""

from __future__ import annotations

import argparse
import json
import os
import secrets
import sys
from random import Random

from . import __version__, filtering, ranker, study
from .alphabets import SWEDISH_ALPHABET
from .corpus import extract_words_from_path, load_lexicon_from_paths
from .errors import GenerationExhaustedError, NonwordsError, PartialBatchError
from .generator import (
    Candidate,
    EXHAUSTIVE_MAX_LENGTH,
    Provenance,
    exhaustive_texts,
    sample_batch,
)
from .lm import load_model, save_model, train

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_EXHAUSTED = 3

MAX_SEED = 2**31 - 1


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems with exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _alphabet() -> str:
    return os.environ.get("NONWORDS_ALPHABET", SWEDISH_ALPHABET)


def _workers() -> int:
    return max(1, int(os.environ.get("NONWORDS_WORKERS", "1")))


def _stdin_words():
    for line in sys.stdin:
        word = line.strip()
        if word:
            yield word


def cmd_train(args) -> int:
    table = None
    for path in args.corpus:
        piece = extract_words_from_path(path, _alphabet())
        if table is None:
            table = piece
        else:
            table.merge(piece)
    model = train(table, order=args.order)
    save_model(model, args.out)
    print(
        f"trained order-{args.order} model on {table.total_tokens()} tokens "
        f"({len(table)} forms), {model.context_count()} contexts -> {args.out}",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_generate(args) -> int:
    if args.exhaustive:
        if args.model:
            alphabet = load_model(args.model).alphabet
        else:
            alphabet = _alphabet()
        for text in exhaustive_texts(alphabet, args.length):
            sys.stdout.write(text + "\n")
        return EXIT_OK
    if not args.model:
        raise UsageError("--model is required unless --exhaustive is given")
    if args.length <= EXHAUSTIVE_MAX_LENGTH:
        raise UsageError(
            f"lengths up to {EXHAUSTIVE_MAX_LENGTH} are enumerated; pass --exhaustive"
        )
    seed = args.seed
    if seed is None:
        if args.require_seed:
            raise UsageError("--seed is required (--require-seed is set)")
        seed = secrets.randbelow(MAX_SEED)
        print(f"seed={seed}", file=sys.stderr)
    model = load_model(args.model)
    batch = sample_batch(
        model,
        args.length,
        args.count,
        Random(seed),
        workers=_workers(),
    )
    for candidate in batch:
        sys.stdout.write(candidate.text + "\n")
    return EXIT_OK


def cmd_filter(args) -> int:
    lexicon = load_lexicon_from_paths(args.lexicon, args.exclusions)
    candidates = (Candidate(w, Provenance.SAMPLED) for w in _stdin_words())
    stream, report = filtering.filter_lexicon(candidates, lexicon)
    if args.model:
        if args.min_logprob is None:
            raise UsageError("--min-logprob is required when --model is given")
        model = load_model(args.model)
        stream, low_report = filtering.filter_low_probability(
            stream, model, args.min_logprob
        )
    else:
        low_report = None
    for candidate in stream:
        sys.stdout.write(candidate.text + "\n")
    if low_report is not None:
        report.add(low_report)
    for key, value in report.as_dict().items():
        print(f"{key}={value}", file=sys.stderr)
    return EXIT_OK


def cmd_rank(args) -> int:
    model = load_model(args.model)
    candidates = [Candidate(w, Provenance.SAMPLED) for w in _stdin_words()]
    ranked = ranker.rank(candidates, model, model_id=args.model)
    if args.rerank:
        other = load_model(args.rerank)
        ranked = ranker.rerank(ranked, other, model_id=args.rerank)
    if args.top is not None:
        ranked = ranker.RankedList(ranked.model_id, ranked.top(args.top))
    for line in ranked.tsv_lines():
        sys.stdout.write(line + "\n")
    return EXIT_OK


def _read_word_lines(path: str) -> list[str]:
    with open(path, encoding="utf-8") as stream:
        return [line.strip() for line in stream if line.strip()]


def _named_inputs(tokens: list[str], default_tags: tuple[str, ...]) -> dict[str, list[str]]:
    """Parse --inputs entries as TAG=PATH, or assign default tags by position."""
    named: dict[str, list[str]] = {}
    for position, token in enumerate(tokens):
        if "=" in token:
            tag, path = token.split("=", 1)
        else:
            if position >= len(default_tags):
                raise UsageError(
                    f"too many inputs: expected at most {len(default_tags)}"
                )
            tag, path = default_tags[position], token
        if tag in named:
            raise UsageError(f"duplicate input tag {tag!r}")
        named[tag] = _read_word_lines(path)
    return named


def cmd_study_build(args) -> int:
    if args.design == "perception":
        named = _named_inputs(args.inputs, ranker.PERCEPTION_GROUPS)
        missing = [t for t in ranker.PERCEPTION_GROUPS if t not in named]
        if missing:
            raise UsageError(f"perception design needs inputs {missing}")
        study_list = ranker.build_perception_list(
            named["g1"], named["g2"], named["g3"]
        )
        study_list.seed = args.seed
    else:
        named = _named_inputs(args.inputs, ("DE", "EN", "SV", "FI"))
        if ranker.FILLER_GROUP not in named:
            raise UsageError("decision design needs a FI=PATH filler input")
        seed = args.seed
        if seed is None:
            if args.require_seed:
                raise UsageError("--seed is required (--require-seed is set)")
            seed = secrets.randbelow(MAX_SEED)
            print(f"seed={seed}", file=sys.stderr)
        fillers = named.pop(ranker.FILLER_GROUP)
        study_list = ranker.build_decision_blocks(
            named, fillers, Random(seed), seed=seed
        )
    json.dump(study_list.to_json_dict(), sys.stdout, ensure_ascii=False, indent=2)
    sys.stdout.write("\n")
    return EXIT_OK


def _format_cell(value: float | None) -> str:
    return "" if value is None else f"{value:.2f}"


def cmd_study_analyze(args) -> int:
    records = study.read_trials_csv(args.trials)
    if args.proficiency:
        allowed = [p.strip().upper() for p in args.proficiency.split(",")]
        records = study.filter_by_proficiency(records, allowed)
    out = sys.stdout
    proficiencies = study.rater_proficiencies(records)
    raters = list(proficiencies)

    acc = study.accuracy(records)
    out.write("# table: accuracy\n")
    out.write("rater,proficiency," + ",".join(study.GROUPS) + "\n")
    for rater in raters:
        row = [rater, proficiencies[rater]]
        row += [_format_cell(acc.get(rater, {}).get(g)) for g in study.GROUPS]
        out.write(",".join(row) + "\n")

    stats = study.group_reaction_times(records)
    out.write("\n# table: reaction_times\n")
    kinds = ("0", "1", "C")
    headers = [f"{g[0]}{k}" for g in study.GROUPS for k in kinds]
    out.write("rater,proficiency," + ",".join(headers) + "\n")
    for rater in raters:
        row = [rater, proficiencies[rater]]
        for group in study.GROUPS:
            cell = stats.get(rater, group)
            if cell is None:
                row += ["", "", ""]
            else:
                row += [
                    _format_cell(cell.reject_mean),
                    _format_cell(cell.accept_mean),
                    _format_cell(cell.combined_mean),
                ]
        out.write(",".join(row) + "\n")
    for label, chosen in (
        ("nA", None),
        ("nA2", [r for r, p in proficiencies.items() if p in ("I", "A")]),
    ):
        cells = study.normalized_cell_averages(stats, raters=chosen)
        row = [label, ""]
        for group in study.GROUPS:
            for kind in study.CELL_KINDS:
                row.append(_format_cell(cells.get(group, {}).get(kind)))
        out.write(",".join(row) + "\n")

    out.write("\n# table: normalized_average\n")
    out.write("group,nAvg\n")
    try:
        navg = study.normalized_average(
            study.combined_means(stats), groups=study.GROUPS
        )
    except study.AnalysisError:
        navg = {}
    for group in study.GROUPS:
        out.write(f"{group},{_format_cell(navg.get(group))}\n")
    return EXIT_OK


class UsageError(Exception):
    pass


def build_parser() -> _Parser:
    parser = _Parser(
        prog="nonwords",
        description="Generate, filter and rank Swedish-style non-words; "
        "build and analyze lexical-decision studies.",
    )
    parser.add_argument(
        "--version", action="version", version=f"nonwords {__version__}"
    )
    parser.add_argument(
        "--require-seed",
        action="store_true",
        help="fail instead of drawing a random seed when --seed is missing",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a model from text corpora")
    p.add_argument("--corpus", nargs="+", required=True, metavar="PATH")
    p.add_argument("--order", type=int, default=4, metavar="N")
    p.add_argument("--out", required=True, metavar="MODEL")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("generate", help="emit candidate non-words")
    p.add_argument("--model", metavar="MODEL")
    p.add_argument("--length", type=int, required=True, metavar="L")
    p.add_argument("--count", type=int, default=20, metavar="C")
    p.add_argument("--seed", type=int, metavar="S")
    p.add_argument("--exhaustive", action="store_true")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("filter", help="drop existing words from stdin")
    p.add_argument("--lexicon", required=True, metavar="PATH")
    p.add_argument("--exclusions", metavar="PATH")
    p.add_argument("--model", metavar="MODEL")
    p.add_argument("--min-logprob", type=float, metavar="T")
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("rank", help="order stdin words by model score")
    p.add_argument("--model", required=True, metavar="MODEL")
    p.add_argument("--rerank", metavar="MODEL2")
    p.add_argument("--top", type=int, metavar="K")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("study-build", help="construct a study list")
    p.add_argument(
        "--design", choices=("perception", "decision"), required=True
    )
    p.add_argument("--inputs", nargs="+", required=True, metavar="[TAG=]PATH")
    p.add_argument("--seed", type=int, metavar="S")
    p.set_defaults(func=cmd_study_build)

    p = sub.add_parser("study-analyze", help="summarize a trial log CSV")
    p.add_argument("--trials", required=True, metavar="CSV")
    p.add_argument("--proficiency", metavar="LEVELS")
    p.set_defaults(func=cmd_study_analyze)

    return parser


def main(argv: list[str] | None = None) -> int:
    for stream in (sys.stdout, sys.stderr):
        if hasattr(stream, "reconfigure"):
            stream.reconfigure(encoding="utf-8")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"nonwords: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"nonwords: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PartialBatchError as exc:
        print(f"nonwords: generation exhausted: {exc}", file=sys.stderr)
        return EXIT_EXHAUSTED
    except GenerationExhaustedError as exc:
        print(f"nonwords: generation exhausted: {exc}", file=sys.stderr)
        return EXIT_EXHAUSTED
    except NonwordsError as exc:
        print(f"nonwords: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except BrokenPipeError:
        return EXIT_OK
    except OSError as exc:
        print(f"nonwords: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    raise SystemExit(main())
