"""``docforge`` command line: generate, encode, decode, score, validate.

Exit codes: 0 success, 2 input/config error, 3 generation error,
4 recovery events under ``--strict``, 5 gt/pred id misalignment.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

from . import codec, corpus_io, metrics
from .errors import (
    CodecError,
    ConfigError,
    DocforgeError,
    EmptyPool,
    GenerationError,
    IngestError,
    MetricError,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_GENERATION = 3
EXIT_RECOVERY = 4
EXIT_ALIGNMENT = 5
THREADS_ENV = "DOCFORGE_THREADS"


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_INPUT):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="docforge", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    gen = sub.add_parser("generate", help="render a synthetic document dataset")
    gen.add_argument("config", nargs="?", help="TOML or JSON generator config (defaults if omitted)")
    gen.add_argument("--count", type=int, required=True, help="number of images")
    gen.add_argument("--seed", type=int, help="master seed (overrides the config)")
    gen.add_argument("--out", required=True, help="output directory")
    gen.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                     help="override one config key; VALUE is read as JSON when possible")
    gen.set_defaults(func=cmd_generate)

    enc = sub.add_parser("encode", help="DocTree JSON to a one-line token sequence")
    enc.add_argument("--in", dest="input", required=True, help="DocTree JSON file")
    enc.add_argument("--vocab", required=True, help="vocabulary JSON file")
    enc.set_defaults(func=cmd_encode)

    dec = sub.add_parser("decode", help="one-line token sequence to DocTree JSON")
    dec.add_argument("--in", dest="input", required=True, help="token sequence file")
    dec.add_argument("--vocab", required=True, help="vocabulary JSON file")
    dec.add_argument("--strict", action="store_true", help="exit 4 when anything was recovered")
    dec.set_defaults(func=cmd_decode)

    score = sub.add_parser("score", help="score predictions against ground truth")
    score.add_argument("--metric", required=True, choices=("nted", "anls", "accuracy"))
    score.add_argument("--gt", required=True, help="ground-truth JSONL")
    score.add_argument("--pred", required=True, help="prediction JSONL")
    score.add_argument("--tau", type=float, default=0.5, help="ANLS threshold (default 0.5)")
    score.add_argument("--key", default="class", help="field compared by accuracy")
    score.add_argument("--out", help="report path (default: stdout)")
    score.set_defaults(func=cmd_score)

    val = sub.add_parser("validate", help="check a dataset manifest")
    val.add_argument("manifest", help="metadata.jsonl path")
    val.add_argument("--strict", action="store_true", help="also open images and check texts")
    val.set_defaults(func=cmd_validate)
    return parser


def _print_json(data, stream=None) -> None:
    print(json.dumps(data, ensure_ascii=False), file=stream or sys.stdout)


def _threads() -> int | None:
    raw = os.environ.get(THREADS_ENV, "").strip()
    if not raw:
        return None
    try:
        value = int(raw)
    except ValueError:
        raise CliError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if value < 0:
        raise CliError(f"{THREADS_ENV} must be >= 0")
    return value or None


def cmd_generate(args) -> int:
    from .synthdog import GenConfig, build_resources, generate, load_config, parse_override

    if args.count < 0:
        raise CliError("--count must be >= 0")
    try:
        config = load_config(args.config) if args.config else GenConfig()
        overrides = dict(parse_override(item) for item in args.overrides)
        if args.seed is not None:
            overrides["seed"] = args.seed
        config = config.with_overrides(overrides)
        resources = build_resources(config)
    except (ConfigError, EmptyPool, IngestError) as exc:
        raise CliError(str(exc)) from exc
    workers = _threads()

    start = time.perf_counter()
    try:
        with corpus_io.DatasetWriter(args.out) as writer:
            summary = generate(config, args.count, writer, workers=workers, resources=resources)
    except IngestError as exc:
        raise CliError(str(exc)) from exc
    except GenerationError as exc:
        raise CliError(str(exc), EXIT_GENERATION) from exc
    seconds = time.perf_counter() - start
    _print_json({"images": summary.images, "words": summary.words, "seconds": round(seconds, 3)})
    return EXIT_OK


def _load_vocab(path) -> codec.Vocab:
    text = corpus_io.read_text(path)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(f"{path}: {exc}") from exc
    if not isinstance(data, dict):
        raise CliError(f"{path}: vocabulary must be a JSON object")
    return codec.Vocab.from_dict(data)


def cmd_encode(args) -> int:
    vocab = _load_vocab(args.vocab)
    tree = corpus_io.load_doctree(args.input)
    print(codec.to_surface(codec.encode(tree, vocab)))
    return EXIT_OK


def cmd_decode(args) -> int:
    vocab = _load_vocab(args.vocab)
    line = corpus_io.read_text(args.input).rstrip("\r\n")
    tree, events = codec.decode(codec.from_surface(line, vocab), vocab)
    _print_json(tree)
    if events:
        _print_json({"events": [e.to_dict() for e in events]}, sys.stderr)
        if args.strict:
            return EXIT_RECOVERY
    return EXIT_OK


def _keyed(path, fields: dict) -> dict:
    """Records of a JSONL file by id, checking the fields each must carry."""
    out = {}
    for n, record in enumerate(corpus_io.read_jsonl(path)):
        if not isinstance(record, dict) or not isinstance(record.get("id"), (str, int)) \
                or isinstance(record.get("id"), bool):
            raise CliError(f"{path}: record {n} needs a string or integer 'id'")
        for name, check in fields.items():
            if name not in record or not check(record[name]):
                raise CliError(f"{path}: record {n} has a missing or malformed {name!r}")
        key = str(record["id"])
        if key in out:
            raise CliError(f"{path}: duplicate id {key!r}")
        out[key] = record
    return out


def _is_tree(value) -> bool:
    return isinstance(value, dict)


def _is_answers(value) -> bool:
    return isinstance(value, list) and bool(value) and all(isinstance(v, str) for v in value)


def _as_tree(value, path, sample_id):
    try:
        return corpus_io.doctree_from_json(value)
    except (CodecError, IngestError) as exc:
        raise CliError(f"{path}: id {sample_id!r}: {exc}") from exc


def cmd_score(args) -> int:
    if args.metric == "anls":
        gt = _keyed(args.gt, {"answers": _is_answers})
        pred = _keyed(args.pred, {"answer": lambda v: isinstance(v, str)})
    else:
        gt = _keyed(args.gt, {"parse": _is_tree})
        pred = _keyed(args.pred, {"parse": _is_tree})

    missing = [i for i in gt if i not in pred]
    extra = [i for i in pred if i not in gt]
    if missing or extra:
        _print_json({"missing_ids": missing, "unexpected_ids": extra}, sys.stderr)
        raise CliError(f"{len(missing)} ground-truth ids lack a prediction, "
                       f"{len(extra)} predictions have no ground truth", EXIT_ALIGNMENT)

    ids = list(gt)
    if args.metric == "anls":
        report = metrics.anls_report(ids, [pred[i]["answer"] for i in ids],
                                     [gt[i]["answers"] for i in ids], args.tau)
    else:
        gts = [_as_tree(gt[i]["parse"], args.gt, i) for i in ids]
        preds = [_as_tree(pred[i]["parse"], args.pred, i) for i in ids]
        if args.metric == "nted":
            report = metrics.nted_report(ids, preds, gts)
        else:
            report = metrics.accuracy_report(ids, preds, gts, args.key)

    text = report.to_json(indent=2)
    if args.out:
        try:
            Path(args.out).write_text(text + "\n", encoding="utf-8")
        except OSError as exc:
            raise CliError(f"{args.out}: {exc.strerror}") from exc
    else:
        print(text)
    return EXIT_OK


def cmd_validate(args) -> int:
    report = corpus_io.validate_manifest(args.manifest, strict=args.strict)
    _print_json(report.to_dict())
    return EXIT_OK if report.ok else EXIT_INPUT


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, stream=sys.stderr, format="%(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"docforge {args.command}: {exc}", file=sys.stderr)
        return exc.code
    except (CodecError, IngestError, MetricError, ValueError) as exc:
        print(f"docforge {args.command}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except DocforgeError as exc:
        print(f"docforge {args.command}: {exc}", file=sys.stderr)
        return EXIT_GENERATION


if __name__ == "__main__":
    sys.exit(main())
