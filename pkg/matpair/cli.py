"""Command line front end.

Exit codes: 0 success or equivalent, 1 validation, canonicalization or admissibility failure,
2 unreadable input or context error, 3 inequivalent.
"""

from __future__ import annotations
from argparse import SUPPRESS, ArgumentParser, Namespace
from enum import IntEnum
from pathlib import Path
from typing import Any, Sequence
import logging
import sys

import numpy as np

from . import __version__
from .scalars import ContextError
from .canon import canonicalize, describe, make_witness
from .instance import GeneratorSpec, canonical_forms, catalog, check_same_context, corrupt
from .instance import random_instance, require_valid, validate_pair
from .documents import CanonDocument, DocumentError, PairDocument, catalog_records, dumps
from .documents import load_json, load_pair, parse_block_requests, parse_case, report_dict, save
from .settings import Tolerances, settings
from .util import MatpairError, log_error, logger as log, set_console_level


class ExitCode(IntEnum):
    ok = 0
    failure = 1
    input = 2
    inequivalent = 3


def _tolerances(args: Namespace) -> Tolerances:
    if args.config is not None:
        if not args.config.exists():
            raise FileNotFoundError(f"Settings file {args.config} not found")
        settings.load(args.config)
    tolerances = settings.tolerances()
    return tolerances.scaled(args.tol) if args.tol is not None else tolerances


def _output(args: Namespace, data: Any, text: str):
    if args.json:
        print(dumps(data), end="")
    elif not args.quiet:
        print(text)


def _read_pair(path: Path, args: Namespace):
    pair = load_pair(path).to_pair(_tolerances(args))
    _ = pair.tag  # context errors are input errors, not validation failures
    return pair


def cmd_validate(args: Namespace):
    pair = _read_pair(args.input, args)
    report = validate_pair(pair)
    verdict = "valid" if report.passed else "INVALID"
    _output(args, report_dict(report), f"{report}\n{verdict}")
    return ExitCode.ok if report.passed else ExitCode.failure


def cmd_canonicalize(args: Namespace):
    pair = _read_pair(args.input, args)
    require_valid(pair)
    form, witness = canonicalize(pair)
    doc = CanonDocument.from_form(form, witness).to_dict()
    if args.output:
        save(doc, args.output)
        _output(args, doc, str(form))
    else:
        print(dumps(doc), end="")
    return ExitCode.ok


def cmd_generate(args: Namespace):
    tag = parse_case(args.case, args.r)
    blocks = parse_block_requests(load_json(args.blocks), tag) if args.blocks else None
    spec = GeneratorSpec(tag, blocks, args.dim, args.seed)
    if args.cond is not None:
        spec.cond_bound = args.cond
    rng = np.random.default_rng(args.seed)
    instance = random_instance(spec, rng)
    pair = instance.pair
    if args.corrupt:
        pair = corrupt(pair, args.corrupt, rng)
        log.info(f"Corrupted one entry of A by {args.corrupt}")

    pair_doc = PairDocument.from_pair(pair).to_dict()
    witness = make_witness(instance.pair.A, instance.pair.F, instance.witness, instance.truth)
    truth_doc = CanonDocument.from_form(instance.truth, witness).to_dict()
    if args.output:
        save(pair_doc, args.output)
    else:
        print(dumps(pair_doc), end="")
    if args.truth:
        save(truth_doc, args.truth)
    if args.output and not args.quiet:
        print(str(instance.truth))
    return ExitCode.ok


def cmd_equiv(args: Namespace):
    p1 = _read_pair(args.first, args)
    p2 = _read_pair(args.second, args)
    check_same_context(p1, p2)
    f1, f2 = canonical_forms(p1, p2)
    equivalent = p1.n == p2.n and f1 == f2
    verdict = "equivalent" if equivalent else "not equivalent"
    data = {
        "equivalent": equivalent,
        "forms": [CanonDocument.from_form(f).to_dict() for f in (f1, f2)],
    }
    _output(args, data, f"{args.first}:\n{f1}\n{args.second}:\n{f2}\n{verdict}")
    return ExitCode.ok if equivalent else ExitCode.inequivalent


def cmd_catalog(args: Namespace):
    tag = parse_case(args.case, args.r)
    blocks = catalog(tag)
    lines = [f"case {tag}, m = {tag.m}, {len(blocks)} templates"]
    lines += [f"  {describe(b, tag)}" for b in blocks]
    _output(args, catalog_records(blocks, tag), "\n".join(lines))
    return ExitCode.ok


def _global_options(defaults: bool):
    parser = ArgumentParser(add_help=False)
    value = (lambda v: v) if defaults else (lambda v: SUPPRESS)
    # fmt: off
    parser.add_argument("--tol", type=float, default=value(None), metavar="X", help="relation tolerance, snapping follows at 100x")
    parser.add_argument("--json", action="store_true", default=value(False), help="machine readable output")
    parser.add_argument("--quiet", action="store_true", default=value(False), help="print errors only")
    parser.add_argument("--verbose", action="store_true", default=value(False), help="log debug output to the console")
    parser.add_argument("--config", type=Path, default=value(None), metavar="FILE", help="settings file")
    # fmt: on
    return parser


def create_parser():
    parser = ArgumentParser(
        prog="matpair",
        description="Canonical forms of r-selfadjoint matrix pairs over R, C and H",
        parents=[_global_options(True)],
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command_name", required=True)
    common = [_global_options(False)]

    # fmt: off
    validate = commands.add_parser("validate", parents=common, help="check a pair document")
    validate.add_argument("--input", type=Path, required=True, metavar="FILE")
    validate.set_defaults(command=cmd_validate)

    canon = commands.add_parser("canonicalize", parents=common, help="canonical form and witness")
    canon.add_argument("--input", type=Path, required=True, metavar="FILE")
    canon.add_argument("--output", type=Path, metavar="FILE", help="write the canonical form document here instead of standard output")
    canon.set_defaults(command=cmd_canonicalize)

    generate = commands.add_parser("generate", parents=common, help="random pair with known canonical form")
    generate.add_argument("--case", required=True, choices=["a1", "a2", "a3", "b1", "b2", "c1", "c2", "c3", "c4"])
    generate.add_argument("--r", type=int, required=True, metavar="N")
    source = generate.add_mutually_exclusive_group(required=True)
    source.add_argument("--blocks", type=Path, metavar="FILE", help="JSON list of block requests")
    source.add_argument("--dim", type=int, metavar="N", help="dimension filled with random blocks")
    generate.add_argument("--seed", type=int, metavar="K", help="random seed, fixes the output")
    generate.add_argument("--cond", type=float, metavar="B", help="condition number bound of the scrambling transformation")
    generate.add_argument("--output", type=Path, metavar="FILE", help="pair document, standard output if omitted")
    generate.add_argument("--truth", type=Path, metavar="FILE", help="canonical form document of the generated pair")
    generate.add_argument("--corrupt", type=float, metavar="X", help="move one entry of A by X")
    generate.set_defaults(command=cmd_generate)

    equiv = commands.add_parser("equiv", parents=common, help="decide whether two pairs are equivalent")
    equiv.add_argument("first", type=Path, metavar="FILE1")
    equiv.add_argument("second", type=Path, metavar="FILE2")
    equiv.set_defaults(command=cmd_equiv)

    catalog_cmd = commands.add_parser("catalog", parents=common, help="list the block templates of a case")
    catalog_cmd.add_argument("--case", required=True, choices=["a1", "a2", "a3", "b1", "b2", "c1", "c2", "c3", "c4"])
    catalog_cmd.add_argument("--r", type=int, required=True, metavar="N")
    catalog_cmd.set_defaults(command=cmd_catalog)
    # fmt: on
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = create_parser().parse_args(argv)
    if args.verbose:
        set_console_level(logging.DEBUG)
    elif args.quiet:
        set_console_level(logging.ERROR)
    else:
        set_console_level(logging.WARNING)

    try:
        return int(args.command(args))
    except (DocumentError, ContextError, OSError) as e:
        print(log_error(e), file=sys.stderr)
        return int(ExitCode.input)
    except MatpairError as e:
        print(log_error(e), file=sys.stderr)
        return int(ExitCode.failure)
