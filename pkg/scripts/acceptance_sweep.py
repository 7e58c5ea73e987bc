#!/usr/bin/env python3

"""Round trip sweep over every case and exponent.

Generates seeded random pairs, canonicalizes them and compares against the generated
block multiset. Failures and the largest witness residuals are summarized at the end.

Usage:
    python acceptance_sweep.py [options]

    Use --help for more options.
"""

import json
import sys
import time
from argparse import ArgumentParser
from pathlib import Path
from tqdm import tqdm

sys.path.append(str(Path(__file__).parent.parent))
from matpair.spectral import Case, CaseTag
from matpair.canon import canonicalize
from matpair.instance import GeneratorSpec, random_instance, validate_pair
from matpair.settings import settings
from matpair.util import MatpairError


def sweep(cases: list[Case], exponents: list[int], seeds: int, max_dim: int, cond: float):
    runs = [(case, r, seed) for case in cases for r in exponents for seed in range(seeds)]
    failures = []
    worst = 0.0
    for case, r, seed in tqdm(runs, desc="sweep", unit="pair"):
        dim = 2 + seed % (max_dim - 1)
        if case in (Case.a3, Case.b2):
            dim -= dim % 2
        tag = CaseTag(case, r)
        try:
            instance = random_instance(GeneratorSpec(tag, dim=dim, seed=seed, cond_bound=cond))
            if not validate_pair(instance.pair).passed:
                failures.append((str(tag), seed, "generated pair does not validate"))
                continue
            form, witness = canonicalize(instance.pair)
            worst = max(worst, witness.residual)
            if form != instance.truth:
                failures.append((str(tag), seed, f"got\n{form}\nexpected\n{instance.truth}"))
        except MatpairError as e:
            failures.append((str(tag), seed, f"{type(e).__name__}: {e}"))
    return len(runs), failures, worst


def main():
    parser = ArgumentParser(description="Canonicalize random pairs of every case and compare")
    # fmt: off
    parser.add_argument("--case", action="append", choices=[c.name for c in Case], dest="cases", help="restrict to a case (can specify multiple times)")
    parser.add_argument("--r", action="append", type=int, dest="exponents", help="exponent (can specify multiple times), default 2 3 -2 -3")
    parser.add_argument("--seeds", type=int, default=50, metavar="N", help="instances per case and exponent")
    parser.add_argument("--max-dim", type=int, default=8, metavar="N", help="largest generated dimension")
    parser.add_argument("--cond", type=float, default=settings.cond_bound, metavar="B", help="condition number bound of the scrambling")
    parser.add_argument("--report", type=Path, metavar="FILE", help="write failures as JSON")
    # fmt: on
    args = parser.parse_args()
    cases = [Case[c] for c in args.cases] if args.cases else list(Case)
    exponents = args.exponents or [2, 3, -2, -3]

    start = time.monotonic()
    total, failures, worst = sweep(cases, exponents, args.seeds, args.max_dim, args.cond)
    elapsed = time.monotonic() - start
    for tag, seed, message in failures:
        print(f"FAIL {tag} seed {seed}: {message}")
    print(f"{total - len(failures)}/{total} passed in {elapsed:.1f}s, max residual {worst:.2e}")
    if args.report:
        records = [{"case": t, "seed": s, "message": m} for t, s, m in failures]
        args.report.write_text(json.dumps(records, indent=2))
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
