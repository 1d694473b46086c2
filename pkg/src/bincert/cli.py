"""Command-line front end.

Four subcommands: `certify` runs the Monte-Carlo pipeline over a graph
file, `verify` replays the enumeration ground-truth checks, `curve`
recomputes an accuracy curve from a records file, and `region-probs`
dumps the per-region probability table for one (n, k, beta).
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import Optional, Sequence

from .bitspace import NoiseSpec
from .harness import (
    EXIT_OK,
    EXIT_PARSE,
    EXIT_RUNTIME,
    CertifyConfig,
    run_certify_command,
    write_curve_csv,
)
from .numerics import resolve_backend
from .oracle import build_worst_case, enumerate_region_probs
from .regions import prob_x_region, prob_y_region, ranked_regions

__all__ = ["main"]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bincert",
        description="Certified perturbation sizes for smoothed binary-vector classifiers",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    cert = sub.add_parser("certify", help="certify test items of a graph file")
    cert.add_argument("--graph", required=True, help="edge-list file")
    cert.add_argument("--out", required=True, help="output directory")
    cert.add_argument("--task", choices=["node", "graph"], default="node")
    cert.add_argument("--classifier", default="degree-threshold:1",
                      help="toy classifier name[:arg], or proto:COMMAND")
    cert.add_argument("--beta", default="0.7", help="bit-keep probability (decimal or fraction)")
    cert.add_argument("--alpha", type=float, default=0.001)
    cert.add_argument("--samples", type=int, default=10_000)
    cert.add_argument("--seed", type=int, default=0)
    cert.add_argument("--backend", choices=["exact", "float", "auto"], default="auto")
    cert.add_argument("--labels", default=None, help="node labels file (id label per line)")
    cert.add_argument("--nodes", default=None, help="file listing test node ids")
    cert.add_argument("--batch-size", type=int, default=128)
    cert.add_argument("--num-labels", type=int, default=2)
    cert.add_argument("--timeout", type=float, default=30.0,
                      help="per-batch protocol timeout, seconds")

    ver = sub.add_parser("verify", help="run the enumeration ground-truth checks")
    ver.add_argument("--max-n", type=int, default=8)
    ver.add_argument("--grid", default="3/5,7/10,4/5",
                     help="comma-separated beta values")

    cur = sub.add_parser("curve", help="accuracy curve from a records file")
    cur.add_argument("--records", required=True, help="records.jsonl from certify")
    cur.add_argument("--out", required=True, help="output CSV path")
    cur.add_argument("--max-size", type=int, default=None,
                     help="largest size to tabulate (default: largest n in records)")

    reg = sub.add_parser("region-probs", help="dump the region probability table")
    reg.add_argument("--n", type=int, required=True)
    reg.add_argument("--k", type=int, required=True)
    reg.add_argument("--beta", required=True)
    reg.add_argument("--backend", choices=["exact", "float", "auto"], default="exact")
    reg.add_argument("--enumerate", action="store_true",
                     help="cross-check against exhaustive enumeration (n <= 20)")
    return parser


def _run_verify(max_n: int, grid: str) -> int:
    try:
        betas = [Fraction(tok.strip()) for tok in grid.split(",") if tok.strip()]
        if not betas or any(not 0 < b < 1 for b in betas):
            raise ValueError("beta grid must contain values strictly between 0 and 1")
        if max_n < 1:
            raise ValueError("--max-n must be positive")
    except (ValueError, ZeroDivisionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE

    failures = 0
    checked = 0
    try:
        for beta in betas:
            for n in range(1, max_n + 1):
                for k in range(0, n + 1):
                    enum = enumerate_region_probs(n, k, beta)
                    x_total = sum(x for x, _ in enum.values())
                    y_total = sum(y for _, y in enum.values())
                    ok = x_total == 1 and y_total == 1
                    base = beta / (1 - beta)
                    for m, (x, y) in enum.items():
                        checked += 1
                        if prob_x_region(n, k, beta, m) != x:
                            ok = False
                        if prob_y_region(n, k, beta, m) != y:
                            ok = False
                        if x != base**m * y:
                            ok = False
                    if not ok:
                        failures += 1
                        print(f"FAIL region probabilities n={n} k={k} beta={beta}")
        # tightness spot check on a tiny fixed grid
        for pa, pb in [(Fraction(3, 4), Fraction(1, 4)), (Fraction(9, 10), Fraction(1, 10))]:
            wc = build_worst_case(6, 2, Fraction(7, 10), pa, pb, 2)
            if wc.x_distribution()[0] != pa:
                failures += 1
                print(f"FAIL worst-case mass pa={pa}")
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME

    if failures:
        print(f"verify: {failures} failures over {checked} region checks")
        return 1
    print(f"verify: OK ({checked} region checks, max n {max_n})")
    return EXIT_OK


def _run_curve(records_path: str, out_path: str, max_size: Optional[int]) -> int:
    try:
        rows_in = []
        with open(records_path, "r", encoding="utf-8") as handle:
            for lineno, raw in enumerate(handle, start=1):
                line = raw.strip()
                if not line:
                    continue
                try:
                    rows_in.append(json.loads(line))
                except json.JSONDecodeError as exc:
                    raise ValueError(f"{records_path}:{lineno}: bad record: {exc}")
        if not rows_in:
            raise ValueError(f"{records_path}: no records")
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE

    try:
        certified = [
            int(rec["k_certified"])
            for rec in rows_in
            if rec.get("outcome") == "certificate" and rec.get("correct")
        ]
        if max_size is not None:
            top = max_size
        else:
            dims = [int(rec["n"]) for rec in rows_in if "n" in rec]
            top = max(dims, default=max(certified, default=0))
        total = len(rows_in)
        rows = []
        for k in range(0, top + 1):
            hits = sum(1 for kc in certified if kc >= k)
            rows.append((k, hits / total))
        write_curve_csv(rows, out_path)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"curve with {len(rows)} sizes written to {out_path}")
    return EXIT_OK


def _run_region_probs(n: int, k: int, beta: str, backend_name: str, check: bool) -> int:
    try:
        spec = NoiseSpec.from_string(beta)
        backend = resolve_backend(backend_name, n)
        table = ranked_regions(n, k, spec.beta, backend)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE

    try:
        print(f"n={n} k={k} beta={spec.beta} backend={backend.mode}")
        print("m\tPr(X in R(m))\tPr(Y in R(m))")
        for entry in table.entries:
            if entry.empty:
                continue
            if backend.is_exact:
                print(f"{entry.m}\t{entry.prob_x}\t{entry.prob_y}")
            else:
                print(
                    f"{entry.m}\t[{entry.prob_x.lo!r}, {entry.prob_x.hi!r}]"
                    f"\t[{entry.prob_y.lo!r}, {entry.prob_y.hi!r}]"
                )
        if check:
            enum = enumerate_region_probs(n, k, spec.beta)
            mism = 0
            for m, (x, y) in enum.items():
                if prob_x_region(n, k, spec.beta, m) != x or prob_y_region(
                    n, k, spec.beta, m
                ) != y:
                    mism += 1
            if mism:
                print(f"enumeration check: {mism} mismatches")
                return 1
            print("enumeration check: OK")
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad usage, 0 on --help; pass both through
        return int(exc.code or 0)

    if args.command == "certify":
        config = CertifyConfig(
            graph=args.graph,
            out=args.out,
            task=args.task,
            classifier=args.classifier,
            beta=args.beta,
            alpha=args.alpha,
            samples=args.samples,
            seed=args.seed,
            backend=args.backend,
            labels=args.labels,
            nodes=args.nodes,
            batch_size=args.batch_size,
            num_labels=args.num_labels,
            timeout=args.timeout,
        )
        return run_certify_command(config)
    if args.command == "verify":
        return _run_verify(args.max_n, args.grid)
    if args.command == "curve":
        return _run_curve(args.records, args.out, args.max_size)
    if args.command == "region-probs":
        return _run_region_probs(args.n, args.k, args.beta, args.backend, args.enumerate)
    parser.error(f"unknown command {args.command!r}")
    return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
