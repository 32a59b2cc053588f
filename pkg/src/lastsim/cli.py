"""Command-line front end: sweep, analyze, validate."""

from __future__ import annotations

import argparse
import json
import sys

from .analysis import (ExponentProfile, l_out_theoretical)
from .harness import ExperimentConfig, results_csv, run_sweep, tail_csv
from .selfcheck import run_all


def _fmt(v) -> str:
    return f"{v:.17g}"


def cmd_sweep(args) -> int:
    with open(args.config) as fh:
        cfg = ExperimentConfig.from_dict(json.load(fh))
    sweep = run_sweep(cfg, workers=args.workers)
    with open(args.out, "w") as fh:
        fh.write(results_csv(sweep))
    if args.tail_out:
        with open(args.tail_out, "w") as fh:
            fh.write(tail_csv(sweep))
    print(f"wrote {args.out}" + (f" and {args.tail_out}" if args.tail_out else ""))
    return 0


def cmd_analyze(args) -> int:
    rhos = [10.0 ** (db / 10.0) for db in args.rho_grid_db]
    header = ["M", "N", "T", "r", "d_out", "l_r", "r0"]
    header += [f"L_out(rho={_fmt(db)}dB)" for db in args.rho_grid_db]
    lines = [",".join(header)]
    for r in range(0, min(args.M, args.N) + 1):
        prof = ExponentProfile.build(args.M, args.N, args.T, r)
        row = [str(prof.M), str(prof.N), str(prof.T), str(prof.r),
               _fmt(prof.d_out), _fmt(prof.l_r), str(prof.r0)]
        row += [_fmt(l_out_theoretical(args.M, args.N, args.T, r, rho))
                for rho in rhos]
        lines.append(",".join(row))
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_validate(_args) -> int:
    failures = 0
    for name, ok, detail in run_all():
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        failures += 0 if ok else 1
    return 1 if failures else 0


def _csv_floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="lastsim",
                                 description="LAST coded MIMO sphere-decoding simulator")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("sweep", help="run a Monte-Carlo SNR sweep")
    sp.add_argument("--config", required=True, help="experiment config JSON")
    sp.add_argument("--out", required=True, help="results CSV path")
    sp.add_argument("--tail-out", default=None, help="tail-distribution CSV path")
    sp.add_argument("--workers", type=int, default=1)
    sp.set_defaults(fn=cmd_sweep)

    ap_an = sub.add_parser("analyze", help="print closed-form exponent table")
    ap_an.add_argument("--M", type=int, required=True)
    ap_an.add_argument("--N", type=int, required=True)
    ap_an.add_argument("--T", type=int, required=True)
    ap_an.add_argument("--rho-grid-db", type=_csv_floats, default=[10.0, 20.0, 30.0])
    ap_an.add_argument("--out", default=None)
    ap_an.set_defaults(fn=cmd_analyze)

    ap_v = sub.add_parser("validate", help="run the quick oracle suites")
    ap_v.set_defaults(fn=cmd_validate)

    args = ap.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    raise SystemExit(main())
