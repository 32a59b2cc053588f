"""last-plots command line entry point."""

from __future__ import annotations

import argparse

from .figures import KINDS, FigureSpec, render


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="last-plots",
                                 description="render figures from sweep CSV files")
    sub = ap.add_subparsers(dest="command", required=True)
    pp = sub.add_parser("plot", help="render one figure")
    pp.add_argument("--kind", required=True, choices=KINDS)
    pp.add_argument("--in", dest="inputs", required=True, nargs="+",
                    help="input CSV path(s)")
    pp.add_argument("--out", required=True, help="output image path")
    pp.add_argument("--labels", nargs="*", default=[])
    pp.add_argument("--log-x", action="store_true")
    pp.add_argument("--linear-y", action="store_true",
                    help="use a linear y axis (default is log)")
    pp.add_argument("--floor", type=float, default=None,
                    help="2MT complexity floor to annotate")
    args = ap.parse_args(argv)

    spec = FigureSpec(inputs=args.inputs, kind=args.kind, output=args.out,
                      labels=args.labels, log_x=args.log_x,
                      log_y=not args.linear_y, complexity_floor=args.floor)
    render(spec)
    print(f"wrote {args.out} and {args.out}.json")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
