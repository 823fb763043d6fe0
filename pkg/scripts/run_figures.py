#!/usr/bin/env python3
"""Regenerate all four figure sweeps as CSV files.

Usage: python3 scripts/run_figures.py [--outdir results] [--slots 1000000] [--seed 1] [--workers 4]
"""
import argparse
import pathlib
import sys
import time

from adbsim import cli


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--outdir", default="results")
    ap.add_argument("--slots", type=int, default=10**6)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--only", nargs="*", default=["fig3", "fig4", "fig5", "fig6"])
    args = ap.parse_args(argv)

    outdir = pathlib.Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    for fig in args.only:
        t0 = time.perf_counter()
        out = outdir / f"{fig}.csv"
        code = cli.main([fig, "--slots", str(args.slots), "--seed", str(args.seed),
                         "--workers", str(args.workers), "--out", str(out)])
        print(f"{fig}: exit {code}, {time.perf_counter() - t0:.0f}s -> {out}")
        if code:
            return code
    return 0


if __name__ == "__main__":
    sys.exit(main())
