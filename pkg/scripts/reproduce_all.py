"""Run the three figure reproductions, ideal and with Poisson noise, and write everything under one directory."""
import argparse
from pathlib import Path
import sys

from polarimeter.cli import main as cli_main
from polarimeter.figures import FIGURES


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results", help="output directory")
    parser.add_argument("--counts", type=int, default=1000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--engine", choices=("analytic", "oracle"), default="analytic")
    args = parser.parse_args(argv)
    worst = 0
    for fig in FIGURES:
        for tag, extra in (("ideal", []), ("noisy", ["--counts", str(args.counts), "--seed", str(args.seed)])):
            out = Path(args.out) / fig / tag
            print(f"== {fig} {tag} -> {out}")
            rc = cli_main([f"reproduce-{fig}", "--engine", args.engine, "--out", str(out), *extra])
            worst = max(worst, rc)
    return worst


if __name__ == "__main__":
    sys.exit(main())
