"""Sweep the true mixture proportion for a bench config and print the summary."""

import argparse
import sys

from pu_kit.bench import summarize, summary_to_csv, sweep_alpha
from pu_kit.config import load_config


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("config")
    ap.add_argument("--alphas", default="0.0,0.25,0.5,0.75")
    ap.add_argument("--output", default="alpha_sweep.csv")
    args = ap.parse_args()
    records = sweep_alpha(load_config(args.config), [float(a) for a in args.alphas.split(",")], args.output)
    sys.stdout.write(summary_to_csv(summarize(records)))


if __name__ == "__main__":
    main()
