"""Mean |alpha_hat - alpha| of BBE on the anchor task as n grows.

Writes rate_loglog plot data and prints the fitted log-log slope.
"""

import argparse

import numpy as np

from pu_kit.bench import emit_plot_data, loglog_slope
from pu_kit.mpe import BBEConfig, bbe_estimate
from pu_kit.synth import anchor_score, gen_anchor_task


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--ns", default="100,1000,10000,100000")
    ap.add_argument("--seeds", type=int, default=30)
    ap.add_argument("--alpha", type=float, default=0.5)
    ap.add_argument("--gamma-margin", type=float, default=0.3)
    ap.add_argument("--delta", type=float, default=0.1)
    ap.add_argument("--output", default="rate_loglog.csv")
    args = ap.parse_args()

    ns = [int(n) for n in args.ns.split(",")]
    cfg = BBEConfig(delta=args.delta)
    pairs = []
    for n in ns:
        errs = []
        for s in range(args.seeds):
            d = gen_anchor_task(args.gamma_margin, args.alpha, n, n, seed=s)
            est = bbe_estimate(anchor_score(d.positives), anchor_score(d.unlabeled), cfg)
            errs.append(abs(est.alpha_hat - args.alpha))
        pairs.append((n, float(np.mean(errs))))
        print(f"n={n:>7d}  mean abs err {pairs[-1][1]:.5f}")
    emit_plot_data("rate_loglog", pairs, args.output)
    print(f"log-log slope {loglog_slope(*zip(*pairs)):.3f} (wrote {args.output})")


if __name__ == "__main__":
    main()
