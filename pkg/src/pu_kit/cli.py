"""Command line entry point: estimate, train, bench, sweep, plotdata.

Exit codes: 0 success, 2 config error, 3 data error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import logging
import sys
from pathlib import Path

import numpy as np

from . import bench
from .config import load_config
from .core import InvalidInputError, PUKitError, SchemaError
from .learn import cvir_train
from .mnist import MnistSpec, MnistUnavailable
from .mpe import BBEConfig, bbe_curve, bbe_estimate, naive_ratio_estimate, scott_estimate

log = logging.getLogger("pu_kit")

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4


def read_scores(path) -> np.ndarray:
    try:
        lines = Path(path).read_text().split()
    except OSError as exc:
        raise InvalidInputError(f"cannot read {path}: {exc}") from None
    try:
        return np.array([float(t) for t in lines])
    except ValueError as exc:
        raise InvalidInputError(f"{path}: {exc}") from None


def _estimate(args) -> int:
    z_p, z_u = read_scores(args.positive), read_scores(args.unlabeled)
    cfg = BBEConfig(args.delta, args.gamma)
    methods = ["bbe", "scott", "naive"] if args.method == "all" else [args.method]
    print("method,alpha_hat,alpha_clamped,c_hat,q_p_at_c,q_u_at_c,objective")
    for m in methods:
        if m == "bbe":
            est = bbe_estimate(z_p, z_u, cfg)
        elif m == "scott":
            est = scott_estimate(z_p, z_u, args.delta, args.union_bound)
        else:
            est = naive_ratio_estimate(z_p, z_u)
        vals = [est.alpha_hat, est.alpha_clamped, est.c_hat, est.q_p_at_c, est.q_u_at_c, est.ucb_value]
        print(",".join([m] + [bench.fmt(v) for v in vals]))
    if args.ucb_curve:
        bench.emit_plot_data("ucb_curve", bbe_curve(z_p, z_u, cfg), args.ucb_curve)
    return EXIT_OK


def _config(args):
    cfg = load_config(args.config)
    overrides = {}
    if getattr(args, "output", None):
        overrides["output"] = args.output
    if getattr(args, "jobs", None):
        overrides["jobs"] = args.jobs
    if getattr(args, "seed", None) is not None:
        overrides["seeds"] = (args.seed,)
    if getattr(args, "warm_start", None) is not None:
        overrides["warm_start_epochs"] = args.warm_start
    return dataclasses.replace(cfg, **overrides)


def _write_summary(records, output):
    text = bench.summary_to_csv(bench.summarize(records))
    Path(str(output) + ".summary.csv").write_text(text)
    sys.stdout.write(text)


def _train(args) -> int:
    cfg = dataclasses.replace(_config(args), methods=(args.method,))
    records = bench.run_experiment(cfg)
    if args.save_model:
        # refit the final model of the first seed for serialisation
        seed = cfg.with_env_seed().seeds[0]
        data, _ = bench._task_data(cfg, seed)
        tc = bench._fixed_length(cfg, seed)
        if args.method == "cvir":
            from .core import split_pu
            split = split_pu(data.without_labels(), cfg.split_fraction, seed)
            model = cvir_train(split.train, data.alpha_true, tc)
        else:
            from .tedn import TEDNConfig, tedn_train
            model, _, _ = tedn_train(data.without_labels(), TEDNConfig(
                cfg.warm_start_epochs, cfg.bbe, cfg.split_fraction, tc, cfg.epochs - cfg.warm_start_epochs))
        Path(args.save_model).write_text(model.to_json())
    _write_summary(records, cfg.output)
    return EXIT_OK


def _bench(args) -> int:
    cfg = _config(args)
    try:
        records = bench.run_experiment(cfg)
    except MnistUnavailable as exc:
        log.warning("skipping MNIST experiment: %s", exc)
        return EXIT_OK
    _write_summary(records, cfg.output)
    return EXIT_OK


def _sweep(args) -> int:
    cfg = _config(args)
    try:
        alphas = [float(a) for a in args.alphas.split(",") if a.strip()]
    except ValueError:
        raise SchemaError(f"alphas: cannot parse {args.alphas!r}") from None
    records = bench.sweep_alpha(cfg, alphas)
    _write_summary(records, cfg.output)
    return EXIT_OK


def _read_columns(path, required):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InvalidInputError(f"cannot read {path}: {exc}") from None
    reader = csv.DictReader(text.splitlines())
    missing = [c for c in required if c not in (reader.fieldnames or [])]
    if missing:
        raise SchemaError(f"{path}: missing columns {missing}")
    return list(reader)


def _plotdata(args) -> int:
    kind = args.kind
    if kind == "epochwise":
        if not args.input:
            raise SchemaError("epochwise needs --input (a bench CSV)")
        data = bench.read_records_csv(args.input)
    elif kind == "ucb_curve":
        if not (args.positive and args.unlabeled):
            raise SchemaError("ucb_curve needs --positive and --unlabeled score files")
        data = bbe_curve(read_scores(args.positive), read_scores(args.unlabeled), BBEConfig(args.delta, args.gamma))
    elif kind == "purity_curve":
        if not args.unlabeled:
            raise SchemaError("purity_curve needs --unlabeled scores")
        labels = read_scores(args.labels).astype(int) if args.labels else None
        data = (read_scores(args.unlabeled), labels)
    else:
        if not args.input:
            raise SchemaError("rate_loglog needs --input with columns n,abs_err")
        rows = _read_columns(args.input, ["n", "abs_err"])
        by_n: dict = {}
        for r in rows:
            by_n.setdefault(float(r["n"]), []).append(float(r["abs_err"]))
        data = [(n, float(np.mean(v))) for n, v in sorted(by_n.items())]
    text = bench.emit_plot_data(kind, data, args.output)
    if args.output is None:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pu-kit", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("estimate", help="mixture proportion from two score files")
    e.add_argument("--positive", required=True, help="positive scores, one per line")
    e.add_argument("--unlabeled", required=True, help="unlabeled scores, one per line")
    e.add_argument("--method", choices=["bbe", "scott", "naive", "all"], default="bbe")
    e.add_argument("--delta", type=float, default=0.1)
    e.add_argument("--gamma", type=float, default=0.01)
    e.add_argument("--union-bound", action="store_true", help="Scott: invert at delta/n")
    e.add_argument("--ucb-curve", help="also write the BBE objective curve to this CSV")
    e.set_defaults(func=_estimate)

    for name, func, helptext in (("train", _train, "train one classifier (cvir or tedn)"),
                                 ("bench", _bench, "run a full experiment config"),
                                 ("sweep", _sweep, "repeat an experiment over mixture proportions")):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("--config", required=True)
        s.add_argument("--output")
        s.add_argument("--jobs", type=int)
        s.add_argument("--warm-start", type=int, dest="warm_start", help="override warm-start epochs W")
        if name == "train":
            s.add_argument("--method", choices=["cvir", "tedn"], default="tedn")
            s.add_argument("--seed", type=int)
            s.add_argument("--save-model", help="write final model parameters as JSON")
        if name == "sweep":
            s.add_argument("--alphas", required=True, help="comma separated, e.g. 0.25,0.5,0.75")
        s.set_defaults(func=func)

    d = sub.add_parser("plotdata", help="emit figure data as CSV")
    d.add_argument("kind", choices=bench.PLOT_KINDS)
    d.add_argument("--input")
    d.add_argument("--positive")
    d.add_argument("--unlabeled")
    d.add_argument("--labels", help="hidden labels (+1/-1), one per line")
    d.add_argument("--delta", type=float, default=0.1)
    d.add_argument("--gamma", type=float, default=0.01)
    d.add_argument("--output")
    d.set_defaults(func=_plotdata)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except SchemaError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except PUKitError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
