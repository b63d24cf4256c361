"""Seeded experiment runner, evaluation protocols and CSV emission."""

from __future__ import annotations

import csv
import dataclasses
import io
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .core import (
    ExperimentRecord,
    InvalidInputError,
    PUDataset,
    SchemaError,
    UnsupportedOperationError,
    pvn_accuracy,
    split_pu,
)
from .learn import SGDState, TrainConfig, cvir_train, init_model, sgd_epoch, train_error
from .mnist import MnistSpec, mnist17_task
from .mpe import (
    BBEConfig,
    TailCurve,
    TopBinDiagnostics,
    bbe_estimate,
    naive_ratio_estimate,
    scott_estimate,
    top_bin_diagnostics,
)
from .synth import TaskSpec, generate, pvn_eval_set
from .tedn import TEDNConfig, tedn_train

log = logging.getLogger(__name__)

CSV_VERSION = 1
CSV_HEADER = ("version", "method", "seed", "epoch", "alpha_true", "alpha_hat",
              "abs_err", "train_error", "pvn_accuracy")
METHODS = ("bbe", "scott", "naive", "cvir", "pvu", "tedn")
PVU_FAMILY = ("bbe", "scott", "naive", "pvu")
# proposed methods are always reported on the final model
FINAL_MODEL_ONLY = ("cvir", "tedn")
WINDOW = 10
SEED_ENV = "PU_KIT_SEED"


@dataclass(frozen=True)
class ExperimentConfig:
    task: Union[TaskSpec, MnistSpec] = TaskSpec()
    methods: tuple = ("bbe", "tedn")
    seeds: tuple = (0,)
    epochs: int = 50
    eval_size: int = 1000
    train: TrainConfig = TrainConfig()
    bbe: BBEConfig = BBEConfig()
    warm_start_epochs: int = 20
    split_fraction: float = 0.8
    scott_union_bound: bool = False
    output: str = "results.csv"
    jobs: int = 1

    def __post_init__(self):
        if not self.methods:
            raise SchemaError("methods: at least one method is required")
        for m in self.methods:
            if m not in METHODS:
                raise SchemaError(f"methods: unknown method {m!r} (choose from {', '.join(METHODS)})")
        if not self.seeds:
            raise SchemaError("seeds: at least one seed is required")
        if self.epochs < 1:
            raise SchemaError("epochs: must be >= 1")
        if "tedn" in self.methods and not 0 <= self.warm_start_epochs <= self.epochs:
            raise SchemaError("warm_start_epochs: must lie in [0, epochs]")
        if not 0.0 < self.split_fraction < 1.0:
            raise SchemaError("split_fraction: must lie in (0, 1)")

    def with_env_seed(self) -> "ExperimentConfig":
        """Apply the PU_KIT_SEED override: seeds become base, base+1, ..."""
        raw = os.environ.get(SEED_ENV)
        if raw is None or raw == "":
            return self
        try:
            base = int(raw)
        except ValueError:
            raise SchemaError(f"{SEED_ENV}: not an integer: {raw!r}") from None
        return dataclasses.replace(self, seeds=tuple(base + i for i in range(len(self.seeds))))


# ----------------------------------------------------------------- running


def _task_data(config: ExperimentConfig, seed: int) -> tuple[PUDataset, PUDataset]:
    task = dataclasses.replace(config.task, seed=seed)
    if isinstance(task, MnistSpec):
        return mnist17_task(task)
    return generate(task), pvn_eval_set(task, config.eval_size)


def _fixed_length(config: ExperimentConfig, seed: int) -> TrainConfig:
    # every method emits exactly `epochs` rows, so the plateau stop is off
    return dataclasses.replace(config.train, seed=seed, epochs=config.epochs, converge_tol=None)


def _row(method, seed, epoch, alpha_true, alpha_hat, err, acc) -> ExperimentRecord:
    return ExperimentRecord(epoch=epoch, alpha_hat=alpha_hat, abs_err=abs(alpha_hat - alpha_true),
                            train_error=err, pvn_accuracy=acc, method=method, seed=seed,
                            alpha_true=alpha_true)


def _run_pvu_family(config, methods, seed, data, eval_set) -> list[ExperimentRecord]:
    tc = _fixed_length(config, seed)
    split = split_pu(data.without_labels(), config.split_fraction, seed)
    X_p, X_u = split.train.observed()
    H_p, H_u = split.holdout.observed()
    X_eval, y_eval = eval_set.labeled_pvn()
    alpha = data.alpha_true
    model = init_model(tc, data.dim)
    state = SGDState.fresh(model, tc)
    rows = []
    for epoch in range(1, config.epochs + 1):
        sgd_epoch(model, X_p, X_u, tc, state)
        err = train_error(model, X_p, X_u)
        acc = pvn_accuracy(model.score(X_eval), y_eval)
        z_p, z_u = model.score(H_p), model.score(H_u)
        for m in methods:
            if m == "bbe":
                a = bbe_estimate(z_p, z_u, config.bbe).alpha_clamped
            elif m == "scott":
                a = scott_estimate(z_p, z_u, config.bbe.delta, config.scott_union_bound).alpha_clamped
            elif m == "naive":
                a = naive_ratio_estimate(z_p, z_u).alpha_clamped
            else:
                a = float("nan")
            rows.append(_row(m, seed, epoch, alpha, a, err, acc))
    return rows


def _run_cvir(config, seed, data, eval_set) -> list[ExperimentRecord]:
    tc = _fixed_length(config, seed)
    split = split_pu(data.without_labels(), config.split_fraction, seed)
    X_eval, y_eval = eval_set.labeled_pvn()
    alpha = data.alpha_true
    rows = []

    def cb(epoch, model, info):
        acc = pvn_accuracy(model.score(X_eval), y_eval)
        rows.append(_row("cvir", seed, epoch, alpha, alpha, info["train_error"], acc))

    cvir_train(split.train, alpha, tc, callback=cb)
    return rows


def _run_tedn(config, seed, data, eval_set) -> list[ExperimentRecord]:
    tc = _fixed_length(config, seed)
    tcfg = TEDNConfig(warm_start_epochs=config.warm_start_epochs, bbe=config.bbe,
                      split_fraction=config.split_fraction, train=tc,
                      max_epochs=config.epochs - config.warm_start_epochs)
    _, _, trace = tedn_train(data.without_labels(), tcfg, eval_set=eval_set)
    alpha = data.alpha_true
    return [_row("tedn", seed, r.epoch, alpha, r.alpha_hat, r.train_error, r.pvn_accuracy)
            for r in trace.rows]


def run_seed(config: ExperimentConfig, seed: int) -> list[ExperimentRecord]:
    data, eval_set = _task_data(config, seed)
    rows = []
    family = [m for m in config.methods if m in PVU_FAMILY]
    if family:
        rows += _run_pvu_family(config, family, seed, data, eval_set)
    if "cvir" in config.methods:
        rows += _run_cvir(config, seed, data, eval_set)
    if "tedn" in config.methods:
        rows += _run_tedn(config, seed, data, eval_set)
    return rows


def _sort_key(r: ExperimentRecord):
    return (r.alpha_true, r.method, r.seed, r.epoch)


def collect(config: ExperimentConfig) -> list[ExperimentRecord]:
    """All records for ``config``, sorted by (alpha_true, method, seed, epoch)."""
    config = config.with_env_seed()
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            parts = list(pool.map(run_seed, [config] * len(config.seeds), config.seeds))
    else:
        parts = [run_seed(config, s) for s in config.seeds]
    return sorted((r for p in parts for r in p), key=_sort_key)


def run_experiment(config: ExperimentConfig, output: Optional[str] = None) -> list[ExperimentRecord]:
    records = collect(config)
    write_records_csv(records, output or config.output)
    return records


def sweep_alpha(config: ExperimentConfig, alphas: Sequence[float],
                output: Optional[str] = None) -> list[ExperimentRecord]:
    """One experiment per mixture proportion, emitted as a single long-format CSV."""
    alphas = list(alphas)
    if not alphas:
        raise SchemaError("alphas: at least one value is required")
    for a in alphas:
        if not 0.0 <= a <= 1.0:
            raise SchemaError(f"alphas: {a} outside [0, 1]")
    records = []
    for a in alphas:
        task = dataclasses.replace(config.task, alpha=a)
        records += collect(dataclasses.replace(config, task=task))
    records.sort(key=_sort_key)
    write_records_csv(records, output or config.output)
    return records


# --------------------------------------------------------------------- csv


def fmt(x) -> str:
    """Six significant digits; integers as-is."""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    return f"{x:.6g}"


def records_to_csv(records: Iterable[ExperimentRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in records:
        w.writerow([CSV_VERSION, r.method, r.seed, r.epoch, fmt(r.alpha_true), fmt(r.alpha_hat),
                    fmt(r.abs_err), fmt(r.train_error), fmt(r.pvn_accuracy)])
    return buf.getvalue()


def write_records_csv(records, path) -> None:
    Path(path).write_text(records_to_csv(records))


def read_records_csv(path_or_text) -> list[ExperimentRecord]:
    text = path_or_text
    if "\n" not in str(path_or_text):
        text = Path(path_or_text).read_text()
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_HEADER:
        raise SchemaError(f"unexpected CSV header {reader.fieldnames}")
    out = []
    for row in reader:
        if int(row["version"]) != CSV_VERSION:
            raise SchemaError(f"unsupported CSV version {row['version']}")
        out.append(ExperimentRecord(
            epoch=int(row["epoch"]), alpha_hat=float(row["alpha_hat"]), abs_err=float(row["abs_err"]),
            train_error=float(row["train_error"]), pvn_accuracy=float(row["pvn_accuracy"]),
            method=row["method"], seed=int(row["seed"]), alpha_true=float(row["alpha_true"])))
    return out


# --------------------------------------------------------------- protocols


def _ordered(records: Sequence[ExperimentRecord]) -> list[ExperimentRecord]:
    if not records:
        raise InvalidInputError("no records")
    keys = {(r.method, r.seed, r.alpha_true) for r in records}
    if len(keys) > 1:
        raise InvalidInputError("records must come from a single (method, seed, alpha) run")
    return sorted(records, key=lambda r: r.epoch)


def oracle_early_stop(records: Sequence[ExperimentRecord], column: str = "pvn_accuracy") -> float:
    """Mean ``column`` over the 10 epochs ending at the best-accuracy epoch.

    Only valid for baselines; proposed methods are reported on their final model.
    """
    rows = _ordered(records)
    if rows[0].method in FINAL_MODEL_ONLY:
        raise UnsupportedOperationError(
            f"oracle early stopping is not applied to {rows[0].method!r}; use final_model_report")
    acc = np.array([r.pvn_accuracy for r in rows])
    if np.all(np.isnan(acc)):
        raise InvalidInputError("records carry no pvn_accuracy")
    best = int(np.nanargmax(acc))
    vals = np.array([getattr(r, column) for r in rows[max(0, best - WINDOW + 1): best + 1]])
    return float(np.mean(vals))


def final_model_report(records: Sequence[ExperimentRecord], column: str = "pvn_accuracy") -> float:
    """Mean ``column`` over the last 10 epochs (fewer if the run is shorter)."""
    rows = _ordered(records)
    return float(np.mean([getattr(r, column) for r in rows[-WINDOW:]]))


@dataclass(frozen=True)
class SummaryRow:
    alpha_true: float
    method: str
    protocol: str
    n_seeds: int
    accuracy_mean: float
    accuracy_std: float
    abs_err_mean: float
    abs_err_std: float


def summarize(records: Sequence[ExperimentRecord]) -> list[SummaryRow]:
    """Per (alpha, method): final-model or oracle-early-stopped numbers, mean/std over seeds."""
    groups: dict = {}
    for r in records:
        groups.setdefault((r.alpha_true, r.method), {}).setdefault(r.seed, []).append(r)
    out = []
    for (alpha, method), by_seed in sorted(groups.items()):
        oracle = method not in FINAL_MODEL_ONLY
        report = oracle_early_stop if oracle else final_model_report
        acc = np.array([report(v, "pvn_accuracy") for _, v in sorted(by_seed.items())])
        err = np.array([report(v, "abs_err") for _, v in sorted(by_seed.items())])
        out.append(SummaryRow(alpha, method, "oracle" if oracle else "final", len(acc),
                              float(acc.mean()), float(acc.std()),
                              float(err.mean()), float(err.std())))
    return out


def summary_to_csv(rows: Sequence[SummaryRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    names = [f.name for f in dataclasses.fields(SummaryRow)]
    w.writerow(names)
    for r in rows:
        w.writerow([fmt(getattr(r, n)) if not isinstance(getattr(r, n), str) else getattr(r, n)
                    for n in names])
    return buf.getvalue()


# --------------------------------------------------------------- plot data


PLOT_KINDS = ("epochwise", "ucb_curve", "purity_curve", "rate_loglog")


def _table(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([v if isinstance(v, str) else fmt(v) for v in row])
    return buf.getvalue()


def emit_plot_data(kind: str, data, path=None) -> str:
    """Columnar CSV for one figure type; ``data`` must match ``kind``.

    epochwise    -- list of ExperimentRecord
    ucb_curve    -- TailCurve (from ``bbe_curve``)
    purity_curve -- TopBinDiagnostics, or ``(z_u, hidden_labels)``
    rate_loglog  -- iterable of ``(n, mean_abs_err)``
    """
    if kind not in PLOT_KINDS:
        raise SchemaError(f"unknown plot kind {kind!r}")
    if kind == "epochwise":
        if not isinstance(data, (list, tuple)) or not all(isinstance(r, ExperimentRecord) for r in data):
            raise SchemaError("epochwise plot data needs ExperimentRecord rows")
        groups: dict = {}
        for r in data:
            groups.setdefault((r.alpha_true, r.method, r.epoch), []).append(r)
        rows = []
        for (alpha, method, epoch), rs in sorted(groups.items()):
            rows.append([method, epoch, alpha, np.mean([r.alpha_hat for r in rs]),
                         np.mean([r.abs_err for r in rs]), np.mean([r.pvn_accuracy for r in rs]), len(rs)])
        text = _table(["method", "epoch", "alpha_true", "alpha_hat", "abs_err", "pvn_accuracy", "n_seeds"], rows)
    elif kind == "ucb_curve":
        if not isinstance(data, TailCurve):
            raise SchemaError("ucb_curve plot data needs a TailCurve from bbe_curve")
        text = _table(["c", "q_u_hat", "q_p_hat", "ratio", "ucb"],
                      zip(data.c, data.q_u, data.q_p, data.ratio, data.objective))
    elif kind == "purity_curve":
        if isinstance(data, tuple) and len(data) == 2:
            data = top_bin_diagnostics(*data)
        if not isinstance(data, TopBinDiagnostics):
            raise SchemaError("purity_curve plot data needs TopBinDiagnostics")
        text = _table(["c", "bin_size", "purity"], data.rows())
    else:
        try:
            pairs = [(float(n), float(e)) for n, e in data]
        except (TypeError, ValueError):
            raise SchemaError("rate_loglog plot data needs (n, mean_abs_err) pairs") from None
        if any(n <= 0 or e <= 0 for n, e in pairs):
            raise SchemaError("rate_loglog needs positive n and error")
        text = _table(["log_n", "log_mean_abs_err"], [(math.log(n), math.log(e)) for n, e in pairs])
    if path is not None:
        Path(path).write_text(text)
    return text


def loglog_slope(ns, errors) -> float:
    """Least-squares slope of log(error) against log(n)."""
    return float(np.polyfit(np.log(np.asarray(ns, float)), np.log(np.asarray(errors, float)), 1)[0])
