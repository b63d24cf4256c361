"""Alternating estimate/discard/train loop on a train/hold-out split."""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import (
    DEFAULT_SPLIT_FRACTION,
    ExperimentRecord,
    InvalidInputError,
    PUDataset,
    UnsupportedOperationError,
    pvn_accuracy,
    split_pu,
)
from .learn import (
    Classifier,
    ConvergenceMonitor,
    SGDState,
    TrainConfig,
    init_model,
    model_from_record,
    rank_and_discard,
    sgd_epoch,
    train_error,
)
from .mpe import BBEConfig, MixtureEstimate, bbe_estimate

log = logging.getLogger(__name__)

STALL_EPOCHS = 25
FINAL_WINDOW = 10


@dataclass(frozen=True)
class TEDNConfig:
    warm_start_epochs: int = 20
    bbe: BBEConfig = BBEConfig()
    split_fraction: float = DEFAULT_SPLIT_FRACTION
    train: TrainConfig = TrainConfig()
    max_epochs: int = 100

    def __post_init__(self):
        if self.warm_start_epochs < 0 or self.max_epochs < 0:
            raise InvalidInputError("epoch counts must be >= 0")
        if not 0.0 < self.split_fraction < 1.0:
            raise InvalidInputError("split_fraction must lie in (0, 1)")


@dataclass
class TraceRow:
    epoch: int
    phase: str  # "warm" or "ted"
    alpha_hat: float
    c_hat: float
    train_error: float
    pvn_accuracy: Optional[float] = None
    keep_fraction: float = 1.0


@dataclass
class TEDNTrace:
    rows: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)  # parameter records, if requested

    def __len__(self):
        return len(self.rows)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows], dtype=float)


def _evaluate(model: Classifier, eval_set: Optional[PUDataset]) -> Optional[float]:
    if eval_set is None:
        return None
    X, y = eval_set.labeled_pvn()
    return pvn_accuracy(model.score(X), y)


def tedn_train(data: PUDataset, config: TEDNConfig = TEDNConfig(),
               model: Optional[Classifier] = None, eval_set: Optional[PUDataset] = None,
               keep_snapshots: bool = False) -> tuple[Classifier, MixtureEstimate, TEDNTrace]:
    """Warm start, then alternate BBE on the hold-out split with discard-and-train.

    Every epoch re-scores the hold-out split with the current model.  Warm-up
    epochs train on all unlabeled data as negatives; their BBE estimates are
    recorded in the trace but not used.  The returned estimate averages the
    last ``FINAL_WINDOW`` post-warm-up estimates.
    """
    if data.n_p == 0 or data.n_u == 0:
        raise InvalidInputError("need positive and unlabeled samples")
    tc = config.train
    split = split_pu(data.without_labels(), config.split_fraction, tc.seed)
    X1_p, X1_u = split.train.observed()
    X2_p, X2_u = split.holdout.observed()
    model = model if model is not None else init_model(tc, data.dim)
    state = SGDState.fresh(model, tc)
    trace = TEDNTrace()

    def estimate() -> MixtureEstimate:
        return bbe_estimate(model.score(X2_p), model.score(X2_u), config.bbe)

    def record(epoch, phase, est, err, keep):
        trace.rows.append(TraceRow(epoch, phase, est.alpha_clamped, est.c_hat, err,
                                   _evaluate(model, eval_set), keep))
        if keep_snapshots:
            trace.snapshots.append(model.to_record())

    for epoch in range(1, config.warm_start_epochs + 1):
        sgd_epoch(model, X1_p, X1_u, tc, state)
        record(epoch, "warm", estimate(), train_error(model, X1_p, X1_u), 1.0)

    cap = 1.0 - 1.0 / len(X1_u)
    monitor = ConvergenceMonitor(tc.converge_tol, tc.converge_window)
    estimates: list[MixtureEstimate] = []
    stall = 0
    for i in range(1, config.max_epochs + 1):
        est = estimate()
        estimates.append(est)
        alpha = min(est.alpha_clamped, cap)
        stall = stall + 1 if est.alpha_clamped >= 1.0 else 0
        if stall == STALL_EPOCHS + 1:
            msg = f"alpha_hat stuck at 1 for more than {STALL_EPOCHS} epochs (epoch {i})"
            trace.warnings.append(msg)
            log.warning(msg)
        X1_n = rank_and_discard(model, X1_u, 1.0 - alpha)
        sgd_epoch(model, X1_p, X1_n, tc, state)
        err = train_error(model, X1_p, X1_n)
        record(config.warm_start_epochs + i, "ted", est, err, 1.0 - alpha)
        if monitor.update(err):
            break

    if estimates:
        tail = estimates[-FINAL_WINDOW:]
        final = dataclasses.replace(
            tail[-1],
            alpha_hat=float(np.mean([e.alpha_clamped for e in tail])),
            method="tedn",
        )
    else:
        final = dataclasses.replace(estimate(), method="tedn")
    return model, final, trace


def evaluate_epochwise(source, eval_set: PUDataset, method: str = "tedn", seed: int = 0,
                       alpha_true: Optional[float] = None) -> list[ExperimentRecord]:
    """One record per epoch from a trace with snapshots or a list of models.

    ``alpha_true`` defaults to the eval set's ``alpha_true``; note that a
    balanced PvN eval set carries 0.5, so pass the task's value explicitly.
    """
    if eval_set.hidden_labels is None:
        raise UnsupportedOperationError("epoch-wise evaluation needs a labelled eval set")
    X, y = eval_set.labeled_pvn()
    if alpha_true is None:
        alpha_true = eval_set.alpha_true if eval_set.alpha_true is not None else float("nan")
    if isinstance(source, TEDNTrace):
        if len(source.snapshots) != len(source.rows):
            raise InvalidInputError("trace has no per-epoch snapshots; run with keep_snapshots=True")
        models = [model_from_record(r) for r in source.snapshots]
        rows = source.rows
    else:
        models = list(source)
        rows = [None] * len(models)
    out = []
    for i, (m, row) in enumerate(zip(models, rows), start=1):
        a_hat = row.alpha_hat if row is not None else float("nan")
        out.append(ExperimentRecord(
            epoch=row.epoch if row is not None else i,
            alpha_hat=a_hat,
            abs_err=abs(a_hat - alpha_true),
            train_error=row.train_error if row is not None else float("nan"),
            pvn_accuracy=pvn_accuracy(m.score(X), y),
            method=method,
            seed=seed,
            alpha_true=alpha_true,
        ))
    return out
