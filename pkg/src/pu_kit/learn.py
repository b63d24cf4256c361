"""Scoring models, momentum SGD, and the PvU / CVIR training loops."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import expit

from .core import DEFAULT_THRESHOLD, InvalidInputError, PUDataset, TrainingDivergence

LOSS_EPS = 1e-7
PARAM_FORMAT_VERSION = 1


# --------------------------------------------------------------------- models


class Classifier:
    """Scoring function f(x) in [0, 1] with analytic gradients.

    Subclasses hold an ordered list of named parameter arrays and implement
    ``_forward`` (returning logits and a cache) and ``_backward``.
    """

    kind = "base"
    names: tuple[str, ...] = ()

    def __init__(self, params: list[np.ndarray]):
        self.params = [np.asarray(p, dtype=float) for p in params]

    def _forward(self, X):
        raise NotImplementedError

    def _backward(self, cache, dlogits):
        raise NotImplementedError

    def logits(self, X) -> np.ndarray:
        return self._forward(np.asarray(X, dtype=float))[0]

    def score(self, X) -> np.ndarray:
        return expit(self.logits(X))

    __call__ = score

    def n_params(self) -> int:
        return sum(p.size for p in self.params)

    def copy(self) -> "Classifier":
        new = object.__new__(type(self))
        new.__dict__.update(self.__dict__)
        new.params = [p.copy() for p in self.params]
        return new

    def loss_and_grad(self, X_pos, X_neg, w_pos=1.0, w_neg=1.0):
        """``w_pos * L+(X_pos) + w_neg * L-(X_neg)`` and its gradient.

        An empty side contributes nothing.
        """
        X = np.concatenate([np.asarray(X_pos, float), np.asarray(X_neg, float)])
        n_pos, n_neg = len(X_pos), len(X_neg)
        a, cache = self._forward(X)
        z = expit(a)
        zc = np.clip(z, LOSS_EPS, 1.0 - LOSS_EPS)
        live = (z > LOSS_EPS) & (z < 1.0 - LOSS_EPS)  # clamp kills the gradient
        dl = np.zeros_like(a)
        loss = 0.0
        if n_pos:
            loss += w_pos * float(np.mean(-np.log(zc[:n_pos])))
            dl[:n_pos] = w_pos * np.where(live[:n_pos], z[:n_pos] - 1.0, 0.0) / n_pos
        if n_neg:
            loss += w_neg * float(np.mean(-np.log1p(-zc[n_pos:])))
            dl[n_pos:] = w_neg * np.where(live[n_pos:], z[n_pos:], 0.0) / n_neg
        return loss, self._backward(cache, dl)

    def to_record(self) -> dict:
        return {
            "version": PARAM_FORMAT_VERSION,
            "kind": self.kind,
            "params": [
                {"name": n, "shape": list(p.shape), "values": p.ravel().tolist()}
                for n, p in zip(self.names, self.params)
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_record())


def _xavier(rng, fan_in, fan_out, shape):
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


class LogisticModel(Classifier):
    kind = "logistic"
    names = ("weights", "bias")

    @classmethod
    def init(cls, d: int, rng: np.random.Generator) -> "LogisticModel":
        return cls([_xavier(rng, d, 1, (d,)), np.zeros(1)])

    @property
    def weights(self):
        return self.params[0]

    @property
    def bias(self):
        return float(self.params[1][0])

    def _forward(self, X):
        return X @ self.params[0] + self.params[1][0], X

    def _backward(self, X, dl):
        return [X.T @ dl, np.array([dl.sum()])]


class MLPModel(Classifier):
    """One hidden ReLU layer, sigmoid output."""

    kind = "mlp"
    names = ("hidden_weights", "hidden_bias", "out_weights", "out_bias")

    @classmethod
    def init(cls, d: int, rng: np.random.Generator, hidden: int = 64) -> "MLPModel":
        return cls([
            _xavier(rng, d, hidden, (d, hidden)),
            np.zeros(hidden),
            _xavier(rng, hidden, 1, (hidden,)),
            np.zeros(1),
        ])

    @property
    def hidden(self) -> int:
        return self.params[0].shape[1]

    def _forward(self, X):
        W1, b1, w2, b2 = self.params
        h = np.maximum(X @ W1 + b1, 0.0)
        return h @ w2 + b2[0], (X, h)

    def _backward(self, cache, dl):
        X, h = cache
        W1, b1, w2, b2 = self.params
        dh = np.outer(dl, w2) * (h > 0)
        return [X.T @ dh, dh.sum(axis=0), h.T @ dl, np.array([dl.sum()])]


MODEL_KINDS = {"logistic": LogisticModel, "mlp": MLPModel}


def model_from_record(record: dict) -> Classifier:
    if record.get("version") != PARAM_FORMAT_VERSION:
        raise InvalidInputError(f"unsupported parameter format version {record.get('version')!r}")
    cls = MODEL_KINDS[record["kind"]]
    by_name = {p["name"]: np.asarray(p["values"], float).reshape(p["shape"]) for p in record["params"]}
    return cls([by_name[n] for n in cls.names])


def model_from_json(text: str) -> Classifier:
    return model_from_record(json.loads(text))


# ---------------------------------------------------------------- objectives


def _nonempty(X, what):
    X = np.asarray(X, dtype=float)
    if len(X) == 0:
        raise InvalidInputError(f"{what}: empty batch")
    return X


def clamped_loss(scores, label: int) -> np.ndarray:
    z = np.clip(np.asarray(scores, dtype=float), LOSS_EPS, 1.0 - LOSS_EPS)
    return -np.log(z) if label == 1 else -np.log1p(-z)


def loss_pos(model: Classifier, batch) -> float:
    return float(np.mean(clamped_loss(model.score(_nonempty(batch, "loss_pos")), 1)))


def loss_neg(model: Classifier, batch) -> float:
    return float(np.mean(clamped_loss(model.score(_nonempty(batch, "loss_neg")), -1)))


def train_error(model: Classifier, pos, neg, threshold: float = DEFAULT_THRESHOLD) -> float:
    """Positive error rate plus negative error rate; a score at ``threshold`` predicts -1."""
    if not 0.0 < threshold < 1.0:
        raise InvalidInputError(f"threshold must lie in (0, 1), got {threshold}")
    pos, neg = np.asarray(pos, float), np.asarray(neg, float)
    if len(pos) == 0 and len(neg) == 0:
        raise InvalidInputError("train_error needs at least one sample")
    err = 0.0
    if len(pos):
        err += float(np.mean(model.score(pos) <= threshold))
    if len(neg):
        err += float(np.mean(model.score(neg) > threshold))
    return err


# ----------------------------------------------------------------- optimiser


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.05
    momentum: float = 0.9
    weight_decay: float = 5e-4
    batch_size: int = 64
    epochs: int = 100
    loss: str = "cross_entropy"
    seed: int = 0
    model: str = "mlp"
    hidden: int = 64
    converge_tol: Optional[float] = 1e-4  # None disables the convergence stop
    converge_window: int = 5

    def __post_init__(self):
        if self.learning_rate < 0:
            raise InvalidInputError("learning_rate must be >= 0")
        if not 0.0 <= self.momentum < 1.0:
            raise InvalidInputError("momentum must lie in [0, 1)")
        if self.weight_decay < 0:
            raise InvalidInputError("weight_decay must be >= 0")
        if self.batch_size < 1 or self.epochs < 0:
            raise InvalidInputError("batch_size must be >= 1 and epochs >= 0")
        if self.loss != "cross_entropy":
            raise InvalidInputError(f"unsupported loss {self.loss!r}")
        if self.model not in MODEL_KINDS:
            raise InvalidInputError(f"unknown model kind {self.model!r}")


def init_model(config: TrainConfig, d: int) -> Classifier:
    rng = np.random.default_rng(np.random.SeedSequence(config.seed).spawn(2)[0])
    if config.model == "mlp":
        return MLPModel.init(d, rng, config.hidden)
    return LogisticModel.init(d, rng)


@dataclass
class SGDState:
    """Momentum buffers and the minibatch shuffling stream."""

    velocity: list
    rng: np.random.Generator

    @classmethod
    def fresh(cls, model: Classifier, config: TrainConfig) -> "SGDState":
        rng = np.random.default_rng(np.random.SeedSequence(config.seed).spawn(2)[1])
        return cls([np.zeros_like(p) for p in model.params], rng)


def sgd_epoch(model: Classifier, pos, neg, config: TrainConfig, state: SGDState,
              weights=(1.0, 1.0)) -> Classifier:
    """One shuffled pass over ``(pos, neg)`` with momentum SGD and weight decay.

    Both sides are split into the same number of minibatches, so batch ``i``
    holds the ``i``-th chunk of each.  Updates ``model`` in place.
    """
    pos, neg = np.asarray(pos, float), np.asarray(neg, float)
    if len(pos) + len(neg) == 0:
        raise InvalidInputError("sgd_epoch: no training samples")
    n_batches = max(1, math.ceil((len(pos) + len(neg)) / config.batch_size))
    pos_chunks = np.array_split(state.rng.permutation(len(pos)), n_batches)
    neg_chunks = np.array_split(state.rng.permutation(len(neg)), n_batches)
    w_pos, w_neg = weights
    lr, mu, wd = config.learning_rate, config.momentum, config.weight_decay
    for i, (ip, ineg) in enumerate(zip(pos_chunks, neg_chunks)):
        _, grads = model.loss_and_grad(pos[ip], neg[ineg], w_pos, w_neg)
        for p, g, v in zip(model.params, grads, state.velocity):
            if not np.all(np.isfinite(g)):
                raise TrainingDivergence(f"non-finite gradient in minibatch {i}")
            g = g + wd * p
            v *= mu
            v += g
            p -= lr * v
    return model


class ConvergenceMonitor:
    """Flags convergence once the last ``window`` values span less than ``tol``."""

    def __init__(self, tol: Optional[float], window: int):
        self.tol, self.window = tol, window
        self.history: list[float] = []

    def update(self, value: float) -> bool:
        self.history.append(value)
        if self.tol is None or len(self.history) < self.window:
            return False
        recent = self.history[-self.window:]
        return max(recent) - min(recent) < self.tol


# ------------------------------------------------------------------ discard


def select_lowest(losses, keep_fraction: float) -> np.ndarray:
    """Indices (ascending) of the floor(keep_fraction * n) smallest losses; ties by index."""
    if not 0.0 <= keep_fraction <= 1.0:
        raise InvalidInputError(f"keep_fraction must lie in [0, 1], got {keep_fraction}")
    losses = np.asarray(losses, dtype=float).ravel()
    if losses.size == 0:
        raise InvalidInputError("nothing to rank")
    keep = int(math.floor(keep_fraction * len(losses) + 1e-12))
    order = np.argsort(losses, kind="stable")
    return np.sort(order[:keep])


def rank_and_discard(model: Classifier, unlabeled, keep_fraction: float) -> np.ndarray:
    """Unlabeled samples with the lowest negative-label loss, in original order."""
    X = np.asarray(unlabeled, dtype=float)
    if len(X) == 0:
        raise InvalidInputError("rank_and_discard: empty unlabeled set")
    idx = select_lowest(clamped_loss(model.score(X), -1), keep_fraction)
    return X[idx]


# ------------------------------------------------------------------- loops


EpochCallback = Callable[[int, Classifier, dict], None]


def pvu_warm_start(data: PUDataset, epochs: int, config: TrainConfig,
                   model: Optional[Classifier] = None, state: Optional[SGDState] = None,
                   callback: Optional[EpochCallback] = None) -> Classifier:
    """``epochs`` rounds of positive-vs-unlabeled training, all unlabeled as negative."""
    if epochs < 0:
        raise InvalidInputError("warm-start epochs must be >= 0")
    X_p, X_u = data.observed()
    model = model if model is not None else init_model(config, data.dim)
    state = state if state is not None else SGDState.fresh(model, config)
    for epoch in range(1, epochs + 1):
        sgd_epoch(model, X_p, X_u, config, state)
        if callback is not None:
            callback(epoch, model, {"negatives": X_u})
    return model


def cvir_train(data: PUDataset, alpha: float, config: TrainConfig,
               model: Optional[Classifier] = None, state: Optional[SGDState] = None,
               weighted: bool = True, callback: Optional[EpochCallback] = None) -> Classifier:
    """Train with the alpha-fraction of most-positive-looking unlabeled samples ignored.

    Each epoch re-ranks all unlabeled samples under the current model, keeps
    the ``1 - alpha`` fraction with the lowest negative-label loss as
    provisional negatives, then takes one pass of SGD on the loss weighted by
    ``(alpha, 1 - alpha)`` (or unweighted with ``weighted=False``).  Stops when
    the summed train error plateaus or after ``config.epochs``.
    """
    if not 0.0 <= alpha <= 1.0:
        raise InvalidInputError(f"alpha must lie in [0, 1], got {alpha}")
    X_p, X_u = data.observed()
    model = model if model is not None else init_model(config, data.dim)
    state = state if state is not None else SGDState.fresh(model, config)
    weights = (alpha, 1.0 - alpha) if weighted else (1.0, 1.0)
    monitor = ConvergenceMonitor(config.converge_tol, config.converge_window)
    for epoch in range(1, config.epochs + 1):
        X_n = rank_and_discard(model, X_u, 1.0 - alpha)
        sgd_epoch(model, X_p, X_n, config, state, weights)
        err = train_error(model, X_p, X_n)
        if callback is not None:
            callback(epoch, model, {"negatives": X_n, "train_error": err})
        if monitor.update(err):
            break
    return model
