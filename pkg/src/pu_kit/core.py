"""Shared containers, errors, splitting and metric records."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

DEFAULT_THRESHOLD = 0.5
DEFAULT_SPLIT_FRACTION = 0.8


class PUKitError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class InvalidInputError(PUKitError, ValueError):
    exit_code = 3


class UnsupportedOperationError(PUKitError):
    exit_code = 3


class EstimationFailure(PUKitError):
    exit_code = 4


class TrainingDivergence(PUKitError):
    exit_code = 4


class SchemaError(PUKitError, ValueError):
    exit_code = 2


def _as_matrix(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise InvalidInputError(f"{name} must be a 2-D array of feature vectors")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class PUDataset:
    """Positive samples plus unlabeled samples.

    ``hidden_labels`` (+1/-1, aligned with ``unlabeled``) and ``alpha_true``
    exist for evaluation only.  Training and estimation code reads
    ``observed()`` and never the hidden fields.
    """

    positives: np.ndarray
    unlabeled: np.ndarray
    hidden_labels: Optional[np.ndarray] = None
    alpha_true: Optional[float] = None

    def __post_init__(self):
        pos = _as_matrix(self.positives, "positives")
        unl = _as_matrix(self.unlabeled, "unlabeled")
        if len(pos) and len(unl) and pos.shape[1] != unl.shape[1]:
            raise InvalidInputError(
                f"dimension mismatch: positives d={pos.shape[1]}, unlabeled d={unl.shape[1]}"
            )
        object.__setattr__(self, "positives", pos)
        object.__setattr__(self, "unlabeled", unl)
        if self.hidden_labels is not None:
            labels = np.asarray(self.hidden_labels, dtype=np.int8).ravel()
            if len(labels) != len(unl):
                raise InvalidInputError("hidden_labels must align with unlabeled samples")
            if not np.all(np.isin(labels, (-1, 1))):
                raise InvalidInputError("hidden_labels must be +1 or -1")
            labels.setflags(write=False)
            object.__setattr__(self, "hidden_labels", labels)
        if self.alpha_true is not None:
            a = float(self.alpha_true)
            if not 0.0 <= a <= 1.0:
                raise InvalidInputError(f"alpha_true={a} outside [0, 1]")
            object.__setattr__(self, "alpha_true", a)

    @property
    def dim(self) -> int:
        return self.positives.shape[1] if len(self.positives) else self.unlabeled.shape[1]

    @property
    def n_p(self) -> int:
        return len(self.positives)

    @property
    def n_u(self) -> int:
        return len(self.unlabeled)

    def observed(self) -> tuple[np.ndarray, np.ndarray]:
        """The only view training and estimation code may use."""
        return self.positives, self.unlabeled

    def without_labels(self) -> "PUDataset":
        return PUDataset(self.positives, self.unlabeled)

    def labeled_pvn(self) -> tuple[np.ndarray, np.ndarray]:
        """Unlabeled features with their hidden +1/-1 labels, for evaluation."""
        if self.hidden_labels is None:
            raise UnsupportedOperationError("dataset carries no hidden labels")
        return self.unlabeled, self.hidden_labels


@dataclass(frozen=True)
class TrainHoldoutSplit:
    train: PUDataset
    holdout: PUDataset
    split_fraction: float
    # source row indices, kept so partition properties can be checked
    train_pos_idx: np.ndarray = field(repr=False, default=None)
    train_unl_idx: np.ndarray = field(repr=False, default=None)
    holdout_pos_idx: np.ndarray = field(repr=False, default=None)
    holdout_unl_idx: np.ndarray = field(repr=False, default=None)


@dataclass(frozen=True)
class ExperimentRecord:
    epoch: int
    alpha_hat: float
    abs_err: float
    train_error: float
    pvn_accuracy: float
    method: str
    seed: int
    alpha_true: float = float("nan")


def _split_count(n: int, fraction: float) -> int:
    k = int(np.floor(fraction * n + 0.5))
    return min(max(k, 1), n - 1)


def split_pu(data: PUDataset, fraction: float = DEFAULT_SPLIT_FRACTION, seed: int = 0) -> TrainHoldoutSplit:
    """Randomly partition positives and unlabeled samples into train and hold-out."""
    if not 0.0 < fraction < 1.0:
        raise InvalidInputError(f"split fraction must lie in (0, 1), got {fraction}")
    if data.n_p < 2 or data.n_u < 2:
        raise InvalidInputError("need at least 2 positive and 2 unlabeled samples to split")
    rng = np.random.default_rng(seed)
    perm_p = rng.permutation(data.n_p)
    perm_u = rng.permutation(data.n_u)
    kp = _split_count(data.n_p, fraction)
    ku = _split_count(data.n_u, fraction)
    tp, hp = np.sort(perm_p[:kp]), np.sort(perm_p[kp:])
    tu, hu = np.sort(perm_u[:ku]), np.sort(perm_u[ku:])

    def part(ip, iu):
        labels = None if data.hidden_labels is None else data.hidden_labels[iu]
        return PUDataset(data.positives[ip], data.unlabeled[iu], labels, data.alpha_true)

    return TrainHoldoutSplit(part(tp, tu), part(hp, hu), fraction, tp, tu, hp, hu)


def _check_scores_labels(scores, labels):
    s = np.asarray(scores, dtype=float).ravel()
    y = np.asarray(labels).ravel()
    if len(s) != len(y):
        raise InvalidInputError(f"length mismatch: {len(s)} scores vs {len(y)} labels")
    if len(s) == 0:
        raise InvalidInputError("no scores given")
    return s, y


def pvn_accuracy(scores, labels, threshold: float = DEFAULT_THRESHOLD) -> float:
    """Fraction of samples on the correct side of ``threshold``.

    A score exactly at the threshold is a negative prediction.
    """
    s, y = _check_scores_labels(scores, labels)
    pred = np.where(s > threshold, 1, -1)
    return float(np.mean(pred == y))


def pvn_error(scores, labels, threshold: float = DEFAULT_THRESHOLD) -> float:
    s, y = _check_scores_labels(scores, labels)
    pred = np.where(s > threshold, 1, -1)
    return float(np.mean(pred != y))
