"""Mixture proportion estimators on classifier scores.

All estimators take positive-sample scores ``z_p`` and unlabeled scores
``z_u`` in [0, 1] and search thresholds on the grid built by
:func:`pu_kit.ecdf.threshold_grid`.  Ties in an objective go to the smallest
threshold, i.e. the largest top bin.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import EstimationFailure, InvalidInputError, UnsupportedOperationError
from .ecdf import (
    ThresholdGrid,
    _check_scores,
    bbe_penalty,
    binomial_inversion_counts,
    build_tail_cdf,
    threshold_grid,
)

DEFAULT_DELTA = 0.1
DEFAULT_GAMMA = 0.01


@dataclass(frozen=True)
class BBEConfig:
    delta: float = DEFAULT_DELTA
    gamma: float = DEFAULT_GAMMA

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise InvalidInputError(f"delta must lie in (0, 1), got {self.delta}")
        if self.gamma < 0.0:
            raise InvalidInputError(f"gamma must be >= 0, got {self.gamma}")


@dataclass(frozen=True)
class MixtureEstimate:
    alpha_hat: float
    c_hat: float
    q_p_at_c: float
    q_u_at_c: float
    ucb_value: float
    method: str = "bbe"

    @property
    def alpha_clamped(self) -> float:
        return min(max(self.alpha_hat, 0.0), 1.0)


@dataclass(frozen=True)
class TailCurve:
    """Per-threshold tail masses and objective, as evaluated by an estimator."""

    c: np.ndarray
    q_u: np.ndarray
    q_p: np.ndarray
    ratio: np.ndarray
    objective: np.ndarray


def _tails(z_p, z_u):
    z_p = _check_scores(z_p, "z_p")
    z_u = _check_scores(z_u, "z_u")
    cdf_p, cdf_u = build_tail_cdf(z_p), build_tail_cdf(z_u)
    grid = threshold_grid(z_p, z_u, cdf_p).candidates
    k_p, k_u = cdf_p.count(grid), cdf_u.count(grid)
    return grid, k_p, k_u, len(z_p), len(z_u)


def bbe_curve(z_p, z_u, config: BBEConfig = BBEConfig()) -> TailCurve:
    grid, k_p, k_u, n_p, n_u = _tails(z_p, z_u)
    q_p, q_u = k_p / n_p, k_u / n_u
    ratio = q_u / q_p
    slack = bbe_penalty(n_u, config.delta) + bbe_penalty(n_p, config.delta)
    ucb = ratio + (1.0 + config.gamma) * slack / q_p
    return TailCurve(grid, q_u, q_p, ratio, ucb)


def _pick(curve: TailCurve, method: str, alpha=None) -> MixtureEstimate:
    # np.argmin returns the first minimiser on an ascending grid
    i = int(np.argmin(curve.objective))
    a = curve.ratio[i] if alpha is None else alpha[i]
    return MixtureEstimate(
        alpha_hat=float(a),
        c_hat=float(curve.c[i]),
        q_p_at_c=float(curve.q_p[i]),
        q_u_at_c=float(curve.q_u[i]),
        ucb_value=float(curve.objective[i]),
        method=method,
    )


def bbe_estimate(z_p, z_u, config: BBEConfig = BBEConfig()) -> MixtureEstimate:
    """Best Bin Estimation.

    Picks the threshold minimising the upper confidence bound
    ``q_u/q_p + (1 + gamma) / q_p * (pen(n_u) + pen(n_p))`` and returns the
    plain tail ratio there.
    """
    return _pick(bbe_curve(z_p, z_u, config), "bbe")


def naive_ratio_estimate(z_p, z_u) -> MixtureEstimate:
    """Minimum of the empirical tail ratio, with no confidence penalty."""
    grid, k_p, k_u, n_p, n_u = _tails(z_p, z_u)
    q_p, q_u = k_p / n_p, k_u / n_u
    ratio = q_u / q_p
    return _pick(TailCurve(grid, q_u, q_p, ratio, ratio), "naive")


def scott_estimate(z_p, z_u, delta: float = DEFAULT_DELTA, union_bound: bool = False) -> MixtureEstimate:
    """ROC minimum-slope heuristic with binomial tail inversion.

    Minimises ``(q_u + up(q_u)) / (q_p - down(q_p))`` where ``up``/``down``
    are one-sided binomial inversions at level ``delta`` (or ``delta / n``
    per sample when ``union_bound`` is set).  Returns the bounded ratio.
    """
    if not 0.0 < delta < 1.0:
        raise InvalidInputError(f"delta must lie in (0, 1), got {delta}")
    grid, k_p, k_u, n_p, n_u = _tails(z_p, z_u)
    q_p, q_u = k_p / n_p, k_u / n_u
    d_u = delta / n_u if union_bound else delta
    d_p = delta / n_p if union_bound else delta
    num = q_u + binomial_inversion_counts(n_u, k_u, d_u, lower=False)
    den = q_p - binomial_inversion_counts(n_p, k_p, d_p, lower=True)
    ok = den > 0
    if not np.any(ok):
        raise EstimationFailure(
            f"all {len(grid)} denominators are non-positive "
            f"(n_p={n_p}, n_u={n_u}, delta={delta}, union_bound={union_bound})"
        )
    bounded = np.full_like(q_p, np.inf)
    bounded[ok] = num[ok] / den[ok]
    curve = TailCurve(grid, q_u, q_p, q_u / q_p, bounded)
    return _pick(curve, "scott", alpha=bounded)


@dataclass(frozen=True)
class TopBinDiagnostics:
    c: np.ndarray
    bin_size: np.ndarray
    purity: np.ndarray  # NaN where the bin is empty

    def rows(self):
        return list(zip(self.c.tolist(), self.bin_size.tolist(), self.purity.tolist()))


def top_bin_diagnostics(z_u, hidden_labels, grid=None) -> TopBinDiagnostics:
    """Size and positive purity of the unlabeled top bin ``{z >= c}`` per threshold."""
    if hidden_labels is None:
        raise UnsupportedOperationError("top-bin purity needs hidden labels")
    z_u = _check_scores(z_u, "z_u")
    y = np.asarray(hidden_labels).ravel()
    if len(y) != len(z_u):
        raise InvalidInputError("hidden_labels must align with z_u")
    if grid is None:
        c = np.unique(np.concatenate([[0.0], z_u]))
    elif isinstance(grid, ThresholdGrid):
        c = np.asarray(grid.candidates, dtype=float)
    else:
        c = np.sort(np.asarray(grid, dtype=float).ravel())
    order = np.argsort(z_u, kind="stable")
    zs = z_u[order]
    pos_cum = np.concatenate([[0], np.cumsum((y[order] == 1)[::-1])])  # positives among top-k
    start = np.searchsorted(zs, c, side="left")
    in_bin = len(zs) - start
    n_pos = pos_cum[in_bin]
    with np.errstate(invalid="ignore", divide="ignore"):
        purity = np.where(in_bin > 0, n_pos / np.maximum(in_bin, 1), np.nan)
    return TopBinDiagnostics(c, in_bin / len(zs), purity)


def ratio_confidence_radius(q_p_hat, true_ratio, n_p: int, n_u: int, delta: float) -> np.ndarray:
    """High-probability bound on |q_u_hat/q_p_hat - q_u/q_p|, uniformly over thresholds.

    ``(pen(n_u) + true_ratio * pen(n_p)) / q_p_hat`` with ``pen`` the DKW
    term at level delta/2 per sample.
    """
    q_p_hat = np.asarray(q_p_hat, dtype=float)
    return (bbe_penalty(n_u, delta) + np.asarray(true_ratio) * bbe_penalty(n_p, delta)) / q_p_hat
