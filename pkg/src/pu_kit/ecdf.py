"""Empirical tail CDFs, threshold grids and deviation bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import betaincinv
from scipy.stats import binom

from .core import EstimationFailure, InvalidInputError

BISECTION_TOL = 1e-9


def _check_scores(scores, name="scores") -> np.ndarray:
    z = np.asarray(scores, dtype=float).ravel()
    if z.size == 0:
        raise InvalidInputError(f"{name} is empty")
    if not np.all(np.isfinite(z)) or z.min() < 0.0 or z.max() > 1.0:
        raise InvalidInputError(f"{name} must lie in [0, 1]")
    return z


@dataclass(frozen=True)
class TailCDF:
    """q(z) = fraction of scores >= z, answered by binary search."""

    sorted_scores: np.ndarray

    @property
    def n(self) -> int:
        return len(self.sorted_scores)

    def count(self, z) -> np.ndarray:
        """Number of scores >= z (vectorised over z)."""
        return self.n - np.searchsorted(self.sorted_scores, z, side="left")

    def eval(self, z):
        out = self.count(z) / self.n
        return float(out) if np.ndim(out) == 0 else out

    __call__ = eval


def build_tail_cdf(scores) -> TailCDF:
    z = np.sort(_check_scores(scores))
    z.setflags(write=False)
    return TailCDF(z)


@dataclass(frozen=True)
class ThresholdGrid:
    candidates: np.ndarray

    def __len__(self):
        return len(self.candidates)


def threshold_grid(z_p, z_u, q_p: TailCDF | None = None) -> ThresholdGrid:
    """Observed scores of both samples plus 0, minus points with empty positive tail.

    The tail ratio is a step function that only changes at observed scores,
    so this grid contains the argmin over all of [0, 1].
    """
    z_p = _check_scores(z_p, "z_p")
    z_u = _check_scores(z_u, "z_u")
    c = np.unique(np.concatenate([[0.0], z_p, z_u]))
    q_p = q_p or build_tail_cdf(z_p)
    c = c[q_p.count(c) > 0]
    c.setflags(write=False)
    return ThresholdGrid(c)


def bbe_penalty(n: int, delta: float) -> float:
    """sqrt(log(4/delta) / (2n)): one sample's DKW deviation at level delta/2."""
    if not 0.0 < delta < 1.0:
        raise InvalidInputError(f"delta must lie in (0, 1), got {delta}")
    if n < 1:
        raise InvalidInputError(f"n must be >= 1, got {n}")
    return math.sqrt(math.log(4.0 / delta) / (2.0 * n))


def dkw_band(n: int, delta: float) -> float:
    """Two-sided DKW half-width sqrt(log(2/delta) / (2n))."""
    if not 0.0 < delta < 1.0:
        raise InvalidInputError(f"delta must lie in (0, 1), got {delta}")
    return math.sqrt(math.log(2.0 / delta) / (2.0 * n))


def binomial_inversion_counts(n: int, k, delta: float, lower: bool = False) -> np.ndarray:
    """Vectorised tail inversion for observed counts ``k`` out of ``n``.

    Upper (default): smallest eps with P[Bin(n, k/n + eps) <= k] <= delta.
    Lower: smallest eps with P[Bin(n, k/n - eps) >= k] <= delta.
    Each tail probability is monotone in eps, so bisection is exact up to
    BISECTION_TOL; the returned value is the conservative bracket end.
    """
    if not 0.0 < delta < 1.0:
        raise InvalidInputError(f"delta must lie in (0, 1), got {delta}")
    if n < 1:
        raise InvalidInputError(f"n must be >= 1, got {n}")
    k_all = np.atleast_1d(np.asarray(k, dtype=np.int64))
    k, inverse = np.unique(k_all, return_inverse=True)
    p_hat = k / n

    if lower:
        room = p_hat.copy()

        def tail(eps):
            return binom.sf(k - 1, n, np.clip(p_hat - eps, 0.0, 1.0))

        # Clopper-Pearson endpoint, used only to narrow the starting bracket
        with np.errstate(invalid="ignore"):
            guess = p_hat - np.nan_to_num(betaincinv(np.maximum(k, 1), n - k + 1, delta))
    else:
        room = 1.0 - p_hat

        def tail(eps):
            return binom.cdf(k, n, np.clip(p_hat + eps, 0.0, 1.0))

        with np.errstate(invalid="ignore"):
            guess = np.nan_to_num(betaincinv(k + 1, np.maximum(n - k, 1), 1.0 - delta)) - p_hat

    lo = np.zeros_like(p_hat)
    hi = room.copy()
    done = (room <= 0.0) | (tail(lo) <= delta)
    hi[done] = 0.0
    todo = ~done
    if np.any(todo & (tail(hi) > delta)):
        raise EstimationFailure("binomial inversion bracket does not contain the root")

    # tighten the bracket around the closed-form guess where it is valid
    g_lo = np.clip(guess - 1e-6, 0.0, room)
    g_hi = np.clip(guess + 1e-6, 0.0, room)
    use = todo & (tail(g_lo) > delta) & (tail(g_hi) <= delta)
    lo = np.where(use, g_lo, lo)
    hi = np.where(use, g_hi, hi)

    for _ in range(200):
        if not np.any(todo):
            break
        mid = 0.5 * (lo + hi)
        ok = tail(mid) <= delta
        hi = np.where(todo & ok, mid, hi)
        lo = np.where(todo & ~ok, mid, lo)
        todo &= (hi - lo) > BISECTION_TOL
    else:
        raise EstimationFailure("binomial inversion bisection did not converge")
    return hi[inverse]


def binomial_inversion(n: int, p_hat: float, delta: float, lower: bool = False) -> float:
    """Tightest one-sided binomial deviation at level ``delta`` for proportion ``p_hat``."""
    if not 0.0 <= p_hat <= 1.0:
        raise InvalidInputError(f"p_hat must lie in [0, 1], got {p_hat}")
    k = int(round(p_hat * n))
    return float(binomial_inversion_counts(n, k, delta, lower=lower)[0])
