"""Synthetic PU tasks with known mixture proportion and hidden labels."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np
from scipy.stats import norm

from .core import InvalidInputError, PUDataset

TRIANGLE_POS = ((-1.0, 0.1), (0.0, 4.0), (1.0, 0.1))
TRIANGLE_NEG = ((-1.0, -0.1), (4.0, -4.0), (1.0, -0.1))

# seed offset for the labelled evaluation set drawn next to a task
EVAL_STREAM = 1

Sampler = Callable[[np.random.Generator, int], np.ndarray]


@dataclass(frozen=True)
class TaskSpec:
    kind: str = "gaussian"  # gaussian | triangle | anchor | custom-score
    alpha: float = 0.5
    n_p: int = 1000
    n_u: int = 1000
    seed: int = 0
    dim: int = 2
    mean_pos: tuple = (1.0, 0.0)
    mean_neg: tuple = (-1.0, 0.0)
    scale: float = 1.0
    gamma_margin: float = 0.3
    pos_range: tuple = (0.5, 1.0)
    neg_range: tuple = (0.0, 0.5)
    exact_count: bool = False

    def __post_init__(self):
        if self.kind not in GENERATORS:
            raise InvalidInputError(f"unknown task kind {self.kind!r}")
        if not 0.0 <= self.alpha <= 1.0:
            raise InvalidInputError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.n_p < 0 or self.n_u < 0:
            raise InvalidInputError("sample counts must be >= 0")
        if self.kind == "anchor" and not 0.0 < self.gamma_margin <= 1.0:
            raise InvalidInputError("gamma_margin must lie in (0, 1]")
        if self.kind == "gaussian" and self.scale <= 0:
            raise InvalidInputError("scale must be > 0")

    def to_dict(self) -> dict:
        return asdict(self)


def sample_unlabeled(pos_sampler: Sampler, neg_sampler: Sampler, alpha: float, n: int,
                     rng, exact_count: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Draw ``n`` mixture samples, each positive independently with prob. ``alpha``.

    With ``exact_count`` the number of positives is fixed at round(alpha * n)
    and only their positions are random.
    """
    if not 0.0 <= alpha <= 1.0:
        raise InvalidInputError(f"alpha must lie in [0, 1], got {alpha}")
    rng = np.random.default_rng(rng)
    if exact_count:
        is_pos = np.zeros(n, dtype=bool)
        is_pos[: int(round(alpha * n))] = True
        is_pos = rng.permutation(is_pos)
    else:
        is_pos = rng.random(n) < alpha
    k = int(is_pos.sum())
    X_pos, X_neg = pos_sampler(rng, k), neg_sampler(rng, n - k)
    X = np.empty((n, X_pos.shape[1] if k else X_neg.shape[1]))
    X[is_pos] = X_pos
    X[~is_pos] = X_neg
    return X, np.where(is_pos, 1, -1)


def _make_task(pos: Sampler, neg: Sampler, alpha, n_p, n_u, seed, exact_count=False) -> PUDataset:
    rng = np.random.default_rng(seed)
    X_p = pos(rng, n_p)
    X_u, y = sample_unlabeled(pos, neg, alpha, n_u, rng, exact_count)
    return PUDataset(X_p, X_u, y, alpha)


def _labeled(pos: Sampler, neg: Sampler, n_each, seed) -> PUDataset:
    """Balanced labelled PvN set stored as the unlabeled half of a dataset."""
    rng = np.random.default_rng([seed, EVAL_STREAM])
    X = np.concatenate([pos(rng, n_each), neg(rng, n_each)])
    y = np.concatenate([np.ones(n_each, int), -np.ones(n_each, int)])
    return PUDataset(np.empty((0, X.shape[1])), X, y, 0.5)


# ---------------------------------------------------------------- gaussian


def _gaussian(mean, scale):
    mean = np.asarray(mean, dtype=float)

    def draw(rng, n):
        return mean + scale * rng.standard_normal((n, len(mean)))
    return draw


def _gaussian_samplers(spec: TaskSpec):
    mp, mn = np.asarray(spec.mean_pos, float), np.asarray(spec.mean_neg, float)
    if mp.shape != mn.shape or not (np.all(np.isfinite(mp)) and np.all(np.isfinite(mn))):
        raise InvalidInputError("gaussian means must be finite and of equal dimension")
    if spec.scale <= 0:
        raise InvalidInputError("scale must be > 0")
    return _gaussian(mp, spec.scale), _gaussian(mn, spec.scale)


def gaussian_bayes_accuracy(mean_pos, mean_neg, scale: float) -> float:
    """Balanced PvN Bayes accuracy Phi(|mu_p - mu_n| / (2 sigma)) for isotropic classes."""
    if scale <= 0:
        raise InvalidInputError("scale must be > 0")
    gap = np.linalg.norm(np.asarray(mean_pos, float) - np.asarray(mean_neg, float))
    return float(norm.cdf(gap / (2.0 * scale)))


def gen_gaussian_task(spec: TaskSpec) -> PUDataset:
    pos, neg = _gaussian_samplers(spec)
    return _make_task(pos, neg, spec.alpha, spec.n_p, spec.n_u, spec.seed, spec.exact_count)


# ---------------------------------------------------------------- triangle


def _triangle(vertices):
    a, b, c = (np.asarray(v, float) for v in vertices)
    u, v = b - a, c - a
    if abs(u[0] * v[1] - u[1] * v[0]) < 1e-12:
        raise InvalidInputError("degenerate triangle")

    def draw(rng, n):
        u = rng.random((n, 2))
        flip = u.sum(axis=1) > 1.0
        u[flip] = 1.0 - u[flip]
        return a + u[:, :1] * (b - a) + u[:, 1:] * (c - a)
    return draw


def gen_triangle_task(n_p: int, n_u: int, alpha: float = 0.5, seed: int = 0,
                      exact_count: bool = False) -> PUDataset:
    """Positives uniform in the upper triangle, negatives in the lower one.

    The two supports are separated by the horizontal band |y| < 0.1.
    """
    return _make_task(_triangle(TRIANGLE_POS), _triangle(TRIANGLE_NEG), alpha, n_p, n_u, seed,
                      exact_count)


# ------------------------------------------------------------------ anchor


def _anchor_samplers(gamma_margin: float, dim: int = 1):
    if not 0.0 < gamma_margin <= 1.0:
        raise InvalidInputError("gamma_margin must lie in (0, 1]")

    def embed(rng, x):
        if dim == 1:
            return x[:, None]
        return np.column_stack([x, rng.standard_normal((len(x), dim - 1))])

    def pos(rng, n):
        in_anchor = rng.random(n) < gamma_margin
        x = np.where(in_anchor, rng.uniform(2.0, 3.0, n), rng.uniform(0.0, 1.0, n))
        return embed(rng, x)

    def neg(rng, n):
        return embed(rng, rng.uniform(0.0, 1.0, n))
    return pos, neg


def gen_anchor_task(gamma_margin: float, alpha: float, n_p: int, n_u: int, seed: int = 0,
                    dim: int = 1, exact_count: bool = False) -> PUDataset:
    """Positives put mass ``gamma_margin`` on [2, 3], which negatives never reach."""
    pos, neg = _anchor_samplers(gamma_margin, dim)
    return _make_task(pos, neg, alpha, n_p, n_u, seed, exact_count)


def anchor_score(X) -> np.ndarray:
    """Monotone scorer x -> x/3 on the first coordinate, clipped to [0, 1]."""
    X = np.asarray(X, dtype=float)
    x = X[:, 0] if X.ndim == 2 else X
    return np.clip(x / 3.0, 0.0, 1.0)


# ------------------------------------------------------------ custom score


def _uniform_score(lo, hi):
    def draw(rng, n):
        return rng.uniform(lo, hi, n)[:, None]
    return draw


def _score_samplers(spec: TaskSpec):
    (a, b), (c, d) = spec.pos_range, spec.neg_range
    if not (0.0 <= a < b <= 1.0 and 0.0 <= c < d <= 1.0):
        raise InvalidInputError("score ranges must be increasing sub-intervals of [0, 1]")
    return _uniform_score(a, b), _uniform_score(c, d)


def gen_score_task(spec: TaskSpec) -> PUDataset:
    """One-dimensional 'features' that are already scores in [0, 1]."""
    pos, neg = _score_samplers(spec)
    return _make_task(pos, neg, spec.alpha, spec.n_p, spec.n_u, spec.seed, spec.exact_count)


# --------------------------------------------------------------- dispatch


def _samplers(spec: TaskSpec):
    if spec.kind == "gaussian":
        return _gaussian_samplers(spec)
    if spec.kind == "triangle":
        return _triangle(TRIANGLE_POS), _triangle(TRIANGLE_NEG)
    if spec.kind == "anchor":
        return _anchor_samplers(spec.gamma_margin, spec.dim)
    return _score_samplers(spec)


GENERATORS = {
    "gaussian": gen_gaussian_task,
    "triangle": lambda s: gen_triangle_task(s.n_p, s.n_u, s.alpha, s.seed, s.exact_count),
    "anchor": lambda s: gen_anchor_task(s.gamma_margin, s.alpha, s.n_p, s.n_u, s.seed, s.dim,
                                        s.exact_count),
    "custom-score": gen_score_task,
}


def generate(spec: TaskSpec) -> PUDataset:
    return GENERATORS[spec.kind](spec)


def pvn_eval_set(spec: TaskSpec, n_each: int = 1000) -> PUDataset:
    """Held-out balanced positive-vs-negative set from the same class conditionals."""
    pos, neg = _samplers(spec)
    return _labeled(pos, neg, n_each, spec.seed)
