import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pu_kit.core import InvalidInputError, UnsupportedOperationError
from pu_kit.ecdf import binomial_inversion, threshold_grid
from pu_kit.mpe import (
    BBEConfig,
    MixtureEstimate,
    bbe_curve,
    bbe_estimate,
    naive_ratio_estimate,
    ratio_confidence_radius,
    scott_estimate,
    top_bin_diagnostics,
)

Z_P = [0.9, 0.8, 0.7, 0.6, 0.5]
Z_U = [0.85, 0.75, 0.3, 0.2, 0.1]

score_lists = st.lists(st.floats(0, 1), min_size=1, max_size=40)


def _brute_bbe(z_p, z_u, delta, gamma):
    """Loop over every threshold and count tails by hand."""
    n_p, n_u = len(z_p), len(z_u)
    pen = math.sqrt(math.log(4 / delta) / (2 * n_u)) + math.sqrt(math.log(4 / delta) / (2 * n_p))
    best = None
    for c in sorted(set([0.0] + list(z_p) + list(z_u))):
        qp = sum(z >= c for z in z_p) / n_p
        qu = sum(z >= c for z in z_u) / n_u
        if qp == 0:
            continue
        obj = qu / qp + (1 + gamma) * pen / qp
        if best is None or obj < best[0]:
            best = (obj, c, qu / qp)
    return best


def pure_bin_scores(seed, n=10000, alpha=0.3):
    rng = np.random.default_rng(seed)
    z_p = rng.uniform(0.5, 1.0, n)
    pos = rng.random(n) < alpha
    z_u = np.where(pos, rng.uniform(0.5, 1.0, n), rng.uniform(0.0, 0.5, n))
    return z_p, z_u, np.where(pos, 1, -1)


# ------------------------------------------------------------------- BBE


def test_bbe_five_by_five_against_brute_force():
    # brute force over the 11 grid thresholds gives c = 0.5, alpha = 0.4
    obj, c, a = _brute_bbe(Z_P, Z_U, 0.1, 0.01)
    assert (c, a) == (0.5, 0.4)
    est = bbe_estimate(Z_P, Z_U, BBEConfig(0.1, 0.01))
    assert len(threshold_grid(Z_P, Z_U)) == 11
    assert est.c_hat == c
    assert est.alpha_hat == pytest.approx(a)
    assert est.ucb_value == pytest.approx(obj)


@settings(max_examples=60, deadline=None)
@given(score_lists, score_lists, st.sampled_from([0.05, 0.1, 0.3]), st.sampled_from([0.0, 0.01, 0.5]))
def test_bbe_matches_brute_force(z_p, z_u, delta, gamma):
    obj, c, a = _brute_bbe(z_p, z_u, delta, gamma)
    est = bbe_estimate(z_p, z_u, BBEConfig(delta, gamma))
    assert est.ucb_value == pytest.approx(obj, rel=1e-12)
    assert est.alpha_hat == pytest.approx(est.q_u_at_c / est.q_p_at_c)
    assert est.q_p_at_c > 0


@given(score_lists)
def test_bbe_identical_samples(z):
    est = bbe_estimate(z, z)
    assert est.alpha_hat == 1.0
    assert est.c_hat == 0.0


def test_bbe_pure_bin_task():
    z_p, z_u, _ = pure_bin_scores(0)
    est = bbe_estimate(z_p, z_u, BBEConfig(0.1, 0.01))
    assert abs(est.alpha_hat - 0.3) <= 0.03


@settings(max_examples=40, deadline=None)
@given(score_lists, score_lists, st.randoms(use_true_random=False))
def test_estimators_permutation_invariant(z_p, z_u, rnd):
    p2, u2 = list(z_p), list(z_u)
    rnd.shuffle(p2)
    rnd.shuffle(u2)
    assert bbe_estimate(z_p, z_u) == bbe_estimate(p2, u2)
    assert naive_ratio_estimate(z_p, z_u) == naive_ratio_estimate(p2, u2)


@settings(max_examples=15, deadline=None)
@given(st.lists(st.floats(0, 1), min_size=1, max_size=15), st.lists(st.floats(0, 1), min_size=1, max_size=15))
def test_scott_permutation_invariant(z_p, z_u):
    assert scott_estimate(z_p, z_u) == scott_estimate(z_p[::-1], z_u[::-1])


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(0, 1000), min_size=1, max_size=30),
       st.lists(st.integers(0, 1000), min_size=1, max_size=30),
       st.sampled_from([0.5, 2.0, 3.0]))
def test_bbe_invariant_under_monotone_transform(kp, ku, power):
    # scores on a coarse lattice so the transform cannot merge distinct values
    z_p, z_u = np.array(kp) / 1000, np.array(ku) / 1000
    a = bbe_estimate(z_p, z_u)
    b = bbe_estimate(z_p**power, z_u**power)
    assert b.alpha_hat == a.alpha_hat
    assert b.c_hat == pytest.approx(a.c_hat**power)


def test_bbe_rejects():
    with pytest.raises(InvalidInputError):
        bbe_estimate([], [0.5])
    with pytest.raises(InvalidInputError):
        bbe_estimate([0.5], [1.5])
    with pytest.raises(InvalidInputError):
        BBEConfig(delta=1.0)
    with pytest.raises(InvalidInputError):
        BBEConfig(gamma=-0.1)


def test_bbe_curve_columns():
    curve = bbe_curve(Z_P, Z_U)
    assert len(curve.c) == len(curve.objective) == 11
    np.testing.assert_allclose(curve.ratio, curve.q_u / curve.q_p)


def test_clamped_field():
    est = MixtureEstimate(2.0, 0.5, 0.1, 0.2, 3.0)
    assert est.alpha_clamped == 1.0
    assert MixtureEstimate(-0.1, 0.5, 0.1, 0.0, 3.0).alpha_clamped == 0.0


# ----------------------------------------------------------------- naive


def test_naive_examples():
    est = naive_ratio_estimate([0.9], [0.1])
    assert est.alpha_hat == 0.0
    assert 0.1 < est.c_hat <= 0.9
    assert naive_ratio_estimate(Z_P, Z_P).alpha_hat == 1.0


# ----------------------------------------------------------------- scott


# exhaustive threshold search with exact rational binomial tails (grid step
# 5e-5) gives c = 0.5 and a bounded ratio of 1.19407; the grid oracle
# overshoots the inversion by at most one step
SCOTT_5X5 = 1.1940724304620018


def test_scott_five_by_five_frozen_oracle():
    est = scott_estimate(Z_P, Z_U, 0.1)
    assert est.c_hat == 0.5
    assert est.alpha_hat == pytest.approx(SCOTT_5X5, abs=5e-4)
    assert est.alpha_hat <= SCOTT_5X5


def test_scott_matches_direct_loop():
    # same objective evaluated threshold by threshold through the scalar inversion
    best = None
    for c in threshold_grid(Z_P, Z_U).candidates:
        kp = sum(z >= c for z in Z_P)
        ku = sum(z >= c for z in Z_U)
        num = ku / 5 + binomial_inversion(5, ku / 5, 0.1)
        den = kp / 5 - binomial_inversion(5, kp / 5, 0.1, lower=True)
        if den > 0 and (best is None or num / den < best[0]):
            best = (num / den, c)
    est = scott_estimate(Z_P, Z_U, 0.1)
    assert (est.alpha_hat, est.c_hat) == pytest.approx(best)


def test_scott_identical_samples():
    rng = np.random.default_rng(5)
    z = rng.random(5000)
    est = scott_estimate(z, z, 0.1)
    slack = binomial_inversion(5000, 1.0, 0.1, lower=True)
    assert 1.0 <= est.alpha_hat <= 1.0 + 4 * slack


def test_scott_union_bound_is_wider():
    z_p, z_u, _ = pure_bin_scores(1, n=2000)
    plain = scott_estimate(z_p, z_u, 0.1)
    union = scott_estimate(z_p, z_u, 0.1, union_bound=True)
    assert union.ucb_value >= plain.ucb_value


def test_scott_single_sample_stays_finite():
    # at c = 0 the lower inversion leaves delta^(1/n) > 0 in the denominator
    est = scott_estimate([0.5], [0.5], 0.01)
    assert est.c_hat == 0.0
    assert est.alpha_hat == pytest.approx(1 / 0.01, rel=1e-6)


@pytest.mark.slow
def test_pure_bin_ordering_over_seeds():
    errs = {"bbe": [], "scott": [], "naive": []}
    for seed in range(50):
        z_p, z_u, _ = pure_bin_scores(seed)
        errs["bbe"].append(abs(bbe_estimate(z_p, z_u).alpha_hat - 0.3))
        errs["scott"].append(abs(scott_estimate(z_p, z_u).alpha_hat - 0.3))
        errs["naive"].append(abs(naive_ratio_estimate(z_p, z_u).alpha_hat - 0.3))
    assert np.mean(errs["scott"]) >= np.mean(errs["bbe"])
    assert np.mean(errs["naive"]) > np.mean(errs["bbe"])


# ----------------------------------------------------------- diagnostics


def test_diagnostics_examples():
    d = top_bin_diagnostics([0.9, 0.8, 0.3], [1, 1, -1], [0.5])
    assert d.rows() == [(0.5, pytest.approx(2 / 3), 1.0)]
    allpos = top_bin_diagnostics([0.1, 0.5, 0.7], [1, 1, 1])
    assert np.all(allpos.purity[allpos.bin_size > 0] == 1.0)


def test_diagnostics_empty_bin_and_labels():
    d = top_bin_diagnostics([0.2, 0.4], [1, -1], [0.9])
    assert d.bin_size[0] == 0 and np.isnan(d.purity[0])
    with pytest.raises(UnsupportedOperationError):
        top_bin_diagnostics([0.2], None)


@given(st.lists(st.tuples(st.floats(0, 1), st.sampled_from([-1, 1])), min_size=1, max_size=40))
def test_diagnostics_against_direct_count(pairs):
    z, y = map(np.array, zip(*pairs))
    d = top_bin_diagnostics(z, y)
    assert np.all(np.diff(d.bin_size) <= 0)
    for c, size, pur in d.rows():
        inside = z >= c
        assert size == pytest.approx(inside.mean())
        if inside.any():
            assert pur == pytest.approx((y[inside] == 1).mean())


def test_diagnostics_purity_at_zero():
    n, alpha = 20000, 0.4
    rng = np.random.default_rng(11)
    y = np.where(rng.random(n) < alpha, 1, -1)
    z = rng.random(n)
    purity = top_bin_diagnostics(z, y, [0.0]).purity[0]
    assert abs(purity - alpha) <= 3 * math.sqrt(alpha * (1 - alpha) / n)


# ------------------------------------------------------------ ratio radius


def _radius_coverage(shrink, trials=100, n=500, delta=0.1):
    hits = 0
    for t in range(trials):
        rng = np.random.default_rng([3, t])
        z_p = rng.uniform(0.3, 1.0, n)
        z_u = np.where(rng.random(n) < 0.5, rng.uniform(0.3, 1.0, n), rng.uniform(0.0, 0.7, n))
        c = threshold_grid(z_p, z_u).candidates
        qp_hat = np.array([(z_p >= x).mean() for x in c])
        qu_hat = np.array([(z_u >= x).mean() for x in c])
        qp = np.clip((1 - c) / 0.7, 0, 1)
        true = (0.5 * qp + 0.5 * np.clip((0.7 - c) / 0.7, 0, 1)) / qp
        r = ratio_confidence_radius(qp_hat, true, n, n, delta) * shrink
        hits += bool(np.all(np.abs(qu_hat / qp_hat - true) <= r))
    return hits / trials


def test_ratio_radius_covers_and_is_not_vacuous():
    assert _radius_coverage(1.0) >= 0.9
    assert _radius_coverage(0.1) < 0.5
