import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pu_kit.core import InvalidInputError
from pu_kit.synth import (
    TaskSpec,
    anchor_score,
    gen_anchor_task,
    gen_triangle_task,
    generate,
    pvn_eval_set,
    sample_unlabeled,
)


def _point_in_triangle(p, a, b, c):
    def side(p1, p2, p3):
        return (p1[:, 0] - p3[0]) * (p2[1] - p3[1]) - (p2[0] - p3[0]) * (p1[:, 1] - p3[1])
    d1, d2, d3 = side(p, a, b), side(p, b, c), side(p, c, a)
    neg = (d1 < 0) | (d2 < 0) | (d3 < 0)
    pos = (d1 > 0) | (d2 > 0) | (d3 > 0)
    return ~(neg & pos)


def test_triangle_supports():
    d = gen_triangle_task(2000, 2000, 0.5, seed=0)
    assert np.all(_point_in_triangle(d.positives, (-1, 0.1), (0, 4), (1, 0.1)))
    y = d.hidden_labels
    assert np.all(d.unlabeled[y == 1, 1] >= 0.1 - 1e-12)
    assert np.all(d.unlabeled[y == -1, 1] <= -0.1 + 1e-12)
    assert np.all(_point_in_triangle(d.unlabeled[y == -1], (-1, -0.1), (4, -4), (1, -0.1)))


def test_triangle_is_uniform():
    # the positive triangle is symmetric about x = 0 and its centroid sits at y = 1.4
    d = gen_triangle_task(20000, 10, seed=1)
    assert abs(d.positives[:, 0].mean()) < 0.02
    assert d.positives[:, 1].mean() == pytest.approx(1.4, abs=0.03)


@settings(max_examples=30, deadline=None)
@given(st.floats(0, 1), st.integers(1, 500), st.integers(0, 2**20))
def test_exact_count_mixture(alpha, n, seed):
    draw = lambda rng, k: np.full((k, 1), 1.0)
    X, y = sample_unlabeled(draw, lambda rng, k: np.zeros((k, 1)), alpha, n, seed, exact_count=True)
    assert int((y == 1).sum()) == round(alpha * n)
    np.testing.assert_array_equal(X[:, 0] == 1.0, y == 1)


def test_bernoulli_mixture_proportion():
    spec = TaskSpec("gaussian", 0.3, 10, 20000, seed=4)
    d = generate(spec)
    assert abs((d.hidden_labels == 1).mean() - 0.3) < 3 * np.sqrt(0.21 / 20000) + 1e-9


def test_generators_are_deterministic():
    for kind in ("gaussian", "triangle", "anchor", "custom-score"):
        spec = TaskSpec(kind, 0.4, 50, 60, seed=9)
        a, b = generate(spec), generate(spec)
        np.testing.assert_array_equal(a.unlabeled, b.unlabeled)
        np.testing.assert_array_equal(a.hidden_labels, b.hidden_labels)
        assert a.alpha_true == 0.4


def test_anchor_task_shapes_and_support():
    d = gen_anchor_task(0.3, 0.5, 5000, 5000, seed=0)
    assert d.dim == 1
    x = d.positives[:, 0]
    assert np.mean(x >= 2.0) == pytest.approx(0.3, abs=0.03)
    neg = d.unlabeled[d.hidden_labels == -1, 0]
    assert neg.max() <= 1.0
    s = anchor_score(d.unlabeled)
    assert np.all((s >= 0) & (s <= 1))
    assert gen_anchor_task(0.3, 0.5, 10, 10, dim=4).dim == 4


def test_score_task_ranges():
    d = generate(TaskSpec("custom-score", 0.3, 500, 500, seed=2))
    assert d.positives.min() >= 0.5 and d.positives.max() <= 1.0
    assert d.unlabeled[d.hidden_labels == -1].max() < 0.5


def test_eval_set_balanced_and_independent():
    spec = TaskSpec("gaussian", 0.5, 100, 100, seed=0)
    ev = pvn_eval_set(spec, 300)
    assert (ev.hidden_labels == 1).sum() == 300 == (ev.hidden_labels == -1).sum()
    assert not np.isin(ev.unlabeled[:, 0], generate(spec).unlabeled[:, 0]).any()


@pytest.mark.parametrize("kw", [{"kind": "spiral"}, {"alpha": 1.2}, {"n_u": -1},
                                {"kind": "anchor", "gamma_margin": 0.0}, {"scale": 0.0}])
def test_spec_rejects(kw):
    with pytest.raises(InvalidInputError):
        TaskSpec(**kw)


def test_score_ranges_rejected():
    with pytest.raises(InvalidInputError):
        generate(TaskSpec("custom-score", pos_range=(0.8, 0.2)))
