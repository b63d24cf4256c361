import numpy as np
import pytest

from pu_kit.core import InvalidInputError, PUDataset, UnsupportedOperationError
from pu_kit.learn import TrainConfig
from pu_kit.synth import TaskSpec, generate, gen_triangle_task, pvn_eval_set
from pu_kit.tedn import TEDNConfig, evaluate_epochwise, tedn_train

LOGISTIC = TrainConfig(model="logistic", converge_tol=None)


def _triangle_run(seed=0, n=1000, warm=5, epochs=15, **kw):
    data = gen_triangle_task(n, n, 0.5, seed)
    cfg = TEDNConfig(warm_start_epochs=warm, train=TrainConfig(model="logistic", seed=seed, converge_tol=None),
                     max_epochs=epochs)
    ev = pvn_eval_set(TaskSpec("triangle", 0.5, n, n, seed), 500)
    return tedn_train(data, cfg, eval_set=ev, **kw)


def test_trace_layout():
    _, est, trace = _triangle_run()
    assert len(trace) == 20
    assert [r.phase for r in trace.rows] == ["warm"] * 5 + ["ted"] * 15
    assert [r.epoch for r in trace.rows] == list(range(1, 21))
    assert np.all(trace.column("keep_fraction")[:5] == 1.0)
    ted = [r for r in trace.rows if r.phase == "ted"]
    for r in ted:
        cap = 1 - 1 / 800
        assert r.keep_fraction == pytest.approx(1 - min(r.alpha_hat, cap))
    assert est.method == "tedn"
    assert est.alpha_hat == pytest.approx(np.mean([r.alpha_hat for r in ted[-10:]]))


def test_separable_triangle_recovers_alpha():
    _, est, trace = _triangle_run(n=2000, warm=20, epochs=20)
    assert abs(est.alpha_hat - 0.5) <= 0.05
    acc = trace.column("pvn_accuracy")[-10:]
    assert acc.mean() >= 0.98
    assert acc.std() <= 0.02


def test_pure_negative_unlabeled():
    spec = TaskSpec("triangle", 0.0, 1000, 1000, seed=3)
    data = generate(spec)
    _, est, _ = tedn_train(data, TEDNConfig(10, train=LOGISTIC, max_epochs=10))
    assert est.alpha_hat < 0.05


def test_stall_warning_when_unlabeled_is_all_positive(caplog):
    data = generate(TaskSpec("gaussian", 1.0, 100, 100, seed=0))
    with caplog.at_level("WARNING", logger="pu_kit"):
        _, _, trace = tedn_train(data, TEDNConfig(0, train=LOGISTIC, max_epochs=30))
    assert len(trace.warnings) == 1
    assert "stuck" in caplog.text


def test_convergence_can_stop_early():
    data = gen_triangle_task(500, 500, 0.5, 0)
    tc = TrainConfig(model="logistic", converge_tol=1e-4)
    _, _, trace = tedn_train(data, TEDNConfig(10, train=tc, max_epochs=200))
    assert len(trace) < 210


def test_deterministic():
    a = _triangle_run(seed=2)
    b = _triangle_run(seed=2)
    np.testing.assert_array_equal(a[2].column("alpha_hat"), b[2].column("alpha_hat"))
    for p, q in zip(a[0].params, b[0].params):
        np.testing.assert_array_equal(p, q)


def test_evaluate_epochwise_from_snapshots():
    model, _, trace = _triangle_run(epochs=5, keep_snapshots=True)
    ev = pvn_eval_set(TaskSpec("triangle", 0.5, 10, 10, 0), 500)
    recs = evaluate_epochwise(trace, ev, seed=0, alpha_true=0.5)
    assert len(recs) == len(trace)
    np.testing.assert_allclose([r.pvn_accuracy for r in recs], trace.column("pvn_accuracy"))
    assert recs[-1].abs_err == pytest.approx(abs(trace.rows[-1].alpha_hat - 0.5))
    listed = evaluate_epochwise([model], ev, method="x")
    assert listed[0].pvn_accuracy == pytest.approx(recs[-1].pvn_accuracy)
    assert np.isnan(listed[0].alpha_hat)


def test_evaluate_epochwise_errors():
    _, _, trace = _triangle_run(epochs=2)
    ev = pvn_eval_set(TaskSpec("triangle"), 10)
    with pytest.raises(InvalidInputError):
        evaluate_epochwise(trace, ev)
    with pytest.raises(UnsupportedOperationError):
        evaluate_epochwise(trace, ev.without_labels())


def test_rejects():
    with pytest.raises(InvalidInputError):
        TEDNConfig(split_fraction=1.0)
    with pytest.raises(InvalidInputError):
        tedn_train(PUDataset(np.zeros((0, 2)), np.ones((5, 2))))
