import numpy as np
import pytest

from elasticavg.core import TimeSeries
from elasticavg.errors import BudgetError, ParameterError
from elasticavg.preimage import PreimageConfig, preimage_centroid, preimage_objective
from elasticavg.elastic import kdtw


def _set(rng, n=4, T=10):
    base = np.sin(np.linspace(0, 2 * np.pi, T))[:, None]
    return [base + 0.2 * rng.normal(size=(T, 1)) for _ in range(n)]


def test_objective_definition(rng):
    S = _set(rng, 3, 6)
    x = S[0]
    ref = 3 * kdtw(x, x, 1.0) - 2 * sum(kdtw(x, s, 1.0) for s in S)
    assert preimage_objective(x, S, 1.0) == pytest.approx(ref, rel=1e-12)


def test_trace_strictly_decreasing_and_budget(rng):
    S = _set(rng)
    res = preimage_centroid(S, 1.0, PreimageConfig(budget=300))
    tr = res.inertia_trace
    assert all(b < a for a, b in zip(tr, tr[1:]))
    assert res.evaluations <= 300
    assert tr[-1] == pytest.approx(preimage_objective(res.centroid, S, 1.0), rel=1e-9)
    assert len(res.trace_evaluations) == len(tr)
    assert res.trace_csv().splitlines()[0] == "evaluation,objective"


def test_zero_sweeps_returns_init(rng):
    S = _set(rng)
    init = TimeSeries(S[1])
    res = preimage_centroid(S, 1.0, PreimageConfig(max_sweeps=0), init=init)
    assert res.centroid == init
    assert res.evaluations == 0


def test_budget_below_one_sweep(rng):
    S = _set(rng, T=10)
    with pytest.raises(BudgetError):
        preimage_centroid(S, 1.0, PreimageConfig(budget=20))


def test_bounds_are_respected(rng):
    S = _set(rng)
    init = np.zeros((10, 1))
    res = preimage_centroid(S, 1.0, PreimageConfig(budget=400), init=init, bounds=(-0.3, 0.3))
    v = res.centroid.values
    assert v.min() >= -0.3 and v.max() <= 0.3
    with pytest.raises(ParameterError):
        preimage_centroid(S, 1.0, init=np.ones((10, 1)), bounds=(-0.3, 0.3))


def test_config_validation():
    with pytest.raises(ParameterError):
        PreimageConfig(budget=0)
    with pytest.raises(ParameterError):
        PreimageConfig(shrink_factor=1.0)
    with pytest.raises(ParameterError):
        PreimageConfig(initial_step=0)


def test_deterministic(rng):
    S = _set(rng)
    a = preimage_centroid(S, 1.0, PreimageConfig(budget=200))
    b = preimage_centroid(S, 1.0, PreimageConfig(budget=200))
    assert a.centroid == b.centroid and a.inertia_trace == b.inertia_trace


def test_objective_examples():
    assert preimage_objective([0.0], [[0.0]], 1.0) == pytest.approx(-2 / 3, rel=1e-14)
    x = np.array([0.1, 0.5, 0.2])
    assert preimage_objective(x, [x], 1.0) == pytest.approx(-kdtw(x, x, 1.0), rel=1e-12)
    S = [np.array([0.0, 1.0]), np.array([1.0, 1.0, 0.0])]
    assert preimage_objective(x, S + S, 1.0) == pytest.approx(2 * preimage_objective(x, S, 1.0),
                                                              rel=1e-12)


def test_singleton_does_not_get_worse():
    x = np.array([0.0, 1.0, 0.0])
    res = preimage_centroid([x], 1.0, PreimageConfig(budget=100), init=x)
    assert res.inertia_trace[-1] <= preimage_objective(x, [x], 1.0)


def test_decreases_on_cbf_class_within_short_budget():
    from elasticavg.core import synth_fixtures
    S = synth_fixtures("cbf", n_per_class=10, seed=0).by_label()["1"]
    res = preimage_centroid(S, 1.0, PreimageConfig(budget=4 * 128))
    assert len(res.inertia_trace) > 1
    assert res.inertia_trace[-1] < res.inertia_trace[0]
