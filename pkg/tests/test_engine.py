import numpy as np
import pytest

from ptyabc import engine
from ptyabc.engine import AlgoParams, DivergenceError, abc_step, compare, preset_params, run, sp_run
from ptyabc.metrics import MetricRegion, data_error
from ptyabc.projections import ProbeObjectPair, concur_project, divide_project
from ptyabc.toygeom import abc_step as toy_step

from oracles import CASES, direct, max_relative_mismatch, random_circles


@pytest.mark.parametrize(
    "name, p, expected",
    [
        ("dc", None, (1, 1, 1)),
        ("ar", None, (0.5, 2, 2)),
        ("dr", None, (0.5, 2, 2)),
        ("sf", None, (1, 2, 1)),
        ("raar", 0.75, (0.5, 1.5, 2)),
        ("rrr", 0.5, (0.25, 2, 2)),
        ("tlambda", 1.0, (0.5, 2, 2)),
        ("tlambda", 0.75, (1 / 1.75, 1.75, 1.75)),
        ("custom", (0.3, 1.2, 0.9), (0.3, 1.2, 0.9)),
    ],
)
def test_preset_table(name, p, expected):
    np.testing.assert_allclose(preset_params(name, p), expected, rtol=1e-15)


@pytest.mark.parametrize("name, p", [("raar", None), ("raar", 0.0), ("rrr", 1.5), ("bogus", None), ("custom", 1.0)])
def test_preset_errors(name, p):
    with pytest.raises(ValueError):
        preset_params(name, p)


def test_default_parameter_and_labels():
    params = AlgoParams.from_preset("raar")
    assert (params.b, params.beta_or_lambda, params.label) == (1.5, 0.75, "raar:0.75")
    assert AlgoParams.from_preset("dc").label == "dc"
    assert AlgoParams(preset="sp", sp_order="shuffled").label == "sp:shuffled"


@pytest.mark.parametrize("bad", [dict(iters=0), dict(inner_iters=0), dict(a=np.nan), dict(sp_order="random")])
def test_params_validation(bad):
    with pytest.raises(ValueError):
        AlgoParams(**bad)


@pytest.mark.parametrize("name, p", CASES)
def test_toy_composite_matches_direct_formula(name, p):
    rng = np.random.default_rng(5)
    a, b, c = preset_params(name, p)
    for _ in range(10):
        circles = random_circles(rng)
        x = rng.normal(scale=2, size=(3, 2))
        want = direct(name, x, circles, p)
        assert np.linalg.norm(toy_step(x, circles, a, b, c) - want) <= 1e-12 * np.linalg.norm(want)


def test_oracle_sweep_and_tlambda_one_is_ar():
    assert max(max_relative_mismatch(20, seed=9).values()) <= 1e-12
    rng = np.random.default_rng(2)
    circles = random_circles(rng)
    x = rng.normal(size=(3, 2))
    np.testing.assert_array_equal(
        toy_step(x, circles, *preset_params("tlambda", 1.0)), toy_step(x, circles, *preset_params("ar"))
    )


def test_step_with_a_zero_is_identity(random_instance):
    x, geom, pair = random_instance
    from ptyabc.simulate import DiffractionStack

    data = DiffractionStack(np.ones(x.shape))
    for name, p in CASES:
        _, b, c = preset_params(name, p)
        out, _ = abc_step(x, data, geom, pair, AlgoParams(a=0.0, b=b, c=c))
        np.testing.assert_array_equal(out, x)


def test_dc_step_is_concur_of_divide(random_instance):
    x, geom, pair = random_instance
    from ptyabc.simulate import DiffractionStack

    data = DiffractionStack(np.random.default_rng(0).uniform(0.5, 2, x.shape))
    out, fitted = abc_step(x, data, geom, pair, AlgoParams.from_preset("dc"))
    want, want_pair = concur_project(divide_project(x, data), geom, pair)
    np.testing.assert_array_equal(out, want)
    np.testing.assert_array_equal(fitted.object, want_pair.object)


def start_pair(geom, seed=0):
    rng = np.random.default_rng(seed)
    m, n = geom.probe_size, geom.object_size
    return ProbeObjectPair(
        np.ones((m, m)) + 0.1 * rng.standard_normal((m, m)), np.ones((n, n)) + 0.1 * rng.standard_normal((n, n))
    )


def test_single_iteration_trace(small_problem):
    truth, geom, data = small_problem
    pair, trace = run(data, geom, start_pair(geom), AlgoParams.from_preset("dc", iters=1), truth=truth)
    assert len(trace) == 1 and trace.iteration == [1]
    assert trace.data_error[0] > 0 and trace.object_nrmse[0] > 0
    assert pair.object.shape == truth.object.shape


@pytest.mark.parametrize("name", ["dc", "ar", "sf", "raar", "rrr", "tlambda"])
def test_truth_init_is_fixed_point(small_problem, name):
    truth, geom, data = small_problem
    init = ProbeObjectPair(truth.probe, truth.object)
    region = MetricRegion.central(truth.object.shape)
    _, trace = run(data, geom, init, AlgoParams.from_preset(name, iters=20), truth, region)
    assert max(trace.data_error) <= 1e-8
    assert max(trace.object_nrmse) <= 1e-8


def test_run_reduces_error(small_problem):
    truth, geom, data = small_problem
    _, trace = run(data, geom, start_pair(geom), AlgoParams.from_preset("raar", iters=40), truth=truth)
    assert trace.data_error[-1] < 0.5 * trace.data_error[0]


def test_run_deterministic(small_problem):
    truth, geom, data = small_problem
    params = AlgoParams.from_preset("tlambda", iters=5)
    a = run(data, geom, start_pair(geom), params, truth=truth)
    b = run(data, geom, start_pair(geom), params, truth=truth)
    assert a[1].data_error == b[1].data_error
    np.testing.assert_array_equal(a[0].object, b[0].object)


def test_callback_and_from_pair(small_problem):
    truth, geom, data = small_problem
    seen = []
    _, trace = run(
        data, geom, start_pair(geom), AlgoParams.from_preset("dc", iters=3),
        callback=lambda k, x, pair: seen.append(k), from_pair=True,
    )
    assert seen == [1, 2, 3]
    assert trace.object_nrmse == [None] * 3


def test_run_rejects_mismatched_init(small_problem):
    truth, geom, data = small_problem
    with pytest.raises(ValueError):
        run(data, geom, ProbeObjectPair(np.ones((4, 4)), truth.object), AlgoParams())


def test_sp_truth_fixed_point(small_problem):
    truth, geom, data = small_problem
    _, trace = sp_run(data, geom, ProbeObjectPair(truth.probe, truth.object), AlgoParams(iters=3))
    assert max(trace.data_error) <= 1e-8


def test_sp_frozen_updates(small_problem):
    truth, geom, data = small_problem
    init = start_pair(geom)
    params = AlgoParams(iters=4, sp_alpha_obj=0.0, sp_alpha_probe=0.0, detilt=False)
    pair, trace = sp_run(data, geom, init, params)
    np.testing.assert_array_equal(pair.object, init.object)
    np.testing.assert_array_equal(pair.probe, init.probe)
    assert len(set(trace.data_error)) == 1


def test_sp_orders_differ(small_problem):
    truth, geom, data = small_problem
    init = start_pair(geom)
    _, fixed = sp_run(data, geom, init, AlgoParams(iters=5, sp_order="fixed"))
    _, shuf = sp_run(data, geom, init, AlgoParams(iters=5, sp_order="shuffled", seed=1))
    assert fixed.data_error != shuf.data_error
    assert fixed.data_error[-1] < fixed.data_error[0] and shuf.data_error[-1] < shuf.data_error[0]


def test_compare_single_preset_equals_run(small_problem):
    truth, geom, data = small_problem
    region = MetricRegion.central(truth.object.shape)
    traces = compare(data, geom, start_pair(geom), [("raar", 0.75)], 4, truth, region)
    _, trace = run(data, geom, start_pair(geom), AlgoParams.from_preset("raar", 0.75, iters=4), truth, region)
    assert list(traces) == ["raar:0.75"]
    assert traces["raar:0.75"].data_error == trace.data_error
    assert traces["raar:0.75"].object_nrmse == trace.object_nrmse


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_compare_isolates_divergence(small_problem, monkeypatch):
    truth, geom, data = small_problem
    original = engine.divide_project

    def poisoned(x, data, c=1.0, eps_frac=1e-12):
        out = original(x, data, c, eps_frac)
        if c == 1.0 and poisoned.calls >= 2:
            out = out * np.nan
        poisoned.calls += c == 1.0
        return out

    poisoned.calls = 0
    monkeypatch.setattr(engine, "divide_project", poisoned)
    traces = compare(data, geom, start_pair(geom), ["dc", "ar", ("sp", "fixed")], 5, truth)
    assert traces["dc"].status == "diverged" and len(traces["dc"]) == 2
    assert traces["ar"].status == "ok" and len(traces["ar"]) == 5
    assert traces["sp:fixed"].status == "ok"


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_run_raises_divergence(small_problem, monkeypatch):
    truth, geom, data = small_problem
    monkeypatch.setattr(engine, "divide_project", lambda x, *a, **k: x * np.inf)
    with pytest.raises(DivergenceError) as info:
        run(data, geom, start_pair(geom), AlgoParams(iters=3))
    assert info.value.iteration == 1 and info.value.trace.status == "diverged"


def test_compare_needs_presets(small_problem):
    truth, geom, data = small_problem
    with pytest.raises(ValueError):
        compare(data, geom, start_pair(geom), [], 3)


def test_data_error_metric_consistency(small_problem):
    truth, geom, data = small_problem
    assert data_error(ProbeObjectPair(truth.probe, truth.object).waves(geom), data) <= 1e-12
