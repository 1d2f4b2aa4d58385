import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from icevar import DataError, build_windows
from icevar.scores import (
    ContributionTensor,
    contribution_tensor,
    equal_count_bins,
    scalar_scores,
    variance_decomposition,
)

from conftest import attach_panel_stats, make_random_model, make_random_panel
from oracles import SlowModel


def tensor_from(contrib: np.ndarray) -> ContributionTensor:
    n, _, w = contrib.shape
    return ContributionTensor(
        var_names=tuple(f"v{k}" for k in range(n)),
        unit_ids=("u",),
        contrib=contrib,
        unit_index=np.zeros(w, dtype=int),
        times=np.arange(w),
    )


def test_constant_series_metrics():
    c = np.full((1, 1, 10), -2.5)
    t = tensor_from(c)
    assert scalar_scores(t, "sd").scores[0, 0] == 0.0
    assert scalar_scores(t, "var").scores[0, 0] == 0.0
    assert scalar_scores(t, "mean_abs").scores[0, 0] == 2.5
    assert scalar_scores(t, "max_abs").scores[0, 0] == 2.5


def test_two_point_series_population_sd():
    t = tensor_from(np.array([[[-1.0, 1.0]]]))
    assert scalar_scores(t, "sd").scores[0, 0] == 1.0


def test_var_is_squared_sd():
    gen = np.random.default_rng(0)
    t = tensor_from(gen.normal(0, 2, (3, 3, 40)))
    sd = scalar_scores(t, "sd").scores
    var = scalar_scores(t, "var").scores
    assert np.max(np.abs(var - sd**2)) < 1e-12


@pytest.mark.parametrize("metric", ["sd", "var", "mean_abs", "max_abs"])
def test_metrics_invariant_to_window_permutation(metric):
    gen = np.random.default_rng(1)
    c = gen.normal(0, 1, (2, 2, 30))
    perm = gen.permutation(30)
    a = scalar_scores(tensor_from(c), metric).scores
    b = scalar_scores(tensor_from(c[:, :, perm]), metric).scores
    assert np.max(np.abs(a - b)) < 1e-12  # summation order may differ


def test_dispersion_needs_two_windows():
    t = tensor_from(np.ones((1, 1, 1)))
    with pytest.raises(DataError):
        scalar_scores(t, "sd")
    assert scalar_scores(t, "mean_abs").scores[0, 0] == 1.0


def test_unknown_metric_rejected():
    with pytest.raises(DataError):
        scalar_scores(tensor_from(np.ones((1, 1, 3))), "median")


def test_zero_model_gives_zero_tensor():
    from icevar import AdditiveARModel, Hyperparams

    panel = make_random_panel(2, length=25)
    model = AdditiveARModel(3, Hyperparams(max_lag=2, hidden_units=4, seed=0))
    attach_panel_stats(model, panel)
    tensor = contribution_tensor(model, panel)
    assert np.array_equal(tensor.contrib, np.zeros_like(tensor.contrib))


def test_tensor_matches_slow_oracle_and_additivity():
    model = make_random_model(3, n_vars=3, max_lag=2, hidden=4)
    panel = make_random_panel(3, length=15)
    attach_panel_stats(model, panel)
    ws = build_windows(panel, 2)
    tensor = contribution_tensor(model, panel, windows=ws)
    slow = SlowModel(model.to_dict())
    for w in [0, 5, len(ws) - 1]:
        np.testing.assert_allclose(
            tensor.contrib[:, :, w], slow.contributions(ws.blocks[w]), atol=1e-12
        )
    # summing over sources plus the bias reproduces predict()
    preds, _ = model.predict_batch(ws.blocks)
    recon = model.beta[None, :] + tensor.contrib.sum(axis=0).T
    assert np.max(np.abs(preds - recon)) < 1e-12


def test_stats_mismatch_rejected():
    model = make_random_model(4)
    panel_a = make_random_panel(4, length=20)
    panel_b = make_random_panel(5, length=20)
    attach_panel_stats(model, panel_a)
    with pytest.raises(DataError, match="mismatch"):
        contribution_tensor(model, panel_b)


def test_equal_count_bins_handle_ties():
    values = np.array([1.0, 1.0, 1.0, 1.0, 2.0, 2.0])
    labels = equal_count_bins(values, 3)
    assert np.array_equal(np.bincount(labels), [2, 2, 2])
    with pytest.raises(DataError):
        equal_count_bins(values[:2], 3)


def test_decomposition_within_zero_when_deterministic_given_bin():
    # contribution is a pure function of the bin index
    values = np.arange(30.0)
    labels = equal_count_bins(values, 3)
    series = labels.astype(float) * 2.0 - 1.0
    t = tensor_from(series[None, None, :])
    vd = variance_decomposition(t, values, (0, 0), 3)
    assert vd.within == 0.0
    assert abs(vd.total - vd.between) < 1e-15


def test_decomposition_between_small_when_independent():
    gen = np.random.default_rng(6)
    series = gen.normal(0, 1, 5000)
    values = gen.normal(0, 1, 5000)  # independent of the series
    t = tensor_from(series[None, None, :])
    vd = variance_decomposition(t, values, (0, 0), 5)
    assert vd.between < 0.05 * vd.total


@settings(max_examples=40, deadline=None)
@given(
    seed=st.integers(min_value=0, max_value=2**32 - 1),
    n_bins=st.sampled_from([2, 5, 10, 20]),
)
def test_decomposition_identity_and_inequality(seed, n_bins):
    gen = np.random.default_rng(seed)
    w = gen.integers(n_bins, 200)
    series = gen.normal(0, 3, int(w))
    values = gen.normal(0, 1, int(w))
    t = tensor_from(series[None, None, :])
    vd = variance_decomposition(t, values, (0, 0), n_bins)
    assert abs(vd.total - (vd.within + vd.between)) < 1e-10
    total_var = float(series.var())
    assert total_var >= vd.between - 1e-10


def test_subset_restriction():
    model = make_random_model(7, max_lag=2)
    panel = make_random_panel(7, n_units=1, length=22)
    attach_panel_stats(model, panel)
    full = contribution_tensor(model, panel, subset="all")
    tr = contribution_tensor(model, panel, subset="train")
    va = contribution_tensor(model, panel, subset="val")
    assert full.n_windows == tr.n_windows + va.n_windows
    np.testing.assert_array_equal(full.contrib[:, :, : tr.n_windows], tr.contrib)
