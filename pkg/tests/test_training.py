import numpy as np
import pytest

from icevar import (
    DataError,
    DgpConfig,
    Hyperparams,
    MechanismSpec,
    PanelSeries,
    TrainingDiverged,
    build_windows,
    generate_system,
    standardize,
    train,
)
from icevar.scores import contribution_tensor, scalar_scores


def _noise_panel(seed, length=300):
    """Three mutually independent noise columns: no real edges anywhere."""
    gen = np.random.default_rng(seed)
    return standardize(
        PanelSeries(("u",), ("a", "b", "c"), gen.normal(0, 1, (1, length, 3)))
    )


def small_hp(**kwargs):
    base = dict(max_lag=2, hidden_units=8, epochs=60, batch_size=64, seed=0)
    base.update(kwargs)
    return Hyperparams(**base)


def test_sparsity_penalty_shrinks_scores_on_noise_target():
    panel = _noise_panel(0)
    with_l1 = train(panel, small_hp(sparsity_l1=0.15))
    without_l1 = train(panel, small_hp(sparsity_l1=0.0))
    ws = build_windows(panel, 2)
    j = 1  # pure-noise target
    s_with = scalar_scores(contribution_tensor(with_l1, panel, windows=ws)).scores[:, j].sum()
    s_without = scalar_scores(contribution_tensor(without_l1, panel, windows=ws)).scores[:, j].sum()
    assert s_with < s_without


def test_first_epoch_descends_from_untrained_loss():
    panel = generate_system(MechanismSpec("linear"), DgpConfig(length_T=300, seed=2))
    model = train(panel, small_hp(epochs=3))
    h = model.history
    assert h.train_objective[1] < h.train_objective[0]
    assert len(h.train_objective) == len(h.train_mse) == len(h.val_mse) == 4


def test_training_is_bit_deterministic():
    panel = generate_system(MechanismSpec("threshold"), DgpConfig(length_T=300, seed=3))
    hp = small_hp(epochs=20)
    a = train(panel, hp)
    b = train(panel, hp)
    assert np.array_equal(a.theta, b.theta)
    assert a.history.train_objective == b.history.train_objective


def test_seed_changes_result():
    panel = generate_system(MechanismSpec("threshold"), DgpConfig(length_T=300, seed=3))
    a = train(panel, small_hp(epochs=5, seed=0))
    b = train(panel, small_hp(epochs=5, seed=1))
    assert not np.array_equal(a.theta, b.theta)


def test_divergence_reports_epoch_and_batch():
    panel = generate_system(MechanismSpec("linear"), DgpConfig(length_T=300, seed=4))
    with np.errstate(over="ignore", invalid="ignore"), pytest.raises(TrainingDiverged) as err:
        train(panel, small_hp(epochs=40, learning_rate=1e12))
    assert err.value.epoch >= 1
    assert err.value.batch >= 0


def test_unstandardized_panel_rejected():
    gen = np.random.default_rng(5)
    raw = PanelSeries(("u",), ("a", "b", "c"), gen.normal(0, 1, (1, 100, 3)))
    with pytest.raises(DataError, match="standardized"):
        train(raw, small_hp())


def test_model_carries_training_stats():
    panel = generate_system(MechanismSpec("linear"), DgpConfig(length_T=300, seed=6))
    model = train(panel, small_hp(epochs=2))
    assert np.array_equal(model.mean, panel.mean)
    assert np.array_equal(model.std, panel.std)


def test_validation_trace_monitors_only():
    """Same data, same seed, different val_split: the returned model is
    trained on fewer windows, but validation never feeds back into the fit
    beyond that (no early stopping: epochs always run to the end)."""
    panel = generate_system(MechanismSpec("linear"), DgpConfig(length_T=300, seed=7))
    model = train(panel, small_hp(epochs=15, val_split=0.25))
    assert len(model.history.val_mse) == 16
    assert np.all(np.isfinite(model.history.val_mse))
