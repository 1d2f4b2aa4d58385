import numpy as np
import pytest
from hypothesis import settings

# keep property tests reproducible and immune to timing under parallel load
settings.register_profile("icevar", deadline=None, derandomize=True)
settings.load_profile("icevar")

from icevar import (
    AdditiveARModel,
    DgpConfig,
    Hyperparams,
    MechanismSpec,
    PanelSeries,
    generate_system,
    standardize,
    train,
)


def make_random_model(
    seed: int, n_vars: int = 3, max_lag: int = 2, hidden: int = 4, scale: float = 0.6
) -> AdditiveARModel:
    """Random parameters of O(1) scale, no training."""
    hp = Hyperparams(
        max_lag=max_lag, hidden_units=hidden, dropout_rate=0.0, epochs=1, batch_size=8, seed=seed
    )
    model = AdditiveARModel.initialize(n_vars, hp)
    gen = np.random.default_rng(seed)
    model.theta[:] = gen.normal(0.0, scale, model.n_params)
    return model


def make_random_panel(seed: int, n_units: int = 2, length: int = 20, n_vars: int = 3) -> PanelSeries:
    gen = np.random.default_rng(seed)
    raw = PanelSeries(
        unit_ids=tuple(f"u{k}" for k in range(n_units)),
        var_names=tuple(f"v{k}" for k in range(n_vars)),
        values=gen.normal(0.0, 1.0, (n_units, length, n_vars)),
    )
    return standardize(raw)


def attach_panel_stats(model: AdditiveARModel, panel: PanelSeries) -> AdditiveARModel:
    model.mean = panel.mean.copy()
    model.std = panel.std.copy()
    return model


@pytest.fixture(scope="session")
def threshold_run():
    """A small but real trained system (threshold mechanism), shared by
    score/curve/analysis tests that need an actual fit."""
    panel = generate_system(MechanismSpec("threshold"), DgpConfig(length_T=400, seed=11))
    hp = Hyperparams(max_lag=3, epochs=80, seed=11)
    return train(panel, hp), panel


@pytest.fixture(scope="session")
def linear_run():
    panel = generate_system(MechanismSpec("linear"), DgpConfig(length_T=400, seed=5))
    hp = Hyperparams(max_lag=2, epochs=80, seed=5)
    return train(panel, hp), panel
