"""Three-variable synthetic systems with a controlled causal mechanism.

One directed edge (X -> Y) is causal, through a chosen mechanism g; X carries
an occasional jump component so the tails of the state space are visited and
nonlinear shapes are expressed; Z is a purely autoregressive distractor.

    X_t = ar_x * X_{t-1} + eps_X + J_t
    Y_t = ar_y * Y_{t-1} + g(X_{t-1}) + eps_Y
    Z_t = ar_z * Z_{t-1} + eps_Z

with eps ~ N(0, sigma^2) iid, J_t = +/- jump_magnitude each with probability
p/2, initial states 0, and the output standardized column-wise.
"""

from dataclasses import dataclass

import numpy as np

from . import rng
from .exceptions import ConfigError, NumericalError
from .mechanisms import MechanismSpec, eval_mechanism
from .panel import PanelSeries, standardize

VAR_NAMES = ("X", "Y", "Z")


@dataclass(frozen=True)
class DgpConfig:
    length_T: int = 2000
    noise_sigma: float = 0.5
    jump_prob_p: float = 0.15
    jump_magnitude: float = 1.5
    ar_x: float = 0.6
    ar_y: float = 0.3
    ar_z: float = 0.6
    seed: int = 0

    def __post_init__(self):
        if self.length_T < 2:
            raise ConfigError(f"length_T must be >= 2, got {self.length_T}")
        if not 0.0 <= self.jump_prob_p <= 1.0:
            raise ConfigError(f"jump_prob_p must be in [0, 1], got {self.jump_prob_p}")
        if self.noise_sigma < 0.0:
            raise ConfigError(f"noise_sigma must be >= 0, got {self.noise_sigma}")


def draw_jumps(cfg: DgpConfig) -> np.ndarray:
    """The jump path J_2..J_T (length T, entry 0 unused and set to 0)."""
    gen = rng.stream(cfg.seed, rng.JUMP)
    u = gen.random(cfg.length_T)
    jumps = np.where(
        u < cfg.jump_prob_p / 2.0,
        cfg.jump_magnitude,
        np.where(u < cfg.jump_prob_p, -cfg.jump_magnitude, 0.0),
    )
    jumps[0] = 0.0
    return jumps


def generate_raw(spec: MechanismSpec, cfg: DgpConfig) -> PanelSeries:
    """Run the recursion from zero initial states, without standardization."""
    T = cfg.length_T
    noise = rng.stream(cfg.seed, rng.NOISE).normal(0.0, cfg.noise_sigma, size=(T, 3))
    jumps = draw_jumps(cfg)
    x = np.zeros(T)
    y = np.zeros(T)
    z = np.zeros(T)
    # X is autonomous, so its path can be rolled out first and g applied in bulk.
    for t in range(1, T):
        x[t] = cfg.ar_x * x[t - 1] + noise[t, 0] + jumps[t]
    gx = eval_mechanism(spec, x)
    for t in range(1, T):
        y[t] = cfg.ar_y * y[t - 1] + gx[t - 1] + noise[t, 1]
        z[t] = cfg.ar_z * z[t - 1] + noise[t, 2]
    out = np.stack([x, y, z], axis=1)
    if not np.all(np.isfinite(out)):
        raise NumericalError("synthetic recursion produced non-finite values (parameter blow-up)")
    return PanelSeries(unit_ids=("u0",), var_names=VAR_NAMES, values=out[None, :, :])


def generate_system(spec: MechanismSpec, cfg: DgpConfig) -> PanelSeries:
    """A single-unit standardized (X, Y, Z) panel; keeps the raw moments."""
    return standardize(generate_raw(spec, cfg))
