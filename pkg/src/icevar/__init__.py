"""icevar: additive autoregressive models with per-edge contribution
networks, scalar causal scores, and ICE-based causal response curves for
balanced panel time series."""

__version__ = "0.1.0"

from .exceptions import ConfigError, DataError, IcevarError, NumericalError, TrainingDiverged  # noqa: E402,F401
from .mechanisms import KINDS, MechanismSpec, eval_mechanism  # noqa: E402,F401
from .panel import PanelSeries, read_panel_csv, standardize, write_panel_csv  # noqa: E402,F401
from .synth import DgpConfig, generate_raw, generate_system  # noqa: E402,F401
from .windows import LagWindow, WindowSet, build_windows  # noqa: E402,F401
from .model import AdditiveARModel, Hyperparams  # noqa: E402,F401
from .training import loss_and_gradient, train  # noqa: E402,F401
