"""Run configuration: one INI-style file with sections, strict keys.

Sections map onto the toolkit's config dataclasses; keys are the dataclass
field names. Unknown sections or keys are rejected, values are validated by
the dataclasses themselves. Precedence is defaults < config file < command
line flags.
"""

import configparser
from dataclasses import dataclass, fields, replace

from .analysis import BootstrapConfig
from .exceptions import ConfigError
from .ice import GridConfig, RegimeSpec
from .mechanisms import MechanismSpec
from .model import Hyperparams
from .synth import DgpConfig


def _opt_float(text: str):
    return None if text == "" else float(text)


def _opt_variable(text: str):
    """Regime variable: empty means the edge target's lagged value; an
    integer selects by position, anything else by name."""
    if text == "":
        return None
    try:
        return int(text)
    except ValueError:
        return text


def _boolean(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


_SCHEMA: dict[str, dict[str, callable]] = {
    "mechanism": {
        "kind": str,
        "threshold_c": float,
        "amplitude_a": float,
        "clip_lo": _opt_float,
        "clip_hi": _opt_float,
    },
    "dgp": {
        "length_T": int,
        "noise_sigma": float,
        "jump_prob_p": float,
        "jump_magnitude": float,
        "ar_x": float,
        "ar_y": float,
        "ar_z": float,
        "seed": int,
    },
    "train": {
        "max_lag": int,
        "hidden_units": int,
        "dropout_rate": float,
        "weight_decay_l2": float,
        "sparsity_l1": float,
        "learning_rate": float,
        "batch_size": int,
        "epochs": int,
        "val_split": float,
        "seed": int,
    },
    "grid": {"points": int, "lo_pct": float, "hi_pct": float},
    "regimes": {"variable": _opt_variable, "n_bins": int},
    "bootstrap": {"resamples": int, "confidence": float, "seed": int},
    "run": {"runs": int, "base_seed": int, "workers": int, "score_threshold": float},
}


@dataclass
class RunConfig:
    mechanism: MechanismSpec
    dgp: DgpConfig
    train: Hyperparams
    grid: GridConfig
    regimes: RegimeSpec
    bootstrap: BootstrapConfig
    runs: int = 15
    base_seed: int = 0
    workers: int = 0  # 0: use ICEVAR_THREADS or the CPU count
    score_threshold: float = 0.005

    def flat_items(self) -> list[tuple[str, object]]:
        """(section.key, value) pairs of the fully resolved configuration,
        for embedding in output metadata blocks."""
        out = []
        for section, obj in (
            ("mechanism", self.mechanism),
            ("dgp", self.dgp),
            ("train", self.train),
            ("grid", self.grid),
            ("regimes", self.regimes),
            ("bootstrap", self.bootstrap),
        ):
            for f in fields(obj):
                out.append((f"{section}.{f.name}", getattr(obj, f.name)))
        for name in ("runs", "base_seed", "workers", "score_threshold"):
            out.append((f"run.{name}", getattr(self, name)))
        return out


def default_config(kind: str = "linear") -> RunConfig:
    return RunConfig(
        mechanism=MechanismSpec(kind),
        dgp=DgpConfig(),
        train=Hyperparams(),
        grid=GridConfig(),
        regimes=RegimeSpec(),
        bootstrap=BootstrapConfig(),
    )


def _parse_sections(path) -> dict[tuple[str, str], object]:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # keys are case-sensitive field names
    try:
        with open(path) as fh:
            parser.read_file(fh, source=str(path))
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed config file {path}: {exc}") from exc

    values: dict[tuple[str, str], object] = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(
                f"{path}: unknown section [{section}]; expected one of {sorted(_SCHEMA)}"
            )
        for key, text in parser.items(section):
            conv = _SCHEMA[section].get(key)
            if conv is None:
                raise ConfigError(
                    f"{path}: unknown key {key!r} in [{section}]; "
                    f"expected one of {sorted(_SCHEMA[section])}"
                )
            try:
                values[(section, key)] = conv(text)
            except ValueError as exc:
                raise ConfigError(f"{path}: bad value for {section}.{key}: {exc}") from exc
    return values


def load_config(
    path=None, overrides: dict[tuple[str, str], object] | None = None
) -> tuple[RunConfig, set[tuple[str, str]]]:
    """Build a RunConfig from defaults, an optional file, and override pairs
    (already-typed values keyed by (section, key), e.g. from CLI flags).

    Returns the config and the set of keys that were explicitly set.
    """
    values: dict[tuple[str, str], object] = {}
    if path is not None:
        values.update(_parse_sections(path))
    for (section, key), value in (overrides or {}).items():
        if section not in _SCHEMA or key not in _SCHEMA[section]:
            raise ConfigError(f"unknown override {section}.{key}")
        values[(section, key)] = value

    def kwargs_for(section: str) -> dict:
        return {key: v for (sec, key), v in values.items() if sec == section}

    cfg = RunConfig(
        mechanism=MechanismSpec(**{"kind": "linear", **kwargs_for("mechanism")}),
        dgp=DgpConfig(**kwargs_for("dgp")),
        train=Hyperparams(**kwargs_for("train")),
        grid=GridConfig(**kwargs_for("grid")),
        regimes=RegimeSpec(**kwargs_for("regimes")),
        bootstrap=BootstrapConfig(**kwargs_for("bootstrap")),
        **kwargs_for("run"),
    )
    return cfg, set(values)


def benchmark_train_defaults(cfg: RunConfig, explicit: set[tuple[str, str]]) -> RunConfig:
    """The synthetic benchmark trains with K=4 (the systems are lag-1)
    unless the user pinned train.max_lag themselves."""
    if ("train", "max_lag") in explicit:
        return cfg
    return replace(cfg, train=replace(cfg.train, max_lag=4))
