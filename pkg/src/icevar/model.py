"""Additive autoregressive model with one small network per directed pair.

For target j the prediction is

    pred_j = beta_j + sum_i f_ij(lags of variable i)

where every f_ij is a one-hidden-layer ReLU network (K inputs, H hidden
units, affine scalar output). Additivity holds by construction, so the
per-pair outputs ARE the contribution decomposition.

Parameters for all N^2 networks live in one flat float64 vector; the per-pair
weight tensors are writable views into it. That makes Adam updates, gradient
checking, and bit-exact serialization straightforward, and lets the forward
and backward passes run as a handful of stacked matmuls over the pair axis.

Pair p = source * N + target. Lag vectors are most-recent first: slot 0 is
t-1, slot K-1 is t-K.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from . import __version__, rng
from .exceptions import ConfigError, DataError
from .windows import LagWindow

FORMAT_NAME = "icevar-model"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class Hyperparams:
    max_lag: int = 8
    hidden_units: int = 32
    dropout_rate: float = 0.10
    weight_decay_l2: float = 3e-4
    sparsity_l1: float = 0.15
    learning_rate: float = 3e-4
    batch_size: int = 128
    epochs: int = 1000
    val_split: float = 0.10
    seed: int = 0

    def __post_init__(self):
        if self.max_lag < 1:
            raise ConfigError(f"max_lag must be >= 1, got {self.max_lag}")
        if self.hidden_units < 1:
            raise ConfigError(f"hidden_units must be >= 1, got {self.hidden_units}")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ConfigError(f"dropout_rate must be in [0, 1), got {self.dropout_rate}")
        if self.weight_decay_l2 < 0 or self.sparsity_l1 < 0:
            raise ConfigError("regularization strengths must be >= 0")
        if self.learning_rate <= 0:
            raise ConfigError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.batch_size < 1 or self.epochs < 1:
            raise ConfigError("batch_size and epochs must be >= 1")
        if not 0.0 <= self.val_split < 1.0:
            raise ConfigError(f"val_split must be in [0, 1), got {self.val_split}")


@dataclass
class TrainingHistory:
    """Evaluation-mode (dropout off) loss traces: entry e is the model after
    e epochs, so entry 0 is the untrained model. Train arrays cover the
    training windows, val_mse the held-out monitoring windows (nan if the
    validation split is empty)."""

    train_objective: list[float] = field(default_factory=list)  # mse + l1 term
    train_mse: list[float] = field(default_factory=list)
    val_mse: list[float] = field(default_factory=list)


class AdditiveARModel:
    def __init__(
        self,
        n_vars: int,
        hp: Hyperparams,
        var_names: tuple[str, ...] | None = None,
        mean: np.ndarray | None = None,
        std: np.ndarray | None = None,
        theta: np.ndarray | None = None,
        history: TrainingHistory | None = None,
    ):
        self.n_vars = int(n_vars)
        self.hp = hp
        self.max_lag = hp.max_lag
        self.hidden_units = hp.hidden_units
        self.var_names = tuple(var_names) if var_names else tuple(f"v{i}" for i in range(n_vars))
        if len(self.var_names) != n_vars:
            raise DataError(f"{len(self.var_names)} names for {n_vars} variables")
        self.mean = None if mean is None else np.asarray(mean, dtype=float)
        self.std = None if std is None else np.asarray(std, dtype=float)
        self.history = history

        N, K, H = self.n_vars, self.max_lag, self.hidden_units
        P = N * N
        self._sizes = (P * K * H, P * H, P * H, P, N)
        self._offsets = np.concatenate([[0], np.cumsum(self._sizes)])
        self.n_params = int(self._offsets[-1])
        if theta is None:
            self.theta = np.zeros(self.n_params)
        else:
            theta = np.asarray(theta, dtype=float)
            if theta.shape != (self.n_params,):
                raise DataError(f"theta must have shape ({self.n_params},), got {theta.shape}")
            self.theta = theta
        self.src_index = np.repeat(np.arange(N), N)  # pair p -> source variable
        self.tgt_index = np.tile(np.arange(N), N)  # pair p -> target variable

    # --- parameter views (mutating them mutates theta) ---

    def _view(self, k: int, shape: tuple[int, ...]) -> np.ndarray:
        return self.theta[self._offsets[k] : self._offsets[k + 1]].reshape(shape)

    def param_views(self, vector: np.ndarray):
        """Reshape any flat (n_params,) vector the way theta is laid out:
        returns (w1, b1, w2, b2, beta) views into it."""
        N, K, H = self.n_vars, self.max_lag, self.hidden_units
        P = N * N
        shapes = [(P, K, H), (P, H), (P, H), (P,), (N,)]
        return tuple(
            vector[self._offsets[k] : self._offsets[k + 1]].reshape(shape)
            for k, shape in enumerate(shapes)
        )

    @property
    def w1(self) -> np.ndarray:  # (P, K, H)
        N, K, H = self.n_vars, self.max_lag, self.hidden_units
        return self._view(0, (N * N, K, H))

    @property
    def b1(self) -> np.ndarray:  # (P, H)
        N, H = self.n_vars, self.hidden_units
        return self._view(1, (N * N, H))

    @property
    def w2(self) -> np.ndarray:  # (P, H)
        N, H = self.n_vars, self.hidden_units
        return self._view(2, (N * N, H))

    @property
    def b2(self) -> np.ndarray:  # (P,)
        return self._view(3, (self.n_vars * self.n_vars,))

    @property
    def beta(self) -> np.ndarray:  # (N,)
        return self._view(4, (self.n_vars,))

    # --- construction ---

    @classmethod
    def initialize(
        cls,
        n_vars: int,
        hp: Hyperparams,
        var_names: tuple[str, ...] | None = None,
        mean: np.ndarray | None = None,
        std: np.ndarray | None = None,
    ) -> "AdditiveARModel":
        """Fresh model with uniform +/- 1/sqrt(fan_in) weights and biases per
        layer and zero target offsets, drawn from the init stream of hp.seed."""
        model = cls(n_vars, hp, var_names=var_names, mean=mean, std=std)
        gen = rng.stream(hp.seed, rng.INIT)
        K, H = hp.max_lag, hp.hidden_units
        bound1 = 1.0 / np.sqrt(K)
        bound2 = 1.0 / np.sqrt(H)
        model.w1[:] = gen.uniform(-bound1, bound1, size=model.w1.shape)
        model.b1[:] = gen.uniform(-bound1, bound1, size=model.b1.shape)
        model.w2[:] = gen.uniform(-bound2, bound2, size=model.w2.shape)
        model.b2[:] = gen.uniform(-bound2, bound2, size=model.b2.shape)
        model.beta[:] = 0.0
        return model

    # --- forward passes ---

    def pair_lags(self, lags: np.ndarray) -> np.ndarray:
        """Gather per-pair inputs: (B, N, K) lag array -> (P, B, K)."""
        return np.ascontiguousarray(lags[:, self.src_index, :].transpose(1, 0, 2))

    def forward_pairs(self, pair_inputs: np.ndarray, dropout_mask: np.ndarray | None = None):
        """Stacked forward over all pairs.

        pair_inputs: (P, B, K). Returns (cp, a1, z1) with cp the per-pair
        outputs (P, B); a1 is post-dropout when a mask is given.
        """
        z1 = np.matmul(pair_inputs, self.w1) + self.b1[:, None, :]  # (P, B, H)
        a1 = np.maximum(z1, 0.0)
        if dropout_mask is not None:
            a1 = a1 * dropout_mask
        cp = np.matmul(a1, self.w2[:, :, None])[:, :, 0] + self.b2[:, None]  # (P, B)
        return cp, a1, z1

    def lags_from_blocks(self, blocks: np.ndarray) -> np.ndarray:
        """(B, K, N) time-ordered blocks -> (B, N, K) lag-ordered inputs."""
        return np.ascontiguousarray(blocks[:, ::-1, :].transpose(0, 2, 1))

    def contributions(self, lags: np.ndarray) -> np.ndarray:
        """Evaluation-mode contributions, (B, N, N) indexed [b, source, target]."""
        cp, _, _ = self.forward_pairs(self.pair_lags(lags))
        B = lags.shape[0]
        return cp.reshape(self.n_vars, self.n_vars, B).transpose(2, 0, 1)

    def predict_batch(self, blocks: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Evaluation-mode predictions and contributions for (B, K, N) blocks."""
        contrib = self.contributions(self.lags_from_blocks(blocks))
        preds = self.beta[None, :] + contrib.sum(axis=1)
        return preds, contrib

    def predict(self, window: LagWindow) -> tuple[np.ndarray, np.ndarray]:
        """Single-window prediction: (preds (N,), contributions (N, N))."""
        block = np.asarray(window.block, dtype=float)
        if block.shape != (self.max_lag, self.n_vars):
            raise DataError(
                f"window block shape {block.shape} does not match model ({self.max_lag}, {self.n_vars})"
            )
        preds, contrib = self.predict_batch(block[None])
        return preds[0], contrib[0]

    def pair_output(self, source: int, target: int, lag_vectors: np.ndarray) -> np.ndarray:
        """Evaluate one contribution network f_ij on (M, K) lag vectors."""
        p = source * self.n_vars + target
        z1 = lag_vectors @ self.w1[p] + self.b1[p]
        return np.maximum(z1, 0.0) @ self.w2[p] + self.b2[p]

    def check_panel_stats(self, panel) -> None:
        """Raise unless the panel carries the standardization stats this
        model was trained with."""
        if self.mean is None or self.std is None:
            raise DataError("model carries no standardization stats")
        if panel.mean is None or panel.std is None:
            raise DataError("panel is not standardized; run standardize() first")
        if not (
            np.allclose(panel.mean, self.mean, rtol=1e-9, atol=1e-12)
            and np.allclose(panel.std, self.std, rtol=1e-9, atol=1e-12)
        ):
            raise DataError(
                "standardization stats mismatch between model and panel; "
                "the panel was not produced from the model's training data"
            )

    # --- serialization ---

    def to_dict(self) -> dict:
        N = self.n_vars
        networks = []
        for p in range(N * N):
            networks.append(
                {
                    "source": int(self.src_index[p]),
                    "target": int(self.tgt_index[p]),
                    "w1": self.w1[p].ravel().tolist(),
                    "b1": self.b1[p].tolist(),
                    "w2": self.w2[p].tolist(),
                    "b2": float(self.b2[p]),
                }
            )
        doc = {
            "format": FORMAT_NAME,
            "format_version": FORMAT_VERSION,
            "toolkit_version": __version__,
            "n_vars": N,
            "max_lag": self.max_lag,
            "hidden_units": self.hidden_units,
            "var_names": list(self.var_names),
            "hyperparams": {
                "max_lag": self.hp.max_lag,
                "hidden_units": self.hp.hidden_units,
                "dropout_rate": self.hp.dropout_rate,
                "weight_decay_l2": self.hp.weight_decay_l2,
                "sparsity_l1": self.hp.sparsity_l1,
                "learning_rate": self.hp.learning_rate,
                "batch_size": self.hp.batch_size,
                "epochs": self.hp.epochs,
                "val_split": self.hp.val_split,
                "seed": self.hp.seed,
            },
            "standardization": {
                "mean": self.mean.tolist() if self.mean is not None else None,
                "std": self.std.tolist() if self.std is not None else None,
            },
            "beta": self.beta.tolist(),
            "networks": networks,
            "training": None
            if self.history is None
            else {
                "train_objective": self.history.train_objective,
                "train_mse": self.history.train_mse,
                "val_mse": self.history.val_mse,
            },
        }
        return doc

    def save(self, path, meta: dict | None = None) -> None:
        doc = self.to_dict()
        if meta:
            doc["meta"] = meta
        with open(path, "w") as fh:
            json.dump(doc, fh)
            fh.write("\n")

    @classmethod
    def from_dict(cls, doc: dict) -> "AdditiveARModel":
        if doc.get("format") != FORMAT_NAME:
            raise DataError(f"not an {FORMAT_NAME} document")
        if doc.get("format_version") != FORMAT_VERSION:
            raise DataError(f"unsupported model format version {doc.get('format_version')}")
        hp = Hyperparams(**doc["hyperparams"])
        stats = doc["standardization"]
        history = None
        if doc.get("training"):
            history = TrainingHistory(
                train_objective=list(doc["training"]["train_objective"]),
                train_mse=list(doc["training"]["train_mse"]),
                val_mse=list(doc["training"]["val_mse"]),
            )
        model = cls(
            n_vars=doc["n_vars"],
            hp=hp,
            var_names=tuple(doc["var_names"]),
            mean=None if stats["mean"] is None else np.asarray(stats["mean"]),
            std=None if stats["std"] is None else np.asarray(stats["std"]),
            history=history,
        )
        N, K, H = model.n_vars, model.max_lag, model.hidden_units
        for net in doc["networks"]:
            p = net["source"] * N + net["target"]
            model.w1[p] = np.asarray(net["w1"], dtype=float).reshape(K, H)
            model.b1[p] = np.asarray(net["b1"], dtype=float)
            model.w2[p] = np.asarray(net["w2"], dtype=float)
            model.b2[p] = float(net["b2"])
        model.beta[:] = np.asarray(doc["beta"], dtype=float)
        return model

    @classmethod
    def load(cls, path) -> "AdditiveARModel":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def perturb_lags(lags: np.ndarray, variable: int, value: float, lag: int | None = None) -> np.ndarray:
    """Copy of a (B, N, K) lag array with one variable's slots replaced by a
    constant: all K slots when ``lag`` is None (sustained intervention), or
    only the given slot (lag 1 = t-1)."""
    out = lags.copy()
    if lag is None:
        out[:, variable, :] = value
    else:
        out[:, variable, lag - 1] = value
    return out
