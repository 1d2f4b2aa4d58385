"""Lag-window construction for panel-aware autoregressive training.

Windows never cross unit boundaries: a unit of length L yields exactly L - K
windows, ordered by (unit, time). Each window pairs the K x N input block
X_{t-K:t-1} with the target vector X_t.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .exceptions import DataError
from .panel import PanelSeries


@dataclass(frozen=True)
class LagWindow:
    unit_id: str
    time: int
    block: np.ndarray  # (K, N), rows in time order (oldest first, t-1 last)
    target: np.ndarray  # (N,)


@dataclass
class WindowSet:
    """All windows of a panel, stacked for vectorized evaluation.

    ``blocks[w, k, n]`` is variable n at time t-K+k for window w; the final
    row (k = K-1) is lag 1. Behaves as a sequence of LagWindow for
    inspection and slicing.
    """

    unit_ids: tuple[str, ...]
    var_names: tuple[str, ...]
    max_lag: int
    blocks: np.ndarray  # (W, K, N)
    targets: np.ndarray  # (W, N)
    unit_index: np.ndarray  # (W,) index into unit_ids
    times: np.ndarray  # (W,) target time of each window

    def __len__(self) -> int:
        return self.blocks.shape[0]

    def __getitem__(self, w: int) -> LagWindow:
        return LagWindow(
            unit_id=self.unit_ids[self.unit_index[w]],
            time=int(self.times[w]),
            block=self.blocks[w],
            target=self.targets[w],
        )

    @property
    def n_vars(self) -> int:
        return self.blocks.shape[2]

    @cached_property
    def lag_inputs(self) -> np.ndarray:
        """(W, N, K) view of the blocks with lag index 0 = t-1 (most recent)."""
        return np.ascontiguousarray(self.blocks[:, ::-1, :].transpose(0, 2, 1))

    def lag_values(self, variable: int, lag: int = 1) -> np.ndarray:
        """Per-window value of one variable at one lag (lag 1 = t-1)."""
        return self.lag_inputs[:, variable, lag - 1]

    def split_train_val(self, val_fraction: float) -> tuple[np.ndarray, np.ndarray]:
        """Chronologically last ``val_fraction`` of windows per unit go to
        validation; returns (train_idx, val_idx) into this set."""
        train, val = [], []
        for u in range(len(self.unit_ids)):
            idx = np.flatnonzero(self.unit_index == u)
            n_val = int(len(idx) * val_fraction)
            cut = len(idx) - n_val
            train.append(idx[:cut])
            val.append(idx[cut:])
        return np.concatenate(train), np.concatenate(val)


def build_windows(panel: PanelSeries, max_lag: int) -> WindowSet:
    """Enumerate all K-lag windows, per unit, in time order."""
    if max_lag < 1:
        raise DataError(f"max_lag must be >= 1, got {max_lag}")
    L = panel.length
    for uid in panel.unit_ids:
        if L <= max_lag:
            raise DataError(
                f"unit {uid!r} has length {L}, too short for lag {max_lag} "
                f"(needs at least {max_lag + 1})"
            )
    blocks, targets, unit_index, times = [], [], [], []
    for u in range(panel.n_units):
        series = panel.values[u]  # (T, N)
        for t in range(max_lag, L):
            blocks.append(series[t - max_lag : t])
            targets.append(series[t])
            unit_index.append(u)
            times.append(panel.times[t])
    return WindowSet(
        unit_ids=tuple(panel.unit_ids),
        var_names=tuple(panel.var_names),
        max_lag=max_lag,
        blocks=np.asarray(blocks),
        targets=np.asarray(targets),
        unit_index=np.asarray(unit_index),
        times=np.asarray(times),
    )
