"""Contribution tensors, scalar causal scores, and the variance split that
shows what a scalar score hides.

The scalar score of edge i -> j is a dispersion statistic of the
time-indexed contribution series f_ij over windows. Conditioning that series
on the source's most recent lag and splitting its variance into between-bin
and within-bin parts makes the information loss explicit: the squared score
equals between + within, so it upper-bounds the between-state variance that
actually carries the functional shape.

All variances here are population-convention (divide by count), matching the
standardization convention.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import DataError
from .model import AdditiveARModel
from .panel import PanelSeries
from .windows import WindowSet, build_windows

METRICS = ("sd", "var", "mean_abs", "max_abs")

_CHUNK = 1024  # windows per forward chunk when extracting the tensor


@dataclass
class ContributionTensor:
    var_names: tuple[str, ...]
    unit_ids: tuple[str, ...]
    contrib: np.ndarray  # (source, target, window)
    unit_index: np.ndarray  # (W,) index into unit_ids
    times: np.ndarray  # (W,)

    @property
    def n_vars(self) -> int:
        return self.contrib.shape[0]

    @property
    def n_windows(self) -> int:
        return self.contrib.shape[2]


@dataclass
class CausalScoreMatrix:
    var_names: tuple[str, ...]
    scores: np.ndarray  # (source, target)
    metric: str


@dataclass(frozen=True)
class VarianceDecomposition:
    total: float
    within: float
    between: float


def contribution_tensor(
    model: AdditiveARModel,
    panel: PanelSeries,
    windows: WindowSet | None = None,
    subset: str = "all",
) -> ContributionTensor:
    """Evaluation-mode contributions for every window.

    ``subset`` restricts to the training or validation windows of the
    model's own chronological split ("all", "train", "val").
    """
    model.check_panel_stats(panel)
    ws = windows if windows is not None else build_windows(panel, model.max_lag)
    keep = np.arange(len(ws))
    if subset != "all":
        train_idx, val_idx = ws.split_train_val(model.hp.val_split)
        if subset == "train":
            keep = train_idx
        elif subset == "val":
            keep = val_idx
        else:
            raise DataError(f"unknown window subset {subset!r}; expected all/train/val")
    lags = ws.lag_inputs[keep]
    W = lags.shape[0]
    N = model.n_vars
    out = np.empty((N, N, W))
    for start in range(0, W, _CHUNK):
        contrib = model.contributions(lags[start : start + _CHUNK])  # (B, N, N)
        out[:, :, start : start + contrib.shape[0]] = contrib.transpose(1, 2, 0)
    return ContributionTensor(
        var_names=ws.var_names,
        unit_ids=ws.unit_ids,
        contrib=out,
        unit_index=ws.unit_index[keep],
        times=ws.times[keep],
    )


def scalar_scores(tensor: ContributionTensor, metric: str = "sd") -> CausalScoreMatrix:
    """Dispersion of each edge's contribution series: sd (default), var,
    mean_abs (E|contrib|), or max_abs."""
    if metric not in METRICS:
        raise DataError(f"unknown metric {metric!r}; expected one of {METRICS}")
    if metric in ("sd", "var") and tensor.n_windows < 2:
        raise DataError(f"metric {metric!r} needs at least 2 windows, got {tensor.n_windows}")
    c = tensor.contrib
    if metric == "sd":
        scores = c.std(axis=2)
    elif metric == "var":
        scores = c.var(axis=2)
    elif metric == "mean_abs":
        scores = np.abs(c).mean(axis=2)
    else:
        scores = np.abs(c).max(axis=2)
    return CausalScoreMatrix(var_names=tensor.var_names, scores=scores, metric=metric)


def equal_count_bins(values: np.ndarray, n_bins: int) -> np.ndarray:
    """Equal-count quantile bin labels, ties broken by stable sort on
    (value, index) so no bin is ever empty while n_bins <= len(values)."""
    values = np.asarray(values)
    if n_bins < 2:
        raise DataError(f"need at least 2 bins, got {n_bins}")
    if len(values) < n_bins:
        raise DataError(f"{len(values)} values cannot fill {n_bins} bins without an empty bin")
    order = np.argsort(values, kind="stable")
    labels = np.empty(len(values), dtype=int)
    for r, chunk in enumerate(np.array_split(order, n_bins)):
        labels[chunk] = r
    return labels


def variance_decomposition(
    tensor: ContributionTensor,
    source_lag_values: np.ndarray,
    edge: tuple[int, int],
    n_bins: int,
) -> VarianceDecomposition:
    """Law-of-total-variance split of one edge's contribution series, binned
    on the source's most recent lag.

    total = within + between holds algebraically for the binned estimator,
    and total is exactly the squared sd-score of the edge.
    """
    i, j = edge
    series = tensor.contrib[i, j]
    if series.shape[0] != len(source_lag_values):
        raise DataError(
            f"{len(source_lag_values)} conditioning values for {series.shape[0]} windows"
        )
    labels = equal_count_bins(source_lag_values, n_bins)
    total = float(series.var())
    grand = series.mean()
    W = series.shape[0]
    between = 0.0
    within = 0.0
    for r in range(n_bins):
        members = series[labels == r]
        w = len(members) / W
        between += w * float((members.mean() - grand) ** 2)
        within += w * float(members.var())
    return VarianceDecomposition(total=total, within=within, between=between)
