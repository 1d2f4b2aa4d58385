"""Intervention-style response curves from a trained model.

For edge i -> j and intervention value x, the per-window effect is the
change in the prediction of j when variable i's lag slots are overwritten
with x, holding everything else fixed. Averaging over windows gives the
response curve; variants differ in which slots are overwritten (all K, or a
single lag) and in whether the average is taken within regime bins.

Additivity makes this exact and cheap: overwriting variable i's slots only
moves the f_ij term, so each delta is f_ij(modified lags) - f_ij(original
lags). The acceptance suite checks this against a brute-force recomputation
that rebuilds whole windows and re-predicts.

Interventions happen in the standardized input space, on a grid confined to
the empirical range of the source variable. Regime membership is always
computed from the unmodified windows, so an intervention never moves a
window between bins (relevant for self-edges, where the intervened slots
coincide with the regime variable).
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigError, DataError
from .model import AdditiveARModel
from .panel import PanelSeries
from .scores import equal_count_bins
from .windows import WindowSet, build_windows


@dataclass(frozen=True)
class GridConfig:
    points: int = 81
    lo_pct: float = 2.0
    hi_pct: float = 98.0


@dataclass(frozen=True)
class Grid:
    values: np.ndarray  # strictly ascending
    variable: str
    lo_pct: float
    hi_pct: float

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class RegimeSpec:
    """How to bin windows into regimes. ``variable`` None means the lagged
    value of the edge's target; otherwise a variable name or index whose
    lag-1 value is binned. Bins are equal-count tertiles by default."""

    variable: str | int | None = None
    n_bins: int = 3

    def __post_init__(self):
        if self.n_bins < 2:
            raise ConfigError(f"regimes need at least 2 bins, got {self.n_bins}")


@dataclass
class ResponseCurve:
    grid: Grid
    response: np.ndarray  # (G,)
    source: str
    target: str
    variant: str  # aggregated | lag_specific | regime
    lag: int | None = None
    bin_responses: np.ndarray | None = None  # (n_bins, G), low bin first
    bin_counts: np.ndarray | None = None  # (n_bins,)
    regime_variable: str | None = None
    ci_lower: np.ndarray | None = None  # (G,) band on the aggregate response
    ci_upper: np.ndarray | None = None


def make_grid(
    panel: PanelSeries,
    variable: int | str,
    points: int = 81,
    lo_pct: float = 2.0,
    hi_pct: float = 98.0,
) -> Grid:
    """Evenly spaced intervention values between two empirical percentiles
    of one variable, never beyond its observed range."""
    if points < 2:
        raise DataError(f"grid needs at least 2 points, got {points}")
    if not (0.0 <= lo_pct < hi_pct <= 100.0):
        raise DataError(f"percentile bounds must satisfy 0 <= lo < hi <= 100, got {lo_pct}, {hi_pct}")
    idx = panel.var_index(variable) if isinstance(variable, str) else int(variable)
    if not 0 <= idx < panel.n_vars:
        raise DataError(f"variable index {idx} out of range for {panel.n_vars} variables")
    vals = panel.values[:, :, idx].ravel()
    lo, hi = np.percentile(vals, [lo_pct, hi_pct])
    if not lo < hi:
        raise DataError(
            f"degenerate grid range for variable {panel.var_names[idx]!r}: "
            f"percentiles {lo_pct} and {hi_pct} both map to {lo!r}"
        )
    return Grid(
        values=np.linspace(lo, hi, points),
        variable=panel.var_names[idx],
        lo_pct=lo_pct,
        hi_pct=hi_pct,
    )


def _resolve_edge(names: tuple[str, ...], edge) -> tuple[int, int]:
    out = []
    for part in edge:
        if isinstance(part, str):
            try:
                out.append(names.index(part))
            except ValueError:
                raise DataError(f"no variable named {part!r}; panel has {list(names)}") from None
        else:
            idx = int(part)
            if not 0 <= idx < len(names):
                raise DataError(f"edge index {idx} out of range for {len(names)} variables")
            out.append(idx)
    return out[0], out[1]


def prepare_edge(model, panel, edge, windows):
    model.check_panel_stats(panel)
    i, j = _resolve_edge(tuple(panel.var_names), edge)
    ws = windows if windows is not None else build_windows(panel, model.max_lag)
    if len(ws) == 0:
        raise DataError("no windows to average over")
    base = model.pair_output(i, j, ws.lag_inputs[:, i, :])  # f_ij on unmodified lags
    return i, j, ws, base


def ice_lag_aggregated(
    model: AdditiveARModel,
    panel: PanelSeries,
    edge,
    grid: Grid,
    windows: WindowSet | None = None,
) -> ResponseCurve:
    """Sustained intervention: all K lag slots of the source set to x."""
    i, j, ws, base = prepare_edge(model, panel, edge, windows)
    sustained = np.repeat(grid.values[:, None], model.max_lag, axis=1)  # (G, K)
    response = model.pair_output(i, j, sustained) - base.mean()
    return ResponseCurve(
        grid=grid,
        response=response,
        source=panel.var_names[i],
        target=panel.var_names[j],
        variant="aggregated",
    )


def ice_lag_specific(
    model: AdditiveARModel,
    panel: PanelSeries,
    edge,
    lag: int,
    grid: Grid,
    windows: WindowSet | None = None,
) -> ResponseCurve:
    """Intervene on a single lag slot (lag 1 = t-1) of the source."""
    if not 1 <= lag <= model.max_lag:
        raise DataError(f"lag must be in 1..{model.max_lag}, got {lag}")
    i, j, ws, base = prepare_edge(model, panel, edge, windows)
    lag_vecs = np.ascontiguousarray(ws.lag_inputs[:, i, :])  # (W, K)
    base_mean = base.mean()
    response = np.empty(len(grid))
    for g, x in enumerate(grid.values):
        modified = lag_vecs.copy()
        modified[:, lag - 1] = x
        response[g] = model.pair_output(i, j, modified).mean() - base_mean
    return ResponseCurve(
        grid=grid,
        response=response,
        source=panel.var_names[i],
        target=panel.var_names[j],
        variant="lag_specific",
        lag=lag,
    )


def regime_values(ws: WindowSet, target: int, regimes: RegimeSpec) -> tuple[np.ndarray, str]:
    """Per-window regime variable values and the variable's name. Default is
    the lag-1 value of the target."""
    if regimes.variable is None:
        ridx = target
    elif isinstance(regimes.variable, str):
        try:
            ridx = ws.var_names.index(regimes.variable)
        except ValueError:
            raise DataError(
                f"no variable named {regimes.variable!r}; panel has {list(ws.var_names)}"
            ) from None
    else:
        ridx = int(regimes.variable)
        if not 0 <= ridx < ws.n_vars:
            raise DataError(f"regime variable index {ridx} out of range")
    return ws.lag_values(ridx, lag=1), ws.var_names[ridx]


def ice_regime_conditional(
    model: AdditiveARModel,
    panel: PanelSeries,
    edge,
    grid: Grid,
    regimes: RegimeSpec = RegimeSpec(),
    windows: WindowSet | None = None,
) -> ResponseCurve:
    """Sustained intervention averaged within equal-count regime bins, plus
    the unconditional curve."""
    i, j, ws, base = prepare_edge(model, panel, edge, windows)
    rvals, rname = regime_values(ws, j, regimes)
    labels = equal_count_bins(rvals, regimes.n_bins)
    sustained = np.repeat(grid.values[:, None], model.max_lag, axis=1)
    intervened = model.pair_output(i, j, sustained)  # (G,)
    response = intervened - base.mean()
    bin_responses = np.empty((regimes.n_bins, len(grid)))
    bin_counts = np.empty(regimes.n_bins, dtype=int)
    for r in range(regimes.n_bins):
        members = base[labels == r]
        if members.size == 0:
            raise DataError(f"regime bin {r} is empty")
        bin_responses[r] = intervened - members.mean()
        bin_counts[r] = members.size
    return ResponseCurve(
        grid=grid,
        response=response,
        source=panel.var_names[i],
        target=panel.var_names[j],
        variant="regime",
        bin_responses=bin_responses,
        bin_counts=bin_counts,
        regime_variable=rname,
    )
