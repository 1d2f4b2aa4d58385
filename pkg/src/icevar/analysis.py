"""Curve-level post-processing: functional-form flags, recovery scoring
against a known mechanism, bootstrap bands, and the edge-wide survey.

Classification thresholds are fixed constants, and every flag is a pure
function of the supporting statistics reported next to it, so emitted tables
can be audited by recomputation.
"""

from dataclasses import dataclass

import numpy as np

from . import rng
from .exceptions import ConfigError, DataError, NumericalError
from .ice import (
    Grid,
    GridConfig,
    RegimeSpec,
    ResponseCurve,
    prepare_edge,
    ice_regime_conditional,
    make_grid,
    regime_values,
)
from .mechanisms import MechanismSpec, eval_mechanism
from .model import AdditiveARModel
from .panel import PanelSeries
from .scores import contribution_tensor, equal_count_bins, scalar_scores
from .windows import WindowSet, build_windows

# Flag thresholds. monotone: fraction of adjacent steps against the dominant
# direction; threshold: low-regime vs high-regime peak magnitude; saturating:
# tail range vs middle range with quarter/half/quarter grid sections.
MONOTONE_VIOLATION_LIMIT = 0.10
THRESHOLD_RATIO_LIMIT = 0.40
SATURATION_RATIO_LIMIT = 0.15

MAX_REDRAWS_PER_RESAMPLE = 100


@dataclass(frozen=True)
class FunctionalFormFlags:
    monotone: bool
    threshold_activation: bool
    saturating: bool
    regime_reversal: bool
    violation_frac: float
    regime_ratio: float  # max|low-bin| / max|high-bin|
    tail_ratio_lo: float  # first-quarter range / middle range
    tail_ratio_hi: float  # last-quarter range / middle range


@dataclass(frozen=True)
class BootstrapConfig:
    resamples: int = 200
    confidence: float = 0.95
    seed: int = 0

    def __post_init__(self):
        if self.resamples < 2:
            raise ConfigError(f"need at least 2 resamples, got {self.resamples}")
        if not 0.0 < self.confidence < 1.0:
            raise ConfigError(f"confidence must be in (0, 1), got {self.confidence}")


@dataclass
class CurveBand:
    lower: np.ndarray  # (G,)
    upper: np.ndarray  # (G,)
    point: np.ndarray  # full-sample estimate


@dataclass
class BootstrapResult:
    grid: Grid
    aggregate: CurveBand
    bins: list[CurveBand]
    n_redraws: int  # resamples redrawn because a regime bin came up empty


def classify_curve(
    curve: ResponseCurve, bin_responses: np.ndarray | None = None
) -> FunctionalFormFlags:
    """Flags for one edge's response curve.

    Monotonicity, saturation, and reversal read the aggregate curve;
    threshold activation compares the lowest and highest regime-bin curves
    (taken from the curve itself unless passed explicitly).
    """
    y = np.asarray(curve.response, dtype=float)
    G = len(y)
    if G < 4:
        raise DataError(f"classification needs a grid of at least 4 points, got {G}")
    bins = bin_responses if bin_responses is not None else curve.bin_responses
    if bins is None:
        raise DataError("threshold-activation flag needs per-regime curves; none were provided")
    bins = np.asarray(bins, dtype=float)

    diffs = np.diff(y)
    n_pos = int(np.sum(diffs > 0))
    n_neg = int(np.sum(diffs < 0))
    # dominant direction by majority; zero steps are never violations
    violations = n_neg if n_pos >= n_neg else n_pos
    violation_frac = violations / len(diffs)

    low_mag = float(np.max(np.abs(bins[0])))
    high_mag = float(np.max(np.abs(bins[-1])))
    regime_ratio = low_mag / high_mag if high_mag > 0.0 else float("inf")

    q = G // 4
    mid_range = float(np.ptp(y[q : G - q]))
    if mid_range > 0.0:
        tail_ratio_lo = float(np.ptp(y[:q])) / mid_range
        tail_ratio_hi = float(np.ptp(y[G - q :])) / mid_range
    else:
        tail_ratio_lo = tail_ratio_hi = float("inf")

    reversal = bool(np.any(y[:-1] * y[1:] < 0.0) or np.any(y == 0.0))

    return FunctionalFormFlags(
        monotone=violation_frac < MONOTONE_VIOLATION_LIMIT,
        threshold_activation=regime_ratio < THRESHOLD_RATIO_LIMIT,
        saturating=min(tail_ratio_lo, tail_ratio_hi) < SATURATION_RATIO_LIMIT,
        regime_reversal=reversal,
        violation_frac=violation_frac,
        regime_ratio=regime_ratio,
        tail_ratio_lo=tail_ratio_lo,
        tail_ratio_hi=tail_ratio_hi,
    )


def recovery_correlation(curve: ResponseCurve, spec: MechanismSpec) -> float:
    """Pearson r between the estimated curve and the true mechanism on the
    same grid; invariant to affine rescaling of either side."""
    est = np.asarray(curve.response, dtype=float)
    true = eval_mechanism(spec, curve.grid.values)
    est_sd = est.std()
    true_sd = true.std()
    if est_sd == 0.0:
        raise NumericalError("estimated curve is constant; correlation undefined")
    if true_sd == 0.0:
        raise NumericalError("true mechanism is constant on this grid; correlation undefined")
    return float(np.mean((est - est.mean()) * (true - true.mean())) / (est_sd * true_sd))


def bootstrap_ci(
    model: AdditiveARModel,
    panel: PanelSeries,
    edge,
    grid: Grid,
    regimes: RegimeSpec = RegimeSpec(),
    cfg: BootstrapConfig = BootstrapConfig(),
    windows: WindowSet | None = None,
) -> BootstrapResult:
    """Pointwise percentile bands for the regime-conditional response curves.

    Windows are resampled with replacement (regime labels travel with their
    windows); a resample that empties a bin is redrawn, keeping band shapes
    stable, and the number of redraws is reported.
    """
    i, j, ws, base = prepare_edge(model, panel, edge, windows)
    W = len(base)
    if W < 2:
        raise DataError(f"bootstrap needs at least 2 windows, got {W}")
    rvals, _ = regime_values(ws, j, regimes)
    labels = equal_count_bins(rvals, regimes.n_bins)
    sustained = np.repeat(grid.values[:, None], model.max_lag, axis=1)
    intervened = model.pair_output(i, j, sustained)  # (G,)

    gen = rng.stream(cfg.seed, rng.BOOTSTRAP)
    agg_draws = np.empty((cfg.resamples, len(grid)))
    bin_draws = np.empty((cfg.resamples, regimes.n_bins, len(grid)))
    n_redraws = 0
    for b in range(cfg.resamples):
        for attempt in range(MAX_REDRAWS_PER_RESAMPLE + 1):
            idx = gen.integers(0, W, size=W)
            counts = np.bincount(labels[idx], minlength=regimes.n_bins)
            if np.all(counts > 0):
                break
            n_redraws += 1
        else:
            raise NumericalError(
                f"resample {b} still empties a regime bin after "
                f"{MAX_REDRAWS_PER_RESAMPLE} redraws"
            )
        picked = base[idx]
        agg_draws[b] = intervened - picked.mean()
        lab = labels[idx]
        for r in range(regimes.n_bins):
            bin_draws[b, r] = intervened - picked[lab == r].mean()

    lo_q = 100.0 * (1.0 - cfg.confidence) / 2.0
    hi_q = 100.0 - lo_q
    point_agg = intervened - base.mean()
    agg_lo, agg_hi = np.percentile(agg_draws, [lo_q, hi_q], axis=0)
    bands = []
    for r in range(regimes.n_bins):
        lo, hi = np.percentile(bin_draws[:, r, :], [lo_q, hi_q], axis=0)
        point = intervened - base[labels == r].mean()
        bands.append(CurveBand(lower=lo, upper=hi, point=point))
    return BootstrapResult(
        grid=grid,
        aggregate=CurveBand(lower=agg_lo, upper=agg_hi, point=point_agg),
        bins=bands,
        n_redraws=n_redraws,
    )


@dataclass
class SurveyRow:
    source: str
    target: str
    score: float
    flags: FunctionalFormFlags


@dataclass
class SurveyResult:
    rows: list[SurveyRow]
    flag_counts: dict[str, int]
    n_edges: int


def heterogeneity_survey(
    model: AdditiveARModel,
    panel: PanelSeries,
    score_threshold: float = 0.005,
    regimes: RegimeSpec = RegimeSpec(),
    grid_cfg: GridConfig = GridConfig(),
) -> SurveyResult:
    """Classify every directed edge whose sd-score clears the threshold:
    regime-conditional curves, flags, and per-flag totals."""
    ws = build_windows(panel, model.max_lag)
    tensor = contribution_tensor(model, panel, windows=ws)
    scores = scalar_scores(tensor, "sd").scores
    rows: list[SurveyRow] = []
    counts = {
        "monotone": 0,
        "threshold_activation": 0,
        "saturating": 0,
        "regime_reversal": 0,
        "any_nonlinear": 0,
    }
    N = model.n_vars
    for i in range(N):
        grid = None
        for j in range(N):
            if not scores[i, j] >= score_threshold:
                continue
            if grid is None:
                grid = make_grid(
                    panel, i, points=grid_cfg.points, lo_pct=grid_cfg.lo_pct, hi_pct=grid_cfg.hi_pct
                )
            curve = ice_regime_conditional(model, panel, (i, j), grid, regimes, windows=ws)
            flags = classify_curve(curve)
            rows.append(
                SurveyRow(
                    source=panel.var_names[i],
                    target=panel.var_names[j],
                    score=float(scores[i, j]),
                    flags=flags,
                )
            )
            counts["monotone"] += flags.monotone
            counts["threshold_activation"] += flags.threshold_activation
            counts["saturating"] += flags.saturating
            counts["regime_reversal"] += flags.regime_reversal
            counts["any_nonlinear"] += (
                flags.threshold_activation or flags.saturating or flags.regime_reversal
            )
    return SurveyResult(rows=rows, flag_counts=counts, n_edges=len(rows))
