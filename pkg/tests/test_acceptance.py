"""Acceptance suite: one test per exit criterion, plus the multi-unit panel
protocol check. Each test prints a PASS line (visible with -s) after its
assertions.

The two heavy fixtures (benchmark: 15 runs x 4 mechanisms at full scale;
robustness: 4 sigmas x 3 jump probabilities x 3 seeds x 4 mechanisms) take
several minutes; replicates run in parallel worker processes.
"""

import numpy as np
import pytest

from icevar import (
    AdditiveARModel,
    DgpConfig,
    Hyperparams,
    MechanismSpec,
    build_windows,
    generate_system,
    loss_and_gradient,
    train,
)
from icevar.analysis import BootstrapConfig, bootstrap_ci, classify_curve, recovery_correlation
from icevar.bench import run_benchmark, run_robustness
from icevar.cli import main as cli_main
from icevar.ice import (
    Grid,
    RegimeSpec,
    ResponseCurve,
    ice_lag_aggregated,
    ice_lag_specific,
    ice_regime_conditional,
    make_grid,
)
from icevar.panel import PanelSeries, read_panel_csv, standardize, write_panel_csv
from icevar.scores import contribution_tensor, equal_count_bins, scalar_scores

from conftest import attach_panel_stats, make_random_panel
from oracles import SlowModel, brute_ice_curves

SCORE_BAND = (0.55, 0.72)
SCORE_SPREAD_LIMIT = 0.06
RECOVERY_FLOOR = {"linear": 0.95, "saturating": 0.95, "threshold": 0.90, "sign_changing": 0.90}
RECOVERY_STD_LIMIT = 0.02
ORACLE_TOL = 1e-10
LOTV_TOL = 1e-10
GRAD_REL_TOL = 1e-4
BAND_COVERAGE_FLOOR = 0.90
ROBUSTNESS_BAND_LIMIT = 0.10


def report_line(criterion: str, detail: str) -> None:
    print(f"ACCEPTANCE {criterion}: PASS ({detail})")


@pytest.fixture(scope="module")
def benchmark_report():
    return run_benchmark(runs=15, base_seed=0)


@pytest.fixture(scope="module")
def robustness_report():
    return run_robustness(seeds_per_cell=3, base_seed=0)


@pytest.fixture(scope="module")
def attenuation_run():
    """Threshold system at the printed single-run settings (seed 1000)."""
    spec = MechanismSpec("threshold")
    panel = generate_system(spec, DgpConfig(length_T=2000, noise_sigma=0.5, seed=1000))
    model = train(panel, Hyperparams(max_lag=4, seed=1000))
    ws = build_windows(panel, 4)
    grid = make_grid(panel, 0)
    return spec, panel, model, ws, grid


def test_c01_score_clustering(benchmark_report):
    """Mechanism score means cluster inside one narrow band."""
    means = {}
    for s in benchmark_report.summaries:
        assert s.runs == 15
        assert SCORE_BAND[0] <= s.score_mean <= SCORE_BAND[1], (s.mechanism, s.score_mean)
        means[s.mechanism] = s.score_mean
    spread = max(means.values()) - min(means.values())
    assert spread < SCORE_SPREAD_LIMIT, means
    report_line(
        "1 (score clustering)",
        ", ".join(f"{k}={v:.3f}" for k, v in means.items()) + f"; spread={spread:.3f}",
    )


def test_c02_recovery_quality(benchmark_report):
    """Aggregated curves track the true mechanisms across all 15 runs."""
    details = []
    for s in benchmark_report.summaries:
        assert s.r_mean >= RECOVERY_FLOOR[s.mechanism], (s.mechanism, s.r_mean)
        assert s.r_std <= RECOVERY_STD_LIMIT, (s.mechanism, s.r_std)
        details.append(f"{s.mechanism}: r={s.r_mean:.3f}+/-{s.r_std:.3f}")
    report_line("2 (recovery)", "; ".join(details))


def test_c03_lag_attenuation(attenuation_run):
    """Lag-1 influence strictly dominates lag-4; aggregation stays faithful."""
    spec, panel, model, ws, grid = attenuation_run
    lag1 = ice_lag_specific(model, panel, (0, 1), 1, grid, windows=ws)
    lag4 = ice_lag_specific(model, panel, (0, 1), 4, grid, windows=ws)
    range1 = float(np.ptp(lag1.response))
    range4 = float(np.ptp(lag4.response))
    assert range1 > range4
    agg = ice_lag_aggregated(model, panel, (0, 1), grid, windows=ws)
    r = recovery_correlation(agg, spec)
    assert r >= 0.95
    report_line("3 (attenuation)", f"lag1 range={range1:.3f} > lag4 range={range4:.3f}; r={r:.3f}")


def test_c04_ice_definitional_oracle():
    """Every variant equals the brute-force window-rebuilding computation."""
    gen = np.random.default_rng(2024)
    worst = 0.0
    for case in range(20):
        n_vars = int(gen.integers(2, 5))
        max_lag = int(gen.integers(1, 4))
        hidden = int(gen.integers(2, 6))
        length = int(gen.integers(max_lag + 3, 52))
        n_units = int(gen.integers(1, 3))
        hp = Hyperparams(max_lag=max_lag, hidden_units=hidden, seed=case)
        model = AdditiveARModel.initialize(n_vars, hp)
        model.theta[:] = gen.normal(0.0, 0.7, model.n_params)
        panel = make_random_panel(1000 + case, n_units=n_units, length=length, n_vars=n_vars)
        attach_panel_stats(model, panel)
        ws = build_windows(panel, max_lag)
        assert len(ws) <= 100
        grid = make_grid(panel, int(gen.integers(0, n_vars)), points=5)
        i = int(gen.integers(0, n_vars))
        j = int(gen.integers(0, n_vars))
        slow = SlowModel(model.to_dict())

        deltas = brute_ice_curves(slow, ws.blocks, i, j, grid.values)
        agg = ice_lag_aggregated(model, panel, (i, j), grid, windows=ws)
        worst = max(worst, float(np.max(np.abs(agg.response - deltas.mean(axis=1)))))

        for lag in range(1, max_lag + 1):
            d = brute_ice_curves(slow, ws.blocks, i, j, grid.values, lag=lag)
            cur = ice_lag_specific(model, panel, (i, j), lag, grid, windows=ws)
            worst = max(worst, float(np.max(np.abs(cur.response - d.mean(axis=1)))))

        n_bins = int(gen.integers(2, 4))
        if len(ws) >= n_bins:
            cur = ice_regime_conditional(
                model, panel, (i, j), grid, RegimeSpec(n_bins=n_bins), windows=ws
            )
            labels = equal_count_bins(ws.lag_values(j, lag=1), n_bins)
            worst = max(worst, float(np.max(np.abs(cur.response - deltas.mean(axis=1)))))
            for r in range(n_bins):
                expected = deltas[:, labels == r].mean(axis=1)
                worst = max(worst, float(np.max(np.abs(cur.bin_responses[r] - expected))))
        assert worst <= ORACLE_TOL, (case, worst)
    report_line("4 (ICE oracle)", f"20 cases, max |deviation|={worst:.2e}")


def test_c05_law_of_total_variance(benchmark_report):
    """Squared scores bound the between-bin variance on every edge of every
    trained benchmark model, for bin counts 5/10/20."""
    max_excess = max(r.lotv_max_excess for r in benchmark_report.records)
    max_dev = max(r.lotv_identity_dev for r in benchmark_report.records)
    assert max_excess <= LOTV_TOL
    assert max_dev <= LOTV_TOL
    report_line(
        "5 (variance bound)",
        f"60 models x 9 edges x 3 bin counts; max(between - S^2)={max_excess:.2e}, "
        f"identity dev={max_dev:.2e}",
    )


def test_c06_gradient_correctness():
    """Analytical gradient of the full objective vs central differences."""
    hp = Hyperparams(max_lag=1, hidden_units=4, dropout_rate=0.0, seed=0)
    gen = np.random.default_rng(66)
    model = AdditiveARModel.initialize(2, hp)
    batch = (gen.normal(0, 1, (12, 2, 1)), gen.normal(0, 1, (12, 2)))
    step = 1e-5
    worst = 0.0
    for point in range(10):
        model.theta[:] = gen.normal(0.0, 0.8, model.n_params)
        _, grad = loss_and_gradient(model, batch, hp)
        fd = np.empty_like(grad)
        for d in range(model.n_params):
            model.theta[d] += step
            up, _ = loss_and_gradient(model, batch, hp)
            model.theta[d] -= 2 * step
            down, _ = loss_and_gradient(model, batch, hp)
            model.theta[d] += step
            fd[d] = (up - down) / (2 * step)
        rel = float(np.linalg.norm(fd - grad) / np.linalg.norm(grad))
        worst = max(worst, rel)
        assert rel <= GRAD_REL_TOL, (point, rel)
    report_line("6 (gradient)", f"10 points, worst relative error={worst:.2e}")


def _curve_on(values, response, bins) -> ResponseCurve:
    grid = Grid(values=np.asarray(values, float), variable="x", lo_pct=0.0, hi_pct=100.0)
    return ResponseCurve(
        grid=grid,
        response=np.asarray(response, float),
        source="x",
        target="y",
        variant="aggregated",
        bin_responses=np.asarray(bins, float),
    )


def test_c07_classifier_oracle():
    """Flags on four analytic curves match hand-derived truth.

    On an 81-point grid over [-3, 3] (step 0.075, quarter = 20 points):
      line y=x            monotone (0 violations), crosses zero, tails are
                          proportional (ratio 19/40 = 0.475), identical bins
                          -> threshold false
      clip(x, -1, 1)      tails flat beyond |x|=1 -> both tail ranges 0 ->
                          saturating; zero steps are non-violations
      dead-zone step      0 inside |x|<=0.6, +/-1.6 outside: two upward jumps
                          -> monotone; exact zeros -> reversal; flat tails ->
                          saturating; low bin = 0 -> threshold activation
      sign flip (V-shape) -x inside |x|<0.6: ~15 of 80 steps run against the
                          dominant direction (>= 10%) -> not monotone; sign
                          changes -> reversal; linear tails -> not saturating
    """
    xs = np.linspace(-3.0, 3.0, 81)

    line = xs.copy()
    flags = classify_curve(_curve_on(xs, line, [line, line, line]))
    assert (flags.monotone, flags.threshold_activation, flags.saturating, flags.regime_reversal) \
        == (True, False, False, True)

    clipped = np.clip(xs, -1.0, 1.0)
    flags = classify_curve(_curve_on(xs, clipped, [clipped, clipped, clipped]))
    assert (flags.monotone, flags.threshold_activation, flags.saturating, flags.regime_reversal) \
        == (True, False, True, True)

    step = np.where(np.abs(xs) > 0.6, 1.6 * np.sign(xs), 0.0)
    flags = classify_curve(_curve_on(xs, step, [np.zeros_like(xs), step / 2, step]))
    assert (flags.monotone, flags.threshold_activation, flags.saturating, flags.regime_reversal) \
        == (True, True, True, True)

    vshape = np.where(np.abs(xs) < 0.6, -xs, xs)
    flags = classify_curve(_curve_on(xs, vshape, [vshape, vshape, vshape]))
    assert (flags.monotone, flags.threshold_activation, flags.saturating, flags.regime_reversal) \
        == (False, False, False, True)

    report_line("7 (classifier oracle)", "line, clipped line, dead-zone step, sign flip")


def test_c08_bootstrap_sanity(attenuation_run):
    spec, panel, model, ws, grid = attenuation_run
    cfg = BootstrapConfig(resamples=200, confidence=0.95, seed=12)
    bands = bootstrap_ci(model, panel, (0, 1), grid, RegimeSpec(), cfg, windows=ws)
    for band in [bands.aggregate] + bands.bins:
        assert np.all(band.lower <= band.upper)
    agg = bands.aggregate
    covered = np.mean((agg.lower <= agg.point) & (agg.point <= agg.upper))
    assert covered >= BAND_COVERAGE_FLOOR

    again = bootstrap_ci(model, panel, (0, 1), grid, RegimeSpec(), cfg, windows=ws)
    assert np.array_equal(bands.aggregate.lower, again.aggregate.lower)
    assert np.array_equal(bands.aggregate.upper, again.aggregate.upper)
    report_line(
        "8 (bootstrap)", f"B=200 bands ordered; point coverage={covered:.1%}; seed-stable"
    )


def test_c09_determinism_and_round_trip(attenuation_run, tmp_path):
    # (a) identical config + seed => byte-identical CLI outputs
    outputs = []
    for tag in ("one", "two"):
        d = tmp_path / tag
        d.mkdir()
        args = ["synth", "--out", str(d / "panel.csv"), "--mechanism", "saturating",
                "--length", "500", "--seed", "21"]
        assert cli_main(args) == 0
        assert cli_main(["train", "--panel", str(d / "panel.csv"), "--out", str(d / "model.json"),
                         "--max-lag", "3", "--epochs", "60", "--seed", "21"]) == 0
        assert cli_main(["score", "--model", str(d / "model.json"),
                         "--panel", str(d / "panel.csv"), "--out", str(d / "scores.csv")]) == 0
        assert cli_main(["ice", "--model", str(d / "model.json"), "--panel", str(d / "panel.csv"),
                         "--source", "X", "--target", "Y", "--variant", "regime",
                         "--out", str(d / "curve.csv")]) == 0
        outputs.append(d)
    for name in ("panel.csv", "scores.csv", "curve.csv"):
        assert (outputs[0] / name).read_bytes() == (outputs[1] / name).read_bytes(), name

    # (b) save/load round trip is bit-exact on parameters; scores agree
    spec, panel, model, ws, grid = attenuation_run
    path = tmp_path / "model.json"
    model.save(path)
    back = AdditiveARModel.load(path)
    assert np.array_equal(back.theta, model.theta)
    s1 = scalar_scores(contribution_tensor(model, panel, windows=ws)).scores
    s2 = scalar_scores(contribution_tensor(back, panel, windows=ws)).scores
    assert np.max(np.abs(s1 - s2)) <= 1e-12
    report_line("9 (determinism/round-trip)", "byte-identical outputs; bit-exact reload")


def test_c10_robustness_sweep(robustness_report):
    """Across sigma x jump-probability, mechanism means stay in a narrow band."""
    worst = 0.0
    for cell in robustness_report.cells:
        assert cell.band_width < ROBUSTNESS_BAND_LIMIT, (
            cell.noise_sigma,
            cell.jump_prob,
            cell.mechanism_means,
        )
        worst = max(worst, cell.band_width)
    assert len(robustness_report.cells) == 12
    report_line("10 (robustness)", f"12 cells x 3 seeds; widest band={worst:.3f} < 0.10")


def test_multiunit_panel_protocol(tmp_path):
    """Shape-only: the full protocol runs on a user-supplied 139-unit x
    35-year x 16-variable balanced panel CSV."""
    gen = np.random.default_rng(314)
    units, years, n_vars = 139, 35, 16
    values = np.empty((units, years, n_vars))
    values[:, 0] = gen.normal(0, 1, (units, n_vars))
    for t in range(1, years):
        values[:, t] = 0.7 * values[:, t - 1] + gen.normal(0, 0.5, (units, n_vars))
    panel = PanelSeries(
        unit_ids=tuple(f"c{k:03d}" for k in range(units)),
        var_names=tuple(f"ind{k:02d}" for k in range(n_vars)),
        values=values,
    )
    path = tmp_path / "panel.csv"
    write_panel_csv(panel, path)

    loaded = standardize(read_panel_csv(path))
    assert loaded.values.shape == (139, 35, 16)
    assert len(build_windows(loaded, 8)) == 139 * 27 == 3753

    model_path = tmp_path / "model.json"
    assert cli_main(["train", "--panel", str(path), "--out", str(model_path),
                     "--max-lag", "8", "--epochs", "2", "--seed", "0"]) == 0
    survey_path = tmp_path / "survey.csv"
    assert cli_main(["survey", "--model", str(model_path), "--panel", str(path),
                     "--out", str(survey_path)]) == 0
    rows = [ln for ln in survey_path.read_text().splitlines() if not ln.startswith("#")]
    assert rows[0].startswith("source,target,score,monotone")
    assert len(rows) > 1
    curve_path = tmp_path / "curve.csv"
    assert cli_main(["ice", "--model", str(model_path), "--panel", str(path),
                     "--source", "ind00", "--target", "ind01", "--variant", "regime",
                     "--bootstrap", "--resamples", "50", "--out", str(curve_path)]) == 0
    header = [ln for ln in curve_path.read_text().splitlines() if not ln.startswith("#")][0]
    assert header == "x,response,bin_low,bin_mid,bin_high,ci_lo,ci_hi"
    report_line("panel protocol", "139 x 35 x 16 simulated panel end-to-end")
