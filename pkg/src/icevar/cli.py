"""Command-line entry point.

Subcommands cover the full pipeline: synth (generate a synthetic panel),
train (fit a model to a panel CSV), score (scalar causal scores), ice
(response curves, optionally with bootstrap bands and an SVG), benchmark
(the seeded mechanism sweep with summary tables), robustness (noise x jump
sweep), survey (edge-wide functional-form table).

Configuration precedence: built-in defaults < --config file < flags.
Exit codes: 0 ok, 2 configuration/usage, 3 data, 4 numerical failure.
"""

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .analysis import heterogeneity_survey, bootstrap_ci
from .bench import run_benchmark, run_robustness
from .config import RunConfig, benchmark_train_defaults, load_config
from .exceptions import ConfigError, DataError, IcevarError, NumericalError
from .ice import ice_lag_aggregated, ice_lag_specific, ice_regime_conditional, make_grid
from .model import AdditiveARModel
from .output import (
    write_benchmark_report,
    write_benchmark_tables,
    write_curve_csv,
    write_curve_json,
    write_robustness_csv,
    write_scores_csv,
    write_scores_json,
    write_survey_csv,
    write_tensor_csv,
)
from .panel import read_panel_csv, standardize, write_panel_csv
from .scores import METRICS, contribution_tensor, scalar_scores
from .synth import generate_system
from .training import train
from .windows import build_windows

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4

_SECTION_FOR_FLAG = {
    # synth flags
    "mechanism": ("mechanism", "kind"),
    "threshold_c": ("mechanism", "threshold_c"),
    "amplitude": ("mechanism", "amplitude_a"),
    "clip_lo": ("mechanism", "clip_lo"),
    "clip_hi": ("mechanism", "clip_hi"),
    "length": ("dgp", "length_T"),
    "sigma": ("dgp", "noise_sigma"),
    "jump_prob": ("dgp", "jump_prob_p"),
    "jump_magnitude": ("dgp", "jump_magnitude"),
    "seed": None,  # per-command mapping
    # train flags
    "max_lag": ("train", "max_lag"),
    "hidden_units": ("train", "hidden_units"),
    "dropout": ("train", "dropout_rate"),
    "weight_decay": ("train", "weight_decay_l2"),
    "sparsity": ("train", "sparsity_l1"),
    "learning_rate": ("train", "learning_rate"),
    "batch_size": ("train", "batch_size"),
    "epochs": ("train", "epochs"),
    "val_split": ("train", "val_split"),
    # grid flags
    "points": ("grid", "points"),
    "lo_pct": ("grid", "lo_pct"),
    "hi_pct": ("grid", "hi_pct"),
    # regimes
    "bins": ("regimes", "n_bins"),
    "regime_variable": ("regimes", "variable"),
    # bootstrap
    "resamples": ("bootstrap", "resamples"),
    "confidence": ("bootstrap", "confidence"),
    "bootstrap_seed": ("bootstrap", "seed"),
    # run
    "runs": ("run", "runs"),
    "base_seed": ("run", "base_seed"),
    "workers": ("run", "workers"),
    "threshold": ("run", "score_threshold"),
}


def _config_from_args(args, seed_section: str | None = None) -> tuple[RunConfig, set]:
    overrides = {}
    for flag, target in _SECTION_FOR_FLAG.items():
        value = getattr(args, flag, None)
        if value is None:
            continue
        if flag == "seed":
            if seed_section is None:
                continue
            target = (seed_section, "seed")
        overrides[target] = value
    return load_config(getattr(args, "config", None), overrides)


def _config_meta(cfg: RunConfig, sections: tuple[str, ...]) -> dict:
    return {
        key: value
        for key, value in cfg.flat_items()
        if key.split(".", 1)[0] in sections
    }


def _load_model_and_panel(args):
    model = AdditiveARModel.load(args.model)
    panel = standardize(read_panel_csv(args.panel))
    return model, panel


def _edge_part(text: str):
    try:
        return int(text)
    except ValueError:
        return text


# --- subcommands ---


def cmd_synth(args) -> int:
    cfg, _ = _config_from_args(args, seed_section="dgp")
    panel = generate_system(cfg.mechanism, cfg.dgp)
    meta = _config_meta(cfg, ("mechanism", "dgp"))
    for k, name in enumerate(panel.var_names):
        meta[f"raw_mean.{name}"] = repr(float(panel.mean[k]))
        meta[f"raw_std.{name}"] = repr(float(panel.std[k]))
    write_panel_csv(panel, args.out, meta)
    print(f"wrote {panel.n_units} unit(s) x {panel.length} steps x {panel.n_vars} vars to {args.out}")
    return EXIT_OK


def cmd_train(args) -> int:
    cfg, _ = _config_from_args(args, seed_section="train")
    panel = standardize(read_panel_csv(args.panel))
    model = train(panel, cfg.train)
    model.save(args.out, meta=_config_meta(cfg, ("train",)))
    h = model.history
    print(
        f"trained {model.n_vars}-variable model (K={model.max_lag}) for {cfg.train.epochs} epochs; "
        f"train mse {h.train_mse[1]:.4f} -> {h.train_mse[-1]:.4f}; wrote {args.out}"
    )
    return EXIT_OK


def cmd_score(args) -> int:
    cfg, _ = _config_from_args(args)
    model, panel = _load_model_and_panel(args)
    tensor = contribution_tensor(model, panel, subset=args.subset)
    matrix = scalar_scores(tensor, args.metric)
    meta = {"metric": args.metric, "windows": tensor.n_windows, "subset": args.subset}
    write_scores_csv(matrix, args.out, meta)
    if args.json:
        write_scores_json(matrix, args.json, meta)
    if args.tensor:
        write_tensor_csv(tensor, args.tensor, meta)
    print(f"wrote {matrix.scores.shape[0]}x{matrix.scores.shape[1]} score matrix to {args.out}")
    return EXIT_OK


def cmd_ice(args) -> int:
    cfg, _ = _config_from_args(args)
    model, panel = _load_model_and_panel(args)
    ws = build_windows(panel, model.max_lag)
    edge = (_edge_part(args.source), _edge_part(args.target))
    source_idx = edge[0] if isinstance(edge[0], int) else panel.var_index(edge[0])
    grid = make_grid(
        panel, source_idx, points=cfg.grid.points, lo_pct=cfg.grid.lo_pct, hi_pct=cfg.grid.hi_pct
    )
    regimes = cfg.regimes
    if args.variant == "aggregated":
        curve = ice_lag_aggregated(model, panel, edge, grid, windows=ws)
    elif args.variant == "lag":
        if args.lag is None:
            raise ConfigError("variant 'lag' needs --lag")
        curve = ice_lag_specific(model, panel, edge, args.lag, grid, windows=ws)
    else:
        curve = ice_regime_conditional(model, panel, edge, grid, regimes, windows=ws)

    bands = None
    if args.bootstrap:
        if args.variant == "lag":
            raise ConfigError("bootstrap bands are defined for aggregated/regime variants")
        bands = bootstrap_ci(model, panel, edge, grid, regimes, cfg.bootstrap, windows=ws)
        curve.ci_lower = bands.aggregate.lower
        curve.ci_upper = bands.aggregate.upper

    meta = _config_meta(cfg, ("grid", "regimes", "bootstrap") if args.bootstrap else ("grid", "regimes"))
    write_curve_csv(curve, args.out, meta)
    if args.json:
        write_curve_json(curve, args.json, meta, bands=bands)
    if args.svg:
        from .svgplot import curve_svg

        with open(args.svg, "w") as fh:
            fh.write(curve_svg(curve, band=bands, meta=meta))
    print(f"wrote {args.variant} curve for {curve.source}->{curve.target} to {args.out}")
    return EXIT_OK


def cmd_benchmark(args) -> int:
    cfg, explicit = _config_from_args(args)
    cfg = benchmark_train_defaults(cfg, explicit)
    if args.smoke:
        cfg = replace(
            cfg,
            dgp=replace(cfg.dgp, length_T=240),
            train=replace(cfg.train, epochs=20),
            runs=cfg.runs if ("run", "runs") in explicit else 1,
        )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    report = run_benchmark(
        runs=cfg.runs,
        base_seed=cfg.base_seed,
        dgp=cfg.dgp,
        hp=cfg.train,
        grid_cfg=cfg.grid,
        workers=cfg.workers or None,
    )
    meta = _config_meta(cfg, ("dgp", "train", "grid", "run"))
    if args.smoke:
        meta["smoke"] = True
    write_benchmark_report(report, out_dir / "report.json", meta)
    write_benchmark_tables(report, out_dir / "table_scores.csv", out_dir / "table_recovery.csv", meta)
    print(f"{'mechanism':14s} {'score mean':>10s} {'std':>7s} {'r mean':>7s} {'std':>7s}")
    for s in report.summaries:
        print(
            f"{s.mechanism:14s} {s.score_mean:10.3f} {s.score_std:7.3f} {s.r_mean:7.3f} {s.r_std:7.3f}"
        )
    print(f"wrote report and tables to {out_dir}")
    return EXIT_OK


def cmd_robustness(args) -> int:
    cfg, explicit = _config_from_args(args)
    cfg = benchmark_train_defaults(cfg, explicit)
    report = run_robustness(
        seeds_per_cell=args.seeds,
        base_seed=cfg.base_seed,
        dgp=cfg.dgp,
        hp=cfg.train,
        workers=cfg.workers or None,
    )
    write_robustness_csv(report, args.out, _config_meta(cfg, ("train",)))
    worst = max(cell.band_width for cell in report.cells)
    print(f"{len(report.cells)} configurations; widest mechanism band {worst:.3f}; wrote {args.out}")
    return EXIT_OK


def cmd_survey(args) -> int:
    cfg, _ = _config_from_args(args)
    model, panel = _load_model_and_panel(args)
    survey = heterogeneity_survey(
        model,
        panel,
        score_threshold=cfg.score_threshold,
        regimes=cfg.regimes,
        grid_cfg=cfg.grid,
    )
    write_survey_csv(survey, args.out, _config_meta(cfg, ("grid", "regimes", "run")))
    print(f"surveyed {survey.n_edges} edges (score >= {cfg.score_threshold}); wrote {args.out}")
    counts = survey.flag_counts
    for name in ("monotone", "threshold_activation", "saturating", "regime_reversal"):
        print(f"  {name}: {counts[name]}")
    return EXIT_OK


# --- parser ---


def _add_config(p):
    p.add_argument("--config", help="INI config file (defaults < file < flags)")


def _add_grid_flags(p):
    p.add_argument("--points", type=int, help="grid points (default 81)")
    p.add_argument("--lo-pct", dest="lo_pct", type=float, help="lower percentile bound (default 2)")
    p.add_argument("--hi-pct", dest="hi_pct", type=float, help="upper percentile bound (default 98)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="icevar",
        description="Additive autoregressive causal toolkit: train, score, and trace response curves.",
    )
    parser.add_argument("--version", action="version", version=f"icevar {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic three-variable panel CSV")
    _add_config(p)
    p.add_argument("--out", required=True)
    p.add_argument("--mechanism", choices=("linear", "threshold", "saturating", "sign_changing"))
    p.add_argument("--threshold-c", dest="threshold_c", type=float)
    p.add_argument("--amplitude", type=float)
    p.add_argument("--clip-lo", dest="clip_lo", type=float)
    p.add_argument("--clip-hi", dest="clip_hi", type=float)
    p.add_argument("--length", type=int, help="series length T")
    p.add_argument("--sigma", type=float, help="noise standard deviation")
    p.add_argument("--jump-prob", dest="jump_prob", type=float)
    p.add_argument("--jump-magnitude", dest="jump_magnitude", type=float)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="train a model on a balanced panel CSV")
    _add_config(p)
    p.add_argument("--panel", required=True)
    p.add_argument("--out", required=True, help="model JSON path")
    p.add_argument("--max-lag", dest="max_lag", type=int)
    p.add_argument("--hidden-units", dest="hidden_units", type=int)
    p.add_argument("--dropout", type=float)
    p.add_argument("--weight-decay", dest="weight_decay", type=float)
    p.add_argument("--sparsity", type=float)
    p.add_argument("--learning-rate", dest="learning_rate", type=float)
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--val-split", dest="val_split", type=float)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("score", help="scalar causal score matrix from a trained model")
    _add_config(p)
    p.add_argument("--model", required=True)
    p.add_argument("--panel", required=True)
    p.add_argument("--metric", choices=METRICS, default="sd")
    p.add_argument("--subset", choices=("all", "train", "val"), default="all")
    p.add_argument("--out", required=True)
    p.add_argument("--json", help="also write the matrix as JSON")
    p.add_argument("--tensor", help="also dump the contribution tensor (long CSV)")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("ice", help="response curve for one directed edge")
    _add_config(p)
    p.add_argument("--model", required=True)
    p.add_argument("--panel", required=True)
    p.add_argument("--source", required=True, help="source variable (name or index)")
    p.add_argument("--target", required=True, help="target variable (name or index)")
    p.add_argument("--variant", choices=("aggregated", "lag", "regime"), default="aggregated")
    p.add_argument("--lag", type=int, help="lag position for variant 'lag' (1 = most recent)")
    p.add_argument("--bins", type=int, help="regime bins (default 3)")
    p.add_argument("--regime-variable", dest="regime_variable", help="regime variable (default: target's lag)")
    _add_grid_flags(p)
    p.add_argument("--bootstrap", action="store_true", help="attach bootstrap confidence bands")
    p.add_argument("--resamples", type=int)
    p.add_argument("--confidence", type=float)
    p.add_argument("--bootstrap-seed", dest="bootstrap_seed", type=int)
    p.add_argument("--out", required=True)
    p.add_argument("--json", help="also write the curve as JSON (full provenance)")
    p.add_argument("--svg", help="also render a line chart")
    p.set_defaults(func=cmd_ice)

    p = sub.add_parser("benchmark", help="seeded mechanism sweep with summary tables")
    _add_config(p)
    p.add_argument("--out-dir", dest="out_dir", required=True)
    p.add_argument("--runs", type=int, help="replicates per mechanism (default 15)")
    p.add_argument("--base-seed", dest="base_seed", type=int)
    p.add_argument("--workers", type=int, help="parallel jobs (default: ICEVAR_THREADS or CPU count)")
    p.add_argument("--smoke", action="store_true", help="tiny T/epochs for a quick sanity run")
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("robustness", help="noise x jump-probability score sweep")
    _add_config(p)
    p.add_argument("--out", required=True)
    p.add_argument("--seeds", type=int, default=3, help="seeds per configuration")
    p.add_argument("--base-seed", dest="base_seed", type=int)
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_robustness)

    p = sub.add_parser("survey", help="functional-form survey over all qualifying edges")
    _add_config(p)
    p.add_argument("--model", required=True)
    p.add_argument("--panel", required=True)
    p.add_argument("--threshold", type=float, help="minimum sd-score (default 0.005)")
    p.add_argument("--bins", type=int)
    p.add_argument("--regime-variable", dest="regime_variable")
    _add_grid_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_survey)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"icevar: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"icevar: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"icevar: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except IcevarError as exc:
        print(f"icevar: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
