"""File emission: curves, score matrices, survey tables, benchmark reports.

Every CSV starts with a '#'-prefixed metadata block (toolkit version plus
the resolved configuration); JSON documents carry the same content under
"meta". Floats are written with repr so files round-trip exactly and
identical runs produce identical bytes.
"""

import json

import numpy as np

from . import __version__
from .analysis import BootstrapResult, SurveyResult
from .bench import BenchmarkReport, RobustnessReport
from .ice import ResponseCurve
from .scores import CausalScoreMatrix, ContributionTensor


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _meta_lines(kind: str, meta: dict | None) -> list[str]:
    lines = [f"# icevar-{kind} v1 (toolkit {__version__})"]
    for key, value in (meta or {}).items():
        lines.append(f"# {key} = {'' if value is None else value}")
    return lines


def _write(path, lines: list[str]) -> None:
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _meta_doc(meta: dict | None) -> dict:
    return {"toolkit_version": __version__, **{str(k): v for k, v in (meta or {}).items()}}


# --- response curves ---

_BIN_NAMES_3 = ("bin_low", "bin_mid", "bin_high")


def _bin_names(n: int) -> tuple[str, ...]:
    return _BIN_NAMES_3 if n == 3 else tuple(f"bin_{r + 1}" for r in range(n))


def write_curve_csv(curve: ResponseCurve, path, meta: dict | None = None) -> None:
    """`x,response[,bin...][,ci_lo,ci_hi]` with provenance in the header."""
    info = {
        "source": curve.source,
        "target": curve.target,
        "variant": curve.variant,
    }
    if curve.lag is not None:
        info["lag"] = curve.lag
    if curve.regime_variable is not None:
        info["regime_variable"] = curve.regime_variable
    lines = _meta_lines("curve", {**info, **(meta or {})})
    columns = ["x", "response"]
    series = [curve.grid.values, curve.response]
    if curve.bin_responses is not None:
        for name, row in zip(_bin_names(len(curve.bin_responses)), curve.bin_responses):
            columns.append(name)
            series.append(row)
    if curve.ci_lower is not None and curve.ci_upper is not None:
        columns += ["ci_lo", "ci_hi"]
        series += [curve.ci_lower, curve.ci_upper]
    lines.append(",".join(columns))
    for k in range(len(curve.grid)):
        lines.append(",".join(_fmt(col[k]) for col in series))
    _write(path, lines)


def curve_to_dict(curve: ResponseCurve) -> dict:
    doc = {
        "source": curve.source,
        "target": curve.target,
        "variant": curve.variant,
        "lag": curve.lag,
        "grid": {
            "variable": curve.grid.variable,
            "lo_pct": curve.grid.lo_pct,
            "hi_pct": curve.grid.hi_pct,
            "values": curve.grid.values.tolist(),
        },
        "response": curve.response.tolist(),
    }
    if curve.bin_responses is not None:
        doc["regime_variable"] = curve.regime_variable
        doc["bin_responses"] = curve.bin_responses.tolist()
        doc["bin_counts"] = curve.bin_counts.tolist()
    if curve.ci_lower is not None:
        doc["ci_lower"] = curve.ci_lower.tolist()
        doc["ci_upper"] = curve.ci_upper.tolist()
    return doc


def write_curve_json(
    curve: ResponseCurve, path, meta: dict | None = None, bands: BootstrapResult | None = None
) -> None:
    doc = {"meta": _meta_doc(meta), "curve": curve_to_dict(curve)}
    if bands is not None:
        doc["bootstrap"] = {
            "n_redraws": bands.n_redraws,
            "aggregate": {
                "lower": bands.aggregate.lower.tolist(),
                "upper": bands.aggregate.upper.tolist(),
                "point": bands.aggregate.point.tolist(),
            },
            "bins": [
                {"lower": b.lower.tolist(), "upper": b.upper.tolist(), "point": b.point.tolist()}
                for b in bands.bins
            ],
        }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


# --- score matrices ---


def write_scores_csv(matrix: CausalScoreMatrix, path, meta: dict | None = None) -> None:
    """Source rows x target columns."""
    lines = _meta_lines("scores", {"metric": matrix.metric, **(meta or {})})
    lines.append("source," + ",".join(matrix.var_names))
    for i, name in enumerate(matrix.var_names):
        lines.append(name + "," + ",".join(_fmt(v) for v in matrix.scores[i]))
    _write(path, lines)


def write_scores_json(matrix: CausalScoreMatrix, path, meta: dict | None = None) -> None:
    doc = {
        "meta": _meta_doc(meta),
        "metric": matrix.metric,
        "var_names": list(matrix.var_names),
        "scores": matrix.scores.tolist(),
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def write_tensor_csv(tensor: ContributionTensor, path, meta: dict | None = None) -> None:
    """Long format: one row per (source, target, window)."""
    lines = _meta_lines("contributions", meta)
    lines.append("source,target,unit,time,value")
    n = tensor.n_vars
    for i in range(n):
        for j in range(n):
            for w in range(tensor.n_windows):
                lines.append(
                    f"{tensor.var_names[i]},{tensor.var_names[j]},"
                    f"{tensor.unit_ids[tensor.unit_index[w]]},{tensor.times[w]},"
                    f"{_fmt(tensor.contrib[i, j, w])}"
                )
    _write(path, lines)


# --- survey ---

SURVEY_COLUMNS = (
    "source,target,score,monotone,threshold_activation,saturating,regime_reversal,"
    "violation_frac,regime_ratio,tail_ratio_lo,tail_ratio_hi"
)


def write_survey_csv(survey: SurveyResult, path, meta: dict | None = None) -> None:
    counts = {f"count_{k}": v for k, v in survey.flag_counts.items()}
    lines = _meta_lines("survey", {"edges": survey.n_edges, **counts, **(meta or {})})
    lines.append(SURVEY_COLUMNS)
    for row in survey.rows:
        f = row.flags
        lines.append(
            ",".join(
                [
                    row.source,
                    row.target,
                    _fmt(row.score),
                    _fmt(f.monotone),
                    _fmt(f.threshold_activation),
                    _fmt(f.saturating),
                    _fmt(f.regime_reversal),
                    _fmt(f.violation_frac),
                    _fmt(f.regime_ratio),
                    _fmt(f.tail_ratio_lo),
                    _fmt(f.tail_ratio_hi),
                ]
            )
        )
    _write(path, lines)


# --- benchmark reports ---


def benchmark_report_to_dict(report: BenchmarkReport, meta: dict | None = None) -> dict:
    return {
        "meta": _meta_doc(meta),
        "runs_per_mechanism": report.runs_per_mechanism,
        "base_seed": report.base_seed,
        "records": [
            {
                "mechanism": r.mechanism,
                "run": r.run,
                "seed": r.seed,
                "score_xy": r.score_xy,
                "pearson_r": r.pearson_r,
                "scores": r.scores.tolist(),
                "lotv_max_excess": r.lotv_max_excess,
                "lotv_identity_dev": r.lotv_identity_dev,
                "mse_first_epoch": r.mse_first_epoch,
                "mse_final_epoch": r.mse_final_epoch,
            }
            for r in report.records
        ],
        "summaries": [
            {
                "mechanism": s.mechanism,
                "runs": s.runs,
                "score": {"mean": s.score_mean, "std": s.score_std, "min": s.score_min, "max": s.score_max},
                "pearson_r": {"mean": s.r_mean, "std": s.r_std, "min": s.r_min, "max": s.r_max},
            }
            for s in report.summaries
        ],
    }


def write_benchmark_report(report: BenchmarkReport, path, meta: dict | None = None) -> None:
    with open(path, "w") as fh:
        json.dump(benchmark_report_to_dict(report, meta), fh, indent=1)
        fh.write("\n")


def write_benchmark_tables(report: BenchmarkReport, scores_path, recovery_path, meta=None) -> None:
    """Two summary tables: scalar-score clustering and recovery quality."""
    head = "mechanism,runs,mean,std,min,max"
    lines = _meta_lines("benchmark-scores", meta) + [head]
    for s in report.summaries:
        lines.append(
            f"{s.mechanism},{s.runs},{_fmt(s.score_mean)},{_fmt(s.score_std)},"
            f"{_fmt(s.score_min)},{_fmt(s.score_max)}"
        )
    _write(scores_path, lines)
    lines = _meta_lines("benchmark-recovery", meta) + [head]
    for s in report.summaries:
        lines.append(
            f"{s.mechanism},{s.runs},{_fmt(s.r_mean)},{_fmt(s.r_std)},"
            f"{_fmt(s.r_min)},{_fmt(s.r_max)}"
        )
    _write(recovery_path, lines)


def write_robustness_csv(report: RobustnessReport, path, meta: dict | None = None) -> None:
    mechs = sorted(report.cells[0].mechanism_means) if report.cells else []
    lines = _meta_lines("robustness", {"seeds_per_cell": report.seeds_per_cell, **(meta or {})})
    lines.append("noise_sigma,jump_prob," + ",".join(f"mean_{m}" for m in mechs) + ",band_width")
    for cell in report.cells:
        vals = ",".join(_fmt(cell.mechanism_means[m]) for m in mechs)
        lines.append(f"{_fmt(cell.noise_sigma)},{_fmt(cell.jump_prob)},{vals},{_fmt(cell.band_width)}")
    _write(path, lines)
