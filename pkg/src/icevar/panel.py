"""Balanced multivariate panels: container, standardization, CSV round trip.

A panel is units x time x variables with every unit observed over the same
gap-free time span. Standardization is population z-scoring (divide by N)
per variable across all units and times; the statistics of the input that
was standardized are kept on the result for inverse mapping and for the
model/panel consistency check.
"""

from dataclasses import dataclass

import numpy as np

from . import __version__
from .exceptions import DataError


@dataclass
class PanelSeries:
    unit_ids: tuple[str, ...]
    var_names: tuple[str, ...]
    values: np.ndarray  # (units, time, variables) float64
    times: np.ndarray | None = None  # (time,) ints, shared by all units
    mean: np.ndarray | None = None  # stats of the raw data this was standardized from
    std: np.ndarray | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 3:
            raise DataError(f"panel values must be 3-d (unit, time, variable), got shape {self.values.shape}")
        u, t, n = self.values.shape
        if u != len(self.unit_ids):
            raise DataError(f"{len(self.unit_ids)} unit ids for {u} units of data")
        if n != len(self.var_names):
            raise DataError(f"{len(self.var_names)} variable names for {n} columns of data")
        if self.times is None:
            self.times = np.arange(t)
        else:
            self.times = np.asarray(self.times, dtype=int)
            if self.times.shape != (t,):
                raise DataError(f"times must have length {t}, got {self.times.shape}")

    @property
    def n_units(self) -> int:
        return self.values.shape[0]

    @property
    def length(self) -> int:
        return self.values.shape[1]

    @property
    def n_vars(self) -> int:
        return self.values.shape[2]

    def var_index(self, name: str) -> int:
        try:
            return self.var_names.index(name) if isinstance(self.var_names, list) else list(self.var_names).index(name)
        except ValueError:
            raise DataError(f"no variable named {name!r}; panel has {list(self.var_names)}") from None

    def is_standardized(self) -> bool:
        return self.mean is not None and self.std is not None


def standardize(raw: PanelSeries) -> PanelSeries:
    """Z-score each variable across all units and times (population std).

    Stores the input's per-variable mean/std on the result. Raises DataError
    naming the variable if a column is constant.
    """
    flat = raw.values.reshape(-1, raw.n_vars)
    mu = flat.mean(axis=0)
    sigma = flat.std(axis=0)  # population convention: divide by N
    for k, s in enumerate(sigma):
        if s == 0.0:
            raise DataError(f"variable {raw.var_names[k]!r} is constant; cannot standardize")
    return PanelSeries(
        unit_ids=tuple(raw.unit_ids),
        var_names=tuple(raw.var_names),
        values=(raw.values - mu) / sigma,
        times=raw.times.copy(),
        mean=mu,
        std=sigma,
    )


def _fmt(x: float) -> str:
    # repr of a Python float is the shortest string that round-trips exactly
    return repr(float(x))


def write_panel_csv(panel: PanelSeries, path, meta: dict | None = None) -> None:
    """Write `unit,time,<var...>` rows sorted by (unit, time), with a
    `#`-prefixed metadata block embedding the toolkit version and any
    resolved configuration passed in ``meta``."""
    lines = [f"# icevar-panel v1 (toolkit {__version__})"]
    for key, value in (meta or {}).items():
        lines.append(f"# {key} = {value}")
    lines.append("unit,time," + ",".join(panel.var_names))
    for u, uid in enumerate(panel.unit_ids):
        for t_idx, t in enumerate(panel.times):
            row = panel.values[u, t_idx]
            lines.append(f"{uid},{int(t)}," + ",".join(_fmt(v) for v in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_panel_csv(path) -> PanelSeries:
    """Ingest a balanced panel CSV. Rejects missing values, duplicate
    (unit, time) pairs, gaps, and units whose time span differs."""
    with open(path) as fh:
        rows = [line.rstrip("\n") for line in fh if line.strip() and not line.startswith("#")]
    if not rows:
        raise DataError(f"{path}: empty panel file")
    header = rows[0].split(",")
    if len(header) < 3 or header[0] != "unit" or header[1] != "time":
        missing = [c for c in ("unit", "time") if c not in header[:2]]
        raise DataError(
            f"{path}: expected header 'unit,time,<var...>', got {rows[0]!r}"
            + (f" (missing column {missing[0]!r})" if missing else "")
        )
    var_names = tuple(header[2:])
    per_unit: dict[str, dict[int, list[float]]] = {}
    unit_order: list[str] = []
    for lineno, line in enumerate(rows[1:], start=2):
        cells = line.split(",")
        if len(cells) != len(header):
            raise DataError(f"{path}:{lineno}: expected {len(header)} cells, got {len(cells)}")
        uid, t_str = cells[0], cells[1]
        vals = []
        for name, cell in zip(var_names, cells[2:]):
            if cell == "":
                raise DataError(f"{path}:{lineno}: missing value for {name!r} (unit {uid!r})")
            vals.append(float(cell))
        t = int(t_str)
        if uid not in per_unit:
            per_unit[uid] = {}
            unit_order.append(uid)
        if t in per_unit[uid]:
            raise DataError(f"{path}:{lineno}: duplicate time {t} for unit {uid!r}")
        per_unit[uid][t] = vals

    ref_times = None
    ref_unit = None
    for uid in unit_order:
        times = sorted(per_unit[uid])
        if any(b - a != 1 for a, b in zip(times, times[1:])):
            raise DataError(f"unit {uid!r} has gaps in its time span")
        if ref_times is None:
            ref_times, ref_unit = times, uid
        elif times != ref_times:
            raise DataError(
                f"unbalanced panel: unit {uid!r} covers times {times[0]}..{times[-1]} "
                f"but unit {ref_unit!r} covers {ref_times[0]}..{ref_times[-1]}"
            )

    values = np.array(
        [[per_unit[uid][t] for t in ref_times] for uid in unit_order], dtype=float
    )
    return PanelSeries(
        unit_ids=tuple(unit_order),
        var_names=var_names,
        values=values,
        times=np.asarray(ref_times, dtype=int),
    )
