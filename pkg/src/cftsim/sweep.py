"""Scenario sweeps for the experiment families and their CSV / plot-data output."""

from __future__ import annotations

import csv
import io
import math
import os
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from statistics import fmean
from typing import Iterable, Optional, Sequence

from .config import ScenarioConfig, Variant
from .metrics import ScenarioStats
from .protocol import UNLIMITED
from .simulation import run_scenario

__all__ = [
    "D_GRID",
    "CT_GRID",
    "WF_GRID",
    "SPARSE",
    "DENSE",
    "FIGURES",
    "CSV_HEADER",
    "SweepPoint",
    "SweepSpec",
    "Row",
    "figure_spec",
    "run_points",
    "sweep",
    "emit_outputs",
    "format_levels",
]

D_GRID = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95)
CT_GRID = (0.0, 0.4, 0.8, 1.2, 1.6, 2.0, 2.4, 3.0, 3.6, 4.2, 5.0)
WF_GRID = (0.1, 0.3, 0.5, 0.7, 0.9)
SPARSE = (0.1, 0.2, 0.3)
DENSE = (0.7, 0.8, 0.9)

FIGURES = ("F3", "F4", "F5", "F6", "F7_8", "F9_10")

CSV_HEADER = (
    "figure,variant,seed,disconnection_rate,adhoc_levels,write_fraction,ct,et,generated,committed,"
    "aborted,presumed_committed,commit_rate,presumed_commit_rate,presumed_share_of_commits,mean_fh_blocking"
).split(",")


@dataclass(frozen=True)
class SweepPoint:
    figure: str
    series: str
    x: float
    config: ScenarioConfig


@dataclass(frozen=True)
class SweepSpec:
    figure: str
    axis: str  # ScenarioConfig field swept along x
    grid: tuple[float, ...]
    series: tuple[tuple[str, dict], ...]  # (label, config overrides)
    base: ScenarioConfig = ScenarioConfig()

    def __post_init__(self):
        for x in self.grid:
            if self.axis == "disconnection_rate" and not 0.0 <= x <= 0.95:
                raise ValueError(f"disconnection grid value {x} outside [0, 0.95]")
            if self.axis == "ct" and x < 0:
                raise ValueError(f"negative Ct grid value {x}")

    def points(self) -> list[SweepPoint]:
        out = []
        for x in self.grid:
            for label, overrides in self.series:
                cfg = self.base.replace(**{**overrides, self.axis: x})
                out.append(SweepPoint(self.figure, label, x, cfg))
        return out


def _adhoc_series(levels_list: Iterable[tuple[float, ...]]) -> list[tuple[str, dict]]:
    return [
        (f"adhoc_{format_levels(lv)}", {"variant": Variant.ADHOC_ONLY, "adhoc_levels": lv})
        for lv in levels_list
    ]


def _cft_series(levels: tuple[float, ...]) -> tuple[tuple[str, dict], ...]:
    series = [
        ("standard", {"variant": Variant.STANDARD_2PC, "adhoc_levels": levels}),
        ("adhoc", {"variant": Variant.ADHOC_ONLY, "adhoc_levels": levels}),
    ]
    for wf in WF_GRID:
        series.append(
            (f"daalg_wf{wf * 100:g}", {"variant": Variant.ADHOC_DAALG, "adhoc_levels": levels, "write_fraction": wf})
        )
    return tuple(series)


def figure_spec(figure: str, base: Optional[ScenarioConfig] = None) -> SweepSpec:
    """Grid and curves for one experiment family.

    F3-F5 compare standard 2PC with ad-hoc support at one, two and three
    groups (Et = 5 s).  F6 sweeps Ct with Et unlimited and all-READ work.
    F7_8 and F9_10 sweep disconnection for sparse and dense ad-hoc support
    with Ct = 2.4 s, across WRITE fractions.
    """
    base = base or ScenarioConfig()
    std = ("standard", {"variant": Variant.STANDARD_2PC})
    if figure == "F3":
        series = (std, *_adhoc_series([(0.1,), (0.5,), (0.9,)]))
        return SweepSpec(figure, "disconnection_rate", D_GRID, series, base.replace(et=5.0))
    if figure == "F4":
        series = (std, *_adhoc_series([(0.1, 0.5), (0.5, 0.9)]))
        return SweepSpec(figure, "disconnection_rate", D_GRID, series, base.replace(et=5.0))
    if figure == "F5":
        series = (std, *_adhoc_series([SPARSE, DENSE]))
        return SweepSpec(figure, "disconnection_rate", D_GRID, series, base.replace(et=5.0))
    if figure == "F6":
        series = tuple(
            (f"adhoc_{format_levels(lv)}", {"variant": Variant.ADHOC_DAALG, "adhoc_levels": lv})
            for lv in [(0.1,), (0.5,), (0.9,)]
        )
        return SweepSpec(
            figure, "ct", CT_GRID, series,
            base.replace(et=UNLIMITED, write_fraction=0.0, disconnection_rate=0.5),
        )
    if figure == "F7_8":
        return SweepSpec(figure, "disconnection_rate", D_GRID, _cft_series(SPARSE), base.replace(ct=2.4, et=5.0))
    if figure == "F9_10":
        return SweepSpec(figure, "disconnection_rate", D_GRID, _cft_series(DENSE), base.replace(ct=2.4, et=5.0))
    raise ValueError(f"unknown figure family {figure!r}; expected one of {FIGURES}")


@dataclass(frozen=True)
class Row:
    figure: str
    series: str
    x: float
    config: ScenarioConfig
    stats: ScenarioStats

    @property
    def seed(self) -> int:
        return self.stats.seed


def _run_one(job: tuple[ScenarioConfig, int]) -> ScenarioStats:
    cfg, seed = job
    return run_scenario(cfg, seed)


def run_points(points: Sequence[SweepPoint], seeds: Sequence[int], jobs: int = 1) -> list[Row]:
    """Run every point at every seed; isolated instances, deterministic row order."""
    work = [(p, s) for p in points for s in seeds]
    args = [(p.config, s) for p, s in work]
    if jobs > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_one, args, chunksize=4))
    else:
        results = [_run_one(a) for a in args]
    order = {f: i for i, f in enumerate(FIGURES)}
    series_rank: dict = {}
    for p in points:
        series_rank.setdefault((p.figure, p.series), len(series_rank))
    rows = [Row(p.figure, p.series, p.x, p.config, st) for (p, _), st in zip(work, results)]
    rows.sort(key=lambda r: (order.get(r.figure, len(order)), r.figure, r.x, series_rank[r.figure, r.series], r.seed))
    return rows


def sweep(spec: SweepSpec, seeds: int = 10, jobs: int = 1, first_seed: Optional[int] = None) -> list[Row]:
    first = spec.base.seed if first_seed is None else first_seed
    return run_points(spec.points(), range(first, first + seeds), jobs)


def format_levels(levels: Sequence[float]) -> str:
    return "|".join(f"{lv * 100:g}" for lv in levels)


def _num(x: Optional[float]) -> str:
    if x is None:
        return ""
    if math.isinf(x):
        return "unlimited"
    return f"{x:.6f}"


def _short(x: float) -> str:
    return "unlimited" if math.isinf(x) else f"{x:g}"


def csv_row(row: Row) -> list[str]:
    c, s = row.config, row.stats
    levels = format_levels(c.adhoc_levels) if c.adhoc_enabled else "none"
    return [
        row.figure,
        c.variant.value,
        str(s.seed),
        _short(c.disconnection_rate),
        levels,
        _short(c.write_fraction),
        _short(c.ct),
        _short(c.et),
        str(s.generated),
        str(s.committed),
        str(s.aborted),
        str(s.presumed_committed),
        _num(s.commit_rate),
        _num(s.presumed_commit_rate),
        _num(s.presumed_share_of_commits),
        _num(s.mean_fh_blocking),
    ]


def results_csv(rows: Sequence[Row]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow(csv_row(r))
    return buf.getvalue()


_PLOTS = {
    "F3": [("f3", "commit_rate")],
    "F4": [("f4", "commit_rate")],
    "F5": [("f5", "commit_rate")],
    "F6": [("f6", "commit_rate")],
    "F7_8": [("f7", "commit_rate"), ("f8", "presumed_commit_rate")],
    "F9_10": [("f9", "commit_rate"), ("f10", "presumed_commit_rate")],
}

_AXIS = {"F6": "ct"}


def plot_table(rows: Sequence[Row], figure: str, metric: str) -> str:
    """Seed-averaged metric: x-axis first, then one column per curve."""
    cells: dict = defaultdict(list)
    series: list[str] = []
    xs: list[float] = []
    for r in rows:
        if r.figure != figure:
            continue
        if r.series not in series:
            series.append(r.series)
        if r.x not in xs:
            xs.append(r.x)
        cells[r.x, r.series].append(getattr(r.stats, metric))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([_AXIS.get(figure, "disconnection_rate"), *series])
    for x in xs:
        line = [_short(x)]
        for s in series:
            vals = [v for v in cells[x, s] if v is not None]
            line.append(f"{fmean(vals):.6f}" if vals else "")
        w.writerow(line)
    return buf.getvalue()


def emit_outputs(rows: Sequence[Row], outdir) -> list[Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    if not os.access(outdir, os.W_OK):
        raise PermissionError(f"output directory {outdir} is not writable")
    written = []
    path = outdir / "results.csv"
    path.write_text(results_csv(rows))
    written.append(path)
    for figure in dict.fromkeys(r.figure for r in rows):
        for stem, metric in _PLOTS.get(figure, [(figure.lower(), "commit_rate")]):
            p = outdir / f"plot_{stem}.csv"
            p.write_text(plot_table(rows, figure, metric))
            written.append(p)
    return written
