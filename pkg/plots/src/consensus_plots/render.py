"""Render experiment CSVs into figures and tables.

This layer recomputes nothing: it groups the rows the experiment runner
emitted and plots them. The only arithmetic is the mean/median statistic
switch, which divides the two per-arm medians when the median variant is
requested; tau-from-means is read straight from the CSV.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

SUMMARY_COLUMNS = ["family", "n", "p0", "runs", "arm", "mean", "std", "median", "tau"]
RAW_COLUMNS = ["family", "n", "p0", "arm", "run", "seed", "winner", "rounds"]

KINDS = ("tau_vs_p0", "tau_vs_n", "summary_table", "rounds_histogram")
STATISTICS = ("mean", "median")


class SchemaError(ValueError):
    """CSV columns do not match the experiment runner's schema."""


@dataclass(frozen=True)
class PlotJob:
    input_csv: str
    kind: str
    output_path: str
    statistic: str = "mean"
    log_y: bool = False
    family: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; expected {KINDS}")
        if self.statistic not in STATISTICS:
            raise ValueError(f"statistic must be one of {STATISTICS}")


@dataclass
class RenderResult:
    """Output location plus the exact data arrays that were drawn."""

    output_path: Path
    series: dict[str, tuple[list[float], list[float]]] = field(default_factory=dict)


def _check_columns(header: list[str], expected: list[str], path: str) -> None:
    if header != expected:
        missing = [c for c in expected if c not in header]
        extra = [c for c in header if c not in expected]
        raise SchemaError(
            f"{path}: unexpected columns; missing {missing or 'none'}, "
            f"unexpected {extra or 'none'}"
        )


def _read_rows(path: str, expected: list[str]) -> list[dict[str, str]]:
    with open(path, newline="", encoding="utf-8") as fp:
        reader = csv.reader(fp)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file, expected a header row") from None
        _check_columns(header, expected, path)
        return [dict(zip(header, row)) for row in reader if row]


def _tau(memory_row: dict, baseline_row: dict, statistic: str) -> float:
    if statistic == "median":
        return float(memory_row["median"]) / float(baseline_row["median"])
    return float(memory_row["tau"])


def _baselines(rows: list[dict]) -> dict[tuple[str, str], dict]:
    return {
        (r["family"], r["n"]): r for r in rows if r["arm"] == "memoryless"
    }


def _tau_series(rows, x_field: str, statistic: str):
    baselines = _baselines(rows)
    series: dict[str, tuple[list[float], list[float]]] = {}
    for r in rows:
        if r["arm"] != "memory":
            continue
        base = baselines.get((r["family"], r["n"]))
        if base is None:
            raise SchemaError(
                f"no memoryless baseline row for family={r['family']} n={r['n']}"
            )
        xs, ys = series.setdefault(r["family"], ([], []))
        xs.append(float(r[x_field]))
        ys.append(_tau(r, base, statistic))
    for family, (xs, ys) in series.items():
        order = sorted(range(len(xs)), key=xs.__getitem__)
        series[family] = ([xs[i] for i in order], [ys[i] for i in order])
    return series


def _plot_tau(series, xlabel: str, ylabel: str, job: PlotJob) -> None:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for family in sorted(series):
        xs, ys = series[family]
        ax.plot(xs, ys, marker="o", markersize=3.5, label=family)
    ax.axhline(1.0, color="grey", linewidth=0.8, linestyle="--")
    if job.log_y:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if series:
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(job.output_path, dpi=150)
    plt.close(fig)


def _render_summary_table(rows, job: PlotJob) -> RenderResult:
    # Table-style summary of the memoryless arm at each family's largest n
    picked: dict[str, dict] = {}
    for r in rows:
        if r["arm"] != "memoryless":
            continue
        cur = picked.get(r["family"])
        if cur is None or int(r["n"]) > int(cur["n"]):
            picked[r["family"]] = r
    lines = ["family,n,mean,std,median"]
    series = {}
    for family in sorted(picked):
        r = picked[family]
        lines.append(
            f"{family},{r['n']},{float(r['mean']):.1f},"
            f"{float(r['std']):.1f},{float(r['median']):.1f}"
        )
        series[family] = (
            [float(r["n"])],
            [float(r["mean"]), float(r["std"]), float(r["median"])],
        )
    Path(job.output_path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return RenderResult(output_path=Path(job.output_path), series=series)


def _render_histogram(job: PlotJob) -> RenderResult:
    rows = _read_rows(job.input_csv, RAW_COLUMNS)
    if job.family is not None:
        rows = [r for r in rows if r["family"] == job.family]
    by_arm: dict[str, list[float]] = {}
    for r in rows:
        if r["rounds"] == "None":
            continue  # capped runs have no consensus time
        by_arm.setdefault(r["arm"], []).append(float(r["rounds"]))
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for arm in sorted(by_arm):
        ax.hist(by_arm[arm], bins=40, alpha=0.6, label=arm)
    ax.set_xlabel("rounds to consensus")
    ax.set_ylabel("runs")
    if by_arm:
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(job.output_path, dpi=150)
    plt.close(fig)
    series = {arm: (sorted(vals), []) for arm, vals in by_arm.items()}
    return RenderResult(output_path=Path(job.output_path), series=series)


def render(job: PlotJob) -> RenderResult:
    """Render one figure/table; returns the plotted data for inspection."""
    if job.kind == "rounds_histogram":
        return _render_histogram(job)
    rows = _read_rows(job.input_csv, SUMMARY_COLUMNS)
    if job.kind == "summary_table":
        return _render_summary_table(rows, job)
    if job.kind == "tau_vs_p0":
        series = _tau_series(rows, "p0", job.statistic)
        _plot_tau(series, "p0", f"tau ({job.statistic})", job)
    else:
        series = _tau_series(rows, "n", job.statistic)
        _plot_tau(series, "n", f"tau ({job.statistic})", job)
    return RenderResult(output_path=Path(job.output_path), series=series)
