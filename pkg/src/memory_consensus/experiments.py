"""Consensus-time experiments: memory vs memoryless across topologies.

tau is the ratio of the mean consensus time of the 1-memory process to its
memoryless counterpart on the same topology and size; tau < 1 means memory
helps. Experiment 1 sweeps p0 at fixed n, Experiment 2 sweeps n at fixed
p0. Desk-scale defaults keep runs in minutes; full-scale mirrors the
published setup (n = 1023, 4000 runs / 10^4 runs) and takes much longer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence, TextIO

import numpy as np
from scipy import stats

from .graphs import TopologySpec, WeightedDigraph, make_topology
from .memory import MemoryParams
from .simulate import RngSpec, RunRecord, random_colours, run_batch, splitmix64

DEFAULT_CAP = 10**8

MEMORY_ARM = "memory"
MEMORYLESS_ARM = "memoryless"

# Desk-scale defaults: small enough to rerun casually, large enough that the
# paper's qualitative orderings are unambiguous.
DESK_EXP1_N = {
    "clique": 49,
    "cycle": 49,
    "biclique": 49,
    "torus_grid": 49,
    "full_binary_tree": 63,
}
DESK_P0_GRID = [round(0.1 * k, 1) for k in range(1, 11)]
DESK_EXP1_RUNS = 500
DESK_EXP2_N_GRID = {
    "clique": [49, 81, 121, 169],
    "cycle": [49, 81, 121, 169],
    "biclique": [49, 81, 121, 169],
    "torus_grid": [49, 81, 121, 169],
    "full_binary_tree": [63, 127],
}
DESK_EXP2_RUNS = 1000
DESK_EXP2_P0 = 0.9

FULL_EXP1_N = {family: 1023 for family in DESK_EXP1_N}
FULL_P0_GRID = [float(x) for x in np.linspace(0.1, 1.0, 30)]
FULL_EXP1_RUNS = 4000
FULL_EXP2_RUNS = 10_000


def tree_sizes(k_min: int = 3, k_max: int = 11) -> list[int]:
    return [2**k - 1 for k in range(k_min, k_max + 1)]


def odd_squares(lo: int = 9, hi: int = 2025) -> list[int]:
    out = []
    r = 3
    while r * r <= hi:
        if r * r >= lo:
            out.append(r * r)
        r += 2
    return out


FULL_EXP2_N_GRID = {
    "clique": odd_squares(),
    "cycle": odd_squares(),
    "biclique": odd_squares(),
    "torus_grid": odd_squares(),
    "full_binary_tree": tree_sizes(),
}


@dataclass(frozen=True)
class ExperimentSummary:
    """Aggregate of one experiment arm (one topology, size, p0, protocol)."""

    family: str
    n: int
    p0: float
    runs: int
    arm: str
    mean_rounds: float
    std_rounds: float
    median_rounds: float
    tau: float | None


@dataclass(frozen=True)
class TTestResult:
    t_statistic: float
    p_value: float
    df: float


def consensus_rounds(records: Sequence[RunRecord]) -> list[int]:
    capped = sum(1 for r in records if r.rounds is None)
    if capped:
        raise ValueError(
            f"{capped} of {len(records)} runs exceeded the round cap; "
            "raise the cap or fix the topology (dropping them would bias the mean)"
        )
    return [r.rounds for r in records]


def summarize(records: Sequence[RunRecord]) -> tuple[float, float, float]:
    """(mean, sample std, median) of consensus rounds; rejects capped runs."""
    rounds = consensus_rounds(records)
    arr = np.asarray(rounds, dtype=np.float64)
    std = float(arr.std(ddof=1)) if len(arr) > 1 else float("nan")
    return float(arr.mean()), std, float(np.median(arr))


def welch_ttest(a: Sequence[float], b: Sequence[float]) -> TTestResult:
    """Welch's unequal-variance two-sample t-test, two-sided."""
    if len(a) < 2 or len(b) < 2:
        raise ValueError("both samples need at least two observations")
    xa = np.asarray(a, dtype=np.float64)
    xb = np.asarray(b, dtype=np.float64)
    va, vb = xa.var(ddof=1), xb.var(ddof=1)
    if va == 0.0 and vb == 0.0:
        raise ValueError("both samples have zero variance; t statistic undefined")
    sa, sb = va / len(xa), vb / len(xb)
    t = (xa.mean() - xb.mean()) / math.sqrt(sa + sb)
    df = (sa + sb) ** 2 / (sa**2 / (len(xa) - 1) + sb**2 / (len(xb) - 1))
    p = 2.0 * float(stats.t.sf(abs(t), df))
    return TTestResult(t_statistic=float(t), p_value=min(p, 1.0), df=float(df))


def topology_for(family: str, n: int) -> WeightedDigraph:
    """Graph for an experiment grid point; rejects sizes invalid per family."""
    if family == "cycle" and n % 2 == 0:
        raise ValueError(
            f"cycle n={n} is even, hence not well-behaved: the memoryless "
            "baseline would deadlock"
        )
    return make_topology(TopologySpec(family=family, n=n))


RawSink = Callable[["ExperimentSummary", Sequence[RunRecord]], None]


def _run_arm(
    g: WeightedDigraph,
    family: str,
    n: int,
    p0: float,
    runs: int,
    arm_seed: int,
    cap: int,
    workers: int | None,
    baseline_mean: float | None,
    raw_sink: RawSink | None,
) -> tuple[ExperimentSummary, list[RunRecord]]:
    if not 0.0 < p0 <= 1.0:
        raise ValueError(f"p0 must be in (0, 1], got {p0}")
    if p0 >= 1.0:
        arm, p = MEMORYLESS_ARM, MemoryParams((1.0,))
    else:
        arm, p = MEMORY_ARM, MemoryParams((p0, 1.0 - p0))
    records = run_batch(
        g, p, random_colours(g.n), runs, cap, RngSpec(arm_seed), workers=workers
    )
    mean, std, median = summarize(records)
    tau = None if baseline_mean is None else mean / baseline_mean
    summary = ExperimentSummary(
        family=family, n=n, p0=p0, runs=runs, arm=arm,
        mean_rounds=mean, std_rounds=std, median_rounds=median, tau=tau,
    )
    if raw_sink is not None:
        raw_sink(summary, records)
    return summary, records


def _arm_seed(master_seed: int, arm_index: int) -> int:
    return splitmix64(splitmix64(master_seed) + arm_index)


def experiment1(
    family: str,
    n: int,
    p0_grid: Sequence[float],
    runs: int,
    seed: int,
    cap: int = DEFAULT_CAP,
    workers: int | None = None,
    raw_sink: RawSink | None = None,
) -> list[ExperimentSummary]:
    """tau vs p0 at fixed n: one memory arm per p0 against the p0=1 baseline.

    Every arm draws fresh uniform two-colour starting configurations per
    run. The baseline row is always included, with tau absent.
    """
    g = topology_for(family, n)
    baseline, _ = _run_arm(
        g, family, n, 1.0, runs, _arm_seed(seed, 0), cap, workers, None, raw_sink
    )
    summaries = [baseline]
    for k, p0 in enumerate(p0_grid, start=1):
        if p0 >= 1.0:
            continue  # the baseline row already covers p0 = 1
        summary, _ = _run_arm(
            g, family, n, float(p0), runs, _arm_seed(seed, k), cap, workers,
            baseline.mean_rounds, raw_sink,
        )
        summaries.append(summary)
    return summaries


def experiment2(
    families: Sequence[str],
    n_grid: dict[str, Sequence[int]] | Sequence[int],
    p0: float,
    runs: int,
    seed: int,
    cap: int = DEFAULT_CAP,
    workers: int | None = None,
    raw_sink: RawSink | None = None,
) -> list[ExperimentSummary]:
    """tau vs n at fixed p0: per (family, n), a memoryless and a memory arm."""
    if not 0.0 < p0 < 1.0:
        raise ValueError(f"experiment 2 needs p0 in (0, 1), got {p0}")
    summaries = []
    arm_index = 0
    for family in families:
        sizes = n_grid[family] if isinstance(n_grid, dict) else n_grid
        for n in sizes:
            g = topology_for(family, n)
            baseline, _ = _run_arm(
                g, family, n, 1.0, runs, _arm_seed(seed, arm_index), cap,
                workers, None, raw_sink,
            )
            memory, _ = _run_arm(
                g, family, n, p0, runs, _arm_seed(seed, arm_index + 1), cap,
                workers, baseline.mean_rounds, raw_sink,
            )
            arm_index += 2
            summaries.extend([baseline, memory])
    return summaries


# ---------------------------------------------------------------------------
# CSV schemas. Summaries: `family,n,p0,runs,arm,mean,std,median,tau` (tau
# empty on baseline rows). Raw per-run rounds for the plotting layer:
# `family,n,p0,arm,run,seed,winner,rounds`.

SUMMARY_HEADER = "family,n,p0,runs,arm,mean,std,median,tau"
RAW_HEADER = "family,n,p0,arm,run,seed,winner,rounds"


def summaries_to_csv(summaries: Sequence[ExperimentSummary], fp: TextIO) -> None:
    fp.write(SUMMARY_HEADER + "\n")
    for s in summaries:
        tau = "" if s.tau is None else repr(s.tau)
        fp.write(
            f"{s.family},{s.n},{s.p0!r},{s.runs},{s.arm},"
            f"{s.mean_rounds!r},{s.std_rounds!r},{s.median_rounds!r},{tau}\n"
        )


def summaries_from_csv(fp: TextIO) -> list[ExperimentSummary]:
    header = fp.readline().strip()
    if header != SUMMARY_HEADER:
        raise ValueError(f"unexpected summary CSV header: {header!r}")
    out = []
    for line in fp:
        line = line.strip()
        if not line:
            continue
        family, n, p0, runs, arm, mean, std, median, tau = line.split(",")
        out.append(
            ExperimentSummary(
                family=family, n=int(n), p0=float(p0), runs=int(runs), arm=arm,
                mean_rounds=float(mean), std_rounds=float(std),
                median_rounds=float(median), tau=None if tau == "" else float(tau),
            )
        )
    return out


class RawRoundsWriter:
    """raw_sink that appends per-run rows to an open CSV stream."""

    def __init__(self, fp: TextIO):
        self.fp = fp
        self.fp.write(RAW_HEADER + "\n")

    def __call__(self, summary: ExperimentSummary, records: Sequence[RunRecord]) -> None:
        for i, rec in enumerate(records):
            self.fp.write(
                f"{summary.family},{summary.n},{summary.p0!r},{summary.arm},"
                f"{i},{rec.seed},{rec.winner},{rec.rounds}\n"
            )
