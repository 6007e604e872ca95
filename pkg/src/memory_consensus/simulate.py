"""Seeded Monte Carlo execution of memoryless and memory consensus processes.

Rounds are synchronous: every node samples a layer (how far back to look)
and an out-neighbour, then all nodes switch at once. A run ends at stable
consensus (every remembered round monochromatic in the same colour) or at
the round cap. Neighbour sampling uses per-node alias tables so a round
costs a handful of vectorised draws regardless of degree.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache, partial
from typing import Callable, Sequence, TextIO, Union

import numpy as np

from .graphs import WeightedDigraph
from .memory import MemoryParams
from .probability import Configuration, HistoryStack

_MASK64 = 0xFFFFFFFFFFFFFFFF

WORKERS_ENV_VAR = "MEMORY_CONSENSUS_WORKERS"

InitialSpec = Union[Configuration, HistoryStack, Callable[[np.random.Generator], Configuration]]


def splitmix64(x: int) -> int:
    """One splitmix64 output step; derives independent per-run seeds."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


@dataclass(frozen=True)
class RngSpec:
    """Deterministic PRNG plan: identical spec => bit-identical outcomes."""

    master_seed: int
    algorithm: str = "pcg64"

    def __post_init__(self):
        if self.algorithm != "pcg64":
            raise ValueError(f"unsupported PRNG {self.algorithm!r}")

    def run_seed(self, run_index: int) -> int:
        return splitmix64((self.master_seed + run_index) & _MASK64)

    def generator(self, run_index: int) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.run_seed(run_index)))


@dataclass(frozen=True)
class RunRecord:
    """Outcome of one run; winner/rounds are None when the cap was hit."""

    winner: int | None
    rounds: int | None
    seed: int | None

    def __post_init__(self):
        if (self.winner is None) != (self.rounds is None):
            raise ValueError("winner and rounds must be absent together (cap exceeded)")


class NeighbourSampler:
    """Vectorised Vose alias tables: one uniform draw picks every node's neighbour."""

    def __init__(self, g: WeightedDigraph):
        n = g.n
        dmax = max(len(edges) for edges in g.out_edges)
        self.n = n
        self.deg = np.zeros(n)
        self.nbr = np.zeros((n, dmax), dtype=np.int64)
        self.alias = np.zeros((n, dmax), dtype=np.int64)
        self.prob = np.ones((n, dmax))
        for v, edges in enumerate(g.out_edges):
            d = len(edges)
            self.deg[v] = d
            targets = [u for u, _ in edges]
            scaled = [float(w) * d for _, w in edges]
            prob = [0.0] * d
            alias = [0] * d
            small = [i for i, q in enumerate(scaled) if q < 1.0]
            large = [i for i, q in enumerate(scaled) if q >= 1.0]
            while small and large:
                s, l = small.pop(), large.pop()
                prob[s] = scaled[s]
                alias[s] = l
                scaled[l] = (scaled[l] + scaled[s]) - 1.0
                (small if scaled[l] < 1.0 else large).append(l)
            for q in (small, large):
                while q:
                    i = q.pop()
                    prob[i] = 1.0
                    alias[i] = i
            self.nbr[v, :d] = targets
            self.prob[v, :d] = prob
            self.alias[v, :d] = [targets[a] for a in alias]
        self._rows = np.arange(n)

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        """One neighbour id per node, distributed by the out-edge weights."""
        r = rng.random(self.n) * self.deg
        k = r.astype(np.int64)
        keep = (r - k) < self.prob[self._rows, k]
        return np.where(keep, self.nbr[self._rows, k], self.alias[self._rows, k])


@lru_cache(maxsize=64)
def sampler_for(g: WeightedDigraph) -> NeighbourSampler:
    return NeighbourSampler(g)


@dataclass
class MemoryProcessState:
    """Ring buffer of the last m+1 configurations; row `head` is round t."""

    history: np.ndarray  # shape (m+1, n), history rows in ring order
    head: int
    round: int

    @property
    def m(self) -> int:
        return self.history.shape[0] - 1

    def config_at(self, i: int) -> np.ndarray:
        """Configuration i rounds back (0 = current)."""
        if not 0 <= i <= self.m:
            raise ValueError(f"lag {i} out of range [0,{self.m}]")
        return self.history[(self.head + i) % (self.m + 1)]

    def current(self) -> np.ndarray:
        return self.history[self.head]


def _as_history(initial: Configuration | HistoryStack, n: int, m: int) -> np.ndarray:
    first = initial[0] if len(initial) else None
    if first is not None and isinstance(first, (list, tuple, np.ndarray)):
        if len(initial) != m + 1:
            raise ValueError(f"history has {len(initial)} configurations, expected {m + 1}")
        hist = np.asarray(initial, dtype=np.int64)
    else:
        # early-memory convention: pre-fill all m+1 slots with the start config
        hist = np.tile(np.asarray(initial, dtype=np.int64), (m + 1, 1))
    if hist.shape != (m + 1, n):
        raise ValueError(f"history shape {hist.shape} != {(m + 1, n)}")
    if (hist < 0).any():
        raise ValueError("colour ids must be nonnegative")
    return hist


def initial_state(initial: Configuration | HistoryStack, m: int, n: int) -> MemoryProcessState:
    """State at round 0; a bare configuration is pre-filled early-memory style.

    A full history stack (m+1 configurations, oldest first) is also accepted.
    """
    hist = _as_history(initial, n, m)
    return MemoryProcessState(history=hist[::-1].copy(), head=0, round=0)


def _layer_cdf(p: MemoryParams) -> np.ndarray | None:
    if p.m == 0:
        return None
    cdf = np.cumsum([float(x) for x in p.probs])
    cdf[-1] = 1.0  # guard the searchsorted upper edge against rounding
    return cdf


def _advance(
    sampler: NeighbourSampler,
    cdf: np.ndarray | None,
    hist: np.ndarray,
    head: int,
    rng: np.random.Generator,
) -> int:
    """One synchronous round in place; returns the new head row."""
    depth = hist.shape[0]
    if cdf is None:
        newc = hist[head][sampler.sample(rng)]
    else:
        lag = np.searchsorted(cdf, rng.random(sampler.n), side="right")
        nb = sampler.sample(rng)
        newc = hist[(head + lag) % depth, nb]
    head = (head - 1) % depth
    hist[head] = newc
    return head


def step_memory(
    g: WeightedDigraph,
    p: MemoryParams,
    state: MemoryProcessState,
    rng: np.random.Generator,
) -> MemoryProcessState:
    """One synchronous round: every node samples a lag ~ p and a neighbour
    ~ edge weights, and copies that neighbour's colour at that lag."""
    if state.m != p.m:
        raise ValueError(f"state holds {state.m + 1} rounds but p has m = {p.m}")
    hist = state.history.copy()
    head = _advance(sampler_for(g), _layer_cdf(p), hist, state.head, rng)
    return MemoryProcessState(history=hist, head=head, round=state.round + 1)


def is_stable_consensus(state: MemoryProcessState) -> int | None:
    """The consensus colour if every remembered round is monochromatic in it."""
    c = state.history.flat[0]
    if (state.history == c).all():
        return int(c)
    return None


def run_process(
    g: WeightedDigraph,
    p: MemoryParams,
    s: Configuration | HistoryStack,
    cap: int,
    rng: Union[int, np.random.Generator],
    seed: int | None = None,
    _sampler: NeighbourSampler | None = None,
) -> RunRecord:
    """Run until stable consensus or `cap` rounds; never raises on cap.

    `rng` is an integer seed or a Generator; an explicit `seed` is recorded
    in the RunRecord when a Generator is supplied. Rounds count step
    invocations, so a run starting in consensus reports 0 rounds.
    """
    if cap <= 0:
        raise ValueError(f"cap must be positive, got {cap}")
    if isinstance(rng, (int, np.integer)):
        seed = int(rng)
        rng = np.random.Generator(np.random.PCG64(seed))
    sampler = _sampler if _sampler is not None else sampler_for(g)
    hist = _as_history(s, g.n, p.m)[::-1].copy()
    head = 0
    depth = p.m + 1
    c = hist.flat[0]
    if (hist == c).all():
        return RunRecord(winner=int(c), rounds=0, seed=seed)
    cdf = _layer_cdf(p)
    rounds = 0
    while rounds < cap:
        head = _advance(sampler, cdf, hist, head, rng)
        rounds += 1
        cur = hist[head]
        c = cur[0]
        if (cur == c).all():
            for r in range(depth):
                if r != head and not (hist[r] == c).all():
                    break
            else:
                return RunRecord(winner=int(c), rounds=rounds, seed=seed)
    return RunRecord(winner=None, rounds=None, seed=seed)


def random_colours(n: int, k: int = 2) -> Callable[[np.random.Generator], np.ndarray]:
    """Sampler of uniform random configurations over k colours (picklable)."""
    return partial(_uniform_config, n, k)


def _uniform_config(n: int, k: int, rng: np.random.Generator) -> np.ndarray:
    return rng.integers(0, k, size=n)


def _run_indices(
    g: WeightedDigraph,
    p: MemoryParams,
    initial: InitialSpec,
    indices: Sequence[int],
    cap: int,
    rng_spec: RngSpec,
) -> list[RunRecord]:
    sampler = NeighbourSampler(g)
    records = []
    for i in indices:
        seed = rng_spec.run_seed(i)
        rng = np.random.Generator(np.random.PCG64(seed))
        s = initial(rng) if callable(initial) else initial
        records.append(run_process(g, p, s, cap, rng, seed=seed, _sampler=sampler))
    return records


def _batch_worker(args) -> list[RunRecord]:
    return _run_indices(*args)


def run_batch(
    g: WeightedDigraph,
    p: MemoryParams,
    initial: InitialSpec,
    runs: int,
    cap: int,
    rng_spec: RngSpec,
    workers: int | None = None,
) -> list[RunRecord]:
    """`runs` independent runs with per-run derived seeds, ordered by index.

    `initial` is a fixed configuration (or history stack), or a callable
    drawing a fresh configuration from the run's own generator. With
    workers > 1 runs are distributed over processes; results are identical
    to sequential execution.
    """
    if runs <= 0:
        raise ValueError(f"runs must be positive, got {runs}")
    if workers is None:
        workers = int(os.environ.get(WORKERS_ENV_VAR, "1"))
    if workers <= 1:
        return _run_indices(g, p, initial, range(runs), cap, rng_spec)
    chunks = [
        (g, p, initial, range(w, runs, workers), cap, rng_spec)
        for w in range(min(workers, runs))
    ]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        per_chunk = list(pool.map(_batch_worker, chunks))
    records: list[RunRecord | None] = [None] * runs
    for w, chunk in enumerate(per_chunk):
        for j, rec in enumerate(chunk):
            records[w + j * workers] = rec
    return records  # type: ignore[return-value]


# ---------------------------------------------------------------------------
# Run CSV: `run,seed,winner,rounds`; capped runs carry an empty winner and a
# CAP_EXCEEDED marker.

CAP_MARKER = "CAP_EXCEEDED"


def records_to_csv(records: Sequence[RunRecord], fp: TextIO) -> None:
    fp.write("run,seed,winner,rounds\n")
    for i, rec in enumerate(records):
        seed = "" if rec.seed is None else str(rec.seed)
        winner = "" if rec.winner is None else str(rec.winner)
        rounds = CAP_MARKER if rec.rounds is None else str(rec.rounds)
        fp.write(f"{i},{seed},{winner},{rounds}\n")


def records_from_csv(fp: TextIO) -> list[RunRecord]:
    header = fp.readline().strip()
    if header != "run,seed,winner,rounds":
        raise ValueError(f"unexpected run CSV header: {header!r}")
    records = []
    for line in fp:
        line = line.strip()
        if not line:
            continue
        _, seed, winner, rounds = line.split(",")
        records.append(
            RunRecord(
                winner=None if winner == "" else int(winner),
                rounds=None if rounds == CAP_MARKER else int(rounds),
                seed=None if seed == "" else int(seed),
            )
        )
    return records
