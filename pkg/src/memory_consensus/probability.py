"""Exact winning (fixation) probabilities for memoryless and memory processes.

The memoryless formula weighs each colour by the total influence of the
nodes holding it. The memory formula evaluates the same idea on the layered
graph, but in closed form: layer i contributes with weight alpha_i / sigma,
reading the configuration from i rounds back.
"""

from __future__ import annotations

from typing import Iterable, Sequence, Union

from fractions import Fraction

from .graphs import WeightedDigraph, is_strongly_connected, is_well_behaved
from .memory import MemoryParams, layer_weights
from .stationary import InfluenceVector

Colour = int
Configuration = Sequence[Colour]
HistoryStack = Sequence[Configuration]  # oldest configuration first
WinDistribution = dict[Colour, Union[float, Fraction]]


def check_configuration(s: Configuration, n: int) -> tuple[Colour, ...]:
    s = tuple(int(c) for c in s)
    if len(s) != n:
        raise ValueError(f"configuration has {len(s)} entries for {n} nodes")
    if any(c < 0 for c in s):
        raise ValueError("colour ids must be nonnegative")
    return s


def check_history(h: HistoryStack, n: int, m: int) -> tuple[tuple[Colour, ...], ...]:
    if len(h) != m + 1:
        raise ValueError(f"history has {len(h)} configurations, expected m+1 = {m + 1}")
    return tuple(check_configuration(s, n) for s in h)


def stack_history(h: HistoryStack, n: int) -> tuple[Colour, ...]:
    """Flatten a history onto the layered graph's nodes (layer-major).

    Layer i receives the configuration from i rounds back, i.e. with
    h = (s_0, ..., s_m) oldest first, layer i gets s_{m-i}.
    """
    m = len(h) - 1
    stacked = check_history(h, n, m)
    out: list[Colour] = []
    for i in range(m + 1):
        out.extend(stacked[m - i])
    return tuple(out)


def _colour_set(configs: Iterable[Configuration], colours) -> tuple[Colour, ...]:
    if colours is not None:
        return tuple(sorted(set(int(c) for c in colours)))
    seen: set[Colour] = set()
    for s in configs:
        seen.update(s)
    return tuple(sorted(seen))


def winprob_memoryless(
    g: WeightedDigraph,
    mu: InfluenceVector,
    s: Configuration,
    colours: Iterable[Colour] | None = None,
) -> WinDistribution:
    """P(colour wins) = total influence of the nodes starting with it.

    Requires a well-behaved (and strongly connected) graph, where the
    process reaches consensus with probability 1.
    """
    s = check_configuration(s, g.n)
    if len(mu) != g.n:
        raise ValueError(f"influence vector length {len(mu)} != n = {g.n}")
    if not is_strongly_connected(g):
        raise ValueError("winning probabilities require a strongly connected graph")
    if not is_well_behaved(g):
        raise ValueError(
            "graph is not well-behaved: consensus is not certain, the "
            "influence formula does not apply"
        )
    out: WinDistribution = {}
    for c in _colour_set([s], colours):
        out[c] = sum((mu[v] for v in range(g.n) if s[v] == c), start=0)
    return out


def winprob_memory(
    g: WeightedDigraph,
    mu: InfluenceVector,
    p: MemoryParams,
    h: HistoryStack,
    colours: Iterable[Colour] | None = None,
) -> WinDistribution:
    """Winning probabilities of an m-memory process given its last m+1 rounds.

    Evaluates sum_i (alpha_i / sigma) * (influence of colour in the round
    i steps back); the layered graph is never materialised. For m >= 1 the
    layered graph is always well-behaved, so only strong connectivity of g
    is required.
    """
    if len(mu) != g.n:
        raise ValueError(f"influence vector length {len(mu)} != n = {g.n}")
    if not is_strongly_connected(g):
        raise ValueError("winning probabilities require a strongly connected graph")
    hist = check_history(h, g.n, p.m)
    if p.m == 0 and not is_well_behaved(g):
        raise ValueError(
            "graph is not well-behaved: a 0-memory process may never reach consensus"
        )
    lw = layer_weights(p)
    out: WinDistribution = {}
    for c in _colour_set(hist, colours):
        total = 0
        for i, alpha in enumerate(lw.alphas):
            recent = hist[p.m - i]  # configuration i rounds back
            layer_mass = sum((mu[v] for v in range(g.n) if recent[v] == c), start=0)
            total += alpha * layer_mass
        out[c] = total / lw.sigma
    return out


def early_memory_equivalence_check(
    g: WeightedDigraph,
    mu: InfluenceVector,
    p: MemoryParams,
    s: Configuration,
    colours: Iterable[Colour] | None = None,
) -> tuple[WinDistribution, WinDistribution, float]:
    """Compare memoryless vs early-memory winning probabilities from s.

    Both distributions and their max absolute difference are returned; the
    difference is zero up to rounding for any valid p.
    """
    memoryless = winprob_memoryless(g, mu, s, colours)
    early = winprob_memory(g, mu, p, [s] * (p.m + 1), colours)
    diff = max(
        abs(float(memoryless[c]) - float(early[c])) for c in memoryless
    )
    return memoryless, early, diff
