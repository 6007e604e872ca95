"""The layered memory graph and its stationary distribution in closed form.

An m-memory process on G is distributionally equivalent to a memoryless
process on a layered graph with m+1 copies of G's nodes: layer 0 is the
present, layer i holds the configuration i rounds back. Layer-0 nodes copy
within layer 0 or read any deeper layer, scaled by the layer probability;
deeper nodes deterministically shift one layer up.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .graphs import WeightedDigraph, is_well_behaved
from .stationary import InfluenceVector

Prob = Union[float, Fraction]

PROB_SUM_TOL = 1e-12


@dataclass(frozen=True)
class MemoryParams:
    """Layer-choice probabilities (p0, ..., pm): all positive, summing to 1."""

    probs: tuple[Prob, ...]

    def __post_init__(self):
        if len(self.probs) < 1:
            raise ValueError("need at least one probability")
        if any(p <= 0 for p in self.probs):
            raise ValueError(f"all probabilities must be positive, got {self.probs}")
        total = sum(self.probs)
        if isinstance(total, Fraction):
            if total != 1:
                raise ValueError(f"probabilities sum to {total}, expected 1")
        elif abs(total - 1.0) > PROB_SUM_TOL:
            raise ValueError(
                f"probabilities sum to {total!r}, expected 1 within {PROB_SUM_TOL}"
            )

    @property
    def m(self) -> int:
        return len(self.probs) - 1

    @property
    def exact(self) -> bool:
        return all(isinstance(p, Fraction) for p in self.probs)


@dataclass(frozen=True)
class LayerWeights:
    """alpha_i = 1 - p0 - ... - p_{i-1} and sigma = sum_i (i+1) p_i.

    alpha_i / sigma is the combined influence of layer i; it is strictly
    decreasing in i, and the alphas sum to sigma.
    """

    alphas: tuple[Prob, ...]
    sigma: Prob


def layer_weights(p: MemoryParams) -> LayerWeights:
    alphas = []
    remaining: Prob = Fraction(1) if p.exact else 1.0
    for pi in p.probs:
        alphas.append(remaining)
        remaining = remaining - pi
    sigma = sum((i + 1) * pi for i, pi in enumerate(p.probs))
    return LayerWeights(tuple(alphas), sigma)


@dataclass(frozen=True)
class LayeredGraph:
    """The memory graph: base digraph plus explicit node <-> (layer, base) maps."""

    base: WeightedDigraph
    n: int
    m: int
    layer: tuple[int, ...]
    base_node: tuple[int, ...]

    def node_id(self, i: int, j: int) -> int:
        if not 0 <= i <= self.m:
            raise ValueError(f"layer {i} out of range [0,{self.m}]")
        if not 0 <= j < self.n:
            raise ValueError(f"base node {j} out of range [0,{self.n})")
        return i * self.n + j

    def layer_of(self, v: int) -> int:
        return self.layer[v]

    def base_node_of(self, v: int) -> int:
        return self.base_node[v]


def build_memory_graph(g: WeightedDigraph, p: MemoryParams) -> LayeredGraph:
    """Construct the layered graph for process (p0, ..., pm) on g.

    Nodes are ordered layer-major: layer 0's copies of v_0..v_{n-1} first.
    With m = 0 the base graph is g itself.
    """
    n, m = g.n, p.m
    if m == 0:
        return LayeredGraph(g, n, 0, (0,) * n, tuple(range(n)))
    exact = g.exact and p.exact
    one: Prob = Fraction(1) if exact else 1.0
    rows: list[tuple[tuple[int, Prob], ...]] = []
    for j in range(n):  # layer 0: weighted copies into every layer
        row = []
        for i, pi in enumerate(p.probs):
            for k, w in g.out_edges[j]:
                weight = pi * w if exact else float(pi) * float(w)
                row.append((i * n + k, weight))
        rows.append(tuple(row))
    for i in range(1, m + 1):  # deeper layers: shift one layer up
        for j in range(n):
            rows.append((((i - 1) * n + j, one),))
    base = WeightedDigraph(n * (m + 1), tuple(rows))
    layers = tuple(i for i in range(m + 1) for _ in range(n))
    base_nodes = tuple(j for _ in range(m + 1) for j in range(n))
    return LayeredGraph(base, n, m, layers, base_nodes)


def memory_stationary(mu: InfluenceVector, p: MemoryParams) -> InfluenceVector:
    """Stationary distribution of the memory graph, analytically.

    mu_bar = (1/sigma) (mu, alpha_1 mu, ..., alpha_m mu); no iterative solve.
    """
    lw = layer_weights(p)
    values = []
    for alpha in lw.alphas:
        for v in mu:
            values.append(alpha * v / lw.sigma)
    return InfluenceVector(tuple(values))


def memory_graph_is_well_behaved_check(g: WeightedDigraph, p: MemoryParams) -> bool:
    """Test hook: memory graphs with m >= 1 are always well-behaved."""
    if p.m < 1:
        raise ValueError("check applies to m >= 1")
    return is_well_behaved(build_memory_graph(g, p).base)
