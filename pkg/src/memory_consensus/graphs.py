"""Weighted directed graphs, topology generators, and structural checks.

Graphs here are row-stochastic: every node carries positive out-edge
weights summing to 1, so the adjacency matrix doubles as the one-round
transition matrix of the copying process. Weights are floats by default;
small verification graphs can be built with exact `Fraction` weights.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence, TextIO, Union

import numpy as np

Weight = Union[float, Fraction]

ROW_SUM_TOL = 1e-12

FAMILIES = ("clique", "cycle", "biclique", "full_binary_tree", "torus_grid")


@dataclass(frozen=True)
class WeightedDigraph:
    """Immutable weighted digraph with per-node out-weights summing to 1.

    ``out_edges[v]`` is a tuple of ``(target, weight)`` pairs. Self-loops
    are allowed; parallel edges are not.
    """

    n: int
    out_edges: tuple[tuple[tuple[int, Weight], ...], ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"graph needs at least one node, got n={self.n}")
        if len(self.out_edges) != self.n:
            raise ValueError(
                f"out_edges has {len(self.out_edges)} rows for n={self.n} nodes"
            )
        for v, edges in enumerate(self.out_edges):
            if not edges:
                raise ValueError(f"node {v} has no out-edges")
            seen = set()
            total = 0
            for u, w in edges:
                if not 0 <= u < self.n:
                    raise ValueError(f"edge ({v},{u}) leaves node range [0,{self.n})")
                if u in seen:
                    raise ValueError(f"duplicate edge ({v},{u})")
                seen.add(u)
                if w <= 0:
                    raise ValueError(f"edge ({v},{u}) has non-positive weight {w}")
                total += w
            if isinstance(total, Fraction):
                if total != 1:
                    raise ValueError(f"node {v} out-weights sum to {total}, expected 1")
            elif abs(total - 1.0) > ROW_SUM_TOL:
                raise ValueError(
                    f"node {v} out-weights sum to {total!r}, expected 1 within {ROW_SUM_TOL}"
                )

    @property
    def exact(self) -> bool:
        """True when every weight is a Fraction (exact arithmetic)."""
        return all(
            isinstance(w, Fraction) for edges in self.out_edges for _, w in edges
        )

    def weight(self, v: int, u: int) -> Weight:
        """w(v, u), or 0 when the edge is absent."""
        for t, w in self.out_edges[v]:
            if t == u:
                return w
        return 0

    def to_matrix(self) -> np.ndarray:
        """Dense row-stochastic adjacency matrix (float)."""
        H = np.zeros((self.n, self.n))
        for v, edges in enumerate(self.out_edges):
            for u, w in edges:
                H[v, u] = float(w)
        return H

    @cached_property
    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(src, dst, weight) flat arrays, ordered by source node."""
        src, dst, wgt = [], [], []
        for v, edges in enumerate(self.out_edges):
            for u, w in edges:
                src.append(v)
                dst.append(u)
                wgt.append(float(w))
        return (
            np.asarray(src, dtype=np.int64),
            np.asarray(dst, dtype=np.int64),
            np.asarray(wgt, dtype=np.float64),
        )

    def as_float(self) -> "WeightedDigraph":
        if not self.exact:
            return self
        return WeightedDigraph(
            self.n,
            tuple(
                tuple((u, float(w)) for u, w in edges) for edges in self.out_edges
            ),
        )


def from_edges(n: int, edges: Iterable[tuple[int, int, Weight]]) -> WeightedDigraph:
    """Build a WeightedDigraph from (src, dst, weight) triples."""
    rows: list[list[tuple[int, Weight]]] = [[] for _ in range(n)]
    for v, u, w in edges:
        if not 0 <= v < n:
            raise ValueError(f"source node {v} out of range [0,{n})")
        rows[v].append((u, w))
    return WeightedDigraph(n, tuple(tuple(r) for r in rows))


def uniform_digraph(n: int, neighbours: Sequence[Sequence[int]], exact: bool = False) -> WeightedDigraph:
    """Graph with uniform out-weights over each node's neighbour list."""
    rows = []
    for v in range(n):
        nbrs = list(neighbours[v])
        d = len(nbrs)
        if d == 0:
            raise ValueError(f"node {v} has no out-neighbours")
        w: Weight = Fraction(1, d) if exact else 1.0 / d
        rows.append(tuple((u, w) for u in nbrs))
    return WeightedDigraph(n, tuple(rows))


# ---------------------------------------------------------------------------
# Structural checks


def is_strongly_connected(g: WeightedDigraph) -> bool:
    """True iff every node reaches every node along directed edges."""
    fwd = [[u for u, _ in g.out_edges[v]] for v in range(g.n)]
    rev: list[list[int]] = [[] for _ in range(g.n)]
    for v in range(g.n):
        for u in fwd[v]:
            rev[u].append(v)

    def reaches_all(adj: list[list[int]]) -> bool:
        seen = bytearray(g.n)
        seen[0] = 1
        stack = [0]
        count = 1
        while stack:
            v = stack.pop()
            for u in adj[v]:
                if not seen[u]:
                    seen[u] = 1
                    count += 1
                    stack.append(u)
        return count == g.n

    return reaches_all(fwd) and reaches_all(rev)


def graph_period(g: WeightedDigraph) -> int:
    """gcd of all directed cycle lengths, via BFS level labelling.

    For each edge (u, v) the value level(u) + 1 - level(v) is a multiple
    of the period; folding them with gcd yields the period itself.
    """
    if not is_strongly_connected(g):
        raise ValueError("period is defined here only for strongly connected graphs")
    level = [-1] * g.n
    level[0] = 0
    queue = [0]
    while queue:
        nxt = []
        for v in queue:
            for u, _ in g.out_edges[v]:
                if level[u] < 0:
                    level[u] = level[v] + 1
                    nxt.append(u)
        queue = nxt
    period = 0
    for v in range(g.n):
        for u, _ in g.out_edges[v]:
            period = math.gcd(period, level[v] + 1 - level[u])
    return period


def is_well_behaved(g: WeightedDigraph) -> bool:
    """True iff consensus is reached with probability 1 from every start.

    Equivalent to the gcd of all cycle lengths being 1, i.e. the copying
    chain is aperiodic.
    """
    return graph_period(g) == 1


# ---------------------------------------------------------------------------
# Topology generators


@dataclass(frozen=True)
class TopologySpec:
    """One of the five experiment graph families plus its size parameters.

    ``parts`` overrides the biclique partition sizes; ``sides`` gives the
    torus side lengths (both odd). Either may be left None for defaults.
    """

    family: str
    n: int
    parts: tuple[int, int] | None = None
    sides: tuple[int, int] | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(
                f"unknown family {self.family!r}; expected one of {FAMILIES}"
            )
        if self.n < 1:
            raise ValueError(f"n must be positive, got {self.n}")


def _torus_sides(n: int) -> tuple[int, int]:
    """Most balanced odd factor pair r*c == n, e.g. 1023 -> (31, 33)."""
    if n % 2 == 0:
        raise ValueError(f"torus_grid needs an odd node count, got n={n}")
    best = None
    r = int(math.isqrt(n))
    while r >= 3:
        if n % r == 0 and r % 2 == 1 and (n // r) % 2 == 1:
            best = (r, n // r)
            break
        r -= 1
    if best is None:
        raise ValueError(
            f"torus_grid: n={n} has no odd factorisation r*c with both sides >= 3"
        )
    return best


def clique(n: int, exact: bool = False) -> WeightedDigraph:
    """Complete graph: no self-loops, uniform weight 1/(n-1)."""
    if n < 2:
        raise ValueError(f"clique needs n >= 2, got {n}")
    nbrs = [[u for u in range(n) if u != v] for v in range(n)]
    return uniform_digraph(n, nbrs, exact)


def cycle(n: int, exact: bool = False) -> WeightedDigraph:
    """Undirected cycle as antiparallel directed edge pairs."""
    if n < 3:
        raise ValueError(f"cycle needs n >= 3, got {n}")
    nbrs = [[(v - 1) % n, (v + 1) % n] for v in range(n)]
    return uniform_digraph(n, nbrs, exact)


def biclique(
    n: int, parts: tuple[int, int] | None = None, exact: bool = False
) -> WeightedDigraph:
    """Complete bipartite graph plus one self-loop on the larger side.

    Nodes [0, a) form the first partition, [a, n) the second. The loop sits
    at the lowest-indexed node of the larger partition (node 0 when the
    partitions tie), which keeps runs reproducible.
    """
    if n < 2:
        raise ValueError(f"biclique needs n >= 2, got {n}")
    if parts is None:
        parts = ((n + 1) // 2, n // 2)
    a, b = parts
    if a < 1 or b < 1 or a + b != n:
        raise ValueError(f"biclique partition sizes {parts} do not fit n={n}")
    loop_node = 0 if a >= b else a
    first = list(range(a))
    second = list(range(a, n))
    nbrs = []
    for v in range(n):
        nb = second[:] if v < a else first[:]
        if v == loop_node:
            nb.append(v)
        nbrs.append(nb)
    return uniform_digraph(n, nbrs, exact)


def full_binary_tree(n: int, exact: bool = False) -> WeightedDigraph:
    """Full binary tree (heap-indexed) with a self-loop at the root."""
    k = (n + 1).bit_length() - 1
    if n < 3 or (1 << k) - 1 != n:
        raise ValueError(f"full_binary_tree needs n = 2^k - 1 with k >= 2, got {n}")
    nbrs: list[list[int]] = [[] for _ in range(n)]
    nbrs[0].append(0)  # root loop
    for v in range(n):
        for c in (2 * v + 1, 2 * v + 2):
            if c < n:
                nbrs[v].append(c)
                nbrs[c].append(v)
    return uniform_digraph(n, nbrs, exact)


def torus_grid(
    n: int | None = None, sides: tuple[int, int] | None = None, exact: bool = False
) -> WeightedDigraph:
    """Torus with 4-neighbour wraparound adjacency; both sides odd >= 3."""
    if sides is None:
        if n is None:
            raise ValueError("torus_grid needs n or sides")
        sides = _torus_sides(n)
    r, c = sides
    if n is not None and r * c != n:
        raise ValueError(f"torus sides {sides} do not match n={n}")
    if r < 3 or c < 3 or r % 2 == 0 or c % 2 == 0:
        raise ValueError(f"torus sides must be odd and >= 3, got {sides}")
    n = r * c
    nbrs = []
    for v in range(n):
        i, j = divmod(v, c)
        nbrs.append(
            [
                ((i - 1) % r) * c + j,
                ((i + 1) % r) * c + j,
                i * c + (j - 1) % c,
                i * c + (j + 1) % c,
            ]
        )
    return uniform_digraph(n, nbrs, exact)


def make_topology(spec: TopologySpec, exact: bool = False) -> WeightedDigraph:
    """Build the graph described by `spec`; see the family constructors."""
    if spec.family == "clique":
        return clique(spec.n, exact)
    if spec.family == "cycle":
        return cycle(spec.n, exact)
    if spec.family == "biclique":
        return biclique(spec.n, spec.parts, exact)
    if spec.family == "full_binary_tree":
        return full_binary_tree(spec.n, exact)
    return torus_grid(spec.n, spec.sides, exact)


# ---------------------------------------------------------------------------
# Graph file format: `n <count>` header, then `e <src> <dst> <weight>` lines.
# Weights may be decimal or rational `a/b`. Blank lines and `#` comments are
# tolerated.


def _parse_weight(text: str) -> Weight:
    # integers and a/b forms stay exact; decimals become floats
    if re.fullmatch(r"-?\d+(/\d+)?", text):
        return Fraction(text)
    return float(text)


def load_graph(fp: TextIO) -> WeightedDigraph:
    """Parse the text graph format and validate all invariants."""
    n = None
    triples: list[tuple[int, int, Weight]] = []
    for lineno, raw in enumerate(fp, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if fields[0] == "n":
            if n is not None:
                raise ValueError(f"line {lineno}: duplicate header")
            if len(fields) != 2:
                raise ValueError(f"line {lineno}: header must be 'n <count>'")
            n = int(fields[1])
        elif fields[0] == "e":
            if n is None:
                raise ValueError(f"line {lineno}: edge before 'n' header")
            if len(fields) != 4:
                raise ValueError(f"line {lineno}: edge must be 'e <src> <dst> <weight>'")
            try:
                triples.append((int(fields[1]), int(fields[2]), _parse_weight(fields[3])))
            except (ValueError, ZeroDivisionError) as exc:
                raise ValueError(f"line {lineno}: bad edge record: {exc}") from None
        else:
            raise ValueError(f"line {lineno}: unknown record {fields[0]!r}")
    if n is None:
        raise ValueError("missing 'n <count>' header")
    if not all(isinstance(w, Fraction) for _, _, w in triples):
        triples = [(v, u, float(w)) for v, u, w in triples]
    return from_edges(n, triples)


def load_graph_path(path) -> WeightedDigraph:
    with open(path, encoding="utf-8") as fp:
        return load_graph(fp)


def _format_weight(w: Weight) -> str:
    if isinstance(w, Fraction):
        return f"{w.numerator}/{w.denominator}"
    return repr(w)


def dump_graph(g: WeightedDigraph, fp: TextIO, node_names: Sequence[str] | None = None) -> None:
    """Write the text graph format; optional node names go in comments."""
    fp.write(f"n {g.n}\n")
    if node_names is not None:
        for v, name in enumerate(node_names):
            fp.write(f"# node {v} {name}\n")
    for v, edges in enumerate(g.out_edges):
        for u, w in edges:
            fp.write(f"e {v} {u} {_format_weight(w)}\n")
