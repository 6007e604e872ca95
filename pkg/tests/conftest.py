from fractions import Fraction

import numpy as np
import pytest

from memory_consensus import WeightedDigraph, from_edges


@pytest.fixture
def fig1_exact() -> WeightedDigraph:
    """Three-node worked example: v0 copies v1; v1 splits 1/4 v0, 3/4 v2;
    v2 keeps itself with 2/3, copies v1 with 1/3."""
    return from_edges(3, [
        (0, 1, Fraction(1)),
        (1, 0, Fraction(1, 4)), (1, 2, Fraction(3, 4)),
        (2, 1, Fraction(1, 3)), (2, 2, Fraction(2, 3)),
    ])


@pytest.fixture
def fig1(fig1_exact) -> WeightedDigraph:
    return fig1_exact.as_float()


def random_strongly_connected(
    rng: np.random.Generator,
    n: int,
    extra_edges: float = 0.3,
    loop_prob: float = 0.3,
) -> WeightedDigraph:
    """Random strongly connected digraph: a hidden Hamiltonian cycle plus
    random extra edges and self-loops, with random positive weights."""
    perm = rng.permutation(n)
    targets: list[set[int]] = [set() for _ in range(n)]
    for i in range(n):
        targets[perm[i]].add(int(perm[(i + 1) % n]))
    for v in range(n):
        for u in range(n):
            if u != v and rng.random() < extra_edges:
                targets[v].add(u)
        if rng.random() < loop_prob:
            targets[v].add(v)
    rows = []
    for v in range(n):
        nbrs = sorted(targets[v])
        raw = rng.random(len(nbrs)) + 0.05
        w = raw / raw.sum()
        w[-1] = 1.0 - w[:-1].sum()  # force the row sum to exactly 1.0
        rows.append(tuple(zip(nbrs, w.tolist())))
    return WeightedDigraph(n, tuple(rows))
