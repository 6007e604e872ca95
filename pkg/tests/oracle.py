"""Brute-force verifiers, deliberately independent of the library's fast
paths: an exact absorbing-chain solver over the full configuration space
and exhaustive simple-cycle gcd. Test-tree only; exponential in n."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from memory_consensus.graphs import WeightedDigraph, is_strongly_connected

STATE_CAP = 2**16
CYCLE_NODE_CAP = 8


@dataclass
class ConfigurationChain:
    """Markov chain over all k^n configurations of a synchronous round."""

    g: WeightedDigraph
    k: int
    configs: np.ndarray  # (num_states, n) colour matrix
    T: np.ndarray  # (num_states, num_states) row-stochastic transitions

    @property
    def num_states(self) -> int:
        return self.T.shape[0]

    def state_index(self, s) -> int:
        s = np.asarray(s, dtype=np.int64)
        return int((s * self.k ** np.arange(self.g.n)).sum())

    def monochromatic_index(self, colour: int) -> int:
        return self.state_index([colour] * self.g.n)


def build_chain(g: WeightedDigraph, k: int) -> ConfigurationChain:
    n = g.n
    num = k**n
    if num > STATE_CAP:
        raise ValueError(f"configuration space {k}^{n} exceeds cap {STATE_CAP}")
    H = g.to_matrix()
    powers = k ** np.arange(n)
    configs = (np.arange(num)[:, None] // powers[None, :]) % k
    T = np.empty((num, num))
    node_idx = np.arange(n)
    for i in range(num):
        s = configs[i]
        # D[v, c] = probability node v adopts colour c from configuration s
        D = np.zeros((n, k))
        for c in range(k):
            D[:, c] = H[:, s == c].sum(axis=1)
        T[i] = D[node_idx[None, :], configs].prod(axis=1)
    return ConfigurationChain(g=g, k=k, configs=configs, T=T)


def exact_fixation(chain: ConfigurationChain, start) -> tuple[dict[int, float], float]:
    """Absorption probability per colour from `start`, plus deadlock mass.

    Solves (I - Q) x = b restricted to states that can reach an absorbing
    (monochromatic) state; states that cannot are exactly the deadlock-bound
    ones and contribute the non-absorption mass.
    """
    T = chain.T
    num = chain.num_states
    absorbing = np.array([chain.monochromatic_index(c) for c in range(chain.k)])
    start_idx = chain.state_index(start) if not np.isscalar(start) else int(start)

    reach = np.zeros(num, dtype=bool)
    reach[absorbing] = True
    positive = T > 0
    while True:
        grown = reach | (positive[:, reach].any(axis=1))
        if (grown == reach).all():
            break
        reach = grown

    transient = reach.copy()
    transient[absorbing] = False
    t_idx = np.flatnonzero(transient)
    pos = {int(s): j for j, s in enumerate(t_idx)}
    Q = T[np.ix_(t_idx, t_idx)]
    A = np.eye(len(t_idx)) - Q

    dist: dict[int, float] = {}
    for c in range(chain.k):
        a = absorbing[c]
        if start_idx == a:
            dist[c] = 1.0
            continue
        if not transient[start_idx]:
            dist[c] = 0.0  # deadlock-bound or a different consensus
            continue
        x = np.linalg.solve(A, T[t_idx, a])
        dist[c] = float(x[pos[start_idx]])
    deadlock = 1.0 - sum(dist.values())
    return dist, deadlock


def exhaustive_cycle_gcd(g: WeightedDigraph) -> int:
    """gcd of the lengths of all simple cycles (self-loops count as 1)."""
    if g.n > CYCLE_NODE_CAP:
        raise ValueError(f"cycle enumeration capped at {CYCLE_NODE_CAP} nodes")
    if not is_strongly_connected(g):
        raise ValueError("cycle gcd defined here only for strongly connected graphs")
    adj = [[u for u, _ in g.out_edges[v]] for v in range(g.n)]
    lengths: set[int] = set()

    def dfs(root: int, v: int, depth: int, visited: set[int]) -> None:
        for u in adj[v]:
            if u == root:
                lengths.add(depth + 1)
            elif u > root and u not in visited:
                visited.add(u)
                dfs(root, u, depth + 1, visited)
                visited.remove(u)

    for root in range(g.n):
        dfs(root, root, 0, {root})
    return math.gcd(*lengths) if lengths else 0
