"""Stationary distributions of the copying chain (node influences)."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import numpy as np

from .graphs import WeightedDigraph, is_strongly_connected

Value = Union[float, Fraction]

SUM_TOL = 1e-12
DIRECT_SOLVE_LIMIT = 2000
MAX_ITERATIONS = 500_000


@dataclass(frozen=True)
class InfluenceVector:
    """Per-node influence: the stationary distribution of the out-matrix."""

    values: tuple[Value, ...]

    def __post_init__(self):
        total = sum(self.values)
        if isinstance(total, Fraction):
            if total != 1:
                raise ValueError(f"influences sum to {total}, expected 1")
        elif abs(total - 1.0) > SUM_TOL:
            raise ValueError(f"influences sum to {total!r}, expected 1 within {SUM_TOL}")
        if any(v < 0 for v in self.values):
            raise ValueError("influences must be nonnegative")

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, i: int) -> Value:
        return self.values[i]

    def __iter__(self):
        return iter(self.values)

    def as_floats(self) -> np.ndarray:
        return np.asarray([float(v) for v in self.values])


def _solve_exact(g: WeightedDigraph) -> tuple[Fraction, ...]:
    """Gaussian elimination over Fractions for mu (H^T - I) = 0, sum mu = 1."""
    n = g.n
    A = [[Fraction(0)] * n for _ in range(n)]
    for v, edges in enumerate(g.out_edges):
        for u, w in edges:
            A[u][v] += Fraction(w)
    for i in range(n):
        A[i][i] -= 1
    # replace the last balance equation with the normalisation constraint
    A[n - 1] = [Fraction(1)] * n
    b = [Fraction(0)] * (n - 1) + [Fraction(1)]

    for col in range(n):
        pivot = next(r for r in range(col, n) if A[r][col] != 0)
        A[col], A[pivot] = A[pivot], A[col]
        b[col], b[pivot] = b[pivot], b[col]
        inv = 1 / A[col][col]
        A[col] = [a * inv for a in A[col]]
        b[col] *= inv
        for r in range(n):
            if r != col and A[r][col] != 0:
                f = A[r][col]
                A[r] = [a - f * p for a, p in zip(A[r], A[col])]
                b[r] -= f * b[col]
    return tuple(b)


def _solve_direct(H: np.ndarray) -> np.ndarray:
    n = H.shape[0]
    A = H.T - np.eye(n)
    A[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    return np.linalg.solve(A, b)


def _solve_iterative(
    g: WeightedDigraph,
    tolerance: float,
    x0: np.ndarray | None = None,
    max_iterations: int = MAX_ITERATIONS,
) -> np.ndarray:
    """Power iteration on the lazy chain (I + H)/2.

    Averaging consecutive iterates sidesteps the oscillation of plain power
    iteration on periodic chains; the stationary vector is unchanged.
    """
    src, dst, wgt = g.edge_arrays
    x = np.full(g.n, 1.0 / g.n) if x0 is None else x0 / x0.sum()
    for _ in range(max_iterations):
        xH = np.bincount(dst, weights=x[src] * wgt, minlength=g.n)
        residual = np.abs(xH - x).max()
        if residual <= tolerance:
            return x / x.sum()
        x = 0.5 * (x + xH)
    raise RuntimeError(
        f"power iteration did not reach tolerance {tolerance} in "
        f"{max_iterations} iterations (residual {residual:.3e})"
    )


def stationary_distribution(
    g: WeightedDigraph, tolerance: float = 1e-12, method: str = "auto"
) -> InfluenceVector:
    """Unique mu with mu H = mu, sum mu = 1, for strongly connected g.

    Exact-weight graphs are solved exactly over Fractions. Float graphs use
    a direct linear solve up to DIRECT_SOLVE_LIMIT nodes and the averaged
    power iteration beyond it. `method` may force "direct" or "iterative".
    """
    if method not in ("auto", "direct", "iterative"):
        raise ValueError(f"unknown method {method!r}")
    if not is_strongly_connected(g):
        raise ValueError("stationary distribution requires a strongly connected graph")
    if g.exact and method == "auto":
        return InfluenceVector(_solve_exact(g))
    gf = g.as_float()
    if method == "direct" or (method == "auto" and g.n <= DIRECT_SOLVE_LIMIT):
        mu = _solve_direct(gf.to_matrix())
        src, dst, wgt = gf.edge_arrays
        residual = np.abs(
            np.bincount(dst, weights=mu[src] * wgt, minlength=g.n) - mu
        ).max()
        if residual > tolerance:
            # polish an imperfect direct solve instead of failing outright
            mu = _solve_iterative(gf, tolerance, x0=np.maximum(mu, 0.0))
    else:
        mu = _solve_iterative(gf, tolerance)
    mu = mu / mu.sum()
    return InfluenceVector(tuple(mu.tolist()))
