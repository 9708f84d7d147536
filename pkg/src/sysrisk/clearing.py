"""Clearing payments on a finite round network, and the realized returns.

Each risky borrower owes y in total; what it can actually pay depends on its
shock draw and on what it receives from other borrowers, giving the fixed
point

    X_i = min( (K_i + claims_i(X) - v)+ , y ),   claims_i = sum_j X_j L_ji / y.

The operator is monotone and bounded, so plain iteration from the full
payment vector X = y converges to the greatest solution.  On the complete
graph all up-shocked agents stay interchangeable (likewise down-shocked), so
the sweep collapses to two scalars; sampled graphs iterate with one matrix
product per sweep.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .model import MarketParams
from .netgen import LiabilityGraph, ShockVector

_WINDOW = 3  # consecutive small sweeps required before declaring convergence


@dataclass(frozen=True)
class ClearingResult:
    X: np.ndarray        # (n2,) payments, each in [0, y]
    iterations: int
    converged: bool
    claims: np.ndarray   # (n,) received amounts per agent


@dataclass(frozen=True)
class ReturnsVector:
    r1: np.ndarray        # (n1,) risk-free surpluses
    r2: np.ndarray        # (n2,) risky surpluses
    defaults: np.ndarray  # local borrower indices paying short of y


class DefaultStats(NamedTuple):
    count: int
    fraction: float
    degenerate: bool = False


def solve_clearing(graph: LiabilityGraph, shocks: ShockVector, params: MarketParams,
                   tol: float = 1e-9, max_iter: int = 100_000) -> ClearingResult:
    """Greatest clearing vector by iteration from full payment."""
    n1, n2, y = graph.n1, graph.n2, graph.y
    n = n1 + n2
    if n2 == 0 or y <= 0.0:
        return ClearingResult(X=np.zeros(n2), iterations=0, converged=True,
                              claims=np.zeros(n))
    v = params.v
    threshold = n2 * tol * y
    streak = 0
    iterations = 0

    if graph.indicator is None:
        sig2 = graph.w_g2 / y
        n_u = int(shocks.up.sum())
        n_d = n2 - n_u
        x_u = y if n_u else 0.0   # scalars for empty shock classes stay 0
        x_d = y if n_d else 0.0
        while iterations < max_iter:
            total = n_u * x_u + n_d * x_d
            new_u = min(max(shocks.k_u + sig2 * (total - x_u) - v, 0.0), y) if n_u else 0.0
            new_d = min(max(shocks.k_d + sig2 * (total - x_d) - v, 0.0), y) if n_d else 0.0
            assert new_u <= x_u + 1e-12 * y and new_d <= x_d + 1e-12 * y
            change = n_u * abs(new_u - x_u) + n_d * abs(new_d - x_d)
            x_u, x_d = new_u, new_d
            iterations += 1
            streak = streak + 1 if change < threshold else 0
            if streak >= _WINDOW:
                break
        X = np.where(shocks.up, x_u, x_d)
        total = n_u * x_u + n_d * x_d
        claims = np.empty(n)
        claims[:n1] = graph.w_g1 / y * total
        claims[n1:] = sig2 * (total - X)
    else:
        weight_row = np.where(np.arange(n) < n1, graph.w_g1, graph.w_g2)
        B = graph.indicator * (weight_row / y)  # B[j, i]: share j pays to i
        X = np.full(n2, y)
        while iterations < max_iter:
            own = (X @ B)[n1:]
            new = np.clip(shocks.k + own - v, 0.0, y)
            assert np.all(new <= X + 1e-12 * y)
            change = float(np.abs(new - X).sum())
            X = new
            iterations += 1
            streak = streak + 1 if change < threshold else 0
            if streak >= _WINDOW:
                break
        claims = X @ B

    return ClearingResult(X=X, iterations=iterations,
                          converged=streak >= _WINDOW, claims=claims)


def compute_returns(graph: LiabilityGraph, clearing: ClearingResult,
                    shocks: ShockVector, params: MarketParams,
                    tol: float = 1e-9) -> ReturnsVector:
    """Per-agent surpluses after clearing, clamped at limited liability."""
    n1 = graph.n1
    r1 = np.maximum(params.w * graph.eps * (1 + params.r_s)
                    + clearing.claims[:n1] - params.v, 0.0)
    r2 = np.maximum(shocks.k + clearing.claims[n1:] - params.v - graph.y, 0.0)
    defaults = np.flatnonzero(clearing.X < graph.y * (1.0 - tol))
    return ReturnsVector(r1=r1, r2=r2, defaults=defaults)


def default_stats(clearing: ClearingResult, y: float, tol: float = 1e-9) -> DefaultStats:
    """Count and fraction of borrowers paying short, per risky agent."""
    n2 = len(clearing.X)
    if n2 == 0:
        return DefaultStats(count=0, fraction=0.0, degenerate=True)
    count = int((clearing.X < y * (1.0 - tol)).sum())
    return DefaultStats(count=count, fraction=count / n2)
