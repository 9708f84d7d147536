"""Static economy parameters and the per-fraction derived quantities.

Everything downstream (limit theory, network sampling, clearing, the ODE
flows) consumes these two dataclasses plus `derive`.  All functions here are
pure and O(1).
"""
from __future__ import annotations

import math
from dataclasses import dataclass


class ParamError(ValueError):
    """A parameter combination violates a model constraint."""


def _require(cond: bool, name: str, msg: str) -> None:
    if not cond:
        raise ParamError(f"{name}: {msg}")


@dataclass(frozen=True)
class MarketParams:
    """Economy-wide constants.

    w       initial wealth per agent (> 0)
    v       senior obligations (taxes etc., >= 0)
    alpha   fraction of funds cycled through interbank lending, in (0, 1)
    delta   probability of an up-move on the risky venture, in (0, 1]
    u, d    up / down rates of the risky venture
    r_s     risk-free rate
    r_b     interbank borrowing rate
    p_ss    probability any ordered pair of agents is connected, in (0, 1]
    """

    w: float
    v: float
    alpha: float
    delta: float
    u: float
    d: float
    r_s: float
    r_b: float
    p_ss: float = 1.0

    def __post_init__(self) -> None:
        _require(self.w > 0, "w", "initial wealth must be positive")
        _require(self.v >= 0, "v", "senior obligations cannot be negative")
        _require(0 < self.alpha < 1, "alpha", "interbank fraction must lie in (0, 1)")
        _require(0 < self.delta <= 1, "delta", "up-move probability must lie in (0, 1]")
        _require(self.d < self.r_s, "d", "down rate must be below the risk-free rate")
        _require(self.r_s <= self.r_b, "r_s", "risk-free rate cannot exceed the borrowing rate")
        _require(self.u > self.r_b, "u", "up rate must exceed the borrowing rate")
        _require(self.v < self.w * (1 + self.u), "v",
                 "senior obligations exceed even the up-move proceeds")
        _require(0 < self.p_ss <= 1, "p_ss", "edge probability must lie in (0, 1]")

    @property
    def in_theory(self) -> bool:
        """True when the closed-form limit cases hold for every fraction."""
        return self.w * (1 + self.d) >= self.v


@dataclass(frozen=True)
class DerivedQuantities:
    """Per-fraction quantities below; `eps` is the risk-free share of agents."""

    eps: float
    y: float        # total liability (with interest) of a risky agent
    c_eps: float    # interbank claim coefficient
    k_u: float      # risky proceeds after an up-move
    k_d: float      # risky proceeds after a down-move
    w_tilde: float  # accumulated investable funds per risky agent
    w_low: float    # k_d - v
    w_high: float   # k_u - v
    expW: float     # mean of the shocked net proceeds
    a1: float       # no-default boundary for c_eps
    a2: float       # all-default boundary for c_eps


def derive(params: MarketParams, eps: float) -> DerivedQuantities:
    """Compute all derived per-fraction quantities.

    Raises ParamError if eps is outside [0, 1].
    """
    if not 0.0 <= eps <= 1.0:
        raise ParamError(f"eps: fraction {eps!r} outside [0, 1]")
    w, v, alpha, delta = params.w, params.v, params.alpha, params.delta
    w_tilde = w * (1 + eps) / (1 - alpha)
    y = w * (alpha + eps) * (1 + params.r_b) / (1 - alpha)
    c_eps = alpha * (1 + eps) / (alpha + eps)
    k_u = w * (1 + eps) * (1 + params.u)
    k_d = w * (1 + eps) * (1 + params.d)
    w_low = k_d - v
    w_high = k_u - v
    expW = delta * w_high + (1 - delta) * w_low
    a1 = (y - w_low) / y
    a2_denom = y - (1 - delta) * (w_high - w_low)
    if a2_denom == 0.0:
        raise ParamError("all-default boundary undefined: interbank claims "
                         "exactly offset the retained shock spread")
    a2 = (y - w_high) / a2_denom
    return DerivedQuantities(eps=eps, y=y, c_eps=c_eps, k_u=k_u, k_d=k_d,
                             w_tilde=w_tilde, w_low=w_low, w_high=w_high,
                             expW=expW, a1=a1, a2=a2)


@dataclass(frozen=True)
class DynamicsParams:
    """Evolution parameters: arrival/switch/departure counts and accuracies.

    mean_N / mean_S / mean_L are the per-round means of arrivals, switch
    attempts and the departure cap.  bound_N / bound_L are almost-sure bounds;
    when omitted they default to the bound of the binomial count family,
    2*ceil(mean).  b_n / b_s are the probabilities of observing a return
    comparison correctly.  n0 is the starting population, eps0 the starting
    risk-free fraction and rounds the horizon.
    """

    mean_N: float
    mean_S: float
    mean_L: float = 0.0
    bound_N: int | None = None
    bound_L: int | None = None
    b_n: float = 1.0
    b_s: float = 1.0
    n0: int = 100
    eps0: float = 0.5
    rounds: int = 1000

    def __post_init__(self) -> None:
        _require(self.mean_N >= 0, "mean_N", "arrival mean cannot be negative")
        _require(self.mean_S >= 0, "mean_S", "switch-attempt mean cannot be negative")
        _require(self.mean_L >= 0, "mean_L", "departure-cap mean cannot be negative")
        if self.bound_N is None:
            object.__setattr__(self, "bound_N", 2 * math.ceil(self.mean_N))
        if self.bound_L is None:
            object.__setattr__(self, "bound_L", 2 * math.ceil(self.mean_L))
        _require(self.mean_N <= self.bound_N, "bound_N",
                 "almost-sure bound below the mean")
        _require(self.mean_L <= self.bound_L, "bound_L",
                 "almost-sure bound below the mean")
        if self.mean_L > 0:
            _require(self.mean_N > self.mean_L, "mean_L",
                     "departures require a strictly larger arrival mean")
        _require(0 <= self.b_n <= 1, "b_n", "probability outside [0, 1]")
        _require(0 <= self.b_s <= 1, "b_s", "probability outside [0, 1]")
        _require(self.n0 >= 2, "n0", "need at least two starting agents")
        _require(0 <= self.eps0 <= 1, "eps0", "fraction outside [0, 1]")
        _require(self.rounds >= 0, "rounds", "horizon cannot be negative")
