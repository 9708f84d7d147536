"""Large-network limit theory.

Closed forms for the scalar clearing limit, the limiting per-group returns,
the probability q that a risk-free agent's return weakly beats a risky one's,
and the three thresholds of the risk-free fraction:

  eps_bar_1  below which nobody defaults,
  eps_bar_2  above which every risky agent defaults (the systemic regime),
  eps_bar    at which q jumps from 1-delta to 1.

Parameters with v <= w(1+d) are fully covered by the closed forms; for larger
v the same quantities are computed from the scalar fixed point directly and
flagged `outside_theory`.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

from .model import DynamicsParams, MarketParams, ParamError, derive


class DefaultRegime(enum.Enum):
    NO_DEFAULT = "NoDefault"
    SHOCK_DEFAULT = "ShockDefault"
    ALL_DEFAULT = "AllDefault"


@dataclass(frozen=True)
class ClearingLimit:
    """Limiting expected clearing payment and default probability."""

    x_bar: float
    p_d: float
    regime: DefaultRegime
    outside_theory: bool = False
    degenerate: bool = False  # eps=1: no risky agents, x_bar reported as y


@dataclass(frozen=True)
class LimitReturns:
    r1: float       # risk-free group's (deterministic) limit return
    r2_up: float    # risky return after an up-move
    r2_down: float  # risky return after a down-move, clamped at 0


@dataclass(frozen=True)
class Thresholds:
    eps_bar_1: float
    eps_bar_2: float
    eps_bar: float  # 1.0 encodes "no interior switch"
    outside_theory: bool = False


def _scalar_fixed_point(params: MarketParams, eps: float) -> float:
    """Greatest solution of x = E[min((K + c*x - v)+, y)] by bisection.

    The defect x -> f(x) - x is non-increasing (the map's slope is at most
    c <= 1), so the root is unique up to flat stretches and bisection from
    [0, y] lands on it.
    """
    der = derive(params, eps)
    y, c, v = der.y, der.c_eps, params.v

    def f(x: float) -> float:
        up = min(max(der.k_u + c * x - v, 0.0), y)
        dn = min(max(der.k_d + c * x - v, 0.0), y)
        return params.delta * up + (1 - params.delta) * dn

    lo, hi = 0.0, y
    if f(hi) >= hi:
        return hi
    if f(lo) <= lo:
        return lo
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) >= mid:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _limit_core(params: MarketParams, eps: float, boundary_rules: bool) -> ClearingLimit:
    der = derive(params, eps)
    if boundary_rules and eps == 1.0:
        return ClearingLimit(x_bar=der.y, p_d=0.0, regime=DefaultRegime.NO_DEFAULT,
                             degenerate=True)
    if der.w_low >= 0:  # down-move proceeds cover senior debt: closed forms hold
        c = der.c_eps
        if c >= der.a1:
            return ClearingLimit(der.y, 0.0, DefaultRegime.NO_DEFAULT)
        if c >= der.a2:
            x = (params.delta * der.y + (1 - params.delta) * der.w_low) \
                / (1 - (1 - params.delta) * c)
            return ClearingLimit(x, 1 - params.delta, DefaultRegime.SHOCK_DEFAULT)
        return ClearingLimit(der.expW / (1 - c), 1.0, DefaultRegime.ALL_DEFAULT)

    # senior debt exceeds the down-move proceeds: no closed form, solve directly
    x = _scalar_fixed_point(params, eps)
    slack = 1e-12 * max(der.y, 1.0)
    dn_def = der.k_d + der.c_eps * x - params.v < der.y - slack
    up_def = der.k_u + der.c_eps * x - params.v < der.y - slack
    p_d = params.delta * up_def + (1 - params.delta) * dn_def
    if p_d == 0.0:
        regime = DefaultRegime.NO_DEFAULT
    elif up_def:
        regime = DefaultRegime.ALL_DEFAULT
    else:
        regime = DefaultRegime.SHOCK_DEFAULT
    return ClearingLimit(x, p_d, regime, outside_theory=True)


def clearing_limit(params: MarketParams, eps: float) -> ClearingLimit:
    """Limiting clearing value, default probability and regime at fraction eps."""
    return _limit_core(params, eps, boundary_rules=True)


def _returns_core(params: MarketParams, eps: float, boundary_rules: bool) -> LimitReturns:
    der = derive(params, eps)
    if boundary_rules and eps == 1.0:
        return LimitReturns(max(params.w * (1 + params.r_s) - params.v, 0.0), 0.0, 0.0)
    cl = _limit_core(params, eps, boundary_rules)
    x = cl.x_bar
    claims_1 = (1 - params.alpha) * (1 - eps) / (params.alpha + eps) * x
    r1 = max(params.w * eps * (1 + params.r_s) + claims_1 - params.v, 0.0)
    r2_up = max(der.k_u + der.c_eps * x - params.v - der.y, 0.0)
    r2_down = max(der.k_d + der.c_eps * x - params.v - der.y, 0.0)
    return LimitReturns(r1, r2_up, r2_down)


def limit_returns(params: MarketParams, eps: float) -> LimitReturns:
    """Limiting returns per group; risky returns are split by shock outcome."""
    return _returns_core(params, eps, boundary_rules=True)


def _q_core(params: MarketParams, eps: float, boundary_rules: bool) -> float:
    lr = _returns_core(params, eps, boundary_rules)
    return ((1 - params.delta) * (lr.r1 >= lr.r2_down)
            + params.delta * (lr.r1 >= lr.r2_up))


def q_eps(params: MarketParams, eps: float) -> float:
    """Probability that the risk-free return weakly beats the risky return.

    Ties count toward the risk-free side.  Under the covered parameter range
    the value is 1-delta below eps_bar and 1 at or above it.
    """
    return _q_core(params, eps, boundary_rules=True)


def _quad_roots(a: float, b: float, c: float) -> list[float]:
    'real roots of a*x^2 + b*x + c, ascending; handles the linear case'
    if a == 0.0:
        return [] if b == 0.0 else [-c / b]
    disc = b * b - 4 * a * c
    if disc < 0:
        return []
    s = disc ** 0.5
    r1, r2 = (-b - s) / (2 * a), (-b + s) / (2 * a)
    return sorted((r1, r2))


def _bisect_step(fn, lo: float, hi: float, tol: float = 1e-12) -> float:
    """Smallest point in [lo, hi] where the 0/1-valued fn first turns true."""
    if fn(lo):
        return lo
    if not fn(hi):
        return hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if fn(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _eps_bar_bisect(params: MarketParams, lo: float, hi: float) -> float:
    """Switch point of q found directly, using the interior formulas at eps=1."""
    q_hi = 1 - 1e-9  # q is a step between 1-delta and 1
    return _bisect_step(lambda e: _q_core(params, e, boundary_rules=False) > q_hi, lo, hi)


def thresholds(params: MarketParams, check: bool = True) -> Thresholds:
    """The three fraction thresholds.

    For v <= w(1+d) these come from closed-form root-finding; `check=True`
    additionally locates eps_bar by direct bisection on q and raises if the
    two routes disagree beyond 1e-6.  For larger v everything is computed by
    bisection on the fixed-point-backed quantities (assumed monotone) and the
    result is flagged.
    """
    w, v, alpha, delta = params.w, params.v, params.alpha, params.delta
    u, d, r_s, r_b = params.u, params.d, params.r_s, params.r_b

    if not params.in_theory:
        def p_d_at(e: float) -> float:
            return _limit_core(params, e, boundary_rules=False).p_d

        e1 = _bisect_step(lambda e: p_d_at(e) > 0.0, 0.0, 1.0)
        if p_d_at(1.0) < 1.0:
            e2 = 1.0
        else:
            e2 = _bisect_step(lambda e: p_d_at(e) >= 1.0, e1, 1.0)
        ebar = _eps_bar_bisect(params, e1 if e1 < 1 else 0.0, 1.0)
        return Thresholds(e1, e2, ebar, outside_theory=True)

    wdv = w * (1 + d) - v  # >= 0 here
    eps1 = min(wdv / (w * (r_b - d)), 1.0)
    if eps1 >= 1.0:
        return Thresholds(1.0, 1.0, 1.0)

    # systemic threshold: first sign change of the concave-case quadratic
    f2 = w * ((u - d) * (1 - alpha * (1 - delta)) - (r_b - d))
    f1 = wdv - alpha * w * (r_b - d) + w * (u - d) * (2 * alpha * delta + 1 - alpha)
    f0 = alpha * (wdv + delta * w * (u - d))
    eps2 = 1.0
    if f2 + f1 + f0 < 0:  # ends negative, so a crossing exists in (eps1, 1)
        for root in _quad_roots(f2, f1, f0):
            if eps1 < root <= 1.0:
                eps2 = root
                break

    # q switch point: crossing of the comparison-margin quadratic
    m3 = w * (u - r_s) * (1 - alpha * (1 - delta)) - w * (1 - delta) * (r_b - d)
    b1 = (w * (u - r_b) * (1 - alpha * (1 - delta)) + w * alpha * delta * (u - r_s)
          + (1 - delta) * (wdv - w * (r_b - d) * (2 * alpha - 1)))
    b0 = w * alpha * delta * (u - r_b) + (2 * alpha - 1) * (1 - delta) * wdv
    hi = min(eps2, 1.0)
    ebar = None
    for root in _quad_roots(m3, b1, b0):
        if eps1 <= root <= hi:
            # take the root where the margin actually turns non-positive
            probe = min(root + 1e-9 * max(1.0, abs(root)), hi)
            if m3 * probe * probe + b1 * probe + b0 <= 0:
                ebar = root
                break
    if ebar is None:
        ebar = eps2 if eps2 < 1.0 else 1.0

    if check:
        direct = _eps_bar_bisect(params, eps1, 1.0)
        if abs(direct - ebar) > 1e-6:
            raise RuntimeError(
                f"threshold routes disagree: quadratic {ebar!r} vs bisection {direct!r}")

    return Thresholds(eps1, eps2, ebar)


def beta_kappa(params: MarketParams, dyn: DynamicsParams, eps: float) -> tuple[float, float]:
    """Net imitation drift rate beta and its eps-dependent effective value kappa.

    beta aggregates arrival and switching pressure; below eps_bar the return
    comparison favors the risky side only after a down-shock, which flips the
    drift by (1 - 2*delta).
    """
    if not 0.0 <= eps <= 1.0:
        raise ParamError(f"eps: fraction {eps!r} outside [0, 1]")
    beta = (2 * dyn.b_n - 1) * dyn.mean_N + (2 * dyn.b_s - 1) * dyn.mean_S
    th = thresholds(params, check=False)
    kappa = beta * (1 - 2 * params.delta) if eps < th.eps_bar else beta
    return beta, kappa
