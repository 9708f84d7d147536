"""Mean-field flow of the population state.

The simulated population's (eps, psi) pair tracks a two-dimensional ODE,

    d eps/dt = [kappa(eps) * eps * (1 - eps) + eps * E_dep(eps)] / psi
    d psi/dt = (E[N] - E_dep(eps)) - psi

where kappa switches value at the comparison threshold eps_bar and the
departure mass E_dep equals E[L] wherever defaults occur (above eps_bar_1)
and vanishes at eps = 1.  Between thresholds the solution is an explicit
time-changed logistic, so trajectories are advanced segment by segment with
bisection only for the crossing times.  A classical fourth-order integrator
of the same right-hand side serves as an independent cross-check.  The module
also houses the attractor classification, the finite-round estimate used for
table predictions, and the average-return variant of the dynamics.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .analytic import clearing_limit, limit_returns, thresholds
from .model import DynamicsParams, MarketParams, ParamError
from .records import RoundRecord, Trajectory


class DegenerateFlowError(ParamError):
    """A flow interval's logistic midpoint mu_i is exactly zero."""


@dataclass(frozen=True)
class OdeState:
    eps: float
    psi: float
    t: float
    pinned: bool = False  # frozen at an interior threshold (mixed limit)


@dataclass(frozen=True)
class _Segment:
    lo: float
    hi: float
    kappa: float
    e_dep: float  # departure mass active strictly inside this segment
    a: float      # psi relaxation target, E[N] - e_dep

    def drift(self, eps: float) -> float:
        """Sign-carrying eps-velocity; psi > 0 never flips it."""
        return self.kappa * eps * (1.0 - eps) + eps * self.e_dep


@dataclass(frozen=True)
class PiecewiseSpec:
    """Per-interval constants of the piecewise-logistic closed form.

    An interval with mu = None has kappa = 0 and carries pure departure
    drift; its exponent entry is e_dep / a.
    """

    intervals: tuple[tuple[float, float], ...]
    mu: tuple[float | None, ...]
    q_exp: tuple[float, ...]
    a: tuple[float, ...]


def _beta(dyn: DynamicsParams) -> float:
    return (2 * dyn.b_n - 1) * dyn.mean_N + (2 * dyn.b_s - 1) * dyn.mean_S


def _segments(params: MarketParams, dyn: DynamicsParams, mean_L: float) -> list[_Segment]:
    if dyn.mean_N <= 0:
        raise ParamError("mean_N: the population flow needs a positive arrival mean")
    th = thresholds(params, check=False)
    beta = _beta(dyn)
    k1 = beta * (1 - 2 * params.delta)
    e1, eb = th.eps_bar_1, th.eps_bar
    edges = [0.0] + sorted(e for e in {e1, eb} if 0.0 < e < 1.0) + [1.0]
    segs = []
    for lo, hi in zip(edges, edges[1:]):
        kappa = k1 if hi <= eb else beta
        e_dep = mean_L if lo >= e1 else 0.0
        a = dyn.mean_N - e_dep
        if a <= 0:
            raise ParamError("mean_L: departures must stay below arrivals for the flow")
        if kappa != 0.0 and kappa + e_dep == 0.0:
            raise DegenerateFlowError(
                f"flow interval [{lo:g}, {hi:g}] has logistic midpoint mu = 0")
        segs.append(_Segment(lo, hi, kappa, e_dep, a))
    return segs


def piecewise_spec(params: MarketParams, dyn: DynamicsParams,
                   departures: bool = True) -> PiecewiseSpec:
    """Interval table of the closed form, split at interior midpoints."""
    segs = _segments(params, dyn, dyn.mean_L if departures else 0.0)
    intervals: list[tuple[float, float]] = []
    mus: list[float | None] = []
    qs: list[float] = []
    a: list[float] = []
    for s in segs:
        mu = 1.0 + s.e_dep / s.kappa if s.kappa != 0.0 else None
        pieces = [(s.lo, s.hi)]
        if mu is not None and s.lo < mu < s.hi:
            pieces = [(s.lo, mu), (mu, s.hi)]
        for piece in pieces:
            intervals.append(piece)
            mus.append(mu)
            qs.append((s.kappa + s.e_dep) / s.a)
            a.append(s.a)
    return PiecewiseSpec(tuple(intervals), tuple(mus), tuple(qs), tuple(a))


def _psi_after(a: float, psi0: float, dt: float) -> float:
    return a + (psi0 - a) * math.exp(-dt)


def _log_warp(a: float, psi0: float, dt: float) -> float:
    """log of the time-substitution base (a*e^dt + psi0 - a) / psi0."""
    return math.log1p(a * math.expm1(dt) / psi0)


def _eps_after(seg: _Segment, eps0: float, psi0: float, dt: float) -> float:
    """Advance eps by dt inside one segment (exact up to rounding).

    Returns +inf past the algebraic pole, which is only reachable on upward
    flow repelled from a midpoint outside (eps0, 1); callers treat that as
    having crossed the segment's upper edge.
    """
    lw = _log_warp(seg.a, psi0, dt)
    if seg.kappa == 0.0:
        return eps0 * math.exp((seg.e_dep / seg.a) * lw)
    mu = 1.0 + seg.e_dep / seg.kappa
    if eps0 == mu:
        return eps0
    log_h = (seg.kappa + seg.e_dep) / seg.a * lw
    if mu > 0.0 and eps0 < mu:
        # logistic toward/away from mu, stable in both tails
        z = math.log(eps0 / (mu - eps0)) + log_h
        if z >= 0:
            return mu / (1.0 + math.exp(-z))
        ez = math.exp(z)
        return mu * ez / (1.0 + ez)
    h = math.exp(min(log_h, 709.0))
    den = mu - eps0 + eps0 * h
    if (den <= 0.0) if mu > 0.0 else (den >= 0.0):
        return math.inf
    return mu * eps0 * h / den


def _locate(segs: list[_Segment], eps: float) -> tuple[_Segment, float] | None:
    """Segment owning an interior eps plus flow direction; None when pinned."""
    for s in segs:
        if s.lo < eps < s.hi:
            d = s.drift(eps)
            return s, math.copysign(1.0, d) if d != 0.0 else 0.0
    for below, above in zip(segs, segs[1:]):
        if eps == below.hi:
            if above.drift(eps) > 0.0:
                return above, 1.0
            if below.drift(eps) < 0.0:
                return below, -1.0
            return None
    raise AssertionError(f"eps {eps!r} not locatable")


def _cross_time(seg: _Segment, eps0: float, psi0: float, rem: float,
                edge: float, up: bool) -> float:
    """Bisect the in-segment crossing time of `edge` within [0, rem]."""
    def crossed(dt: float) -> bool:
        v = _eps_after(seg, eps0, psi0, dt)
        return (v >= edge or math.isinf(v)) if up else v <= edge

    lo, hi = 0.0, rem
    while hi - lo > 1e-12:
        mid = 0.5 * (lo + hi)
        if crossed(mid):
            hi = mid
        else:
            lo = mid
    return hi


def _dep_active(eps: float, e1: float, p0: float) -> bool:
    """Do defaults (hence departures) occur at this eps?"""
    return eps < 1.0 and (eps > e1 or p0 > 0.0)


_MAX_TRANSITIONS = 64


def _flow(params: MarketParams, dyn: DynamicsParams, eps0: float, psi0: float,
          t: float, mean_L: float) -> OdeState:
    if not 0.0 <= eps0 <= 1.0:
        raise ParamError(f"eps0: fraction {eps0!r} outside [0, 1]")
    if psi0 <= 0.0:
        raise ParamError("psi0: population rate must be positive")
    if t < 0.0:
        raise ParamError("t: flow time cannot be negative")
    segs = _segments(params, dyn, mean_L)
    e1 = thresholds(params, check=False).eps_bar_1
    p0 = clearing_limit(params, 0.0).p_d if mean_L > 0 else 0.0

    eps, psi, now = eps0, psi0, 0.0
    pinned = False
    transitions = 0
    while now < t:
        rem = t - now
        if eps <= 0.0 or eps >= 1.0 or pinned:
            dep = mean_L if _dep_active(eps, e1, p0) else 0.0
            psi = _psi_after(dyn.mean_N - dep, psi, rem)
            now = t
            break
        located = _locate(segs, eps)
        if located is None:
            pinned = True
            continue
        seg, direction = located
        if direction == 0.0:  # balanced exactly at a midpoint: stays put
            psi = _psi_after(seg.a, psi, rem)
            now = t
            break
        cand = _eps_after(seg, eps, psi, rem)
        if seg.lo < cand < seg.hi:
            eps, psi, now = cand, _psi_after(seg.a, psi, rem), t
            break
        edge = seg.hi if (cand >= seg.hi or math.isinf(cand)) else seg.lo
        dt = _cross_time(seg, eps, psi, rem, edge, up=edge == seg.hi)
        psi = _psi_after(seg.a, psi, dt)
        eps = edge
        now += dt
        transitions += 1
        if transitions > _MAX_TRANSITIONS:
            raise RuntimeError("flow failed to settle: too many segment transitions")
    if eps <= 0.0 or eps >= 1.0:
        pinned = False  # absorbing endpoints are reported by eps itself
    return OdeState(eps=eps, psi=psi, t=t, pinned=pinned)


def ode_solution(params: MarketParams, dyn: DynamicsParams, eps0: float,
                 psi0: float, t: float) -> OdeState:
    """Closed-form flow state at time t, departures off."""
    return _flow(params, dyn, eps0, psi0, t, 0.0)


def ode_solution_departures(params: MarketParams, dyn: DynamicsParams, eps0: float,
                            psi0: float, t: float) -> OdeState:
    """Closed-form flow state at time t with defaulter departures active."""
    return _flow(params, dyn, eps0, psi0, t, dyn.mean_L)


def finite_round_estimate(params: MarketParams, dyn: DynamicsParams, eps0: float,
                          l: int, k: int) -> float:
    """Predicted risk-free fraction after l+k rounds, via the flow clock.

    Round j advances the clock by 1/(j + n0 + l); the estimate is the
    departure-free closed form evaluated at the accumulated time from a unit
    population rate.
    """
    if l < 0:
        raise ParamError("l: negative round offset")
    if k < 0:
        raise ParamError("k: negative round count")
    t_kl = math.fsum(1.0 / (j + dyn.n0 + l) for j in range(l + 1, l + k + 1))
    return _flow(params, dyn, eps0, 1.0, t_kl, 0.0).eps


def ode_numeric(params: MarketParams, dyn: DynamicsParams, eps0: float, psi0: float,
                horizon: float, step: float) -> Trajectory:
    """Fixed-step RK4 integration of the flow, with threshold events located.

    Independent of the closed form: integrates the raw right-hand side and
    only uses the analytic layer for the switching thresholds.  Records one
    row per accepted step (plus one per event landing) with the clock in `t`.
    """
    if step <= 0.0:
        raise ParamError("step: must be positive")
    if not 0.0 <= eps0 <= 1.0:
        raise ParamError(f"eps0: fraction {eps0!r} outside [0, 1]")
    if psi0 <= 0.0:
        raise ParamError("psi0: population rate must be positive")
    th = thresholds(params, check=False)
    e1, eb = th.eps_bar_1, th.eps_bar
    beta = _beta(dyn)
    k1 = beta * (1 - 2 * params.delta)
    eL = dyn.mean_L
    p0 = clearing_limit(params, 0.0).p_d if eL > 0 else 0.0
    segs = _segments(params, dyn, eL)

    def rhs(eps: float, psi: float) -> tuple[float, float]:
        if psi <= 0.0:
            raise ParamError("step: population rate left (0, inf); reduce the step size")
        kappa = k1 if eps < eb else beta
        dep = eL if _dep_active(eps, e1, p0) else 0.0
        de = (kappa * eps * (1.0 - eps) + eps * dep) / psi
        return de, (dyn.mean_N - dep) - psi

    def rk4(eps: float, psi: float, h: float) -> tuple[float, float]:
        a1, b1 = rhs(eps, psi)
        a2, b2 = rhs(eps + 0.5 * h * a1, psi + 0.5 * h * b1)
        a3, b3 = rhs(eps + 0.5 * h * a2, psi + 0.5 * h * b2)
        a4, b4 = rhs(eps + h * a3, psi + h * b3)
        return (eps + h / 6.0 * (a1 + 2 * a2 + 2 * a3 + a4),
                psi + h / 6.0 * (b1 + 2 * b2 + 2 * b3 + b4))

    event_edges = sorted(e for e in {e1, eb} if 0.0 < e < 1.0) + [1.0]
    records = [RoundRecord(eps=eps0, psi=psi0, t=0.0)]
    eps, psi, now = eps0, psi0, 0.0
    frozen = eps <= 0.0 or eps >= 1.0
    while now < horizon - 1e-15:
        h = min(step, horizon - now)
        if frozen:
            dep = eL if _dep_active(eps, e1, p0) else 0.0
            psi = _psi_after(dyn.mean_N - dep, psi, h)
            now += h
            records.append(RoundRecord(eps=eps, psi=psi, t=now))
            continue
        e2, p2 = rk4(eps, psi, h)
        hits = [e for e in event_edges if eps < e <= e2 or e2 <= e < eps]
        if not hits:
            if e2 < -1e-9 or e2 > 1.0 + 1e-9:
                raise ParamError("step: state left [0, 1]; reduce the step size")
            eps, psi, now = min(max(e2, 0.0), 1.0), p2, now + h
            records.append(RoundRecord(eps=eps, psi=psi, t=now))
            continue
        target = min(hits) if e2 > eps else max(hits)
        up = e2 > eps
        lo_t, hi_t = 0.0, h
        while hi_t - lo_t > 1e-12:
            mid = 0.5 * (lo_t + hi_t)
            em, _ = rk4(eps, psi, mid)
            if (em >= target) if up else (em <= target):
                hi_t = mid
            else:
                lo_t = mid
        _, psi = rk4(eps, psi, hi_t)
        now += hi_t
        eps = target
        if target >= 1.0:
            frozen = True
        else:
            decision = _locate(segs, target)
            if decision is None:
                frozen = True  # pinned at the threshold
            else:
                seg, direction = decision
                eps = target + math.copysign(1e-13, direction)
        records.append(RoundRecord(eps=min(eps, 1.0), psi=psi, t=now))
    return Trajectory(records=records, kind="ode")


@dataclass(frozen=True)
class AttractorReport:
    """Attractors with their eps0 basins.

    `doa[i]` is the half-open basin [lo, hi) of `attractors[i]` (the last one
    closed at 1); a basin boundary point itself flows with the upper basin,
    matching the convention that the threshold value favors the risk-free
    side.  `conjecture` marks the interior mixed limit without departures,
    which the flow only circles rather than provably reaches.
    """

    attractors: tuple[tuple[float, float], ...]
    doa: tuple[tuple[float, float], ...]
    regime_label: str
    conjecture: bool = False


def _terminal(segs: list[_Segment], eps: float, dyn: DynamicsParams,
              e1: float, p0: float, mean_L: float) -> tuple[float, float, bool]:
    """(eps*, psi*, pinned) reached from eps under the sign flow."""
    for _ in range(2 * len(segs) + 4):
        if eps <= 0.0:
            dep = mean_L if _dep_active(0.0, e1, p0) else 0.0
            return 0.0, dyn.mean_N - dep, False
        if eps >= 1.0:
            return 1.0, dyn.mean_N, False
        located = _locate(segs, eps)
        if located is None:
            dep = mean_L if _dep_active(eps, e1, p0) else 0.0
            return eps, dyn.mean_N - dep, True
        seg, direction = located
        if direction == 0.0:
            return eps, seg.a, False
        eps = seg.hi if direction > 0 else seg.lo
    raise RuntimeError("attractor walk failed to settle")


def classify_attractors(params: MarketParams, dyn: DynamicsParams) -> AttractorReport:
    """Partition eps0 into basins and name each basin's limit point."""
    beta = _beta(dyn)
    if beta == 0.0:
        raise ParamError("beta: zero net drift admits no attractor classification")
    mean_L = dyn.mean_L
    segs = _segments(params, dyn, mean_L)
    th = thresholds(params, check=False)
    e1 = th.eps_bar_1
    p0 = clearing_limit(params, 0.0).p_d if mean_L > 0 else 0.0

    cuts = {s.lo for s in segs if 0.0 < s.lo < 1.0}
    for s in segs:
        if s.kappa < 0.0:
            mu = 1.0 + s.e_dep / s.kappa
            if s.lo < mu < s.hi:  # interior balance point: a repeller
                cuts.add(mu)
    bounds = [0.0] + sorted(cuts) + [1.0]

    merged: list[list] = []  # [lo, hi, (eps*, psi*, pinned)]
    for lo, hi in zip(bounds, bounds[1:]):
        term = _terminal(segs, 0.5 * (lo + hi), dyn, e1, p0, mean_L)
        if merged and abs(merged[-1][2][0] - term[0]) <= 1e-12 \
                and abs(merged[-1][2][1] - term[1]) <= 1e-12:
            merged[-1][1] = hi
        else:
            merged.append([lo, hi, term])

    attractors = tuple((t[0], t[1]) for _, _, t in merged)
    doa = tuple((lo, hi) for lo, hi, _ in merged)
    conjecture = any(t[2] for _, _, t in merged) and mean_L == 0.0
    names = []
    for (lo, hi), (e_star, _, pinnedflag) in zip(doa, (m[2] for m in merged)):
        tag = f"mixed@{e_star:.6g}" if pinnedflag else f"eps*={e_star:g}"
        names.append(f"[{lo:.6g},{hi:.6g})->{tag}")
    label = (f"beta={beta:g}, kappa_below={beta * (1 - 2 * params.delta):g}"
             f"{', departures' if mean_L > 0 else ''}; " + " ".join(names))
    return AttractorReport(attractors=attractors, doa=doa,
                           regime_label=label, conjecture=conjecture)


def _phi(params: MarketParams, eps: float) -> tuple[float, float]:
    """Expected returns (risk-free, risky) at fraction eps."""
    lr = limit_returns(params, eps)
    return lr.r1, params.delta * lr.r2_up + (1 - params.delta) * lr.r2_down


def avg_dynamics(params: MarketParams, cbar: float, eps: float) -> float:
    """Drift of the fraction when agents compare noisy group-average returns.

    The comparison noise has variance 1/(cbar*eps) + 1/(cbar*(1-eps)), so the
    probability of seeing the risk-free group ahead is the normal CDF of
    (phi1 - phi2) * sqrt(cbar*eps*(1-eps)).
    """
    if cbar <= 0.0:
        raise ParamError("cbar: observation mass must be positive")
    if not 0.0 <= eps <= 1.0:
        raise ParamError(f"eps: fraction {eps!r} outside [0, 1]")
    if eps in (0.0, 1.0):
        return 0.0
    p1, p2 = _phi(params, eps)
    z = (p1 - p2) * math.sqrt(cbar * eps * (1.0 - eps))
    g = 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))
    return eps * (1.0 - eps) * (2.0 * g - 1.0)


@dataclass(frozen=True)
class AvgLimit:
    """Limit of the average-comparison flow.

    `applies` is False when the return-gap sign pattern fits none of the
    covered cases (all-negative, all-positive, or a single decreasing
    crossing); the reported limit is then best-effort.  For the interior
    case the delta->1 closed form (r_b - r̄)/(r̄ - r_s) rides along.
    """

    limit: float
    case: str
    applies: bool
    delta1_closed_form: float | None = None


def avg_limit(params: MarketParams) -> AvgLimit:
    r_bar = params.u * params.delta + params.d * (1 - params.delta)
    closed = None
    if r_bar > params.r_s:
        closed = (params.r_b - r_bar) / (r_bar - params.r_s)

    grid = [i / 400.0 for i in range(1, 400)]
    diff = [p1 - p2 for p1, p2 in (_phi(params, e) for e in grid)]
    if all(x < 0 for x in diff):
        return AvgLimit(0.0, "all-risky", True, closed)
    if all(x > 0 for x in diff):
        return AvgLimit(1.0, "all-safe", True, closed)

    crossings = [i for i in range(len(diff) - 1)
                 if (diff[i] > 0 >= diff[i + 1]) or (diff[i] < 0 <= diff[i + 1])
                 or (diff[i] == 0 != diff[i + 1])]
    if len(crossings) == 1 and diff[crossings[0]] > 0:
        lo, hi = grid[crossings[0]], grid[crossings[0] + 1]
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            d1, d2 = _phi(params, mid)
            if d1 - d2 > 0:
                lo = mid
            else:
                hi = mid
        return AvgLimit(0.5 * (lo + hi), "interior", True, closed)

    best = grid[crossings[0]] if crossings else (1.0 if sum(diff) > 0 else 0.0)
    return AvgLimit(best, "unclassified", False, closed)
