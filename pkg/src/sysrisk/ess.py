"""Evolutionary stability checks for strategy fractions.

A candidate fraction eps* is stable when a small mutant sub-population
playing any other fraction earns strictly less, in the appropriate utility,
inside the post-invasion mixture.  Two utilities are supported: the
switch-count utility of the sampling dynamics (driven by the win probability
q of the risk-free return) and the mean-return utility of the averaging
dynamics.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

from .analytic import limit_returns, q_eps
from .model import DynamicsParams, MarketParams, ParamError


class EssMode(enum.Enum):
    SWITCH_UTILITY = "switch-utility"
    AVG_RETURN = "avg-return"
    MULTI_MUTATION = "multi-mutation"


@dataclass(frozen=True)
class EssVerdict:
    """Outcome of a stability check.

    ``margin`` is the smallest incumbent advantage observed across the tested
    mutants (positive iff the candidate repelled every one of them), and
    ``x_bar_used`` the largest mutant share that worked uniformly across
    mutants (None when the verdict is negative).  ``predominant_switching``
    records whether the switch-utility ranking carries the sign of the full
    dynamics (it does when sign(beta) equals sign(2 b_s - 1)); None for modes
    where the gate is vacuous.  ``multiple_sign_changes`` flags averaging
    profiles whose return gap changes sign more than once on the unit
    interval, where a single interior crossing is assumed.
    """

    candidate: float
    is_ess: bool
    margin: float
    x_bar_used: float | None
    mode: EssMode
    predominant_switching: bool | None = None
    multiple_sign_changes: bool = False


_X_GRID = (1e-3, 1e-2, 0.05, 0.1)


def _default_mutants(candidate: float, step: float = 0.01) -> tuple[float, ...]:
    k = round(1.0 / step)
    return tuple(i * step for i in range(k + 1) if abs(i * step - candidate) > 1e-9)


def switch_utility_gap(params: MarketParams, dyn: DynamicsParams,
                       eps_mut: float, eps_cand: float, x: float) -> float:
    """Mutant-minus-incumbent switch utility in the invaded mixture.

    The mixture fraction is eps_x = x*eps_mut + (1-x)*eps_cand; the utility
    ranking reduces to the sign of (eps_mut - eps_cand)(2 q(eps_x) - 1)
    weighted by the observation accuracy 2 b_s - 1.
    """
    if not 0.0 < x < 1.0:
        raise ParamError("x: mutant share must lie strictly inside (0, 1)")
    if not (0.0 <= eps_mut <= 1.0 and 0.0 <= eps_cand <= 1.0):
        raise ParamError("eps: strategy fractions must lie in [0, 1]")
    eps_x = x * eps_mut + (1.0 - x) * eps_cand
    return (eps_mut - eps_cand) * (2.0 * q_eps(params, eps_x) - 1.0) * (2.0 * dyn.b_s - 1.0)


def _beta_sign_gate(dyn: DynamicsParams) -> bool:
    beta = (2.0 * dyn.b_n - 1.0) * dyn.mean_N + (2.0 * dyn.b_s - 1.0) * dyn.mean_S
    bs = 2.0 * dyn.b_s - 1.0
    return beta * bs > 0.0 or (beta == 0.0 and bs == 0.0)


def check_mixed_ess(params: MarketParams, dyn: DynamicsParams, candidate: float,
                    mutant_grid: tuple[float, ...] | None = None,
                    x_grid: tuple[float, ...] | None = None) -> EssVerdict:
    """Is `candidate` stable against every single mutant on the grid?

    For each mutant the check looks for a share threshold x_bar in `x_grid`
    below which the mutant strictly underperforms; the verdict is positive
    only if every mutant has one.
    """
    if not 0.0 <= candidate <= 1.0:
        raise ParamError("candidate: must lie in [0, 1]")
    mutants = _default_mutants(candidate) if mutant_grid is None else tuple(mutant_grid)
    xs = _X_GRID if x_grid is None else tuple(sorted(x_grid))
    if not mutants or not xs:
        raise ParamError("grids: need at least one mutant and one share")

    worst = float("inf")
    best_uniform_x: float | None = None
    ok = True
    for mut in mutants:
        adv = [-switch_utility_gap(params, dyn, mut, candidate, x) for x in xs]
        prefix = 0
        while prefix < len(xs) and adv[prefix] > 0.0:
            prefix += 1
        if prefix == 0:
            ok = False
            worst = min(worst, adv[0])
            best_uniform_x = None
            continue
        worst = min(worst, min(adv[:prefix]))
        x_bar = xs[prefix - 1]
        if ok:
            best_uniform_x = x_bar if best_uniform_x is None else min(best_uniform_x, x_bar)
    return EssVerdict(candidate=candidate, is_ess=ok, margin=worst,
                      x_bar_used=best_uniform_x if ok else None,
                      mode=EssMode.SWITCH_UTILITY,
                      predominant_switching=_beta_sign_gate(dyn))


def check_multi_mutation(params: MarketParams, dyn: DynamicsParams, candidate: float,
                         mutant_profiles: tuple[tuple[tuple[float, float], ...], ...] | None = None,
                         ) -> EssVerdict:
    """Stability against several simultaneous mutations.

    Each profile is a tuple of (eps_i, x_i) pairs with small total share; the
    candidate must strictly beat every mutant inside the blended mixture.  A
    profile with mutants on both sides of an interior candidate always breaks
    it, since the utility ordering is linear in the strategy fraction.
    """
    if not 0.0 <= candidate <= 1.0:
        raise ParamError("candidate: must lie in [0, 1]")
    if mutant_profiles is None:
        profiles: list[tuple[tuple[float, float], ...]] = []
        for d in (0.05, 0.1, 0.2):
            pair = [(e, 0.01) for e in (candidate - d, candidate + d) if 0.0 <= e <= 1.0]
            if pair:
                profiles.append(tuple(pair))
        profiles.append(tuple((m, 0.02) for m in (0.25, 0.75) if abs(m - candidate) > 1e-9))
        mutant_profiles = tuple(p for p in profiles if p)

    worst = float("inf")
    max_share = 0.0
    ok = True
    for profile in mutant_profiles:
        total = sum(x for _, x in profile)
        if not 0.0 < total < 1.0:
            raise ParamError("profile: total mutant share must lie in (0, 1)")
        max_share = max(max_share, total)
        eps_x = sum(e * x for e, x in profile) + (1.0 - total) * candidate
        weight = (2.0 * q_eps(params, eps_x) - 1.0) * (2.0 * dyn.b_s - 1.0)
        for eps_i, _ in profile:
            margin_i = (candidate - eps_i) * weight
            worst = min(worst, margin_i)
            if margin_i <= 0.0:
                ok = False
    return EssVerdict(candidate=candidate, is_ess=ok, margin=worst,
                      x_bar_used=max_share if ok else None,
                      mode=EssMode.MULTI_MUTATION,
                      predominant_switching=_beta_sign_gate(dyn))


def _mean_return_gap(params: MarketParams, eps: float) -> float:
    """Risk-free minus expected risky return at mixture eps."""
    lr = limit_returns(params, eps)
    return lr.r1 - (params.delta * lr.r2_up + (1.0 - params.delta) * lr.r2_down)


def check_avg_ess(params: MarketParams, candidate: float, cbar: float = 1.0,
                  mutant_grid: tuple[float, ...] | None = None,
                  x_grid: tuple[float, ...] | None = None) -> EssVerdict:
    """Stability under the averaging dynamics' mean-return utility.

    The observation noise scale `cbar` washes out of the expected-utility
    ranking (it only affects how often a finite sample mis-orders the
    groups), so the verdict depends on the mean returns alone.
    """
    if cbar <= 0.0:
        raise ParamError("cbar: noise scale must be positive")
    if not 0.0 <= candidate <= 1.0:
        raise ParamError("candidate: must lie in [0, 1]")
    mutants = _default_mutants(candidate) if mutant_grid is None else tuple(mutant_grid)
    xs = _X_GRID if x_grid is None else tuple(sorted(x_grid))
    if not mutants or not xs:
        raise ParamError("grids: need at least one mutant and one share")

    # flag parameter sets where the return gap is not single-crossing
    signs = []
    for i in range(1, 400):
        g = _mean_return_gap(params, i / 400.0)
        if g != 0.0:
            signs.append(g > 0.0)
    flips = sum(1 for a, b in zip(signs, signs[1:]) if a != b)

    worst = float("inf")
    best_uniform_x: float | None = None
    ok = True
    for mut in mutants:
        adv = []
        for x in xs:
            eps_x = x * mut + (1.0 - x) * candidate
            adv.append((candidate - mut) * _mean_return_gap(params, eps_x))
        prefix = 0
        while prefix < len(xs) and adv[prefix] > 0.0:
            prefix += 1
        if prefix == 0:
            ok = False
            worst = min(worst, adv[0])
            best_uniform_x = None
            continue
        worst = min(worst, min(adv[:prefix]))
        if ok:
            x_bar = xs[prefix - 1]
            best_uniform_x = x_bar if best_uniform_x is None else min(best_uniform_x, x_bar)
    return EssVerdict(candidate=candidate, is_ess=ok, margin=worst,
                      x_bar_used=best_uniform_x if ok else None,
                      mode=EssMode.AVG_RETURN,
                      multiple_sign_changes=flips > 1)
