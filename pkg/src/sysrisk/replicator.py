"""Finite-population Monte-Carlo engine.

Each round, the current population plays one borrowing/clearing round on a
freshly sampled liability network, then the population composition updates:
incumbents imitate better-returning peers (switching), defaulted risky agents
may leave (departures), and newcomers adopt the strategy of better-returning
incumbents (arrivals).  All draws come from a single ``numpy`` Generator in a
fixed order, so a run is fully determined by its seed.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .clearing import ReturnsVector, compute_returns, default_stats, solve_clearing
from .model import DynamicsParams, MarketParams, ParamError
from .netgen import sample_network, sample_shocks
from .records import RoundRecord, Trajectory

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PopulationState:
    """Population composition entering a round.

    ``last_returns`` holds the returns realised in the most recent round the
    population played (a warm-up round for a fresh state), ``ids1``/``ids2``
    the persistent agent identities of the risk-free and risky groups, and
    ``next_id`` the next unused identity.  ``psi`` is the population size
    relative to the round clock, ``n / (round + n0)``.
    """

    round: int
    n1: int
    n2: int
    psi: float
    last_returns: ReturnsVector
    ids1: np.ndarray
    ids2: np.ndarray
    next_id: int

    @property
    def n(self) -> int:
        return self.n1 + self.n2

    @property
    def eps(self) -> float:
        return self.n1 / self.n


def initial_state(params: MarketParams, dyn: DynamicsParams,
                  rng_stream: np.random.Generator) -> PopulationState:
    """Build the round-0 population and play one warm-up clearing round.

    The initial split puts ``round(eps0 * n0)`` agents in the risk-free group.
    The warm-up round only populates ``last_returns``; it causes no switching,
    arrivals, or departures.
    """
    n0 = dyn.n0
    n1 = int(round(dyn.eps0 * n0))
    n2 = n0 - n1
    graph = sample_network(params, n1, n2, rng_stream)
    shocks = sample_shocks(params, n2, graph.eps, rng_stream)
    res = solve_clearing(graph, shocks, params)
    returns = compute_returns(graph, res, shocks, params)
    ids = np.arange(n0, dtype=np.uint64)
    return PopulationState(round=0, n1=n1, n2=n2, psi=1.0, last_returns=returns,
                           ids1=ids[:n1], ids2=ids[n1:], next_id=n0)


def _draw_count(rng_stream: np.random.Generator, mean: float, bound: int,
                deterministic: bool) -> int:
    """One arrival/switch/departure count: Binomial(bound, mean/bound)."""
    if deterministic:
        return int(round(mean))
    if mean <= 0.0 or bound <= 0:
        return 0
    return int(rng_stream.binomial(bound, mean / bound))


def _pick_other(rng_stream: np.random.Generator, n: int, me: np.ndarray) -> np.ndarray:
    """Uniform draw over the n-1 indices distinct from each entry of ``me``."""
    raw = rng_stream.integers(0, n - 1, size=me.shape)
    return raw + (raw >= me)


def step_round(state: PopulationState, params: MarketParams, dyn: DynamicsParams,
               rng_stream: np.random.Generator, *, departures: bool = True,
               deterministic_counts: bool = False, fixed_links: bool = False,
               link_key: int = 0) -> tuple[PopulationState, RoundRecord]:
    """Play one round and return the successor state plus its record.

    The record describes the population that *played* the round (its eps, psi
    and size at the start) together with the flows the round produced.  Order
    of operations inside the round: draw the arrival/switch/departure counts,
    sample the network and shocks, clear, compute returns, apply switching
    (simultaneous, based on this round's returns), remove departing defaulted
    risky agents, then add arrivals.  Group sizes update exactly:
    ``n1' = n1 + xi + Xi1 - Xi2`` and ``n' = n + N - D``.
    """
    n1, n2 = state.n1, state.n2
    n = n1 + n2
    if n < 2:
        raise ParamError("population: need at least two agents per round")

    N_k = _draw_count(rng_stream, dyn.mean_N, dyn.bound_N, deterministic_counts)
    S_k = _draw_count(rng_stream, dyn.mean_S, 2 * math.ceil(dyn.mean_S), deterministic_counts)
    L_k = 0
    if departures and dyn.mean_L > 0.0:
        L_k = _draw_count(rng_stream, dyn.mean_L, dyn.bound_L, deterministic_counts)

    agent_ids = None
    key = None
    if fixed_links and params.p_ss < 1.0:
        agent_ids = np.concatenate([state.ids1, state.ids2])
        key = link_key
    graph = sample_network(params, n1, n2, rng_stream, link_key=key, agent_ids=agent_ids)
    shocks = sample_shocks(params, n2, graph.eps, rng_stream)
    res = solve_clearing(graph, shocks, params)
    returns = compute_returns(graph, res, shocks, params)
    stats = default_stats(res, graph.y)

    r_all = np.concatenate([returns.r1, returns.r2])

    # -- switching: S_eff agents compare against one uniform other agent.
    S_eff = min(S_k, n)
    Xi1 = Xi2 = 0
    to_g1_local: list[int] = []      # positions in ids2 switching to risk-free
    to_g2_local: list[int] = []      # positions in ids1 switching to risky
    if S_eff > 0:
        attempters = rng_stream.choice(n, size=S_eff, replace=False)
        contacts = _pick_other(rng_stream, n, attempters)
        flips = rng_stream.random(S_eff) >= dyn.b_s
        for a, c, flip in zip(attempters.tolist(), contacts.tolist(), flips.tolist()):
            a_risky = a >= n1
            if a_risky == (c >= n1):
                continue
            if a_risky:
                looks_better = r_all[c] >= r_all[a]   # ties favour risk-free
                if looks_better != flip:
                    to_g1_local.append(a - n1)
                    Xi1 += 1
            else:
                looks_better = r_all[c] > r_all[a]
                if looks_better != flip:
                    to_g2_local.append(a)
                    Xi2 += 1

    # -- departures: defaulted risky agents that did not just switch away.
    D = 0
    departed = np.empty(0, dtype=np.intp)
    if L_k > 0 and n2 > 0 and returns.defaults.size > 0:
        stayed = np.ones(n2, dtype=bool)
        stayed[to_g1_local] = False
        candidates = returns.defaults[stayed[returns.defaults]]
        D = min(L_k, int(candidates.size))
        room = n + N_k - 2
        if D > room:
            log.warning("round %d: clipping %d departures to %d to keep two agents alive",
                        state.round, D, max(room, 0))
            D = max(room, 0)
        if D > 0:
            departed = rng_stream.choice(candidates, size=D, replace=False)

    # -- arrivals: each entrant asks two distinct incumbents from this round.
    xi = 0
    joins_g1 = np.empty(0, dtype=bool)
    if N_k > 0:
        first = rng_stream.integers(0, n, size=N_k)
        second = _pick_other(rng_stream, n, first)
        a_flips = rng_stream.random(N_k) >= dyn.b_n
        joins_g1 = np.empty(N_k, dtype=bool)
        for i in range(N_k):
            f, s = int(first[i]), int(second[i])
            f_risky, s_risky = f >= n1, s >= n1
            if f_risky == s_risky:
                joins_g1[i] = not f_risky
            else:
                safe, risky = (s, f) if f_risky else (f, s)
                looks_better = r_all[safe] >= r_all[risky]   # ties favour risk-free
                joins_g1[i] = looks_better != a_flips[i]
        xi = int(joins_g1.sum())

    # -- exact composition update.
    new_n1 = n1 + xi + Xi1 - Xi2
    new_n = n + N_k - D
    new_n2 = new_n - new_n1
    assert new_n1 >= 0 and new_n2 >= 0, "group sizes must stay non-negative"

    keep1 = np.ones(n1, dtype=bool)
    keep1[to_g2_local] = False
    keep2 = np.ones(n2, dtype=bool)
    keep2[to_g1_local] = False
    keep2[departed] = False
    fresh = np.arange(state.next_id, state.next_id + N_k, dtype=np.uint64)
    ids1 = np.concatenate([state.ids1[keep1],
                           state.ids2[np.asarray(to_g1_local, dtype=np.intp)],
                           fresh[joins_g1]])
    ids2 = np.concatenate([state.ids2[keep2],
                           state.ids1[np.asarray(to_g2_local, dtype=np.intp)],
                           fresh[~joins_g1]])
    assert ids1.size == new_n1 and ids2.size == new_n2

    psi = new_n / (state.round + 1 + dyn.n0)
    record = RoundRecord(
        eps=state.eps, psi=state.psi, round=state.round, n=n, n1=n1,
        default_frac=stats.count / n, xi=xi, Xi1=Xi1, Xi2=Xi2, departures=D,
        mean_r1=float(returns.r1.mean()) if n1 else None,
        mean_r2=float(returns.r2.mean()) if n2 else None,
        clearing_converged=res.converged,
    )
    new_state = PopulationState(round=state.round + 1, n1=new_n1, n2=new_n2, psi=psi,
                                last_returns=returns, ids1=ids1, ids2=ids2,
                                next_id=state.next_id + N_k)
    return new_state, record


def run_simulation(config, seed: int) -> Trajectory:
    """Run ``config.dynamics.rounds`` rounds and return the trajectory.

    ``config`` is duck-typed: it must expose ``market`` and ``dynamics``, and
    may expose the run flags ``departures`` (default True), ``fixed_links``
    and ``deterministic_counts`` (default False) and a ``label``.  The seed
    fixes both the Generator stream and, under fixed links, the link key.
    """
    params: MarketParams = config.market
    dyn: DynamicsParams = config.dynamics
    departures = bool(getattr(config, "departures", True))
    fixed_links = bool(getattr(config, "fixed_links", False))
    deterministic = bool(getattr(config, "deterministic_counts", False))
    rng = np.random.default_rng(seed)
    state = initial_state(params, dyn, rng)
    records: list[RoundRecord] = []
    for _ in range(dyn.rounds):
        state, rec = step_round(state, params, dyn, rng, departures=departures,
                                deterministic_counts=deterministic,
                                fixed_links=fixed_links, link_key=seed)
        records.append(rec)
    return Trajectory(records=records, seed=seed, kind="mc",
                      label=str(getattr(config, "label", "")))


def estimate_limit(trajectory: Trajectory, tail_window: int | None = None) -> float:
    """Terminal risk-free fraction: mean eps over the trajectory's tail.

    The default window is a tenth of the run (at least one round).
    """
    recs = trajectory.records
    if not recs:
        raise ParamError("trajectory: no rounds recorded")
    if tail_window is None:
        tail_window = max(1, len(recs) // 10)
    if not 1 <= tail_window <= len(recs):
        raise ParamError("tail_window: must lie in [1, rounds]")
    return float(np.mean([r.eps for r in recs[-tail_window:]]))
