"""Experiment harness: run configs, preset studies, and file output.

Everything the command line (and the reproduction tests) need sits here:
a picklable :class:`ExperimentConfig`, a flat ``section.key = value`` config
file format, multi-seed execution over a process pool, tail-limit summaries
with theory columns, and the CSV/JSON writers.  Output is deterministic for
a fixed config and seed list, down to the bytes.
"""
from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import os
import statistics
import typing
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

from .analytic import thresholds
from .model import DynamicsParams, MarketParams, ParamError
from .odeflow import classify_attractors, ode_solution, ode_solution_departures
from .records import RoundRecord, Trajectory
from .replicator import estimate_limit, run_simulation

log = logging.getLogger(__name__)

TRAJECTORY_COLUMNS = ("round", "n", "n1", "eps", "psi", "default_frac",
                      "xi", "Xi1", "Xi2", "departures", "mean_r1", "mean_r2", "seed")


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: market, dynamics, run flags and seeds.

    Frozen and built from frozen parts, so it pickles cleanly into worker
    processes and hashes canonically for run metadata.
    """

    market: MarketParams
    dynamics: DynamicsParams
    departures: bool = True
    fixed_links: bool = False
    deterministic_counts: bool = False
    seeds: tuple[int, ...] = (0,)
    out_dir: str | None = None
    label: str = ""


# --------------------------------------------------------------------------
# flat config files:  "market.w = 70" style, one key per line

_MARKET_TYPES = typing.get_type_hints(MarketParams)
_DYN_TYPES = typing.get_type_hints(DynamicsParams)
_RUN_TYPES: dict[str, object] = {"departures": bool, "fixed_links": bool,
                                 "deterministic_counts": bool, "label": str,
                                 "out_dir": str, "seeds": "seeds"}


def _coerce(key: str, raw: str, tp: object) -> object:
    if tp is bool:
        low = raw.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ParamError(f"{key}: expected a boolean, got {raw!r}")
    if tp in (int, float):
        try:
            return tp(raw)
        except ValueError:
            raise ParamError(f"{key}: expected a number, got {raw!r}") from None
    if tp is str:
        return raw
    if tp == "seeds":
        try:
            return tuple(int(part) for part in raw.split(",") if part.strip())
        except ValueError:
            raise ParamError(f"{key}: expected comma-separated integers, got {raw!r}") from None
    args = typing.get_args(tp)
    if args and type(None) in args:
        if raw.lower() in ("", "none"):
            return None
        inner = next(a for a in args if a is not type(None))
        return _coerce(key, raw, inner)
    raise ParamError(f"{key}: unsupported value {raw!r}")


def _render(value: object) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ",".join(str(v) for v in value)
    return str(value)


def config_to_flat(config: ExperimentConfig) -> dict[str, str]:
    """Canonical flat representation, the basis of files and digests."""
    flat: dict[str, str] = {}
    for name, value in asdict(config.market).items():
        flat[f"market.{name}"] = _render(value)
    for name, value in asdict(config.dynamics).items():
        flat[f"dynamics.{name}"] = _render(value)
    for name in ("departures", "fixed_links", "deterministic_counts", "seeds", "label"):
        flat[f"run.{name}"] = _render(getattr(config, name))
    if config.out_dir is not None:
        flat["run.out_dir"] = config.out_dir
    return flat


def config_from_flat(flat: dict[str, str]) -> ExperimentConfig:
    market_kw: dict[str, object] = {}
    dyn_kw: dict[str, object] = {}
    run_kw: dict[str, object] = {}
    for key, raw in flat.items():
        section, _, name = key.partition(".")
        if not name:
            raise ParamError(f"{key}: keys take the form section.name")
        if section == "market":
            if name not in _MARKET_TYPES:
                raise ParamError(f"{key}: unknown market parameter")
            market_kw[name] = _coerce(key, raw, _MARKET_TYPES[name])
        elif section == "dynamics":
            if name not in _DYN_TYPES:
                raise ParamError(f"{key}: unknown dynamics parameter")
            dyn_kw[name] = _coerce(key, raw, _DYN_TYPES[name])
        elif section == "run":
            if name not in _RUN_TYPES:
                raise ParamError(f"{key}: unknown run option")
            run_kw[name] = _coerce(key, raw, _RUN_TYPES[name])
        else:
            raise ParamError(f"{key}: unknown section {section!r}")
    try:
        market = MarketParams(**market_kw)
        dynamics = DynamicsParams(**dyn_kw)
    except TypeError as exc:  # a required field is missing
        raise ParamError(str(exc)) from None
    return ExperimentConfig(market=market, dynamics=dynamics, **run_kw)


def save_config(config: ExperimentConfig, path: str | Path) -> None:
    lines = [f"{key} = {value}" for key, value in config_to_flat(config).items()]
    Path(path).write_text("\n".join(lines) + "\n")


def load_config(path: str | Path) -> ExperimentConfig:
    flat: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        key, sep, value = stripped.partition("=")
        if not sep:
            raise ParamError(f"{path}:{lineno}: expected 'key = value'")
        flat[key.strip()] = value.strip()
    return config_from_flat(flat)


def config_digest(config: ExperimentConfig) -> str:
    flat = config_to_flat(config)
    text = "\n".join(f"{key}={flat[key]}" for key in sorted(flat))
    return hashlib.sha256(text.encode()).hexdigest()


# --------------------------------------------------------------------------
# execution

def _worker(payload: tuple[ExperimentConfig, int, bool]) -> tuple[int, float, Trajectory | None]:
    config, seed, keep = payload
    trajectory = run_simulation(config, seed)
    return seed, estimate_limit(trajectory), trajectory if keep else None


def _max_workers(n_jobs: int) -> int:
    workers = min(n_jobs, os.cpu_count() or 1)
    cap = os.environ.get("SYSRISK_THREADS")
    if cap:
        try:
            workers = min(workers, max(1, int(cap)))
        except ValueError:
            log.warning("ignoring non-integer SYSRISK_THREADS=%r", cap)
    return max(1, workers)


def run_many(config: ExperimentConfig, *, keep_trajectories: bool = False,
             ) -> list[tuple[int, float, Trajectory | None]]:
    """Run every seed of one config; results ordered like ``config.seeds``."""
    payloads = [(config, seed, keep_trajectories) for seed in config.seeds]
    return _run_payloads(payloads)


def _run_payloads(payloads: list[tuple[ExperimentConfig, int, bool]],
                  ) -> list[tuple[int, float, Trajectory | None]]:
    workers = _max_workers(len(payloads))
    if workers == 1 or len(payloads) == 1:
        return [_worker(p) for p in payloads]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_worker, payloads))


# --------------------------------------------------------------------------
# theory columns

def round_clock(n0: int, rounds: int) -> float:
    return math.fsum(1.0 / (j + n0) for j in range(1, rounds + 1))


def theory_at_horizon(config: ExperimentConfig) -> float:
    """Flow prediction for the risk-free fraction at the config's horizon."""
    dyn = config.dynamics
    t = round_clock(dyn.n0, dyn.rounds)
    flow = ode_solution_departures if config.departures and dyn.mean_L > 0 else ode_solution
    return flow(config.market, dyn, dyn.eps0, 1.0, t).eps


def asymptotic_limit(config: ExperimentConfig) -> float:
    """The attractor whose basin holds the config's starting fraction."""
    dyn = config.dynamics
    if not (config.departures and dyn.mean_L > 0):
        dyn = replace(dyn, mean_L=0.0)
    report = classify_attractors(config.market, dyn)
    eps0 = config.dynamics.eps0
    for (lo, hi), (eps_star, _) in zip(report.doa, report.attractors):
        if lo <= eps0 < hi or (hi == 1.0 and eps0 == 1.0):
            return eps_star
    raise ParamError(f"eps0: {eps0!r} not covered by any basin")  # pragma: no cover


def assert_horizon(config: ExperimentConfig, row_tol: float = 0.05,
                   settle_tol: float = 0.01, max_doublings: int = 6) -> int:
    """Horizon at which comparing the simulation to its limit is meaningful.

    Rows whose flow is already within `row_tol` of the limit at the preset
    horizon keep it.  A slow cell that is not gets its horizon doubled until
    the flow itself has settled to within `settle_tol`; comparing the
    simulation against the limit any earlier would test patience, not
    correctness.
    """
    target = asymptotic_limit(config)
    rounds = config.dynamics.rounds
    if abs(theory_at_horizon(config) - target) <= row_tol:
        return rounds
    for _ in range(max_doublings):
        rounds *= 2
        probe = replace(config, dynamics=replace(config.dynamics, rounds=rounds))
        if abs(theory_at_horizon(probe) - target) <= settle_tol:
            return rounds
    log.warning("flow still %g away from %g at %d rounds", settle_tol, target, rounds)
    return rounds


# --------------------------------------------------------------------------
# table reproduction

_TARGET_LIMIT = "limit"
_TARGET_HORIZON = "finite-horizon"


@dataclass(frozen=True)
class RowSpec:
    config: ExperimentConfig
    target_kind: str = _TARGET_LIMIT  # "limit" or "finite-horizon"
    tol: float = 0.05


@dataclass(frozen=True)
class TableSpec:
    name: str
    rows: tuple[RowSpec, ...]


@dataclass(frozen=True)
class TableRow:
    """One reproduced table cell: simulation summary next to theory."""

    config_id: str
    eps0: float
    target: float
    eps_theory: float       # asymptotic attractor for this basin
    eps_theory_T: float     # flow prediction at the asserted horizon
    eps_mc_median: float
    eps_mc_mean: float
    eps_mc_stderr: float
    escapes: int            # seeds whose tail strays > 0.25 from the median
    eps_bar: float
    eps_bar_1: float
    beta: float
    mean_L: float
    rounds: int
    n_seeds: int
    tol: float
    passed: bool


@dataclass(frozen=True)
class TableReport:
    name: str
    rows: tuple[TableRow, ...]

    @property
    def passed(self) -> bool:
        return all(row.passed for row in self.rows)


def _summarize(tails: list[float]) -> tuple[float, float, float, int]:
    median = statistics.median(tails)
    mean = statistics.fmean(tails)
    stderr = statistics.stdev(tails) / math.sqrt(len(tails)) if len(tails) > 1 else 0.0
    escapes = sum(1 for tail in tails if abs(tail - median) > 0.25)
    return median, mean, stderr, escapes


def reproduce_table(spec: TableSpec, out_dir: str | Path | None = None) -> TableReport:
    """Run a preset table, seed by seed, and summarize each row.

    The summary statistic is the median of the per-seed tail means: the
    finite population keeps a small per-seed probability of jumping between
    basins, so a mean over seeds measures the escape rate where the table
    reports the typical outcome.
    """
    payloads = [(row.config, seed, False) for row in spec.rows for seed in row.config.seeds]
    results = _run_payloads(payloads)

    rows: list[TableRow] = []
    cursor = 0
    for row in spec.rows:
        config, dyn = row.config, row.config.dynamics
        chunk = results[cursor:cursor + len(config.seeds)]
        cursor += len(config.seeds)
        tails = [tail for _, tail, _ in chunk]
        median, mean, stderr, escapes = _summarize(tails)
        th = thresholds(config.market, check=False)
        beta = (2 * dyn.b_n - 1) * dyn.mean_N + (2 * dyn.b_s - 1) * dyn.mean_S
        limit = asymptotic_limit(config)
        horizon_est = theory_at_horizon(config)
        # Gate each row against the theory value that applies at its horizon:
        # the limit once the flow has settled there, the flow value otherwise
        # (slow cells sit a visible distance from their limit at any fixed
        # round count, and that distance is physics, not sampling error).
        settled = abs(horizon_est - limit) <= 0.01
        target = limit if row.target_kind == _TARGET_LIMIT and settled else horizon_est
        rows.append(TableRow(
            config_id=config.label, eps0=dyn.eps0, target=target,
            eps_theory=limit, eps_theory_T=horizon_est,
            eps_mc_median=median, eps_mc_mean=mean, eps_mc_stderr=stderr,
            escapes=escapes, eps_bar=th.eps_bar, eps_bar_1=th.eps_bar_1,
            beta=beta, mean_L=dyn.mean_L if config.departures else 0.0,
            rounds=dyn.rounds, n_seeds=len(config.seeds), tol=row.tol,
            passed=abs(median - target) <= row.tol))
    report = TableReport(name=spec.name, rows=tuple(rows))
    if out_dir is not None:
        write_table_report(report, spec, out_dir)
    return report


def format_report(report: TableReport) -> str:
    header = (f"{'row':28s} {'eps0':>5s} {'target':>8s} {'median':>8s} {'mean':>8s}"
              f" {'stderr':>8s} {'esc':>3s} {'theory(T)':>9s} {'rounds':>6s} {'ok':>3s}")
    lines = [f"== {report.name} ==", header]
    for row in report.rows:
        lines.append(f"{row.config_id:28s} {row.eps0:5.2f} {row.target:8.4f}"
                     f" {row.eps_mc_median:8.4f} {row.eps_mc_mean:8.4f}"
                     f" {row.eps_mc_stderr:8.4f} {row.escapes:3d}"
                     f" {row.eps_theory_T:9.4f} {row.rounds:6d}"
                     f" {'yes' if row.passed else 'NO':>3s}")
    lines.append(f"overall: {'pass' if report.passed else 'FAIL'}")
    return "\n".join(lines)


# --------------------------------------------------------------------------
# file output

def _cell(value: object) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_trajectories(path_or_file, trajectories: list[Trajectory]) -> None:
    """Round-per-line CSV of runs, stacked over seeds.

    Flow trajectories share the schema; their integer columns come out blank.
    Accepts a path or an open text file (e.g. stdout).
    """
    if hasattr(path_or_file, "write"):
        _write_rows(path_or_file, trajectories)
        return
    with open(path_or_file, "w", newline="") as fh:
        _write_rows(fh, trajectories)


def _write_rows(fh, trajectories: list[Trajectory]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(TRAJECTORY_COLUMNS)
    for trajectory in trajectories:
        for rec in trajectory.records:
            writer.writerow([_cell(rec.round), _cell(rec.n), _cell(rec.n1),
                             _cell(rec.eps), _cell(rec.psi), _cell(rec.default_frac),
                             _cell(rec.xi), _cell(rec.Xi1), _cell(rec.Xi2),
                             _cell(rec.departures), _cell(rec.mean_r1),
                             _cell(rec.mean_r2), _cell(trajectory.seed)])


def flow_curve(config: ExperimentConfig, eps0: float, psi0: float,
               first_round: int, last_round: int, every: int = 10) -> Trajectory:
    """Flow solution sampled on the round clock, as a trajectory.

    Rows carry only eps/psi (and the flow time in `t`); the integer columns
    stay None so the CSV schema is shared with simulated runs.
    """
    dyn = config.dynamics
    flow = ode_solution_departures if config.departures and dyn.mean_L > 0 else ode_solution
    t0 = round_clock(dyn.n0, first_round)
    records = []
    for rnd in range(first_round, last_round + 1, every):
        t = round_clock(dyn.n0, rnd) - t0
        state = flow(config.market, dyn, eps0, psi0, t)
        records.append(RoundRecord(eps=state.eps, psi=state.psi, t=t))
    return Trajectory(records=records, kind="ode", label=config.label)


def write_metadata(path: str | Path, config: ExperimentConfig,
                   extra: dict | None = None) -> None:
    meta = {"config": config_to_flat(config),
            "config_sha256": config_digest(config),
            "seeds": list(config.seeds),
            "version": _pkg_version()}
    if extra:
        meta.update(extra)
    Path(path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def report_to_dict(report: TableReport) -> dict:
    """The report as a JSON-compatible tree."""
    return {"name": report.name, "passed": report.passed,
            "rows": [asdict(row) for row in report.rows]}


def write_table_report(report: TableReport, spec: TableSpec, out_dir: str | Path) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    columns = [f.name for f in fields(TableRow)]
    with open(out / f"{report.name}_rows.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in report.rows:
            writer.writerow([_cell(getattr(row, name)) for name in columns])
    (out / f"{report.name}_report.json").write_text(
        json.dumps(report_to_dict(report), indent=2, sort_keys=True) + "\n")
    meta = {"table": report.name, "passed": report.passed, "version": _pkg_version(),
            "rows": [{"config": config_to_flat(r.config),
                      "config_sha256": config_digest(r.config),
                      "target_kind": r.target_kind} for r in spec.rows]}
    (out / f"{report.name}_metadata.json").write_text(
        json.dumps(meta, indent=2, sort_keys=True) + "\n")


def _pkg_version() -> str:
    from sysrisk import __version__
    return __version__


# --------------------------------------------------------------------------
# presets

def _imitation_market(delta: float = 0.8, v: float = 15.0) -> MarketParams:
    return MarketParams(w=70.0, v=v, alpha=0.95, delta=delta,
                        u=0.13, d=-0.6, r_s=0.1, r_b=0.11)


def _growth_market(delta: float) -> MarketParams:
    return MarketParams(w=70.0, v=20.0, alpha=0.95, delta=delta,
                        u=0.15, d=-0.6, r_s=0.1, r_b=0.11)


def table2_spec(n_seeds: int = 20) -> TableSpec:
    """Arrival-dominated runs without departures, five (b, delta, eps0) cells."""
    seeds = tuple(range(n_seeds))
    rows = []
    cells = ((0.9, 0.85, 0.85, _TARGET_LIMIT),
             (0.9, 0.85, 0.75, _TARGET_LIMIT),
             (0.4, 0.85, 0.80, _TARGET_LIMIT),
             (0.9, 0.45, 0.60, _TARGET_LIMIT),
             (0.15, 0.45, 0.20, _TARGET_HORIZON))
    for b, delta, eps0, kind in cells:
        dyn = DynamicsParams(mean_N=1.0, mean_S=10.0, mean_L=0.0, b_n=b, b_s=b,
                             n0=300, eps0=eps0, rounds=1000)
        config = ExperimentConfig(market=_growth_market(delta), dynamics=dyn,
                                  departures=False, seeds=seeds,
                                  label=f"b={b:g} delta={delta:g} eps0={eps0:g}")
        rows.append(RowSpec(config=config, target_kind=kind))
    return TableSpec(name="table2", rows=tuple(rows))


def _departure_row(b: float, eps0: float, mean_L: float, departures: bool,
                   n_seeds: int, slow_seeds: int) -> RowSpec:
    dyn = DynamicsParams(mean_N=7.0, mean_S=6.0, mean_L=mean_L, b_n=b, b_s=b,
                         n0=500, eps0=eps0, rounds=4000)
    config = ExperimentConfig(market=_imitation_market(), dynamics=dyn,
                              departures=departures, seeds=tuple(range(n_seeds)),
                              label=(f"b={b:g} eps0={eps0:g} L={mean_L:g} "
                                     f"{'on' if departures else 'off'}"))
    horizon = assert_horizon(config)
    if horizon != dyn.rounds:
        config = replace(config, seeds=tuple(range(slow_seeds)),
                         dynamics=replace(dyn, rounds=horizon))
    return RowSpec(config=config)


def table3_spec(n_seeds: int = 10, slow_seeds: int = 5) -> TableSpec:
    """Departure on/off pairs at high observation accuracy (b = 0.8)."""
    rows = (_departure_row(0.8, 0.4, 5.6, True, n_seeds, slow_seeds),
            _departure_row(0.8, 0.4, 0.0, False, n_seeds, slow_seeds),
            _departure_row(0.8, 0.3, 2.1, True, n_seeds, slow_seeds),
            _departure_row(0.8, 0.3, 0.0, False, n_seeds, slow_seeds))
    return TableSpec(name="table3", rows=rows)


def table4_spec(n_seeds: int = 10, slow_seeds: int = 5) -> TableSpec:
    """Departure on/off pairs at low observation accuracy (b = 0.4)."""
    rows = (_departure_row(0.4, 0.4, 1.75, True, n_seeds, slow_seeds),
            _departure_row(0.4, 0.4, 0.0, False, n_seeds, slow_seeds),
            _departure_row(0.4, 0.8, 1.0, True, n_seeds, slow_seeds),
            _departure_row(0.4, 0.8, 0.0, False, n_seeds, slow_seeds),
            _departure_row(0.4, 0.5, 0.7, True, n_seeds, slow_seeds),
            _departure_row(0.4, 0.5, 0.0, False, n_seeds, slow_seeds))
    return TableSpec(name="table4", rows=rows)


def figure_configs(seed: int = 0) -> tuple[ExperimentConfig, ...]:
    """Single-run trajectories for three starts, mid observation accuracy."""
    configs = []
    for eps0 in (0.2, 0.5, 0.8):
        dyn = DynamicsParams(mean_N=7.0, mean_S=6.0, mean_L=0.84, b_n=0.4, b_s=0.4,
                             n0=500, eps0=eps0, rounds=4000)
        configs.append(ExperimentConfig(market=_imitation_market(), dynamics=dyn,
                                        departures=True, seeds=(seed,),
                                        label=f"trajectory eps0={eps0:g}"))
    return tuple(configs)


_FIG_RESTART_ROUND = 250


def reproduce_figures(out_dir: str | Path, seed: int = 0) -> list[Path]:
    """Write the trajectory runs with their flow overlays.

    Each start gets two files: the simulated run and the closed-form flow
    started from the simulated state a few hundred rounds in (the early
    rounds are noise-dominated, so anchoring the flow there makes the
    comparison informative rather than flattering).
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    for config in figure_configs(seed):
        results = run_many(config, keep_trajectories=True)
        trajectory = results[0][2]
        assert trajectory is not None
        tag = f"eps0_{config.dynamics.eps0:g}".replace(".", "p")
        mc_path = out / f"trajectory_{tag}.csv"
        write_trajectories(mc_path, [trajectory])
        written.append(mc_path)

        anchor = trajectory.records[_FIG_RESTART_ROUND]
        curve = flow_curve(config, anchor.eps, anchor.psi,
                           _FIG_RESTART_ROUND, config.dynamics.rounds)
        ode_path = out / f"ode_{tag}.csv"
        write_trajectories(ode_path, [curve])
        written.append(ode_path)
        write_metadata(out / f"metadata_{tag}.json", config,
                       extra={"restart_round": _FIG_RESTART_ROUND,
                              "ode_sampled_every": 10})
    return written


# --------------------------------------------------------------------------
# systemic-cost contrast

@dataclass(frozen=True)
class ContrastReport:
    """Adaptation versus a frozen all-risky population under heavy senior debt.

    The adaptive population starts mixed and is free to imitate; the frozen
    one starts all-risky, where imitation has nobody to copy.  `passed`
    requires the adaptive run to escape mass default (tail default fraction
    below `adaptive_cap`) while the frozen run stays in it.
    """

    adaptive_eps_tail: float
    adaptive_default_tail: float
    frozen_default_tail: float
    adaptive_cap: float
    frozen_floor: float
    n_seeds: int

    @property
    def passed(self) -> bool:
        return (self.adaptive_default_tail < self.adaptive_cap
                and self.frozen_default_tail >= self.frozen_floor)


def contrast_configs(n_seeds: int = 10) -> tuple[ExperimentConfig, ExperimentConfig]:
    market = _imitation_market(v=70.0)
    seeds = tuple(range(n_seeds))
    adaptive = ExperimentConfig(
        market=market,
        dynamics=DynamicsParams(mean_N=7.0, mean_S=6.0, mean_L=2.0, b_n=0.8, b_s=0.8,
                                n0=500, eps0=0.5, rounds=1500),
        departures=True, seeds=seeds, label="adaptive eps0=0.5")
    frozen = ExperimentConfig(
        market=market,
        dynamics=DynamicsParams(mean_N=7.0, mean_S=6.0, mean_L=0.0, b_n=0.8, b_s=0.8,
                                n0=500, eps0=0.0, rounds=1500),
        departures=False, seeds=seeds, label="frozen eps0=0")
    return adaptive, frozen


def _tail_default(trajectory: Trajectory) -> float:
    window = max(1, len(trajectory.records) // 10)
    tail = trajectory.records[-window:]
    return statistics.fmean(rec.default_frac for rec in tail
                            if rec.default_frac is not None)


def systemic_contrast(n_seeds: int = 10, out_dir: str | Path | None = None,
                      adaptive_cap: float = 0.9, frozen_floor: float = 0.97,
                      ) -> ContrastReport:
    adaptive, frozen = contrast_configs(n_seeds)
    results_a = run_many(adaptive, keep_trajectories=True)
    results_f = run_many(frozen, keep_trajectories=True)
    eps_tail = statistics.median(tail for _, tail, _ in results_a)
    default_a = statistics.median(_tail_default(t) for _, _, t in results_a if t)
    default_f = statistics.median(_tail_default(t) for _, _, t in results_f if t)
    report = ContrastReport(adaptive_eps_tail=eps_tail, adaptive_default_tail=default_a,
                            frozen_default_tail=default_f, adaptive_cap=adaptive_cap,
                            frozen_floor=frozen_floor, n_seeds=n_seeds)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_trajectories(out / "contrast_adaptive.csv",
                           [t for _, _, t in results_a if t is not None])
        write_trajectories(out / "contrast_frozen.csv",
                           [t for _, _, t in results_f if t is not None])
        write_metadata(out / "contrast_adaptive_metadata.json", adaptive)
        write_metadata(out / "contrast_frozen_metadata.json", frozen)
    return report


TABLE_SPECS = {"table2": table2_spec, "table3": table3_spec, "table4": table4_spec}
