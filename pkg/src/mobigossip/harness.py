"""Experiment orchestration: config files, seeded Monte Carlo sweeps, CSV output.

A run is identified by ``(grid_index, round_index)``; its RNG seed is derived
from the master seed with :func:`derive_seed`, never from OS entropy, so an
experiment spec fixes every byte of its output.
"""
from __future__ import annotations

import csv
import io
import math
import os
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .conductance import (MAX_EXHAUSTIVE_N, analytic_phi, brute_force_conductance,
                          mobile_conductance_empirical, static_conductance_empirical)
from .geometry import DEFAULT_C0, NetworkConfig
from .gossip import GossipConfig, Mode, SpreadTrace, nearest_rank, run_spread
from .mobility import MobilityModel, Static, init_population, make_model, model_params

SPREAD_COLUMNS = ["experiment_id", "model", "model_params", "n", "r", "mode", "epsilon",
                  "round", "seed", "completion_slot", "capped_flag", "status"]
CONDUCTANCE_COLUMNS = ["experiment_id", "model", "model_params", "n", "r", "method",
                       "cut_provenance", "value", "std_error", "samples", "round", "seed",
                       "status"]
SUMMARY_COLUMNS = ["experiment_id", "model", "model_params", "n", "statistic", "value",
                   "std_error", "samples", "capped"]


class Kind(str, Enum):
    SPREAD_SCALING = "spread-scaling"
    CONDUCTANCE_VS_PARAM = "conductance-vs-param"
    CONDUCTANCE_VS_N = "conductance-vs-n"
    BOUND_CHECK = "bound-check"
    ORACLE_CHECK = "oracle-check"


_SAFE_ID = re.compile(r"^[A-Za-z0-9._-]+$")


@dataclass(frozen=True)
class ExperimentSpec:
    id: str
    kind: Kind
    n_grid: tuple[int, ...]
    model_grid: tuple[MobilityModel, ...]
    rounds: int = 200
    gossip: GossipConfig = field(default_factory=GossipConfig)
    master_seed: int = 0
    output_path: str = "."
    c0: float = DEFAULT_C0
    move_samples: int = 200
    # Fixed initial placement for every round; programmatic use only.
    positions: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        object.__setattr__(self, "n_grid", tuple(int(n) for n in self.n_grid))
        object.__setattr__(self, "model_grid", tuple(self.model_grid))
        if not self.id or not _SAFE_ID.match(self.id):
            raise ValueError(f"experiment id must be non-empty and filesystem-safe: {self.id!r}")
        if self.rounds < 1:
            raise ValueError("rounds must be >= 1")
        if not self.n_grid or not self.model_grid:
            raise ValueError("n_grid and model_grid must be non-empty")
        if self.move_samples < 1:
            raise ValueError("move_samples must be >= 1")
        if self.kind is Kind.ORACLE_CHECK and max(self.n_grid) > MAX_EXHAUSTIVE_N:
            raise ValueError(f"oracle-check needs n <= {MAX_EXHAUSTIVE_N}")
        if self.kind is Kind.ORACLE_CHECK and not all(isinstance(m, Static)
                                                      for m in self.model_grid):
            raise ValueError("oracle-check compares static cuts; use model.0 = static")
        if self.positions is not None and any(len(self.positions) != n for n in self.n_grid):
            raise ValueError("positions must list one point per node for every n in n_grid")

    def grid(self) -> list[tuple[int, int, MobilityModel]]:
        """``(grid_index, n, model)`` in n-major order."""
        return [(i * len(self.model_grid) + j, n, m)
                for i, n in enumerate(self.n_grid) for j, m in enumerate(self.model_grid)]

    @property
    def raw_path(self) -> Path:
        return Path(self.output_path) / f"{self.id}_raw.csv"

    @property
    def summary_path(self) -> Path:
        return Path(self.output_path) / f"{self.id}_summary.csv"


# ---------------------------------------------------------------------------
# Config files
# ---------------------------------------------------------------------------

def parse_config(text: str) -> ExperimentSpec:
    """Parse the ``key = value`` experiment format.

    Blank lines and ``#`` comments are ignored.  Lists are comma separated.
    Models are numbered, with parameters as dotted keys::

        id = velocity-sweep
        kind = spread-scaling
        n_grid = 250, 500, 1000
        rounds = 200
        master_seed = 7
        output_path = results
        gossip.mode = push-pull
        gossip.epsilon = 0.1
        model.0 = static
        model.1 = velocity
        model.1.vmax = 0.1
    """
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in values:
            raise ValueError(f"line {lineno}: duplicate key {key!r}")
        values[key] = value

    models: dict[int, dict] = {}
    for key, value in values.items():
        parts = key.split(".")
        if parts[0] != "model":
            continue
        if len(parts) < 2 or not parts[1].isdigit():
            raise ValueError(f"bad model key {key!r}; use model.<i> and model.<i>.<param>")
        slot = models.setdefault(int(parts[1]), {"params": {}})
        if len(parts) == 2:
            slot["name"] = value
        else:
            slot["params"][".".join(parts[2:])] = value
    for i, slot in models.items():
        if "name" not in slot:
            raise ValueError(f"model.{i} has parameters but no name")
    model_grid = [make_model(models[i]["name"], models[i]["params"]) for i in sorted(models)]

    known = {"id", "kind", "n_grid", "rounds", "master_seed", "output_path", "c0",
             "move_samples", "gossip.mode", "gossip.epsilon", "gossip.max_slots"}
    unknown = [k for k in values if k not in known and not k.startswith("model.")]
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
    for required in ("id", "kind", "n_grid"):
        if required not in values:
            raise ValueError(f"missing required key {required!r}")

    max_slots = values.get("gossip.max_slots", "")
    gossip = GossipConfig(mode=Mode(values.get("gossip.mode", Mode.PUSH_PULL.value)),
                          max_slots=int(max_slots) if max_slots else None,
                          epsilon=float(values.get("gossip.epsilon", 0.1)))
    return ExperimentSpec(
        id=values["id"],
        kind=Kind(values["kind"]),
        n_grid=tuple(int(x) for x in values["n_grid"].split(",") if x.strip()),
        model_grid=tuple(model_grid),
        rounds=int(values.get("rounds", 200)),
        gossip=gossip,
        master_seed=int(values.get("master_seed", 0)),
        output_path=values.get("output_path", "."),
        c0=float(values.get("c0", DEFAULT_C0)),
        move_samples=int(values.get("move_samples", 200)),
    )


def load_config(path: str | os.PathLike) -> ExperimentSpec:
    return parse_config(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# Seeds and per-run tasks
# ---------------------------------------------------------------------------

def derive_seed(master_seed: int, grid_index: int, round_index: int) -> int:
    """64-bit run seed from ``numpy.random.SeedSequence(master, spawn_key=(grid, round))``."""
    ss = np.random.SeedSequence(master_seed, spawn_key=(grid_index, round_index))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class _Task:
    kind: Kind
    n: int
    c0: float
    model: MobilityModel
    gossip: GossipConfig
    move_samples: int
    seed: int
    positions: tuple | None = None


def _run_task(task: _Task):
    cfg = NetworkConfig(task.n, task.c0)
    if task.kind in (Kind.SPREAD_SCALING, Kind.BOUND_CHECK):
        return run_spread(cfg, task.model, task.gossip, "random", task.seed, task.positions)
    rng = np.random.default_rng(task.seed)
    model = task.model.resolve(cfg)
    if task.kind is Kind.ORACLE_CHECK:
        pop = init_population(cfg, Static(), rng)
        exact = brute_force_conductance(pop, cfg, Static())
        sweep = static_conductance_empirical(pop.pos, cfg)
        return exact, sweep
    if isinstance(model, Static):
        pop = init_population(cfg, model, rng)
        return (static_conductance_empirical(pop.pos, cfg),)
    return (mobile_conductance_empirical(cfg, model, move_samples=task.move_samples, rng=rng),)


def _safe_run(task: _Task):
    try:
        return _run_task(task)
    except Exception as exc:  # recorded as a failure marker row
        return exc


# ---------------------------------------------------------------------------
# Summaries, fits and the spreading-time bound
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SummaryRow:
    experiment_id: str
    model: str
    model_params: str
    n: int
    statistic: str
    value: float
    std_error: float
    samples: int
    capped: int = 0

    def as_list(self) -> list:
        return [self.experiment_id, self.model, self.model_params, self.n, self.statistic,
                _fmt(self.value), _fmt(self.std_error), self.samples, self.capped]


def _fmt(x) -> str:
    if x is None or x == "":
        return ""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    x = float(x)
    return "inf" if math.isinf(x) else repr(x)


def _mean_se(values: Sequence[float]) -> tuple[float, float]:
    a = np.asarray(values, dtype=float)
    if len(a) == 0:
        return math.nan, math.nan
    se = float(a.std(ddof=1) / math.sqrt(len(a))) if len(a) > 1 else 0.0
    return float(a.mean()), se


def summarize(raw_rows: list[dict], kind: Kind | str, epsilon: float = 0.1) -> list[SummaryRow]:
    """Grouped statistics recomputed from raw CSV rows (dicts of strings)."""
    kind = Kind(kind)
    groups: dict[tuple, list[dict]] = {}
    for row in raw_rows:
        if row.get("status", "ok") != "ok":
            continue
        groups.setdefault((row["experiment_id"], row["model"], row["model_params"],
                           int(row["n"])), []).append(row)
    out: list[SummaryRow] = []
    for (eid, model, params, n), rows in groups.items():
        if kind in (Kind.SPREAD_SCALING, Kind.BOUND_CHECK):
            done = [int(r["completion_slot"]) for r in rows if r["capped_flag"] == "0"]
            capped = len(rows) - len(done)
            mean, se = _mean_se(done)
            q = nearest_rank(done + [math.inf] * capped, 1 - epsilon) if rows else math.nan
            out.append(SummaryRow(eid, model, params, n, "mean_completion_slot", mean, se,
                                  len(done), capped))
            out.append(SummaryRow(eid, model, params, n, "quantile_completion_slot", q, 0.0,
                                  len(done), capped))
        elif kind is Kind.ORACLE_CHECK:
            by_round: dict[str, dict] = {}
            for r in rows:
                by_round.setdefault(r["round"], {})[r["cut_provenance"].split("(")[0]] = \
                    float(r["value"])
            pairs = [(d["exhaustive"], d["sweep"]) for d in by_round.values()
                     if "exhaustive" in d and "sweep" in d]
            ge = [1.0 if s >= e - 1e-12 else 0.0 for e, s in pairs]
            within = [1.0 if s <= 2 * e + 1e-12 else 0.0 for e, s in pairs]
            out.append(SummaryRow(eid, model, params, n, "frac_sweep_ge_exhaustive",
                                  float(np.mean(ge)), 0.0, len(pairs)))
            out.append(SummaryRow(eid, model, params, n, "frac_sweep_within_2x",
                                  float(np.mean(within)), 0.0, len(pairs)))
        else:
            mean, se = _mean_se([float(r["value"]) for r in rows])
            out.append(SummaryRow(eid, model, params, n, "mean_conductance", mean, se,
                                  len(rows)))
    return out


@dataclass(frozen=True)
class Fit:
    slope: float
    intercept: float
    r_squared: float


PREDICTORS = {
    "ln_n": lambda n: np.log(n),
    "sqrt_n": lambda n: np.sqrt(n),
    "sqrt_n_over_ln_n": lambda n: np.sqrt(n / np.log(n)),
    "linear": lambda n: n,
}


def fit_scaling(rows: Iterable, predictor: str = "ln_n") -> Fit:
    """OLS of a statistic against a transform of ``n``.

    ``rows`` holds :class:`SummaryRow` objects or ``(n, value)`` pairs.
    """
    if predictor not in PREDICTORS:
        raise ValueError(f"unknown predictor {predictor!r}; choose from {sorted(PREDICTORS)}")
    pts = [(r.n, r.value) if isinstance(r, SummaryRow) else tuple(r) for r in rows]
    if len(pts) < 3:
        raise ValueError("need at least 3 rows to fit")
    n = np.array([p[0] for p in pts], dtype=float)
    y = np.array([p[1] for p in pts], dtype=float)
    x = PREDICTORS[predictor](n)
    if np.ptp(x) == 0:
        raise ValueError("degenerate (constant) predictor")
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - float((resid**2).sum()) / ss_tot if ss_tot > 0 else 1.0
    return Fit(float(slope), float(intercept), r2)


@dataclass(frozen=True)
class BoundCheck:
    constant: float
    per_point: tuple[float, ...]
    spread: float
    violations: int
    used_empirical: bool = False


def bound_check(ns: Sequence[int], times: Sequence[float], phis: Sequence[float | None],
                epsilon: float, empirical_phis: Sequence[float] | None = None) -> BoundCheck:
    """Fit ``T <= C (ln n + ln 1/eps) / phi`` across a grid of network sizes.

    ``C`` is the maximum of ``T phi / (ln n + ln 1/eps)`` over the grid;
    ``spread`` is max/min of the per-point constants, and ``violations`` counts
    points whose constant is more than 2x away from the smallest-``n`` point.
    Missing analytic conductances fall back to ``empirical_phis``.
    """
    if not (len(ns) == len(times) == len(phis)) or not ns:
        raise ValueError("ns, times and phis must be equal-length and non-empty")
    used_empirical = False
    resolved = []
    for i, phi in enumerate(phis):
        if phi is None:
            if empirical_phis is None:
                raise ValueError(f"no conductance for grid point n={ns[i]}")
            phi = empirical_phis[i]
            used_empirical = True
        resolved.append(float(phi))
    cs = [t * phi / (math.log(n) + math.log(1 / epsilon))
          for n, t, phi in zip(ns, times, resolved)]
    order = np.argsort(ns)
    ref = cs[order[0]]
    violations = sum(1 for c in cs if not ref / 2 <= c <= 2 * ref)
    return BoundCheck(max(cs), tuple(cs), max(cs) / min(cs), violations, used_empirical)


# ---------------------------------------------------------------------------
# Orchestration
# ---------------------------------------------------------------------------

@dataclass
class ExperimentResult:
    raw_csv: str
    summary_csv: str
    failures: int
    raw_path: Path | None = None
    summary_path: Path | None = None


def _to_csv(header: list[str], rows: Iterable[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _map(tasks: list[_Task], jobs: int | None):
    if jobs is None or jobs <= 1 or len(tasks) <= 1:
        return [_safe_run(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_safe_run, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))


def run_experiment(spec: ExperimentSpec, jobs: int | None = 1,
                   write: bool = True) -> ExperimentResult:
    """Execute every grid point ``rounds`` times and produce raw and summary CSVs.

    Results are ordered by ``(grid_index, round)`` regardless of worker
    scheduling, and floats are written with ``repr``, so repeated runs of a
    spec are byte-identical.
    """
    grid = spec.grid()
    tasks, keys = [], []
    for g, n, model in grid:
        cfg = NetworkConfig(n, spec.c0)
        resolved = model.resolve(cfg)
        for k in range(spec.rounds):
            seed = derive_seed(spec.master_seed, g, k)
            tasks.append(_Task(spec.kind, n, spec.c0, resolved, spec.gossip, spec.move_samples,
                               seed, spec.positions))
            keys.append((g, n, cfg.r, resolved, k, seed))
    results = _map(tasks, jobs)

    eps = spec.gossip.epsilon
    spread = spec.kind in (Kind.SPREAD_SCALING, Kind.BOUND_CHECK)
    raw: list[list] = []
    dict_rows: list[dict] = []
    failures = 0
    failed_points = set()
    for (g, n, r, model, k, seed), res in zip(keys, results):
        base = [spec.id, model.name, model_params(model), n, _fmt(r)]
        if isinstance(res, Exception):
            failures += 1
            failed_points.add(g)
            msg = f"failed: {type(res).__name__}: {res}"
            if spread:
                rows = [base + [spec.gossip.mode.value, _fmt(eps), k, seed, "", "", msg]]
            else:
                rows = [base + ["", "", "", "", "", k, seed, msg]]
        elif spread:
            trace: SpreadTrace = res
            rows = [base + [spec.gossip.mode.value, _fmt(eps), k, seed,
                            "" if trace.capped else trace.completion_slot,
                            int(trace.capped), "ok"]]
        else:
            rows = []
            for est in res:
                label = est.cut
                if spec.kind is Kind.ORACLE_CHECK and not label.startswith("exhaustive"):
                    label = f"sweep({label})"
                rows.append(base + [est.method.value, label, _fmt(est.value),
                                    _fmt(est.std_error), est.samples, k, seed, "ok"])
        header = SPREAD_COLUMNS if spread else CONDUCTANCE_COLUMNS
        for row in rows:
            raw.append(row)
            dict_rows.append(dict(zip(header, [str(x) for x in row])))

    summary = summarize(dict_rows, spec.kind, eps)
    summary += _extra_summary(spec, summary)
    raw_csv = _to_csv(SPREAD_COLUMNS if spread else CONDUCTANCE_COLUMNS, raw)
    summary_csv = _to_csv(SUMMARY_COLUMNS, [row.as_list() for row in summary])
    result = ExperimentResult(raw_csv, summary_csv, len(failed_points))
    if write:
        spec.raw_path.parent.mkdir(parents=True, exist_ok=True)
        spec.raw_path.write_text(raw_csv, encoding="utf-8", newline="")
        spec.summary_path.write_text(summary_csv, encoding="utf-8", newline="")
        result.raw_path, result.summary_path = spec.raw_path, spec.summary_path
    return result


def _extra_summary(spec: ExperimentSpec, summary: list[SummaryRow]) -> list[SummaryRow]:
    extra = []
    if spec.kind in (Kind.CONDUCTANCE_VS_N, Kind.CONDUCTANCE_VS_PARAM, Kind.BOUND_CHECK):
        for g, n, model in spec.grid():
            cfg = NetworkConfig(n, spec.c0)
            m = model.resolve(cfg)
            extra.append(SummaryRow(spec.id, m.name, model_params(m), n, "analytic_conductance",
                                    analytic_phi(m, cfg), 0.0, 0))
    if spec.kind is Kind.BOUND_CHECK:
        quant = {(s.model, s.model_params, s.n): s for s in summary
                 if s.statistic == "quantile_completion_slot"}
        for model in spec.model_grid:
            pts = []
            for n in spec.n_grid:
                cfg = NetworkConfig(n, spec.c0)
                m = model.resolve(cfg)
                q = quant.get((m.name, model_params(m), n))
                if q is not None and math.isfinite(q.value):
                    pts.append((n, q.value, analytic_phi(m, cfg), m))
            if not pts:
                continue
            bc = bound_check([p[0] for p in pts], [p[1] for p in pts], [p[2] for p in pts],
                             spec.gossip.epsilon)
            for (n, _, _, m), c in zip(pts, bc.per_point):
                extra.append(SummaryRow(spec.id, m.name, model_params(m), n, "bound_constant",
                                        c, 0.0, spec.rounds))
            extra.append(SummaryRow(spec.id, model.name, model_params(model), 0,
                                    "bound_constant_spread", bc.spread, 0.0, len(pts),
                                    bc.violations))
    return extra


def read_csv(path_or_text: str | os.PathLike) -> list[dict]:
    """Read a CSV produced by :func:`run_experiment` into dicts of strings."""
    text = str(path_or_text)
    if "\n" not in text:
        text = Path(text).read_text(encoding="utf-8")
    return list(csv.DictReader(io.StringIO(text)))
