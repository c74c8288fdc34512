"""Move-and-gossip slot engine and spreading-time statistics."""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .geometry import NetworkConfig, SpatialIndex
from .mobility import MobilityModel, Population, init_population, is_static, step


class Mode(str, Enum):
    PUSH = "push"
    PULL = "pull"
    PUSH_PULL = "push-pull"


@dataclass(frozen=True)
class GossipConfig:
    """``max_slots=None`` means the default cap of ``ceil(50 * sqrt(n))``."""

    mode: Mode = Mode.PUSH_PULL
    max_slots: int | None = None
    epsilon: float = 0.1

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if self.max_slots is not None and self.max_slots < 1:
            raise ValueError("max_slots must be >= 1")
        if not 0 < self.epsilon < 1:
            raise ValueError("epsilon must lie in (0, 1)")

    def slot_cap(self, n: int) -> int:
        if self.max_slots is not None:
            return self.max_slots
        return math.ceil(50 * math.sqrt(n))


@dataclass
class SpreadTrace:
    informed_count_per_slot: list[int]
    completion_slot: int | None
    source_id: int
    seed: int

    @property
    def capped(self) -> bool:
        return self.completion_slot is None


def gossip_slot(pop: Population, index: SpatialIndex, mode: Mode | str,
                rng: np.random.Generator) -> int:
    """One synchronous gossip exchange; returns the number of newly informed nodes.

    Every node draws one uniform number (ascending id, isolated nodes
    included) and uses it to pick one neighbor.  Deliveries are decided from
    the informed set at the start of the slot and applied together.
    """
    mode = Mode(mode)
    n = pop.n
    indptr, indices = index.indptr, index.indices
    deg = indptr[1:] - indptr[:-1]
    u = rng.random(n)
    src = np.flatnonzero(deg)
    offset = np.minimum((u[src] * deg[src]).astype(np.int64), deg[src] - 1)
    dst = indices[indptr[src] + offset]

    before = pop.informed
    new = np.zeros(n, dtype=bool)
    if mode in (Mode.PUSH, Mode.PUSH_PULL):
        new[dst[before[src]]] = True
    if mode in (Mode.PULL, Mode.PUSH_PULL):
        new[src[before[dst]]] = True
    new &= ~before
    pop.informed = before | new
    return int(new.sum())


def run_spread(cfg: NetworkConfig, model: MobilityModel, gcfg: GossipConfig | None = None,
               source: int | str = "random", seed: int = 0,
               positions: np.ndarray | None = None) -> SpreadTrace:
    """Simulate one broadcast from a single source until everyone is informed.

    Each slot moves all nodes, rebuilds the neighbor index on the new
    positions, then gossips.  The trace records ``|S(t)|`` after every slot.
    """
    gcfg = gcfg or GossipConfig()
    rng = np.random.default_rng(seed)
    model = model.resolve(cfg)
    pop = init_population(cfg, model, rng, positions)
    n = cfg.n
    if source == "random":
        src = int(rng.integers(n))
    else:
        src = int(source)
        if not 0 <= src < n:
            raise ValueError(f"source {src} out of range for n={n}")
    pop.informed[src] = True

    counts = [1]
    frozen = is_static(model)
    index = SpatialIndex(pop.pos, cfg.r)
    informed = 1
    completion = None
    for t in range(1, gcfg.slot_cap(n) + 1):
        if not frozen:
            step(model, pop, rng)
            index = SpatialIndex(pop.pos, cfg.r, generation=t)
        informed += gossip_slot(pop, index, gcfg.mode, rng)
        counts.append(informed)
        if informed == n:
            completion = t
            break
    return SpreadTrace(counts, completion, src, seed)


@dataclass(frozen=True)
class SpreadingTime:
    mean: float
    quantile: float
    failures: int
    completed: int


def nearest_rank(values, q: float) -> float:
    """Nearest-rank empirical ``q``-quantile (``q`` in (0, 1])."""
    xs = sorted(values)
    rank = max(1, math.ceil(q * len(xs) - 1e-9))
    return xs[rank - 1]


def spreading_time(traces: list[SpreadTrace], epsilon: float) -> SpreadingTime:
    """Mean completion slot over finished runs and the ``(1 - eps)`` quantile.

    Capped runs count as never finishing (``inf``) in the quantile, so the
    quantile is infinite once more than a fraction ``epsilon`` of runs cap.
    """
    if not traces:
        raise ValueError("need at least one trace")
    done = [t.completion_slot for t in traces if not t.capped]
    failures = len(traces) - len(done)
    if not done:
        raise ValueError("all runs hit the slot cap")
    slots = done + [math.inf] * failures
    return SpreadingTime(float(np.mean(done)), float(nearest_rank(slots, 1 - epsilon)),
                         failures, len(done))
