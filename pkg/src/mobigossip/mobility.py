"""Mobility models: the "move" half of every move-and-gossip slot.

Each model is a small frozen dataclass.  Populations are stored as arrays
(positions, anchors, classes, informed flags) rather than per-node objects;
:meth:`Population.node` gives a per-node view when one is needed.

Draw order is fixed so runs replay exactly: every sampler consumes randoms
in ascending node id, and rejection sampling redraws only the rejected ids
(again ascending) until all are accepted.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, fields
from enum import IntEnum
from typing import ClassVar, NamedTuple, Union

import numpy as np

from .geometry import NetworkConfig, Point, uniform_points


class NodeClass(IntEnum):
    STATIC = 0
    MOBILE = 1
    VPATH = 2
    HPATH = 3


class NodeState(NamedTuple):
    position: Point
    informed: bool
    cls: NodeClass
    anchor: Point


# Parameters may be given relative to n or r, e.g. ``k=0.1n``, ``vmax=2r``,
# or ``k=sqrt-ln-n`` (ceil of sqrt(ln n)).
_REL = re.compile(r"^\s*([0-9.eE+-]*)\s*\*?\s*([nr])\s*$")


def _resolve_count(value, n: int) -> int:
    if isinstance(value, str):
        v = value.strip()
        if v == "sqrt-ln-n":
            return math.ceil(math.sqrt(math.log(n)))
        m = _REL.match(v)
        if m and m.group(2) == "n":
            coef = float(m.group(1)) if m.group(1) not in ("", "+") else 1.0
            return int(round(coef * n))
        return int(v)
    return int(value)


def _resolve_length(value, r: float) -> float:
    if isinstance(value, str):
        m = _REL.match(value)
        if m and m.group(2) == "r":
            coef = float(m.group(1)) if m.group(1) not in ("", "+") else 1.0
            return coef * r
        m = re.match(r"^\s*r\s*/\s*([0-9.eE+]+)\s*$", value)
        if m:
            return r / float(m.group(1))
        return float(value)
    return float(value)


@dataclass(frozen=True)
class Static:
    name: ClassVar[str] = "static"

    def resolve(self, cfg: NetworkConfig) -> "Static":
        return self

    def validate(self, n: int) -> None:
        pass


@dataclass(frozen=True)
class FullyRandom:
    name: ClassVar[str] = "fully-random"

    def resolve(self, cfg: NetworkConfig) -> "FullyRandom":
        return self

    def validate(self, n: int) -> None:
        pass


@dataclass(frozen=True)
class PartiallyRandom:
    """``k`` fully random nodes; the other ``n - k`` never move."""

    k: int | str
    name: ClassVar[str] = "partially-random"

    def resolve(self, cfg: NetworkConfig) -> "PartiallyRandom":
        return PartiallyRandom(_resolve_count(self.k, cfg.n))

    def validate(self, n: int) -> None:
        if not isinstance(self.k, (int, np.integer)) or not 0 <= self.k <= n:
            raise ValueError(f"partially-random needs 0 <= k <= n, got k={self.k!r}, n={n}")


@dataclass(frozen=True)
class VelocityConstrained:
    """Each slot a node lands uniformly in the ``v_max`` disk around itself."""

    v_max: float | str
    name: ClassVar[str] = "velocity"

    def resolve(self, cfg: NetworkConfig) -> "VelocityConstrained":
        return VelocityConstrained(_resolve_length(self.v_max, cfg.r))

    def validate(self, n: int) -> None:
        if isinstance(self.v_max, str) or not self.v_max > 0:
            raise ValueError(f"velocity needs v_max > 0, got {self.v_max!r}")


@dataclass(frozen=True)
class OneDimensional:
    """``n_v`` nodes on vertical paths, ``n_h`` on horizontal ones."""

    n_v: int | str
    n_h: int | str
    name: ClassVar[str] = "one-dim"

    def resolve(self, cfg: NetworkConfig) -> "OneDimensional":
        n_v = _resolve_count(self.n_v, cfg.n)
        n_h = cfg.n - n_v if self.n_h in ("rest", None) else _resolve_count(self.n_h, cfg.n)
        return OneDimensional(n_v, n_h)

    def validate(self, n: int) -> None:
        if isinstance(self.n_v, str) or isinstance(self.n_h, str):
            raise ValueError("one-dim counts must be resolved to integers")
        if self.n_v < 0 or self.n_h < 0 or self.n_v + self.n_h != n:
            raise ValueError(f"one-dim needs n_v + n_h = n, got {self.n_v} + {self.n_h} != {n}")


@dataclass(frozen=True)
class TwoDimensional:
    """Each slot a node lands uniformly in the ``r_c`` disk around its home point."""

    r_c: float | str
    name: ClassVar[str] = "two-dim"

    def resolve(self, cfg: NetworkConfig) -> "TwoDimensional":
        return TwoDimensional(_resolve_length(self.r_c, cfg.r))

    def validate(self, n: int) -> None:
        if isinstance(self.r_c, str) or not self.r_c > 0:
            raise ValueError(f"two-dim needs r_c > 0, got {self.r_c!r}")


MobilityModel = Union[Static, FullyRandom, PartiallyRandom, VelocityConstrained,
                      OneDimensional, TwoDimensional]

MODELS = {m.name: m for m in (Static, FullyRandom, PartiallyRandom, VelocityConstrained,
                              OneDimensional, TwoDimensional)}

# External parameter keys (CLI / config files) -> dataclass field names.
_PARAM_KEYS = {
    "partially-random": {"k": "k"},
    "velocity": {"vmax": "v_max", "v_max": "v_max"},
    "one-dim": {"nv": "n_v", "n_v": "n_v", "nh": "n_h", "n_h": "n_h"},
    "two-dim": {"rc": "r_c", "r_c": "r_c"},
}


def _coerce(text: str):
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text.strip()


def make_model(name: str, params: dict | None = None) -> MobilityModel:
    """Build a model from its external name and ``key -> value`` parameters.

    >>> make_model("velocity", {"vmax": "0.1"})
    VelocityConstrained(v_max=0.1)
    """
    params = dict(params or {})
    if name not in MODELS:
        raise ValueError(f"unknown mobility model {name!r}; choose from {sorted(MODELS)}")
    keys = _PARAM_KEYS.get(name, {})
    kwargs = {}
    for key, value in params.items():
        if key not in keys:
            raise ValueError(f"model {name!r} takes no parameter {key!r}")
        kwargs[keys[key]] = _coerce(value) if isinstance(value, str) else value
    if name == "one-dim" and "n_v" in kwargs and "n_h" not in kwargs:
        kwargs["n_h"] = "rest"
    try:
        model = MODELS[name](**kwargs)
    except TypeError as exc:
        raise ValueError(f"bad parameters for {name!r}: {exc}") from None
    for f in fields(model):
        value = getattr(model, f.name)
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            if f.name in ("v_max", "r_c") and not value > 0:
                raise ValueError(f"{name}: {f.name} must be positive, got {value}")
            if f.name in ("k", "n_v", "n_h") and value < 0:
                raise ValueError(f"{name}: {f.name} must be non-negative, got {value}")
    return model


_OUT_KEYS = {"k": "k", "v_max": "vmax", "n_v": "nv", "n_h": "nh", "r_c": "rc"}


def model_params(model: MobilityModel) -> str:
    """Canonical ``key=value;...`` rendering used in CSV output."""
    return ";".join(f"{_OUT_KEYS[f.name]}={getattr(model, f.name)}" for f in fields(model))


@dataclass
class Population:
    """Array-of-fields node state for one simulated network."""

    pos: np.ndarray
    anchor: np.ndarray
    cls: np.ndarray
    informed: np.ndarray

    @property
    def n(self) -> int:
        return len(self.pos)

    def node(self, i: int) -> NodeState:
        return NodeState(Point(*map(float, self.pos[i])), bool(self.informed[i]),
                         NodeClass(int(self.cls[i])), Point(*map(float, self.anchor[i])))


def disk_uniform_many(centers: np.ndarray, radius: float, rng: np.random.Generator) -> np.ndarray:
    """Uniform samples on ``disk(center, radius) & [0, 1]^2`` for each center.

    Proposals are uniform on the disk's bounding box clipped to the unit
    square (two draws per proposal: x then y), accepted when inside the disk.
    The acceptance rate is at least pi/4 for centers in the square.
    """
    centers = np.asarray(centers, dtype=float)
    if not radius > 0:
        raise ValueError("radius must be positive")
    lo = np.clip(centers - radius, 0.0, 1.0)
    hi = np.clip(centers + radius, 0.0, 1.0)
    out = np.empty_like(centers)
    todo = np.arange(len(centers))
    r2 = radius * radius
    while len(todo):
        u = rng.random((len(todo), 2))
        p = lo[todo] + u * (hi[todo] - lo[todo])
        d = p - centers[todo]
        ok = np.einsum("ij,ij->i", d, d) <= r2
        out[todo[ok]] = p[ok]
        todo = todo[~ok]
    return out


def disk_uniform(center, radius: float, rng: np.random.Generator) -> Point:
    """Single-point version of :func:`disk_uniform_many`."""
    p = disk_uniform_many(np.asarray([center], dtype=float), radius, rng)[0]
    return Point(float(p[0]), float(p[1]))


def init_population(cfg: NetworkConfig, model: MobilityModel, rng: np.random.Generator,
                    positions: np.ndarray | None = None) -> Population:
    """Uniform initial placement plus the model's class assignment.

    ``positions`` overrides the uniform placement (useful for hand-built
    configurations); for the two-dimensional model they become home points.
    """
    n = cfg.n
    model = model.resolve(cfg)
    model.validate(n)
    if positions is None:
        pos = uniform_points(n, rng)
    else:
        pos = np.array(positions, dtype=float)
        if pos.shape != (n, 2):
            raise ValueError(f"positions must have shape ({n}, 2)")
    cls = np.full(n, NodeClass.MOBILE, dtype=np.int8)
    anchor = pos.copy()
    if isinstance(model, Static):
        cls[:] = NodeClass.STATIC
    elif isinstance(model, PartiallyRandom):
        cls[:] = NodeClass.STATIC
        cls[np.sort(rng.choice(n, size=model.k, replace=False))] = NodeClass.MOBILE
    elif isinstance(model, OneDimensional):
        cls[:model.n_v] = NodeClass.VPATH
        cls[model.n_v:] = NodeClass.HPATH
    elif isinstance(model, TwoDimensional):
        pos = disk_uniform_many(anchor, model.r_c, rng)
    return Population(pos, anchor, cls, np.zeros(n, dtype=bool))


def is_static(model: MobilityModel) -> bool:
    return isinstance(model, Static) or (isinstance(model, PartiallyRandom) and model.k == 0)


def step(model: MobilityModel, pop: Population, rng: np.random.Generator) -> None:
    """Apply one mobility transition to ``pop.pos`` in place.

    ``model`` must already be resolved against the population's config.
    """
    if isinstance(model, Static):
        return
    if isinstance(model, FullyRandom):
        pop.pos[:] = rng.random((pop.n, 2))
    elif isinstance(model, PartiallyRandom):
        mobile = pop.cls == NodeClass.MOBILE
        pop.pos[mobile] = rng.random((int(mobile.sum()), 2))
    elif isinstance(model, VelocityConstrained):
        pop.pos[:] = disk_uniform_many(pop.pos, model.v_max, rng)
    elif isinstance(model, OneDimensional):
        u = rng.random(pop.n)
        v = pop.cls == NodeClass.VPATH
        pop.pos[v, 1] = u[v]
        pop.pos[~v, 0] = u[~v]
    elif isinstance(model, TwoDimensional):
        pop.pos[:] = disk_uniform_many(pop.anchor, model.r_c, rng)
    else:
        raise TypeError(f"not a mobility model: {model!r}")
