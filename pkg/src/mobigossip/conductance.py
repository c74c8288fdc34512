"""Static and mobile conductance: empirical cut estimators and closed forms.

Every conductance here uses the constant contact probability ``P(r)``, the
reciprocal of the expected degree (see :class:`NetworkConfig`), so a cut
``S`` scores ``P(r) * N_S / |S|`` where ``N_S`` counts neighbor pairs
straddling the cut.  For mobile networks the
cut is fixed before the move and ``N_S`` is averaged over moves.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np
from scipy import integrate

from .geometry import NetworkConfig, SpatialIndex
from .mobility import (FullyRandom, MobilityModel, NodeClass, OneDimensional, PartiallyRandom,
                       Population, Static, TwoDimensional, VelocityConstrained, init_population,
                       step)

DEFAULT_SWEEP_LINES = 33
MAX_EXHAUSTIVE_N = 14


class Method(str, Enum):
    EMPIRICAL_STATIC = "empirical-static"
    EMPIRICAL_MOBILE = "empirical-mobile"
    ANALYTIC = "analytic"


@dataclass(frozen=True, eq=False)
class Cut:
    """Node ids on the small side of a bipartition, plus how it was produced."""

    members: np.ndarray
    provenance: str

    def __post_init__(self):
        object.__setattr__(self, "members", np.unique(np.asarray(self.members, dtype=np.int64)))

    def __len__(self) -> int:
        return len(self.members)

    def mask(self, n: int) -> np.ndarray:
        m = np.zeros(n, dtype=bool)
        m[self.members] = True
        return m

    def check(self, n: int) -> None:
        if not 0 < len(self.members) <= n // 2:
            raise ValueError(f"cut size {len(self.members)} outside (0, {n // 2}]")


@dataclass(frozen=True)
class ConductanceEstimate:
    value: float
    std_error: float
    method: Method
    samples: int
    cut: str = ""
    cut_size: int = 0


def _small_side(mask: np.ndarray) -> np.ndarray:
    n = len(mask)
    if mask.sum() > n // 2:
        mask = ~mask
    return np.flatnonzero(mask)


def sweep_cuts(coords: np.ndarray, lines: int = DEFAULT_SWEEP_LINES) -> list[Cut]:
    """Straight-line cuts at ``k / (lines + 1)`` for ``k = 1..lines`` along both axes.

    Each line splits the points; the side holding at most ``floor(n/2)``
    nodes is the cut.  Lines leaving one side empty are skipped.
    """
    coords = np.asarray(coords, dtype=float)
    cuts = []
    for axis, label in ((0, "sweep-vertical"), (1, "sweep-horizontal")):
        for k in range(1, lines + 1):
            c = k / (lines + 1)
            members = _small_side(coords[:, axis] < c)
            if len(members):
                cuts.append(Cut(members, f"{label}({c:.6g})"))
    return cuts


def one_dim_combined_cut(pop: Population) -> Cut:
    """V-nodes left of ``x = 1/2`` together with H-nodes above ``y = 1/2``."""
    v = pop.cls == NodeClass.VPATH
    h = pop.cls == NodeClass.HPATH
    mask = (v & (pop.anchor[:, 0] < 0.5)) | (h & (pop.anchor[:, 1] >= 0.5))
    return Cut(_small_side(mask), "one-dim-combined")


def candidate_cuts(model: MobilityModel, pop: Population,
                   lines: int = DEFAULT_SWEEP_LINES) -> list[Cut]:
    """Default cut family for ``model``, defined on the pre-move state.

    Two-dimensional networks are cut along their home points; one-dimensional
    networks get the combined V/H cut on top of the sweep lines.
    """
    coords = pop.anchor if isinstance(model, TwoDimensional) else pop.pos
    cuts = sweep_cuts(coords, lines)
    if isinstance(model, OneDimensional) and model.n_v and model.n_h:
        cuts.append(one_dim_combined_cut(pop))
    return cuts


def contact_pairs(index: SpatialIndex, cut: Cut) -> int:
    """Number of neighbor pairs with exactly one endpoint in ``cut``."""
    mask = cut.mask(index.n)
    p = index.pairs
    return int(np.count_nonzero(mask[p[:, 0]] != mask[p[:, 1]]))


def _cross_counts(pairs: np.ndarray, masks: np.ndarray) -> np.ndarray:
    if len(pairs) == 0:
        return np.zeros(len(masks), dtype=np.int64)
    return np.count_nonzero(masks[:, pairs[:, 0]] != masks[:, pairs[:, 1]], axis=1)


def static_conductance_empirical(positions: np.ndarray | SpatialIndex, cfg: NetworkConfig,
                                 cuts: list[Cut] | None = None) -> ConductanceEstimate:
    """Minimum of ``P(r) N_S / |S|`` over ``cuts`` (sweep lines by default)."""
    index = positions if isinstance(positions, SpatialIndex) else SpatialIndex(positions, cfg.r)
    if cuts is None:
        cuts = sweep_cuts(index.positions)
    if not cuts:
        raise ValueError("empty cut family")
    masks = np.stack([c.mask(index.n) for c in cuts])
    sizes = np.array([len(c) for c in cuts], dtype=float)
    values = cfg.contact_probability * _cross_counts(index.pairs, masks) / sizes
    best = int(np.argmin(values))
    return ConductanceEstimate(float(values[best]), 0.0, Method.EMPIRICAL_STATIC, 1,
                               cuts[best].provenance, len(cuts[best]))


def mobile_conductance_empirical(cfg: NetworkConfig, model: MobilityModel,
                                 cut_builder: Callable[[MobilityModel, Population], list[Cut]]
                                 | None = None,
                                 move_samples: int = 200,
                                 rng: np.random.Generator | None = None,
                                 population: Population | None = None) -> ConductanceEstimate:
    """Minimum over a pre-move cut family of ``P(r) E[N_S(t+1)] / |S|``.

    The expectation is a Monte Carlo average over ``move_samples`` independent
    single-slot moves from the same starting state.  The reported standard
    error belongs to the minimizing cut.
    """
    if move_samples < 1:
        raise ValueError("move_samples must be >= 1")
    rng = rng if rng is not None else np.random.default_rng()
    model = model.resolve(cfg)
    pop = population if population is not None else init_population(cfg, model, rng)
    cuts = (cut_builder or candidate_cuts)(model, pop)
    if not cuts:
        raise ValueError("degenerate cut family: no valid cuts")
    n = cfg.n
    masks = np.stack([c.mask(n) for c in cuts])
    sizes = np.array([len(c) for c in cuts], dtype=float)
    counts = np.empty((move_samples, len(cuts)))
    moved = Population(pop.pos.copy(), pop.anchor, pop.cls, pop.informed)
    for s in range(move_samples):
        moved.pos[:] = pop.pos
        step(model, moved, rng)
        counts[s] = _cross_counts(SpatialIndex(moved.pos, cfg.r).pairs, masks)
    p = cfg.contact_probability
    values = p * counts.mean(axis=0) / sizes
    best = int(np.argmin(values))
    if move_samples > 1:
        se = p * counts[:, best].std(ddof=1) / math.sqrt(move_samples) / sizes[best]
    else:
        se = 0.0
    return ConductanceEstimate(float(values[best]), float(se), Method.EMPIRICAL_MOBILE,
                               move_samples, cuts[best].provenance, len(cuts[best]))


def _subset_masks(n: int) -> np.ndarray:
    codes = np.arange(1, 2**n, dtype=np.int64)
    bits = ((codes[:, None] >> np.arange(n)) & 1).astype(bool)
    return bits[bits.sum(axis=1) <= n // 2]


def brute_force_conductance(pop: Population, cfg: NetworkConfig, model: MobilityModel,
                            move_samples: int = 1,
                            rng: np.random.Generator | None = None) -> ConductanceEstimate:
    """Exhaustive minimum over every subset with ``1 <= |S| <= n/2``.

    For static networks the score is exact and ``move_samples`` is ignored;
    otherwise contact pairs are averaged over ``move_samples`` moves.
    """
    n = cfg.n
    if n > MAX_EXHAUSTIVE_N:
        raise ValueError(f"exhaustive search supports n <= {MAX_EXHAUSTIVE_N}, got {n}")
    model = model.resolve(cfg)
    rng = rng if rng is not None else np.random.default_rng()
    masks = _subset_masks(n)
    sizes = masks.sum(axis=1).astype(float)
    if isinstance(model, Static):
        counts = _cross_counts(SpatialIndex(pop.pos, cfg.r).pairs, masks).astype(float)
        samples = 1
    else:
        if move_samples < 1:
            raise ValueError("move_samples must be >= 1")
        total = np.zeros(len(masks))
        moved = Population(pop.pos.copy(), pop.anchor, pop.cls, pop.informed)
        for _ in range(move_samples):
            moved.pos[:] = pop.pos
            step(model, moved, rng)
            total += _cross_counts(SpatialIndex(moved.pos, cfg.r).pairs, masks)
        counts = total / move_samples
        samples = move_samples
    values = cfg.contact_probability * counts / sizes
    best = int(np.argmin(values))
    members = "".join("1" if b else "0" for b in masks[best])
    return ConductanceEstimate(float(values[best]), 0.0,
                               Method.EMPIRICAL_STATIC if samples == 1 and isinstance(model, Static)
                               else Method.EMPIRICAL_MOBILE,
                               samples, f"exhaustive({members})", int(sizes[best]))


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------

def phi_fully_random() -> float:
    return 0.5


def phi_static_analytic(r: float) -> float:
    """Static RGG conductance ``4 r (1 - r) / (3 pi)`` for the bisecting cut."""
    if not 0 < r < 1:
        raise ValueError(f"r must lie in (0, 1), got {r}")
    return 4.0 * r * (1.0 - r) / (3.0 * math.pi)


def phi_partially_random(n: int, k: int, phi_s: float) -> float:
    if not 0 <= k <= n or n < 1:
        raise ValueError(f"need 0 <= k <= n, got k={k}, n={n}")
    if phi_s < 0:
        raise ValueError("phi_s must be non-negative")
    return ((n - k) / n) ** 2 * phi_s + k * (2 * n - k) / (2 * n * n)


def phi_one_dim(n: int, n_v: int, n_h: int, phi_s: float) -> float:
    if n_v < 0 or n_h < 0 or n_v + n_h != n or n < 1:
        raise ValueError(f"need n_v + n_h = n, got {n_v} + {n_h} vs {n}")
    if phi_s < 0:
        raise ValueError("phi_s must be non-negative")
    return (n_v**2 + n_h**2) / n**2 * phi_s + n_v * n_h / n**2


def phi_velocity_closed_form(r: float, v_max: float) -> float:
    """Piecewise closed form for velocity-constrained mobile conductance."""
    if not r > 0 or v_max < 0:
        raise ValueError(f"need r > 0 and v_max >= 0, got r={r}, v_max={v_max}")
    if v_max <= r / 2:
        return r / 2 + v_max**2 / (3 * r)
    return -r**3 / (48 * v_max**2) + r**2 / (6 * v_max) + 2 * v_max / 3


def phi_two_dim(r: float, r_c: float) -> float:
    """Home-disk model: the velocity closed form with ``v_max -> r_c``."""
    if not r_c > 0:
        raise ValueError(f"r_c must be positive, got {r_c}")
    return phi_velocity_closed_form(r, r_c)


def one_dim_cross_contact_probability(r: float, numerical: bool = False) -> float:
    """Contact probability of a V-node and an H-node, ``pi r^2``.

    With ``numerical=True`` the chord-length integral is evaluated by
    quadrature instead.
    """
    if not 0 < r < 1:
        raise ValueError(f"r must lie in (0, 1), got {r}")
    if not numerical:
        return math.pi * r * r
    val, _ = integrate.quad(lambda x: 2 * math.sqrt(max(r * r - x * x, 0.0)), -r, r,
                            epsabs=1e-13, epsrel=1e-12, limit=200)
    return val


def velocity_density_profile(l: float, v_max: float) -> float:
    """Post-move fraction of nodes from the left half found at offset ``l``.

    A node lands uniformly in the ``v_max`` disk around its old position, so
    the fraction is the share of a ``v_max`` disk centred at ``l`` lying left
    of the bisector: a circular segment over the disk area.
    """
    if v_max < 0:
        raise ValueError("v_max must be non-negative")
    if l <= -v_max:
        return 1.0 if l < 0 or v_max > 0 else 0.5
    if l >= v_max:
        return 0.0
    u = l / v_max
    return (math.acos(u) - u * math.sqrt(1.0 - u * u)) / math.pi


def box_density_profile(l: float, v_max: float) -> float:
    """Same fraction when the move is uniform on a square of half-side ``v_max``.

    The horizontal displacement is then uniform on ``[-v_max, v_max]`` and the
    profile ramps linearly across the mixing strip.
    """
    if v_max < 0:
        raise ValueError("v_max must be non-negative")
    if l <= -v_max:
        return 1.0 if l < 0 or v_max > 0 else 0.5
    if l >= v_max:
        return 0.0
    return (v_max - l) / (2 * v_max)


def _box_complement_primitive(l: float, v: float) -> float:
    # Antiderivative of 1 - box_density_profile, zero at l = -v.
    if l <= -v:
        return 0.0
    if l >= v:
        return l
    return (l + v) ** 2 / (4 * v)


_QUAD = dict(epsabs=1e-14, epsrel=1e-10, limit=400)

VELOCITY_METHODS = ("circle_quadrature", "square_approx", "inscribed_square")


def velocity_contact_integral(r: float, v_max: float, method: str = "circle_quadrature") -> float:
    """Contact-pair density across the bisector after one velocity-limited move.

    Returns ``E[N_S(t+1)] / n^2`` for the vertical-bisector cut, ignoring the
    square's edges.  Methods:

    ``circle_quadrature``
        disk moves, exact circular contact region (nested adaptive quadrature).
    ``square_approx``
        box moves with uniform horizontal displacement and a ``2r``-wide
        contact window of height ``pi r / 2`` (area ``pi r^2``); this is the
        approximation that yields :func:`phi_velocity_closed_form` exactly.
    ``inscribed_square``
        disk moves, contact region replaced by the square inscribed in the
        radius-``r`` circle (half-width ``r / sqrt 2``, height ``sqrt 2 r``).
    """
    if not r > 0 or v_max < 0:
        raise ValueError(f"need r > 0 and v_max >= 0, got r={r}, v_max={v_max}")
    v = v_max
    kinks = sorted({-v, v, 0.0})

    if method == "square_approx":
        h, height = r, math.pi * r / 2

        def inner(x):
            return height * (_box_complement_primitive(x + h, v)
                             - _box_complement_primitive(x - h, v))

        def outer(x):
            return box_density_profile(x, v) * inner(x)
    elif method == "inscribed_square":
        h, height = r / math.sqrt(2), math.sqrt(2) * r

        def outer(x):
            pts = [p for p in kinks if x - h < p < x + h]
            val, _ = integrate.quad(lambda l: 1.0 - velocity_density_profile(l, v), x - h, x + h,
                                    points=pts or None, **_QUAD)
            return velocity_density_profile(x, v) * height * val
    elif method == "circle_quadrature":
        h = r

        def outer(x):
            # l = x + r sin(theta) removes the square-root endpoint singularity.
            pts = [math.asin(max(-1.0, min(1.0, (p - x) / r))) for p in kinks if x - r < p < x + r]

            def g(theta):
                return (1.0 - velocity_density_profile(x + r * math.sin(theta), v)) \
                    * 2 * r * r * math.cos(theta) ** 2

            val, _ = integrate.quad(g, -math.pi / 2, math.pi / 2, points=pts or None, **_QUAD)
            return velocity_density_profile(x, v) * val
    else:
        raise ValueError(f"unknown method {method!r}; choose from {VELOCITY_METHODS}")

    lo, hi = -v - h, v + h
    pts = sorted({p for p in (-v, v, 0.0, -h, h, v - h, h - v) if lo < p < hi})
    val, _ = integrate.quad(outer, lo, hi, points=pts or None, **_QUAD)
    return val


def phi_velocity_integral(r: float, v_max: float, method: str = "circle_quadrature") -> float:
    """Mobile conductance of the bisecting cut, ``2 / (pi r^2)`` times the contact integral."""
    return 2.0 / (math.pi * r * r) * velocity_contact_integral(r, v_max, method)


def analytic_phi(model: MobilityModel, cfg: NetworkConfig, phi_s: float | None = None) -> float:
    """Closed-form conductance for ``model`` on network ``cfg``."""
    model = model.resolve(cfg)
    if phi_s is None:
        phi_s = phi_static_analytic(cfg.r)
    if isinstance(model, Static):
        return phi_s
    if isinstance(model, FullyRandom):
        return phi_fully_random()
    if isinstance(model, PartiallyRandom):
        return phi_partially_random(cfg.n, model.k, phi_s)
    if isinstance(model, VelocityConstrained):
        return phi_velocity_closed_form(cfg.r, model.v_max)
    if isinstance(model, OneDimensional):
        return phi_one_dim(cfg.n, model.n_v, model.n_h, phi_s)
    if isinstance(model, TwoDimensional):
        return phi_two_dim(cfg.r, model.r_c)
    raise TypeError(f"not a mobility model: {model!r}")
