import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mobigossip.geometry import NetworkConfig
from mobigossip.mobility import (FullyRandom, NodeClass, OneDimensional, PartiallyRandom,
                                 Static, TwoDimensional, VelocityConstrained, disk_uniform,
                                 disk_uniform_many, init_population, is_static, make_model,
                                 model_params, step)

CFG = NetworkConfig(1000)


def test_make_model_and_params():
    assert make_model("static") == Static()
    assert make_model("velocity", {"vmax": "0.1"}) == VelocityConstrained(0.1)
    assert make_model("two-dim", {"rc": "0.05"}) == TwoDimensional(0.05)
    m = make_model("one-dim", {"nv": "500"})
    assert m.resolve(CFG) == OneDimensional(500, 500)
    assert model_params(make_model("one-dim", {"nv": 250, "nh": 750})) == "nv=250;nh=750"
    assert model_params(FullyRandom()) == ""


def test_relative_parameters():
    assert PartiallyRandom("0.1n").resolve(CFG).k == 100
    # ceil(sqrt(ln 1000)) = ceil(2.628...) = 3
    assert PartiallyRandom("sqrt-ln-n").resolve(CFG).k == 3
    assert VelocityConstrained("2r").resolve(CFG).v_max == pytest.approx(2 * CFG.r)
    assert VelocityConstrained("r/100").resolve(CFG).v_max == pytest.approx(CFG.r / 100)


@pytest.mark.parametrize("name, params", [
    ("velocity", {"vmax": "-1"}),
    ("velocity", {"vmax": "0"}),
    ("two-dim", {"rc": "-0.1"}),
    ("partially-random", {"k": "-3"}),
    ("velocity", {"speed": "0.1"}),
    ("warp-drive", {}),
])
def test_make_model_rejects(name, params):
    with pytest.raises(ValueError):
        make_model(name, params)


def test_validate_ranges():
    with pytest.raises(ValueError):
        init_population(CFG, PartiallyRandom(1001), np.random.default_rng(0))
    with pytest.raises(ValueError):
        init_population(CFG, OneDimensional(600, 600), np.random.default_rng(0))


def test_class_assignment():
    rng = np.random.default_rng(2)
    pop = init_population(CFG, PartiallyRandom(37), rng)
    assert np.sum(pop.cls == NodeClass.MOBILE) == 37
    pop = init_population(CFG, OneDimensional(300, 700), rng)
    assert np.all(pop.cls[:300] == NodeClass.VPATH) and np.all(pop.cls[300:] == NodeClass.HPATH)
    assert pop.node(0).cls is NodeClass.VPATH
    pop = init_population(CFG, TwoDimensional(0.05), rng)
    assert np.all(np.linalg.norm(pop.pos - pop.anchor, axis=1) <= 0.05 + 1e-12)


def test_is_static():
    assert is_static(Static()) and is_static(PartiallyRandom(0))
    assert not is_static(PartiallyRandom(1)) and not is_static(FullyRandom())


MODELS = [Static(), FullyRandom(), PartiallyRandom(20), VelocityConstrained(0.07),
          OneDimensional(40, 60), TwoDimensional(0.1)]


@settings(max_examples=30, deadline=None)
@given(idx=st.integers(0, len(MODELS) - 1), seed=st.integers(0, 2**32 - 1),
       steps=st.integers(1, 4))
def test_step_invariants(idx, seed, steps):
    cfg = NetworkConfig(100)
    model = MODELS[idx]
    rng = np.random.default_rng(seed)
    pop = init_population(cfg, model, rng)
    start = pop.pos.copy()
    for _ in range(steps):
        before = pop.pos.copy()
        step(model, pop, rng)
        assert np.all((pop.pos >= 0) & (pop.pos <= 1))
        if isinstance(model, VelocityConstrained):
            assert np.all(np.linalg.norm(pop.pos - before, axis=1) <= model.v_max + 1e-12)
        if isinstance(model, TwoDimensional):
            assert np.all(np.linalg.norm(pop.pos - pop.anchor, axis=1) <= model.r_c + 1e-12)
    if isinstance(model, Static):
        assert np.array_equal(pop.pos, start)
    if isinstance(model, PartiallyRandom):
        fixed = pop.cls == NodeClass.STATIC
        assert np.array_equal(pop.pos[fixed], start[fixed])
    if isinstance(model, OneDimensional):
        v = pop.cls == NodeClass.VPATH
        assert np.array_equal(pop.pos[v, 0], start[v, 0])
        assert np.array_equal(pop.pos[~v, 1], start[~v, 1])


def test_step_is_reproducible():
    for model in MODELS[1:]:
        a = init_population(NetworkConfig(100), model, np.random.default_rng(9))
        b = init_population(NetworkConfig(100), model, np.random.default_rng(9))
        ra, rb = np.random.default_rng(4), np.random.default_rng(4)
        step(model, a, ra)
        step(model, b, rb)
        assert np.array_equal(a.pos, b.pos)


@pytest.mark.parametrize("center", [(0.5, 0.5), (0.0, 0.0), (1.0, 0.3)])
def test_disk_samples_are_area_uniform(center):
    # For a uniform law on a disk sector at its apex, E[d^2] = R^2 / 2; the
    # clipped corner and edge regions are sectors of angle pi/2 and pi.
    rng = np.random.default_rng(11)
    R = 0.1
    pts = disk_uniform_many(np.tile(center, (40_000, 1)), R, rng)
    d2 = np.sum((pts - center) ** 2, axis=1)
    assert np.all(d2 <= R * R + 1e-15)
    assert d2.mean() == pytest.approx(R * R / 2, rel=0.02)
    assert np.all((pts >= 0) & (pts <= 1))


def test_disk_uniform_single():
    p = disk_uniform((0.5, 0.5), 0.2, np.random.default_rng(0))
    assert math.hypot(p.x - 0.5, p.y - 0.5) <= 0.2
    with pytest.raises(ValueError):
        disk_uniform((0.5, 0.5), 0.0, np.random.default_rng(0))


def test_fully_random_is_uniform():
    model = FullyRandom()
    pop = init_population(NetworkConfig(2000), model, np.random.default_rng(3))
    step(model, pop, np.random.default_rng(4))
    assert pop.pos.mean(axis=0) == pytest.approx([0.5, 0.5], abs=0.02)
    assert pop.pos.var(axis=0) == pytest.approx([1 / 12, 1 / 12], rel=0.08)
