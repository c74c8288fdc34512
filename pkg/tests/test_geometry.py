import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from mobigossip.geometry import (DEFAULT_C0, NetworkConfig, SpatialIndex, brute_force_pairs,
                                 pair_contact_probability, transmission_radius, uniform_point,
                                 uniform_points)


@pytest.mark.parametrize("n, expected", [
    # high-precision evaluations of sqrt((8/pi) ln n / n)
    (250, 0.237152143322921206),
    (1000, 0.132629010299806828),
    (4000, 0.0726646818880202132),
])
def test_radius_values(n, expected):
    assert transmission_radius(n) == pytest.approx(expected, rel=1e-14)
    assert NetworkConfig(n).r == pytest.approx(expected, rel=1e-14)


def test_radius_rejects_bad_input():
    with pytest.raises(ValueError):
        transmission_radius(1)
    with pytest.raises(ValueError):
        transmission_radius(100, c0=0)


def test_config_validation():
    with pytest.raises(ValueError):
        NetworkConfig(1)
    with pytest.raises(ValueError):
        NetworkConfig(100, r=1.5)
    with pytest.raises(ValueError):
        NetworkConfig(100, r=0.01)  # n pi r^2 < 1
    assert NetworkConfig(100, r=0.2).r == 0.2
    assert DEFAULT_C0 == pytest.approx(8 / math.pi)


def _difference_density_oracle(r):
    # |X - Y| < r where each coordinate difference has the triangular density 1 - |t|
    val, _ = integrate.dblquad(lambda y, x: (1 - abs(x)) * (1 - abs(y)), -r, r,
                               lambda x: -math.sqrt(r * r - x * x),
                               lambda x: math.sqrt(r * r - x * x), epsabs=1e-13)
    return val


@pytest.mark.parametrize("r", [0.02, 0.07, 0.1326, 0.3, 0.6])
def test_pair_contact_probability_matches_quadrature(r):
    assert pair_contact_probability(r) == pytest.approx(_difference_density_oracle(r), rel=1e-9)


def test_pair_contact_probability_monte_carlo():
    rng = np.random.default_rng(5)
    a, b = rng.random((200_000, 2)), rng.random((200_000, 2))
    frac = np.mean(np.linalg.norm(a - b, axis=1) < 0.2)
    assert frac == pytest.approx(pair_contact_probability(0.2), abs=0.003)


def test_contact_probability_is_inverse_degree():
    cfg = NetworkConfig(1000)
    assert cfg.contact_probability * cfg.expected_degree == pytest.approx(1.0)
    # boundary losses push the mean degree below the edge-free n pi r^2
    assert cfg.expected_degree < cfg.n * math.pi * cfg.r**2


def test_uniform_draw_order():
    a = uniform_points(3, np.random.default_rng(1))
    b = np.random.default_rng(1).random(6).reshape(3, 2)
    assert np.array_equal(a, b)
    p = uniform_point(np.random.default_rng(1))
    assert (p.x, p.y) == tuple(b[0])


def test_strict_inequality_at_radius():
    pos = np.array([[0.0, 0.0], [0.5, 0.0], [0.25, 0.0]])
    idx = SpatialIndex(pos, 0.5)
    assert list(idx.neighbors(0)) == [2]
    assert list(idx.neighbors(1)) == [2]
    assert list(idx.neighbors(2)) == [0, 1]


def test_unknown_node_id():
    idx = SpatialIndex(np.random.default_rng(0).random((5, 2)), 0.3)
    with pytest.raises(IndexError):
        idx.neighbors(5)
    with pytest.raises(IndexError):
        idx.neighbors(-1)


def test_bad_shapes():
    with pytest.raises(ValueError):
        SpatialIndex(np.zeros((4, 3)), 0.1)
    with pytest.raises(ValueError):
        SpatialIndex(np.zeros((4, 2)), 0.0)


def test_no_wraparound():
    idx = SpatialIndex(np.array([[0.01, 0.5], [0.99, 0.5]]), 0.1)
    assert len(idx.pairs) == 0
    assert list(idx.degrees()) == [0, 0]


@settings(max_examples=60, deadline=None)
@given(n=st.integers(2, 80), r=st.floats(0.01, 0.8), seed=st.integers(0, 2**32 - 1))
def test_index_matches_brute_force(n, r, seed):
    pos = np.random.default_rng(seed).random((n, 2))
    idx = SpatialIndex.build(pos, r)
    assert np.array_equal(idx.pairs, brute_force_pairs(pos, r))
    deg = idx.degrees()
    assert deg.sum() == 2 * len(idx.pairs)
    for i in range(n):
        nb = idx.neighbors(i)
        assert i not in nb
        assert np.all(np.diff(nb) > 0)
        for j in nb:
            assert i in idx.neighbors(j)
            assert np.linalg.norm(pos[i] - pos[j]) < r
