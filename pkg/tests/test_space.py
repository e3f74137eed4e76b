import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from piforge.corpus import cycle, path
from piforge.space import (FiniteMetricMeasureSpace, SpaceError, ball, ball_mass,
                           density_points, doubling_constant, doubling_ratio, maximal_function,
                           mean_deviation, uniform_perfectness)
from strategies import small_spaces

P5 = path(5)


def test_ball_middle_of_path():
    b = ball(P5, 2, 1.5)
    assert b.members == (1, 2, 3) and b.mass == 3


def test_ball_tiny_radius_is_center():
    assert ball(P5, 3, 0.5).members == (3,)


def test_ball_open_boundary_excluded():
    assert ball(P5, 0, 1.0).members == (0,)


def test_ball_large_radius_is_everything():
    b = ball(P5, 0, 10)
    assert b.members == tuple(range(5)) and b.mass == 5


def test_ball_rejects_nonpositive_radius():
    with pytest.raises(ValueError):
        ball(P5, 0, 0)


def test_doubling_single_vertex():
    S = FiniteMetricMeasureSpace.from_edges(1, [])
    assert doubling_constant(S) == 1.0


def test_doubling_cycle_ratio_three():
    C8 = cycle(8)
    assert all(doubling_ratio(C8, x, 1.0) == 3.0 for x in range(8))


def test_doubling_path_endpoint():
    assert doubling_ratio(P5, 0, 1.5) == pytest.approx(1.5)


def test_doubling_rejects_empty_along():
    with pytest.raises(ValueError):
        doubling_constant(P5, along=[])


def test_doubling_matches_bruteforce_over_fine_radii():
    # continuous sup sampled on a fine grid never exceeds the critical-radius value
    D = doubling_constant(P5)
    grid = np.linspace(0.01, P5.scale_cap, 800)
    brute = max(doubling_ratio(P5, x, r) for x in range(5) for r in grid)
    assert brute <= D + 1e-12
    assert D == pytest.approx(3.0)


def test_maximal_constant_function():
    assert np.allclose(maximal_function(P5, np.full(5, -2.0), 3.0), 2.0)


def test_maximal_indicator_small_scale():
    f = np.eye(5)[2]
    assert maximal_function(P5, f, 1.0)[1] == 0.0


def test_maximal_indicator_larger_scale():
    f = np.eye(5)[2]
    assert maximal_function(P5, f, 1.5)[1] == pytest.approx(1 / 3)


def _maximal_bruteforce(space, f, s):
    # every ball B(y, r) with r < s, radii at the distinct distances just above each value
    g = np.abs(f)
    out = np.zeros(space.n)
    radii = sorted(set(space.dist.ravel().tolist()))
    for y in range(space.n):
        for a in radii:
            r = a + 1e-6
            if r >= s:
                continue
            m = space.dist[y] < r
            avg = np.dot(space.weights[m], g[m]) / space.weights[m].sum()
            out[m] = np.maximum(out[m], avg)
    return out


@given(small_spaces(), st.sampled_from([0.6, 1.1, 2.0, 3.5]), st.integers(0, 1000))
def test_maximal_matches_bruteforce(space, s, seed):
    f = np.random.default_rng(seed).normal(size=space.n)
    assert np.allclose(maximal_function(space, f, s), _maximal_bruteforce(space, f, s))


def test_mean_deviation_examples():
    f = np.arange(5.0)
    b = ball(P5, 0, 10)
    assert mean_deviation(P5, f, b) == pytest.approx(1.2)
    assert mean_deviation(P5, f, b, 0.0) == pytest.approx(2.0)
    assert mean_deviation(P5, np.ones(5), b) == 0.0


@given(small_spaces(), st.integers(0, 1000), st.floats(-3, 3))
def test_mean_deviation_averaging_lemma(space, seed, a):
    f = np.random.default_rng(seed).normal(size=space.n)
    for x in range(space.n):
        b = ball(space, x, 1.7)
        assert mean_deviation(space, f, b) <= 2 * mean_deviation(space, f, b, a) + 1e-12


def test_perfectness_path():
    L = uniform_perfectness(path(9), range(9), 4.0)
    assert L != "fails" and L <= 2


def test_perfectness_isolated_point_fails():
    S = FiniteMetricMeasureSpace.from_matrix([[0, 1], [1, 0]], resolution=0.25)
    assert uniform_perfectness(S, [0], 2.0) == "fails"


def test_perfectness_vacuous():
    assert uniform_perfectness(P5, [0], 0.5) == 1.0


def test_density_points_examples():
    assert density_points(P5, range(5), 0.3, 1.5) == set(range(5))
    got = density_points(P5, [0, 1, 2, 3], 0.3, 1.5)
    assert 1 in got and 3 not in got
    assert density_points(P5, [0, 1, 2, 3], 0.999, 1.5) == {0, 1, 2, 3}


def test_from_matrix_rejects_triangle_violation_with_witness():
    m = [[0, 1, 5], [1, 0, 1], [5, 1, 0]]
    with pytest.raises(SpaceError, match=r"triple \(0, 1, 2\)"):
        FiniteMetricMeasureSpace.from_matrix(m)


def test_nonpositive_weight_rejected():
    with pytest.raises(SpaceError, match="vertex 1"):
        FiniteMetricMeasureSpace.from_edges(2, [(0, 1, 1.0)], [1.0, 0.0])


@given(small_spaces())
def test_edge_metric_is_shortest_path(space):
    # Floyd-Warshall as an independent reference
    n = space.n
    d = np.full((n, n), np.inf)
    np.fill_diagonal(d, 0)
    for u, v, l in space.edges:
        d[u, v] = d[v, u] = min(d[u, v], l)
    for k in range(n):
        d = np.minimum(d, d[:, [k]] + d[[k], :])
    assert np.allclose(d, space.dist)
    for i, j, k in itertools.product(range(n), repeat=3):
        assert space.dist[i, j] <= space.dist[i, k] + space.dist[k, j] + 1e-9


@given(small_spaces(), st.floats(0.1, 4), st.floats(0.1, 4))
def test_ball_monotone_in_radius(space, r1, r2):
    lo, hi = sorted((r1, r2))
    for x in range(space.n):
        assert set(ball(space, x, lo).members) <= set(ball(space, x, hi).members)
        assert ball_mass(space, x, lo) <= ball_mass(space, x, hi)


@given(small_spaces())
def test_doubling_at_least_one(space):
    assert doubling_constant(space) >= 1.0


def test_weak_maximal_bound_on_cycle():
    S = cycle(8)
    D = doubling_constant(S)
    rng = np.random.default_rng(3)
    for _ in range(50):
        f = rng.exponential(size=S.n)
        s, lam, x, r = rng.uniform(0.5, 3), rng.uniform(0.05, 2), rng.integers(8), rng.uniform(0.5, 4)
        level = maximal_function(S, f, s) > lam
        lhs = S.weights[level & (S.dist[x] < r)].sum()
        inside = S.dist[x] < r + s
        assert lhs <= D ** 3 * np.dot(S.weights[inside], f[inside]) / lam + 1e-9
