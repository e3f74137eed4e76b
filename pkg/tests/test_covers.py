import itertools

import numpy as np
from hypothesis import given, strategies as st

from piforge.covers import build_gap_points, build_nets, vitali_select, whitney_scale
from piforge.space import FiniteMetricMeasureSpace


def line_space(xs):
    xs = np.asarray(xs, float)
    return FiniteMetricMeasureSpace.from_matrix(np.abs(xs[:, None] - xs[None, :]))


def test_nets_two_points():
    S = line_space([0, 1])
    assert build_nets(S, [0, 1], 0).levels[0] == [0, 1]


def test_nets_singleton():
    S = line_space([0, 1])
    assert all(lvl == [1] for lvl in build_nets(S, [1], 4).levels)


def test_nets_greedy_by_id():
    S = line_space([0, 0.4, 1])
    nets = build_nets(S, [0, 1, 2], 2)
    assert nets.levels[0] == [0, 2]
    assert nets.scale[0] == 1.0 and nets.scale[1] == 0.25


@given(st.lists(st.floats(0, 3), min_size=1, max_size=9, unique=True), st.integers(0, 4))
def test_nets_invariants(xs, j_max):
    S = line_space(sorted(xs))
    K = list(range(S.n))
    nets = build_nets(S, K, j_max)
    for j, lvl in enumerate(nets.levels):
        sep = 2.0 ** -j
        for a, b in itertools.combinations(lvl, 2):
            assert S.dist[a, b] >= sep - 1e-9
        for v in K:  # maximal
            assert v in lvl or any(S.dist[v, m] < sep - 1e-9 for m in lvl)
        if j:
            assert set(nets.levels[j - 1]) <= set(lvl)


def test_gap_points_empty_when_A_is_K():
    S = line_space([0, 0.5, 1])
    assert build_gap_points(S, [0, 2], [0, 2]).scale == {}


def test_gap_points_midpoint():
    S = line_space([0, 0.5, 1])
    gp = build_gap_points(S, [0, 2], [0, 1, 2])
    assert gp.by_scale == {1: [1]}


def test_gap_points_two_scales():
    S = line_space([0, 0.25, 0.5, 1])
    gp = build_gap_points(S, [0, 3], [0, 1, 2, 3])
    assert gp.by_scale == {1: [2], 2: [1]}


@given(st.lists(st.floats(0, 1), min_size=3, max_size=10, unique=True))
def test_gap_point_invariants(xs):
    S = line_space(sorted(xs))
    K = [0, S.n - 1]
    gp = build_gap_points(S, K, range(S.n))
    dK = S.dist[:, K].min(axis=1)
    for g, sc in gp.scale.items():
        k = -int(round(np.log2(sc)))
        assert 2.0 ** (-k - 1) < dK[g] <= 2.0 ** -k + 1e-12
    pts = list(gp.scale)
    for a, b in itertools.combinations(pts, 2):
        ra, rb = gp.scale[a] * 2.0 ** -15, gp.scale[b] * 2.0 ** -15
        ball_a = set(np.flatnonzero(S.dist[a] < ra))
        assert not ball_a & set(np.flatnonzero(S.dist[b] < rb))
    for v in gp.candidates:
        assert any(S.dist[v, g] < gp.scale[g] * 2.0 ** -10 for g in pts)


def test_whitney_scale_boundaries():
    assert whitney_scale(0.5) == 1
    assert whitney_scale(0.3) == 1
    assert whitney_scale(0.25) == 2


def test_vitali_examples():
    assert vitali_select([(0, 1.0)]) == [(0, 1.0)]
    assert vitali_select([(0, 1.0), (5, 1.0)]) == [(0, 1.0), (5, 1.0)]
    assert vitali_select([(0, 0.75), (1, 0.75), (2, 0.75)]) == [(0, 0.75), (2, 0.75)]


@given(st.lists(st.tuples(st.floats(0, 10), st.floats(0.1, 2)), min_size=1, max_size=12))
def test_vitali_disjoint_and_covering(balls):
    chosen = vitali_select(balls)
    for (c1, r1), (c2, r2) in itertools.combinations(chosen, 2):
        assert abs(c1 - c2) >= r1 + r2 - 1e-9
    for c, r in balls:
        assert any(abs(c - c2) < r + r2 + 1e-9 and r2 >= r - 1e-12 for c2, r2 in chosen)
