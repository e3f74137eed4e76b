import math

import numpy as np
import pytest

from piforge.corpus import fat_cantor, path
from piforge.space import FiniteMetricMeasureSpace
from piforge.thickening import (EDGE_FACTOR, LINK_FACTOR, glued_measure, thicken,
                                verify_estimates)

REQUIRED = ("estimate1", "estimate3", "estimate4", "estimate5", "estimate7_length",
            "estimate7_mass", "estimate8", "estimate9", "edge_count")


def three_point():
    xs = np.array([0, 0.5, 1.0])
    X = FiniteMetricMeasureSpace.from_matrix(np.abs(xs[:, None] - xs[None, :]))
    return X, thicken(X, [0, 1, 2], [0, 2], 2 ** 20, h=0.25)


def test_no_gaps_gives_bare_K():
    X, _ = three_point()
    cx = thicken(X, [0, 2], [0, 2], 2 ** 20)
    assert cx.vertices == [] and cx.edges == []
    assert all(v == 0 for v in cx.lscale.values())
    G = glued_measure(cx)
    assert G.space.n == 2 and np.array_equal(G.space.dist, X.dist[np.ix_([0, 2], [0, 2])])
    rep = verify_estimates(cx)
    assert not rep.failures


def test_three_point_vertices():
    _, cx = three_point()
    got = {(x, s, k) for x, s, k in cx.vertices}
    assert got == {(0, 0.5, "net"), (0, 0.25, "net"), (1, 0.5, "gap"),
                   (2, 0.5, "net"), (2, 0.25, "net")}
    assert cx.lscale == {0: 0.5, 2: 0.5}


def test_three_point_edge_length_and_mass():
    _, cx = three_point()
    idx = {(x, s): i for i, (x, s, _) in enumerate(cx.vertices)}
    a, b = sorted((idx[(0, 0.5)], idx[(1, 0.5)]))
    (edge,) = [e for e in cx.edges if (e[0], e[1]) == (a, b)]
    assert edge[2] == 16 and edge[3] == 2
    assert edge[2] <= 2 ** 7 * 0.5


def test_three_point_K_distance():
    _, cx = three_point()
    assert cx.glued_distance[0, 1] == 1.0


def test_links_cost():
    _, cx = three_point()
    for k, v, c in cx.links:
        assert c == LINK_FACTOR * cx.vertices[v][1]


def test_edge_conditions():
    X, A, K = fat_cantor(3)
    cx = thicken(X, A, K, 2 ** 16)
    d = X.dist * cx.factor
    for i, j, l, mass in cx.edges:
        (x, r, _), (y, s, _) = cx.vertices[i], cx.vertices[j]
        R, S = r * cx.factor, s * cx.factor
        assert d[x, y] <= EDGE_FACTOR * (R + S) + 1e-9
        assert 0.5 <= R / S <= 2
        assert l == pytest.approx(EDGE_FACTOR * (r + s))


def test_every_tree_vertex_reaches_K():
    X, A, K = fat_cantor(3)
    cx = thicken(X, A, K, 2 ** 16)
    assert np.all(np.isfinite(cx.glued_distance[len(K):, :len(K)]))


def test_rejects_bad_inputs():
    X, A, K = fat_cantor(2)
    with pytest.raises(ValueError):
        thicken(X, A, [], 2 ** 16)
    with pytest.raises(ValueError):
        thicken(X, K, A, 2 ** 16)


def test_glued_measure_segments():
    _, cx = three_point()
    G = glued_measure(cx, h=4)
    k = [n for n, (i, j, l, m) in enumerate(cx.edges) if l == 16][0]
    assert G.segments[k] == 4
    nodes = np.flatnonzero(G.edge_of_node == k)
    assert np.allclose(G.space.weights[nodes], 0.5)


def test_glued_measure_conserves_mass_and_K():
    X, A, K = fat_cantor(2)
    cx = thicken(X, A, K, 2 ** 16)
    G = glued_measure(cx)
    total = X.weights[K].sum() + sum(m for *_, m in cx.edges)
    assert G.space.total_mass == pytest.approx(total)
    assert np.array_equal(G.space.weights[G.K_nodes], X.weights[K])
    assert np.array_equal(G.space.dist[:len(K), :len(K)], X.dist[np.ix_(K, K)])


def test_glued_measure_strict_spacing():
    _, cx = three_point()
    with pytest.raises(ValueError):
        glued_measure(cx, h=100)


@pytest.mark.parametrize("depth", [2, 3])
def test_estimates_pass_on_fat_cantor(depth):
    X, A, K = fat_cantor(depth)
    rep = verify_estimates(thicken(X, A, K, 2 ** 16))
    for name in REQUIRED:
        assert rep.by_name(name).status == "pass", name
    assert rep.by_name("estimate1").worst_margin == 0.0
    assert rep.by_name("estimate2").status == "holds by construction"


def test_json_roundtrip_shape():
    _, cx = three_point()
    j = cx.to_json()
    assert {"vertices", "edges"} <= set(j)
    assert all(v["kind"] in ("K", "net", "gap") for v in j["vertices"])
