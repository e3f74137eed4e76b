"""Deterministic example spaces used by the tests, the acceptance suite and the CLI."""
from __future__ import annotations

import itertools
import math

import numpy as np

from .space import FiniteMetricMeasureSpace


def path(n: int, spacing: float = 1.0, weight: float | None = None):
    """``P_n``: vertices ``0..n-1`` on a line, unit weights unless ``weight`` is given."""
    if n < 1:
        raise ValueError("path needs at least one vertex")
    w = np.full(n, 1.0 if weight is None else weight)
    edges = [(i, i + 1, spacing) for i in range(n - 1)]
    return FiniteMetricMeasureSpace.from_edges(n, edges, w, resolution=spacing,
                                               scale_cap=max(spacing * (n - 1), spacing))


def line(n: int, length: float = 1.0):
    """``n`` equally spaced atoms on ``[0, length]`` weighted by the spacing."""
    h = length / (n - 1)
    return path(n, spacing=h, weight=h)


def grid(n: int, dim: int = 2):
    if dim not in (1, 2):
        raise ValueError("grid supports dim 1 or 2")
    if dim == 1:
        return path(n)
    idx = lambda i, j: i * n + j
    edges = []
    for i, j in itertools.product(range(n), range(n)):
        if i + 1 < n:
            edges.append((idx(i, j), idx(i + 1, j), 1.0))
        if j + 1 < n:
            edges.append((idx(i, j), idx(i, j + 1), 1.0))
    return FiniteMetricMeasureSpace.from_edges(n * n, edges, resolution=1.0,
                                               scale_cap=2.0 * (n - 1) or 1.0)


def cycle(n: int):
    if n < 3:
        raise ValueError("cycle needs at least three vertices")
    edges = [(i, (i + 1) % n, 1.0) for i in range(n)]
    return FiniteMetricMeasureSpace.from_edges(n, edges, resolution=1.0,
                                               scale_cap=float(n // 2))


def star(rays: int, length: int):
    """A centre (vertex 0) with ``rays`` arms of ``length`` unit edges."""
    edges = []
    for r in range(rays):
        prev = 0
        for k in range(length):
            v = 1 + r * length + k
            edges.append((prev, v, 1.0))
            prev = v
    return FiniteMetricMeasureSpace.from_edges(1 + rays * length, edges, resolution=1.0,
                                               scale_cap=2.0 * length)


def glued_lines(n: int):
    """Two copies of ``P_n`` identified at their vertex 0.

    Vertex 0 is the junction, ``1..n-1`` form the first arm and
    ``n..2n-2`` the second.
    """
    edges = [(0, 1, 1.0)] + [(i, i + 1, 1.0) for i in range(1, n - 1)]
    edges += [(0, n, 1.0)] + [(i, i + 1, 1.0) for i in range(n, 2 * n - 2)]
    return FiniteMetricMeasureSpace.from_edges(2 * n - 1, edges, resolution=1.0,
                                               scale_cap=float(n - 1))


def weighted_line_parts(n: int = 21, a: float = 0.5, floor: float = 0.05):
    """Uniform line on ``[-1, 1]`` and the weight ``max(|x|, floor)^a``."""
    base = line(n, 2.0)
    xs = np.linspace(-1.0, 1.0, n)
    return base, np.maximum(np.abs(xs), floor) ** a


def weighted_line(n: int = 21, a: float = 0.5):
    base, w = weighted_line_parts(n, a)
    return base.with_weights(base.weights * w)


def cantor_layout(depth: int, leaf: int = 4) -> list:
    """Keep-mask of a discrete fat Cantor set: leaves of ``leaf`` points, stage-``i`` gaps of ``2^(depth-i)`` points."""
    def build(level):
        if level == depth:
            return [True] * leaf
        child = build(level + 1)
        return child + [False] * 2 ** (depth - level - 1) + child
    return build(0)


def fat_cantor(depth: int, leaf: int = 4):
    """Ambient grid ``X``, ``A = X`` and the Cantor subset ``K``.

    Grid points sit at multiples of a power-of-two spacing, so every distance,
    and every sum of distances, is exact in floating point.
    """
    keep = cantor_layout(depth, leaf)
    n = len(keep)
    h = 2.0 ** -math.ceil(math.log2(n))
    X = path(n, spacing=h, weight=h)
    K = [i for i, k in enumerate(keep) if k]
    return X, list(range(n)), K


def random_geometric(n: int, radius: float, seed: int = 0):
    """Points in the unit square joined when closer than ``radius``; components bridged by nearest pairs."""
    rng = np.random.default_rng(seed)
    pts = rng.random((n, 2))
    d = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)
    edges = {(i, j): d[i, j] for i in range(n) for j in range(i + 1, n) if d[i, j] < radius}
    # union-find to bridge components deterministically
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i, j in edges:
        parent[find(i)] = find(j)
    while len({find(i) for i in range(n)}) > 1:
        best = None
        for i in range(n):
            for j in range(i + 1, n):
                if find(i) != find(j) and (best is None or d[i, j] < d[best]):
                    best = (i, j)
        edges[best] = d[best]
        parent[find(best[0])] = find(best[1])
    elist = [(i, j, float(l)) for (i, j), l in sorted(edges.items())]
    return FiniteMetricMeasureSpace.from_edges(n, elist)


GENERATORS = {
    "path": (path, (int,)),
    "line": (line, (int, float)),
    "grid": (grid, (int, int)),
    "cycle": (cycle, (int,)),
    "star": (star, (int, int)),
    "glued_lines": (glued_lines, (int,)),
    "weighted_line": (weighted_line, (int, float)),
    "fat_cantor": (fat_cantor, (int, int)),
    "random_geometric": (random_geometric, (int, float, int)),
}


def parse_spec(spec: str):
    name, _, argstr = spec.partition(":")
    if name not in GENERATORS:
        raise ValueError(f"unknown generator {name!r}; known: {', '.join(sorted(GENERATORS))}")
    fn, types = GENERATORS[name]
    raw = [a for a in argstr.split(",") if a.strip()] if argstr else []
    if len(raw) > len(types):
        raise ValueError(f"{name} takes at most {len(types)} parameters, got {len(raw)}")
    try:
        args = [t(a) for t, a in zip(types, raw)]
    except ValueError as exc:
        raise ValueError(f"invalid parameter for {name}: {exc}") from None
    return name, fn, args


def generate(spec: str):
    """Build a space from ``"name:arg,..."``; triple generators return ``(X, subsets)``."""
    name, fn, args = parse_spec(spec)
    out = fn(*args)
    if name == "fat_cantor":
        X, A, K = out
        return X, {"A": A, "K": K}
    return out, {}


CORPUS = ("path:9", "cycle:8", "grid:4,2", "star:3,3", "glued_lines:5",
          "weighted_line:21,0.5", "random_geometric:16,0.4,3", "fat_cantor:2")


def corpus_spaces():
    return [(spec, generate(spec)[0]) for spec in CORPUS]


__all__ = ["path", "line", "grid", "cycle", "star", "glued_lines", "weighted_line",
           "weighted_line_parts", "fat_cantor", "cantor_layout", "random_geometric",
           "generate", "parse_spec", "GENERATORS", "CORPUS", "corpus_spaces"]
