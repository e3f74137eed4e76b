"""Finite metric measure spaces and ball-level primitives.

A space is a finite set of atoms with positive weights and a metric.  The
metric is either the shortest-path metric of a weighted graph or an explicit
matrix.  Balls are open: ``B(x, r) = {y : d(x, y) < r}``.  Every supremum over
a continuous radius is evaluated on the finite set of radii at which the
relevant balls change, which is exact for atomic measures.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

TOL = 1e-9


class SpaceError(ValueError):
    """Raised when a space violates one of its structural invariants."""


@dataclass(frozen=True, eq=False)
class FiniteMetricMeasureSpace:
    """Atoms ``0..n-1`` with weights, a distance matrix and optional graph edges.

    ``edges`` holds ``(u, v, length)`` triples with ``u < v``.  When the space
    was built from edges, ``dist`` is their shortest-path metric.  Edges are
    what curve fragments may traverse as solid legs.
    """

    weights: np.ndarray
    dist: np.ndarray
    edges: tuple = ()
    resolution: float = 1.0
    scale_cap: float = 1.0
    labels: tuple | None = None

    # construction -----------------------------------------------------

    @classmethod
    def from_edges(cls, n, edges, weights=None, resolution=None, scale_cap=None,
                   labels=None, validate=True):
        clean = {}
        for u, v, length in edges:
            u, v, length = int(u), int(v), float(length)
            if not (0 <= u < n and 0 <= v < n):
                raise SpaceError(f"edge ({u}, {v}) references a missing vertex")
            if not np.isfinite(length) or length <= 0:
                raise SpaceError(f"edge ({u}, {v}) has non-positive length {length}")
            if u == v:
                raise SpaceError(f"edge ({u}, {v}) is a self-loop")
            key = (min(u, v), max(u, v))
            clean[key] = min(length, clean.get(key, np.inf))
        w = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
        if clean:
            rows, cols, vals = zip(*[(u, v, l) for (u, v), l in sorted(clean.items())])
            graph = csr_matrix((vals, (rows, cols)), shape=(n, n))
            dist = shortest_path(graph, method="D", directed=False)
        else:
            dist = np.full((n, n), np.inf)
            np.fill_diagonal(dist, 0.0)
        edge_tuple = tuple((u, v, l) for (u, v), l in sorted(clean.items()))
        if resolution is None:
            resolution = min((l for _, _, l in edge_tuple), default=1.0)
        if scale_cap is None:
            finite = dist[np.isfinite(dist)]
            scale_cap = float(finite.max()) if finite.size and finite.max() > 0 else 1.0
        space = cls(w, dist, edge_tuple, float(resolution), float(scale_cap),
                    None if labels is None else tuple(labels))
        if validate:
            space.validate()
        return space

    @classmethod
    def from_matrix(cls, matrix, weights=None, edges=(), resolution=None,
                    scale_cap=None, labels=None, validate=True):
        dist = np.array(matrix, dtype=float)
        n = dist.shape[0]
        w = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
        edge_tuple = tuple(sorted((min(int(u), int(v)), max(int(u), int(v)), float(l))
                                  for u, v, l in edges))
        off = dist[~np.eye(n, dtype=bool)]
        if resolution is None:
            resolution = float(off.min()) if off.size else 1.0
        if scale_cap is None:
            scale_cap = float(off.max()) if off.size else 1.0
        space = cls(w, dist, edge_tuple, float(resolution), float(scale_cap),
                    None if labels is None else tuple(labels))
        if validate:
            space.validate()
        return space

    def validate(self, sample=None, seed=0):
        """Check the metric-space invariants; raise :class:`SpaceError` with a witness."""
        w, d = self.weights, self.dist
        n = self.n
        if w.shape != (n,) or d.shape != (n, n):
            raise SpaceError("weights and distance matrix have inconsistent shapes")
        bad = np.flatnonzero(~(w > 0) | ~np.isfinite(w))
        if bad.size:
            raise SpaceError(f"vertex {int(bad[0])} has non-positive weight {w[bad[0]]}")
        if not np.all(np.isfinite(d)):
            i, j = np.argwhere(~np.isfinite(d))[0]
            raise SpaceError(f"vertices {int(i)} and {int(j)} are disconnected")
        asym = np.abs(d - d.T) > TOL
        if asym.any():
            i, j = np.argwhere(asym)[0]
            raise SpaceError(f"distance not symmetric at ({int(i)}, {int(j)})")
        if np.any(np.abs(np.diag(d)) > TOL):
            i = int(np.flatnonzero(np.abs(np.diag(d)) > TOL)[0])
            raise SpaceError(f"nonzero self-distance at vertex {i}")
        off = d + np.eye(n)
        if np.any(off <= 0):
            i, j = np.argwhere(off <= 0)[0]
            raise SpaceError(f"distinct vertices {int(i)} and {int(j)} at distance 0")
        pivots = range(n)
        if sample is not None and sample < n:
            pivots = np.random.default_rng(seed).choice(n, size=sample, replace=False)
        for k in pivots:
            viol = d > d[:, [k]] + d[[k], :] + TOL * (1 + d)
            if viol.any():
                i, j = np.argwhere(viol)[0]
                raise SpaceError(
                    f"triangle inequality fails for triple ({int(i)}, {int(k)}, {int(j)}): "
                    f"d({i},{j})={d[i, j]} > d({i},{k})+d({k},{j})={d[i, k] + d[k, j]}")
        return self

    # basic accessors --------------------------------------------------

    @property
    def n(self) -> int:
        return int(self.weights.shape[0])

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    @cached_property
    def adjacency(self) -> list[dict[int, float]]:
        adj: list[dict[int, float]] = [dict() for _ in range(self.n)]
        for u, v, length in self.edges:
            adj[u][v] = length
            adj[v][u] = length
        return adj

    @cached_property
    def sorted_rows(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-vertex distance order: ``(order, sorted distances)``."""
        order = np.argsort(self.dist, axis=1, kind="stable")
        return order, np.take_along_axis(self.dist, order, axis=1)

    @cached_property
    def distinct_distances(self) -> np.ndarray:
        vals = np.unique(self.dist[np.triu_indices(self.n, 1)])
        return _dedupe(vals)

    def label(self, v: int):
        return v if self.labels is None else self.labels[v]

    def mass(self, vertices: Iterable[int]) -> float:
        idx = np.fromiter(vertices, dtype=int)
        return float(self.weights[idx].sum()) if idx.size else 0.0

    def edge_length(self, u: int, v: int) -> float:
        try:
            return self.adjacency[u][v]
        except KeyError:
            raise SpaceError(f"({u}, {v}) is not an edge") from None

    def with_weights(self, weights) -> "FiniteMetricMeasureSpace":
        return FiniteMetricMeasureSpace(np.asarray(weights, dtype=float), self.dist,
                                        self.edges, self.resolution, self.scale_cap,
                                        self.labels)

    def with_scale_cap(self, scale_cap: float) -> "FiniteMetricMeasureSpace":
        return FiniteMetricMeasureSpace(self.weights, self.dist, self.edges,
                                        self.resolution, float(scale_cap), self.labels)


def _dedupe(vals: np.ndarray) -> np.ndarray:
    """Collapse sorted values that agree within the comparison tolerance."""
    if vals.size == 0:
        return vals
    keep = np.concatenate([[True], np.diff(vals) > TOL])
    return vals[keep]


@dataclass(frozen=True)
class Ball:
    center: int
    radius: float
    members: tuple
    mass: float


def ball_mask(space: FiniteMetricMeasureSpace, center: int, r: float) -> np.ndarray:
    return space.dist[center] < r - TOL


def closed_ball_mask(space: FiniteMetricMeasureSpace, center: int, r: float) -> np.ndarray:
    return space.dist[center] <= r + TOL


def ball(space: FiniteMetricMeasureSpace, center: int, r: float) -> Ball:
    """Open ball ``B(center, r)``."""
    if not r > 0:
        raise ValueError(f"ball radius must be positive, got {r}")
    mask = ball_mask(space, center, r)
    members = tuple(int(i) for i in np.flatnonzero(mask))
    return Ball(int(center), float(r), members, float(space.weights[mask].sum()))


def ball_mass(space: FiniteMetricMeasureSpace, center: int, r: float) -> float:
    return float(space.weights[ball_mask(space, center, r)].sum())


def _cumulative(space, x):
    """Sorted distances from ``x`` and the matching cumulative masses."""
    order, dsorted = space.sorted_rows
    cum = np.concatenate([[0.0], np.cumsum(space.weights[order[x]])])
    return dsorted[x], cum


def _open_mass(dsorted, cum, radii):
    idx = np.searchsorted(dsorted, np.asarray(radii) - TOL, side="left")
    return cum[idx]


def doubling_profile(space, radii=(), along=None, scale_cap=None):
    """Worst doubling ratio with its witness ``(D, x, r)``."""
    cap = space.scale_cap if scale_cap is None else float(scale_cap)
    along = range(space.n) if along is None else sorted(set(int(v) for v in along))
    if len(along) == 0:
        raise ValueError("doubling constant along an empty set")
    user = np.asarray([r for r in radii], dtype=float)
    if np.any(user <= 0) or np.any(user > cap + TOL):
        raise ValueError(f"radii must lie in (0, {cap}]")
    best = (1.0, int(along[0]), cap)
    for x in along:
        dsorted, cum = _cumulative(space, x)
        pos = dsorted[dsorted > TOL]
        cand = np.concatenate([pos, pos / 2, user, [cap]])
        cand = cand[(cand > TOL) & (cand <= cap + TOL)]
        if cand.size == 0:
            continue
        ratio = _open_mass(dsorted, cum, 2 * cand) / _open_mass(dsorted, cum, cand)
        k = int(np.argmax(ratio))
        if ratio[k] > best[0] + TOL:
            best = (float(ratio[k]), int(x), float(cand[k]))
    return best


def doubling_constant(space, radii=(), along=None, scale_cap=None) -> float:
    """``sup μ(B(x,2r))/μ(B(x,r))`` over ``x`` in ``along`` and radii up to the cap."""
    return doubling_profile(space, radii, along, scale_cap)[0]


def doubling_ratio(space, x: int, r: float) -> float:
    return ball_mass(space, x, 2 * r) / ball_mass(space, x, r)


def maximal_function(space, f, s: float) -> np.ndarray:
    """Uncentred maximal function of ``|f|`` over balls of radius below ``s``."""
    if not s > 0:
        raise ValueError("maximal function scale must be positive")
    g = np.abs(np.asarray(f, dtype=float))
    order, dsorted = space.sorted_rows
    out = np.zeros(space.n)
    for y in range(space.n):
        idx = order[y]
        dy = dsorted[y]
        w = space.weights[idx]
        avg = np.cumsum(w * g[idx]) / np.cumsum(w)
        # a prefix ending at position i is a ball iff the next distance jumps
        last_of_group = np.concatenate([np.diff(dy) > TOL, [True]])
        admissible = last_of_group & (dy < s - TOL)
        vals = np.where(admissible, avg, -np.inf)
        suffix = np.maximum.accumulate(vals[::-1])[::-1]
        np.maximum.at(out, idx, suffix)
    return out


def mean_deviation(space, f, b: Ball, a="mean") -> float:
    """Ball average of ``|f - a|``; ``a="mean"`` uses the ball average of ``f``."""
    if not b.members:
        raise ValueError("empty ball")
    idx = np.asarray(b.members)
    w = space.weights[idx]
    vals = np.asarray(f, dtype=float)[idx]
    if isinstance(a, str):
        if a != "mean":
            raise ValueError(f"unknown centring {a!r}")
        a = float(np.dot(w, vals) / w.sum())
    return float(np.dot(w, np.abs(vals - a)) / w.sum())


def uniform_perfectness(space, S, r0: float):
    """Smallest ``L >= 1`` making every populated annulus reach inward, or ``"fails"``.

    Radii range over ``(resolution, r0)``.  For a centre ``x`` with distinct
    distances ``a_1 < a_2 < ...`` the requirement at radius ``r`` is
    ``L >= r / max{a_i < r}``, whose supremum is a ratio of consecutive
    distances.
    """
    S = sorted(set(int(v) for v in S))
    if not S:
        raise ValueError("S must be nonempty")
    h = space.resolution
    worst = 1.0
    for x in S:
        a = _dedupe(np.sort(space.dist[x][space.dist[x] > TOL]))
        inside = a[a < r0 - TOL]
        if inside.size == 0:
            continue
        if inside[0] > h + TOL:
            return "fails"
        for lo, hi in zip(inside[:-1], inside[1:]):
            if hi > h + TOL:
                worst = max(worst, hi / lo)
    return float(worst)


def density_points(space, A, eps: float, r0: float) -> set:
    """Points of ``A`` where every ball of radius below ``r0`` is ``(1-eps)``-full of ``A``."""
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    in_a = np.zeros(space.n, dtype=bool)
    in_a[list(A)] = True
    order, dsorted = space.sorted_rows
    keep = set()
    for x in sorted(set(int(v) for v in A)):
        idx, dx = order[x], dsorted[x]
        w = space.weights[idx]
        frac = np.cumsum(w * in_a[idx]) / np.cumsum(w)
        last_of_group = np.concatenate([np.diff(dx) > TOL, [True]])
        check = last_of_group & (dx < r0 - TOL)
        if np.all(frac[check] >= 1 - eps - TOL):
            keep.add(x)
    return keep


def lip_field(space, f) -> np.ndarray:
    """Neighbour difference quotient ``max_u |f(v) - f(u)| / len(v, u)``."""
    f = np.asarray(f, dtype=float)
    out = np.zeros(space.n)
    for u, v, length in space.edges:
        q = abs(f[u] - f[v]) / length
        if q > out[u]:
            out[u] = q
        if q > out[v]:
            out[v] = q
    return out


def lipschitz_constant(space, f) -> float:
    """Global Lipschitz constant of ``f`` with respect to the metric."""
    f = np.asarray(f, dtype=float)
    diff = np.abs(f[:, None] - f[None, :])
    d = space.dist + np.eye(space.n)
    return float((diff / d).max()) if space.n > 1 else 0.0


def critical_radii(space, x: int, cap: float) -> np.ndarray:
    """Distances from ``x`` (closed-ball thresholds) strictly below ``cap``."""
    dx = _dedupe(np.sort(space.dist[x]))
    return dx[dx < cap - TOL]


__all__ = [
    "TOL", "SpaceError", "FiniteMetricMeasureSpace", "Ball", "ball", "ball_mass",
    "ball_mask", "closed_ball_mask", "doubling_constant", "doubling_profile",
    "doubling_ratio", "maximal_function", "mean_deviation", "uniform_perfectness",
    "density_points", "lip_field", "lipschitz_constant", "critical_radii",
]
