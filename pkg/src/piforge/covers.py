"""Nested separated nets, scale-graded gap points and greedy Vitali selection."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .space import TOL


@dataclass
class NetHierarchy:
    levels: list  # levels[j] is the sorted list of net points at separation 2^-j
    scale: dict = field(default_factory=dict)  # point -> 2^-i for first level i

    def all_points(self) -> list:
        return sorted(self.scale)


@dataclass
class GapPointSet:
    by_scale: dict  # k -> sorted list of gap points at scale 2^-k
    scale: dict  # point -> 2^-k
    candidates: list
    covering_margin: float = 0.0

    def all_points(self) -> list:
        return sorted(self.scale)


def build_nets(space, K, j_max: int, scale: float = 1.0) -> NetHierarchy:
    """Greedy maximal ``2^-j``-separated nets of ``K`` with ``N_j`` nested in ``N_{j+1}``.

    ``scale`` multiplies every distance first, which lets the thickening
    construction work in its rescaled units without copying the space.
    """
    K = sorted(set(int(v) for v in K))
    if not K:
        raise ValueError("K must be nonempty")
    d = space.dist
    levels, sc, current = [], {}, []
    for j in range(j_max + 1):
        sep = 2.0 ** -j
        for v in K:
            if v in sc:
                continue
            if all(scale * d[v, m] >= sep - TOL for m in current):
                current.append(v)
                sc[v] = sep
        levels.append(sorted(current))
    return NetHierarchy(levels, sc)


def whitney_scale(dist_to_k: float) -> int:
    """The integer ``k >= 0`` with ``2^(-k-1) < t <= 2^-k`` for ``0 < t < 1``."""
    m, e = math.frexp(dist_to_k)  # t = m * 2^e, 0.5 <= m < 1
    return 1 - e if m == 0.5 else -e


def vitali_select(balls, metric=None, members=None):
    """Greedy disjoint subfamily: descending radius, then ascending id.

    ``balls`` is a list of ``(center, radius)``.  Two balls are disjoint when
    ``members`` (a callable returning the member set of a ball) gives disjoint
    sets; without it, centres on the real line are compared by
    ``|c1 - c2| < r1 + r2``, or by ``metric(c1, c2)`` when provided.
    """
    order = sorted(range(len(balls)), key=lambda i: (-balls[i][1], balls[i][0]))
    chosen = []
    chosen_sets = []
    for i in order:
        c, r = balls[i]
        if members is not None:
            s = members(c, r)
            if any(s & t for t in chosen_sets):
                continue
            chosen_sets.append(s)
        else:
            dist = metric if metric is not None else (lambda a, b: abs(a - b))
            if any(dist(c, balls[j][0]) < r + balls[j][1] - TOL for j in chosen):
                continue
        chosen.append(i)
    return [balls[i] for i in sorted(chosen, key=lambda i: (-balls[i][1], balls[i][0]))]


def build_gap_points(space, K, A, scale: float = 1.0) -> GapPointSet:
    """Scale-graded gap points of ``(N_1(K) \\ K) ∩ A`` with the Whitney-type properties."""
    K = sorted(set(int(v) for v in K))
    A = set(int(v) for v in A)
    if not set(K) <= A:
        raise ValueError("K must be a subset of A")
    d = scale * space.dist
    dK = d[:, K].min(axis=1)
    cands = [v for v in sorted(A - set(K)) if dK[v] < 1 - TOL]
    kscale = {v: whitney_scale(float(dK[v])) for v in cands}

    def members(c, r):
        return frozenset(np.flatnonzero(d[c] < r - TOL).tolist())

    balls = [(v, 2.0 ** (-kscale[v] - 15)) for v in cands]
    picked = vitali_select(balls, members=members)
    by_scale: dict = {}
    sc = {}
    for g, _ in picked:
        by_scale.setdefault(kscale[g], []).append(g)
        sc[g] = 2.0 ** -kscale[g]
    for k in by_scale:
        by_scale[k].sort()

    # covering at radius 2^(-k-10) around each selected point
    worst = np.inf
    for v in cands:
        slack = max((2.0 ** (-kscale[g] - 10) - d[v, g] for g in sc), default=-np.inf)
        if slack <= 0:
            raise AssertionError(f"gap-point covering fails at vertex {v}")
        worst = min(worst, slack)
    return GapPointSet(dict(sorted(by_scale.items())), sc, cands,
                       float(worst) if cands else 0.0)


__all__ = ["NetHierarchy", "GapPointSet", "build_nets", "build_gap_points",
           "vitali_select", "whitney_scale"]
