"""Curve fragments: chains of solid edge traversals and metric gap jumps.

A fragment's length counts gaps at their metric distance, and ``undef`` is
the total gap length.  Solid legs must follow graph edges.  The main search
routine, :func:`pareto_fragments`, enumerates the nondominated
``(length, undef)`` trade-offs between two vertices while avoiding an
obstacle set in the interior.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .space import TOL, lip_field, lipschitz_constant

SOLID = "solid"
GAP = "gap"


class FragmentError(ValueError):
    pass


class Leg(NamedTuple):
    kind: str
    u: int
    v: int


@dataclass(frozen=True)
class CurveFragment:
    start: int
    end: int
    legs: tuple = ()

    def __post_init__(self):
        at = self.start
        for leg in self.legs:
            if leg.kind not in (SOLID, GAP):
                raise FragmentError(f"unknown leg kind {leg.kind!r}")
            if leg.u != at:
                raise FragmentError(f"broken chaining: leg {leg} starts away from {at}")
            at = leg.v
        if at != self.end:
            raise FragmentError(f"fragment ends at {at}, expected {self.end}")

    @classmethod
    def from_legs(cls, legs: Sequence) -> "CurveFragment":
        legs = tuple(Leg(*leg) for leg in legs)
        if not legs:
            raise FragmentError("use CurveFragment(x, x) for the empty fragment")
        return cls(legs[0].u, legs[-1].v, legs)

    @classmethod
    def gap(cls, x: int, y: int) -> "CurveFragment":
        return cls(x, y, (Leg(GAP, x, y),) if x != y else ())

    @classmethod
    def path(cls, vertices: Sequence[int]) -> "CurveFragment":
        legs = tuple(Leg(SOLID, a, b) for a, b in zip(vertices[:-1], vertices[1:]))
        return cls(vertices[0], vertices[-1], legs)

    def vertices(self) -> list:
        return [self.start] + [leg.v for leg in self.legs]

    def gaps(self) -> list:
        return [leg for leg in self.legs if leg.kind == GAP]

    def to_json(self) -> dict:
        return {"legs": [{"kind": leg.kind, "u": int(leg.u), "v": int(leg.v)}
                         for leg in self.legs],
                "start": int(self.start), "end": int(self.end)}

    @classmethod
    def from_json(cls, doc: dict) -> "CurveFragment":
        legs = tuple(Leg(str(l["kind"]), int(l["u"]), int(l["v"])) for l in doc["legs"])
        if legs:
            return cls(legs[0].u, legs[-1].v, legs)
        return cls(int(doc["start"]), int(doc.get("end", doc["start"])))


def leg_length(space, leg: Leg) -> float:
    if leg.u == leg.v:
        return 0.0
    if leg.kind == SOLID:
        return space.edge_length(leg.u, leg.v)
    return float(space.dist[leg.u, leg.v])


def solid_length(space, frag: CurveFragment) -> float:
    return sum(leg_length(space, l) for l in frag.legs if l.kind == SOLID)


def undef(space, frag: CurveFragment) -> float:
    return sum(leg_length(space, l) for l in frag.legs if l.kind == GAP)


def length(space, frag: CurveFragment) -> float:
    return solid_length(space, frag) + undef(space, frag)


def check_solid(space, frag: CurveFragment) -> None:
    for leg in frag.legs:
        if leg.kind == SOLID and leg.u != leg.v and leg.v not in space.adjacency[leg.u]:
            raise FragmentError(f"solid leg ({leg.u}, {leg.v}) is not a graph edge")


def normalize(space, frag: CurveFragment) -> CurveFragment:
    """Drop zero-length legs and merge consecutive gaps."""
    out: list = []
    for leg in frag.legs:
        if leg.u == leg.v:
            continue
        if leg.kind == GAP and out and out[-1].kind == GAP:
            prev = out.pop()
            if prev.u != leg.v:
                out.append(Leg(GAP, prev.u, leg.v))
            continue
        out.append(leg)
    return CurveFragment(frag.start, frag.end, tuple(out))


def dilate_gaps(space, frag: CurveFragment, factors, C: float | None = None):
    """Stretch each gap ``i`` by ``factors[i]`` and return the new parameter length.

    The legs are unchanged; only the parameter interval grows.  Factors must
    lie in ``[1, C]``.  The returned length obeys
    ``len_solid + sum C_i gap_i <= len + (C - 1) * undef``.
    """
    gaps = [leg_length(space, l) for l in frag.legs if l.kind == GAP]
    factors = [float(c) for c in factors]
    if len(factors) != len(gaps):
        raise FragmentError(f"expected {len(gaps)} factors, got {len(factors)}")
    if C is None:
        C = max(factors, default=1.0)
    for c in factors:
        if not (1.0 - TOL <= c <= C + TOL):
            raise FragmentError(f"dilation factor {c} outside [1, {C}]")
    new_len = solid_length(space, frag) + sum(c * g for c, g in zip(factors, gaps))
    bound = length(space, frag) + (C - 1.0) * sum(gaps)
    if new_len > bound + TOL:
        raise AssertionError(f"dilated length {new_len} exceeds bound {bound}")
    return frag, new_len


def concatenate(waypoints: Sequence[int], fragments: Sequence[CurveFragment]) -> CurveFragment:
    if len(fragments) != len(waypoints) - 1:
        raise FragmentError("need exactly one fragment per consecutive waypoint pair")
    legs: list = []
    for i, frag in enumerate(fragments):
        if frag.start != waypoints[i] or frag.end != waypoints[i + 1]:
            raise FragmentError(
                f"fragment {i} joins {frag.start}->{frag.end}, "
                f"expected {waypoints[i]}->{waypoints[i + 1]}")
        legs.extend(frag.legs)
    return CurveFragment(waypoints[0], waypoints[-1], tuple(legs))


def concatenation_params(L, C, delta, eps, n, D):
    """Connectivity parameters of a chained pair from those of its links."""
    expo = math.log2(delta) - math.log2(L) - math.log2(n) - math.log2(C) - 6
    return L * C, 2 * L * delta, eps * D ** expo


# --- Pareto search ------------------------------------------------------


@dataclass
class ParetoFront:
    entries: list  # (len, undef, fragment), increasing length
    heuristic: bool = False

    def min_undef(self, max_len: float = math.inf):
        best = None
        for l, u, frag in self.entries:
            if l <= max_len + TOL and (best is None or u < best[1] - TOL):
                best = (l, u, frag)
        return best

    def pairs(self) -> list:
        return [(l, u) for l, u, _ in self.entries]


def pareto_fragments(space, x: int, y: int, E=(), len_budget: float = math.inf,
                     undef_resolution: float | None = None) -> ParetoFront:
    """Nondominated ``(length, undef)`` fragments from ``x`` to ``y``.

    Interior vertices avoid ``E``; the endpoints are exempt.  With
    ``undef_resolution`` set, labels within that undef slack of a settled label
    are pruned too, which bounds the label count but makes the front heuristic.
    """
    x, y = int(x), int(y)
    if x == y:
        return ParetoFront([(0.0, 0.0, CurveFragment(x, x))])
    d = space.dist
    if len_budget < d[x, y] - TOL:
        return ParetoFront([], undef_resolution is not None)
    blocked = np.zeros(space.n, dtype=bool)
    blocked[list(E)] = True
    blocked[y] = False
    slack = 0.0 if undef_resolution is None else float(undef_resolution)
    dy = d[:, y]
    adj = space.adjacency
    all_vertices = np.arange(space.n)

    # labels: (len, undef, vertex, parent index, leg kind)
    store: list = [(0.0, 0.0, x, -1, None)]
    heap = [(0.0, 0.0, 0)]
    settled: list = [[] for _ in range(space.n)]
    front: list = []
    front_lu: list = []

    def dominated(lst, l, u):
        for l2, u2 in lst:
            if l2 <= l + TOL and u2 <= u + slack + TOL:
                return True
        return False

    while heap:
        l, u, idx = heapq.heappop(heap)
        v = store[idx][2]
        if dominated(settled[v], l, u) or dominated(front_lu, l, u):
            continue
        settled[v].append((l, u))
        if v == y:
            front.append((l, u, idx))
            front_lu.append((l, u))
            continue
        prev_kind = store[idx][4]
        for w, elen in adj[v].items():
            if w == x or (blocked[w] and w != y):
                continue
            nl = l + elen
            if nl + dy[w] > len_budget + TOL:
                continue
            store.append((nl, u, w, idx, SOLID))
            heapq.heappush(heap, (nl, u, len(store) - 1))
        if prev_kind == GAP:
            continue
        ok = (all_vertices != v) & (all_vertices != x) & (~blocked)
        ok &= l + d[v] + dy <= len_budget + TOL
        for w in np.flatnonzero(ok):
            g = float(d[v, w])
            store.append((l + g, u + g, int(w), idx, GAP))
            heapq.heappush(heap, (l + g, u + g, len(store) - 1))

    # labels equal in length up to rounding can arrive in either order
    front = [f for f in front if not any(
        g is not f and g[0] <= f[0] + TOL and g[1] < f[1] - TOL - slack for g in front)]
    entries = []
    for l, u, idx in front:
        legs = []
        while store[idx][3] >= 0:
            _, _, w, parent, kind = store[idx]
            legs.append(Leg(kind, store[parent][2], w))
            idx = parent
        entries.append((l, u, CurveFragment(x, y, tuple(reversed(legs)))))
    return ParetoFront(entries, undef_resolution is not None)


def fragment_integral(space, frag: CurveFragment, g) -> float:
    """Trapezoid rule on solid legs; gaps contribute nothing."""
    g = np.asarray(g, dtype=float)
    total = 0.0
    for leg in frag.legs:
        if leg.kind == SOLID and leg.u != leg.v:
            total += space.edge_length(leg.u, leg.v) * (g[leg.u] + g[leg.v]) / 2
    return total


def oscillation_check(space, frag: CurveFragment, f, LIP: float):
    """Compare ``|f(start) - f(end)|`` with ``LIP * undef + ∫ lip f`` along the fragment."""
    f = np.asarray(f, dtype=float)
    measured = lipschitz_constant(space, f)
    if LIP < measured - TOL:
        raise ValueError(f"LIP={LIP} is below the measured Lipschitz constant {measured}")
    lhs = abs(f[frag.start] - f[frag.end])
    rhs = LIP * undef(space, frag) + fragment_integral(space, frag, lip_field(space, f))
    return lhs, rhs, bool(lhs <= rhs + TOL)


__all__ = [
    "SOLID", "GAP", "Leg", "CurveFragment", "FragmentError", "ParetoFront",
    "leg_length", "solid_length", "undef", "length", "check_solid", "normalize",
    "dilate_gaps", "concatenate", "concatenation_params", "pareto_fragments",
    "fragment_integral", "oscillation_check",
]
