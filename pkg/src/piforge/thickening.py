"""Thickening a compact set by gluing a scale-graded tree onto it.

Given an ambient space ``X``, a set ``A`` and a compact ``K`` inside ``A``,
the construction adds one tree vertex ``(location, scale)`` per gap point
and per net point at each admissible scale, joins vertices of comparable
scale that are close relative to that scale, and glues the tree to ``K``
through short vertical links.  Internally distances are multiplied by
``2^20 / r0``; every length reported back is in the ambient units.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .covers import build_gap_points, build_nets
from .space import TOL, FiniteMetricMeasureSpace, ball_mass, doubling_constant

EDGE_FACTOR = 2 ** 4
LINK_FACTOR = 3 * 2 ** 4


@dataclass(eq=False)
class ThickenedComplex:
    ambient: FiniteMetricMeasureSpace
    K: list
    A: list
    r0: float
    factor: float
    h: float  # lowest retained scale, ambient units
    nets: object
    gaps: object
    lscale: dict  # net point -> l(n), ambient units
    vertices: list  # (location, scale, kind) with kind in {"net", "gap"}
    edges: list  # (i, j, length, mass) over vertex indices, i < j
    links: list  # (K position, vertex index, cost)
    D: float
    hypothesis: str = ("A is assumed (C, 2^-60, eps, r0)-connected along K; "
                       "the construction does not check it")

    @property
    def n_nodes(self) -> int:
        return len(self.K) + len(self.vertices)

    def node_of_vertex(self, i: int) -> int:
        return len(self.K) + i

    @cached_property
    def incident(self) -> list:
        inc = [[] for _ in self.vertices]
        for k, (i, j, _, _) in enumerate(self.edges):
            inc[i].append(k)
            inc[j].append(k)
        return inc

    @cached_property
    def tree_distance(self) -> np.ndarray:
        """Path metric of the tree alone (``inf`` across components)."""
        m = len(self.vertices)
        if not self.edges:
            d = np.full((m, m), np.inf)
            np.fill_diagonal(d, 0.0)
            return d
        i, j, l, _ = zip(*self.edges)
        g = csr_matrix((l, (i, j)), shape=(m, m))
        return shortest_path(g, method="D", directed=False)

    @cached_property
    def glued_distance(self) -> np.ndarray:
        return glued_metric(self)

    def to_json(self):
        return {
            "K": [int(k) for k in self.K], "r0": self.r0, "h": self.h, "D": self.D,
            "vertices": [{"location": int(x), "scale": s, "kind": kd}
                         for x, s, kd in self.vertices],
            "edges": [{"endpoints": [int(i), int(j)], "length": l, "mass": m}
                      for i, j, l, m in self.edges],
            "links": [{"K": int(self.K[k]), "vertex": int(v), "cost": c}
                      for k, v, c in self.links],
            "hypothesis": self.hypothesis,
        }


def thicken(X, A, K, r0, h=None) -> ThickenedComplex:
    """Assemble the thickened complex of ``K`` inside ``X`` along ``A``.

    ``h`` (ambient units) is the lowest scale kept on the vertical rays.  It
    defaults to half the smallest gap-point scale: a gap vertex at scale ``r``
    then reaches ``K`` through a net vertex at scale ``r/2`` for ``24r + 24r``,
    as it would on the untruncated rays.
    """
    K = sorted(set(int(v) for v in K))
    A = sorted(set(int(v) for v in A))
    if not K:
        raise ValueError("K must be nonempty")
    if not set(K) <= set(A):
        raise ValueError("K must be a subset of A")
    f = 2.0 ** 20 / r0
    d = f * X.dist
    gaps = build_gap_points(X, K, A, scale=f)
    if h is None:
        hs = min(gaps.scale.values(), default=1.0) / 2
    else:
        hs = h * f
    j_max = max(0, math.ceil(math.log2(1.0 / hs)) + 1)
    nets = build_nets(X, K, j_max, scale=f)

    lscale = {}
    for n, sc_n in nets.scale.items():
        best = 0.0
        for g, sc_g in gaps.scale.items():
            if sc_g <= sc_n and d[g, n] <= EDGE_FACTOR * sc_g + TOL:
                best = max(best, sc_g)
        lscale[n] = best

    verts = [(g, s, "gap") for g, s in sorted(gaps.scale.items())]
    for n in sorted(lscale):
        s = lscale[n]
        while s > 0 and s >= hs - TOL:
            verts.append((n, s, "net"))
            s /= 2
    verts.sort(key=lambda t: (t[0], -t[1], t[2]))

    edges = []
    for i in range(len(verts)):
        x, r, _ = verts[i]
        for j in range(i + 1, len(verts)):
            y, s, _ = verts[j]
            if (x, r) == (y, s):
                continue
            if d[x, y] <= EDGE_FACTOR * (r + s) + TOL and 0.5 - TOL <= r / s <= 2 + TOL:
                mass = ball_mass(X, x, r / f) + ball_mass(X, y, s / f)
                edges.append((i, j, EDGE_FACTOR * (r + s) / f, mass))
    kpos = {k: a for a, k in enumerate(K)}
    links = [(kpos[x], i, LINK_FACTOR * s / f) for i, (x, s, kd) in enumerate(verts)
             if kd == "net"]
    D = doubling_constant(X, along=A)
    verts = [(x, s / f, kd) for x, s, kd in verts]
    return ThickenedComplex(X, K, A, r0, f, hs / f, nets, gaps,
                            {n: l / f for n, l in lscale.items()}, verts, edges, links, D)


def glued_metric(cx: ThickenedComplex) -> np.ndarray:
    """Shortest δ-move distances on ``K ∪ V`` (K first, then tree vertices)."""
    nk, m = len(cx.K), len(cx.vertices)
    N = nk + m
    rows, cols, vals = [], [], []
    dK = cx.ambient.dist[np.ix_(cx.K, cx.K)]
    for a in range(nk):
        for b in range(a + 1, nk):
            rows.append(a), cols.append(b), vals.append(dK[a, b])
    for i, j, l, _ in cx.edges:
        rows.append(nk + i), cols.append(nk + j), vals.append(l)
    for k, v, c in cx.links:
        rows.append(k), cols.append(nk + v), vals.append(c)
    g = csr_matrix((vals, (rows, cols)), shape=(N, N))
    return shortest_path(g, method="D", directed=False)


@dataclass
class GluedSpace:
    space: FiniteMetricMeasureSpace
    K_nodes: list  # node ids of the K points
    edge_of_node: np.ndarray  # -1 for K points, else edge index
    segments: list  # segment count per edge
    h: float
    coarse: bool


def glued_measure(cx: ThickenedComplex, h=None, strict=True, validate_sample=16) -> GluedSpace:
    """Discretize the glued space: each edge becomes ``ceil(|e| / h)`` equal segments.

    A node sits at each segment midpoint and carries ``mass(e) / segments``;
    K points keep their ambient mass.  Tree vertices carry no mass and are
    eliminated: the curves through a vertex become direct edges between the
    adjacent nodes, which leaves the path metric unchanged.  With
    ``strict`` the spacing must be at most half the shortest edge.
    """
    lens = [l for _, _, l, _ in cx.edges]
    if h is None:
        h = min(lens) / 2 if lens else 1.0
    if strict and lens and h > min(lens) / 2 + TOL:
        raise ValueError(f"h={h} exceeds half the shortest edge {min(lens) / 2}")
    nk = len(cx.K)
    Dv = cx.glued_distance
    weights = list(cx.ambient.weights[cx.K])
    end_a, end_b, off, elen, eid = [], [], [], [], []
    segs = []
    for k, (i, j, l, mass) in enumerate(cx.edges):
        s = max(1, math.ceil(l / h - 1e-12))
        segs.append(s)
        for t in range(s):
            end_a.append(nk + i), end_b.append(nk + j)
            off.append((t + 0.5) * l / s), elen.append(l), eid.append(k)
            weights.append(mass / s)
    M = len(off)
    N = nk + M
    end_a, end_b = np.array(end_a, int), np.array(end_b, int)
    off, elen, eid = np.array(off), np.array(elen), np.array(eid, int)

    dist = np.empty((N, N))
    Kidx = np.arange(nk)
    dist[:nk, :nk] = Dv[:nk, :nk]
    if M:
        toK = np.minimum(off[:, None] + Dv[np.ix_(end_a, Kidx)],
                         (elen - off)[:, None] + Dv[np.ix_(end_b, Kidx)])
        dist[nk:, :nk] = toK
        dist[:nk, nk:] = toK.T
        chunk = max(1, 2_000_000 // max(M, 1))
        for s0 in range(0, M, chunk):
            sl = slice(s0, min(M, s0 + chunk))
            best = None
            for ea, oa in ((end_a[sl], off[sl]), (end_b[sl], elen[sl] - off[sl])):
                for eb, ob in ((end_a, off), (end_b, elen - off)):
                    cand = oa[:, None] + Dv[np.ix_(ea, eb)] + ob[None, :]
                    best = cand if best is None else np.minimum(best, cand)
            same = eid[sl][:, None] == eid[None, :]
            best = np.where(same, np.minimum(best, np.abs(off[sl][:, None] - off[None, :])), best)
            dist[nk + s0:nk + sl.stop, nk:] = best
        np.fill_diagonal(dist, 0.0)
        dist = np.minimum(dist, dist.T)

    # curve graph: K-K ambient edges, chains along each edge, vertex cliques
    gedges = []
    Kset = {k: a for a, k in enumerate(cx.K)}
    for u, v, l in cx.ambient.edges:
        if u in Kset and v in Kset:
            gedges.append((Kset[u], Kset[v], l))
    around = [[] for _ in cx.vertices]
    pos = nk
    for k, (i, j, l, _) in enumerate(cx.edges):
        s = segs[k]
        step = l / s
        for t in range(s - 1):
            gedges.append((pos + t, pos + t + 1, step))
        around[i].append((pos, step / 2))
        around[j].append((pos + s - 1, step / 2))
        pos += s
    for kp, v, c in cx.links:
        around[v].append((kp, c))
    for nbrs in around:
        for a in range(len(nbrs)):
            for b in range(a + 1, len(nbrs)):
                (p, lp), (q, lq) = nbrs[a], nbrs[b]
                if p != q:
                    gedges.append((p, q, lp + lq))
    labels = [("K", int(k)) for k in cx.K] + [("edge", int(e)) for e in eid]
    res = min(float(np.min(off)) * 2 if M else 1.0, cx.ambient.resolution)
    finite = dist[np.isfinite(dist)]
    space = FiniteMetricMeasureSpace.from_matrix(
        dist, np.array(weights), gedges, resolution=res,
        scale_cap=float(finite.max()) if finite.size else 1.0, labels=labels, validate=False)
    space.validate(sample=validate_sample)
    coarse = bool(lens) and h > min(lens) / 2 + TOL
    return GluedSpace(space, list(range(nk)), np.concatenate([np.full(nk, -1), eid]),
                      segs, float(h), coarse)


# --- verification ----------------------------------------------------------


@dataclass
class EstimateEntry:
    name: str
    status: str  # "pass", "fail", "holds by construction", "informational"
    worst_margin: float | None
    witness: object = None
    checked: int = 0

    def to_json(self):
        return dict(self.__dict__)


@dataclass
class EstimateReport:
    entries: list = field(default_factory=list)

    def by_name(self, name) -> EstimateEntry:
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(name)

    @property
    def failures(self) -> list:
        return [e for e in self.entries if e.status == "fail"]

    def to_json(self):
        return {"entries": [e.to_json() for e in self.entries],
                "failures": [e.name for e in self.failures]}


class _Worst:
    def __init__(self):
        self.margin, self.witness, self.count = math.inf, None, 0

    def see(self, margin, witness):
        self.count += 1
        if margin < self.margin:
            self.margin, self.witness = float(margin), witness

    def entry(self, name, informational=False):
        if self.count == 0:
            return EstimateEntry(name, "pass" if not informational else "informational",
                                 None, None, 0)
        ok = self.margin >= -TOL * 1e3
        status = "informational" if informational else ("pass" if ok else "fail")
        return EstimateEntry(name, status, self.margin, self.witness, self.count)


def verify_estimates(cx: ThickenedComplex, check_tree_geodesics=False) -> EstimateReport:
    """Check the metric and measure estimates of the complex with explicit margins."""
    X, K, V = cx.ambient, cx.K, cx.vertices
    nk = len(K)
    Db = cx.glued_distance
    D = cx.D
    d = X.dist
    rep = EstimateReport()

    # 1: isometric embedding of K
    dK = d[np.ix_(K, K)]
    diff = np.abs(Db[:nk, :nk] - dK)
    i, j = np.unravel_index(int(np.argmax(diff)), diff.shape) if nk else (0, 0)
    margin = 0.0 - float(diff.max()) if nk else 0.0
    rep.entries.append(EstimateEntry("estimate1", "pass" if margin == 0.0 else "fail",
                                     margin, (int(K[i]), int(K[j])) if nk else None, nk * nk))

    rep.entries.append(EstimateEntry("estimate2", "holds by construction", None))
    if check_tree_geodesics and cx.edges:
        w = _Worst()
        T = cx.tree_distance
        for a, b, _, _ in cx.edges:
            w.see(T[a, b] - Db[nk + a, nk + b], (a, b))
        rep.entries.append(w.entry("estimate2_tree_geodesic", informational=True))

    # 3: a net point within 2^6 r of every vertex
    w = _Worst()
    for v, (x, r, _) in enumerate(V):
        w.see(2 ** 6 * r - Db[nk + v, :nk].min(), v)
    rep.entries.append(w.entry("estimate3"))

    # 4: vertex to K sandwich
    w = _Worst()
    for v, (x, r, _) in enumerate(V):
        row = Db[nk + v, :nk]
        dx = d[x, K]
        lo = np.maximum(r, dx) - row
        hi = dx + 2 ** 8 * r - row
        k = int(np.argmin(np.minimum(-lo, hi)))
        w.see(min(float(np.min(-lo)), float(np.min(hi))), (v, int(K[k])))
    rep.entries.append(w.entry("estimate4"))

    # 5: vertex to vertex sandwich
    w, lit = _Worst(), _Worst()
    if V:
        loc = np.array([x for x, _, _ in V])
        sc = np.array([s for _, s, _ in V])
        dd = d[np.ix_(loc, loc)]
        Dvv = Db[nk:, nk:]
        rs = sc[:, None] + sc[None, :]
        off = ~np.eye(len(V), dtype=bool)
        lower = np.where(off, Dvv - np.maximum(dd, rs), np.inf)
        upper = np.where(off, dd + 2 ** 8 * rs - Dvv, np.inf)
        upper_lit = np.where(off, dd + 2 ** 4 * rs - Dvv, np.inf)
        both = np.minimum(lower, upper)
        a, b = np.unravel_index(int(np.argmin(both)), both.shape)
        w.count = int(off.sum())
        w.margin, w.witness = float(both[a, b]), (int(a), int(b))
        a, b = np.unravel_index(int(np.argmin(upper_lit)), upper_lit.shape)
        lit.count = int(off.sum())
        lit.margin, lit.witness = float(upper_lit[a, b]), (int(a), int(b))
    rep.entries.append(w.entry("estimate5"))
    rep.entries.append(lit.entry("estimate5_upper_2^4", informational=True))
    rep.entries.append(EstimateEntry("estimate6", "holds by construction", None))

    # 7: edge length and edge mass against the vertex ball
    wl, wm = _Worst(), _Worst()
    for k, (i, j, l, mass) in enumerate(cx.edges):
        for v in (i, j):
            x, r, _ = V[v]
            mb = ball_mass(X, x, r)
            wl.see(2 ** 7 * r - l, (k, v))
            wm.see(min(mass - mb, 2 * D ** 7 * mb - mass) / mb, (k, v))
    rep.entries.append(wl.entry("estimate7_length"))
    rep.entries.append(wm.entry("estimate7_mass"))

    # 8: mass on the descending ray below scale r
    w = _Worst()
    ray = {}
    for v, (x, r, kd) in enumerate(V):
        if kd == "net":
            ray.setdefault(x, []).append((r, v))
    for n, items in ray.items():
        per = {r: sum(cx.edges[k][3] for k in cx.incident[v]) for r, v in items}
        for r, _ in items:
            total = sum(m for s, m in per.items() if s <= r + TOL)
            w.see(2 ** 20 * D ** 37 * ball_mass(X, n, r) - total, (int(n), r))
    rep.entries.append(w.entry("estimate8"))

    # 9: fibers of the net-to-gap map
    w = _Worst()
    fiber = {}
    for n, l in sorted(cx.lscale.items()):
        if l <= 0:
            continue
        cands = [g for g, s in cx.gaps.scale.items()
                 if abs(s / cx.factor - l) <= TOL * max(1, l) and d[g, n] <= 2 ** 4 * l + TOL]
        g = min(cands)
        w.see(2 ** 4 * l - d[g, n], ("distance", int(n), int(g)))
        fiber.setdefault(g, []).append(n)
    for g, ns in fiber.items():
        w.see(D ** 25 - len(ns), ("fiber", int(g), len(ns)))
    rep.entries.append(w.entry("estimate9"))

    # edge count per vertex
    w = _Worst()
    for v in range(len(V)):
        w.see(4 * D ** 25 - len(cx.incident[v]), v)
    rep.entries.append(w.entry("edge_count"))

    # every tree vertex reaches K
    w = _Worst()
    for v in range(len(V)):
        w.see(0.0 if np.isfinite(Db[nk + v, :nk]).any() else -1.0, v)
    rep.entries.append(w.entry("reaches_K"))

    # volume lemma, informational: needs perfectness, so radii above the resolution
    w = _Worst()
    sigma = 1 / D ** 4
    for x in K:
        for r in np.unique(d[x][d[x] > X.resolution + TOL]):
            far = (d[x, cx.A] >= r - TOL) & (d[x, cx.A] < cx.r0)
            if not far.any():
                continue
            w.see((1 - sigma) * ball_mass(X, x, r) - ball_mass(X, x, r / 2), (int(x), float(r)))
    rep.entries.append(w.entry("volume", informational=True))
    return rep


@dataclass
class ThickenedCertificate:
    glued: GluedSpace
    doubling: float
    doubling_bound_log2: float
    doubling_ok: bool
    connectivity: dict
    constants: object
    pi: object
    pi_finite: bool
    flags: list

    def to_json(self):
        return {"doubling": self.doubling, "doubling_bound_log2": self.doubling_bound_log2,
                "doubling_ok": self.doubling_ok, "connectivity": self.connectivity,
                "constants": None if self.constants is None else self.constants.to_json(),
                "pi": None if self.pi is None else self.pi.to_json(),
                "pi_finite": self.pi_finite, "flags": self.flags,
                "nodes": self.glued.space.n, "h": self.glued.h, "coarse": self.glued.coarse}


def certify_thickened(cx: ThickenedComplex, C=2.0, delta=0.5, eps_grid=(0.05, 0.1, 0.2),
                      n_pairs=24, max_nodes=6500, seed=0, n_centers=24, p=None, limit=22):
    """Doubling, sampled connectivity and an empirical Poincaré scan of the glued space.

    The glued measure uses the finest spacing among half the shortest edge,
    the shortest edge and the longest edge whose node count stays within
    ``max_nodes``; anything coarser than the first is flagged.
    """
    from .connectivity import ConnectivityParams, fine_constants, predicted_constants, verify_pair
    from .poincare import pi_scan

    lens = [l for _, _, l, _ in cx.edges]
    flags = []
    h = None
    if lens:
        for cand in (min(lens) / 2, min(lens), max(lens)):
            if len(cx.K) + sum(max(1, math.ceil(l / cand - 1e-12)) for l in lens) <= max_nodes:
                h = cand
                break
        if h is None:
            h = max(lens)
    G = glued_measure(cx, h, strict=False)
    if G.coarse:
        flags.append(f"coarse glued discretization h={h}")
    S = G.space
    Dg = doubling_constant(S)
    bound_log2 = 200 + 500 * math.log2(max(cx.D, 1.0))
    doubling_ok = math.log2(Dg) <= bound_log2

    rng = np.random.default_rng(seed)
    # nearest-neighbour pairs whose adversary ball is small enough for the exact mode
    starts = sorted(set(G.K_nodes) | set(rng.choice(S.n, size=min(n_pairs, S.n),
                                                    replace=False).tolist()))
    pairs, skipped = [], 0
    for a in starts:
        row = S.dist[a].copy()
        row[a] = np.inf
        b = int(np.argmin(row))
        if int(np.count_nonzero(S.dist[a] < C * row[b] - TOL)) > limit:
            skipped += 1
            continue
        pairs.append((min(a, b), max(a, b)))
    pairs = sorted(set(pairs))
    best_eps, results = None, {}
    for eps in sorted(eps_grid):
        params = ConnectivityParams(C, delta, eps)
        statuses = [verify_pair(S, x, y, params, "exact", limit).status for x, y in pairs]
        results[eps] = statuses
        if pairs and all(st == "certified-yes" for st in statuses):
            best_eps = eps
    conn = {"pairs": pairs, "C": C, "delta": delta, "skipped_large_balls": skipped,
            "statuses": {str(k): v for k, v in results.items()}, "eps": best_eps}
    consts, pi, finite = None, None, False
    if best_eps is not None:
        p_use = p if p is not None else 2.0 / fine_constants(Dg, C, delta, best_eps)[1]
        consts = predicted_constants(Dg, C, delta, best_eps, p_use)
        centers = sorted(set(G.K_nodes[:: max(1, len(G.K_nodes) // 8)])
                         | set(rng.choice(S.n, size=min(n_centers, S.n), replace=False).tolist()))
        radii = list(np.geomspace(S.resolution * 2, S.scale_cap, 6))
        family = [S.dist[c] for c in centers[:6]] + [np.minimum(S.dist[c], S.dist[c].mean())
                                                      for c in centers[6:10]]
        pi = pi_scan(S, p_use, 1.0, family=family, radii=radii, centers=centers,
                     predicted=consts.C_PI)
        finite = bool(np.isfinite(pi.C_PI_hat))
    else:
        flags.append("no eps in the grid certified the sampled pairs")
    return ThickenedCertificate(G, Dg, bound_log2, doubling_ok, conn, consts, pi, finite, flags)


__all__ = ["ThickenedComplex", "thicken", "glued_metric", "GluedSpace", "glued_measure",
           "EstimateEntry", "EstimateReport", "verify_estimates", "ThickenedCertificate",
           "certify_thickened", "EDGE_FACTOR", "LINK_FACTOR"]
