"""The obstacle-avoidance game behind (C, δ, ε)-connectivity.

For a pair ``(x, y)`` at distance ``r`` an adversary places an obstacle ``E``
inside ``B(x, C r)`` of relative mass below ``ε``; the pair survives when some
fragment of length at most ``C r`` avoids ``E`` in its interior and has gaps
of total length at most ``δ r``.  Adding vertices to ``E`` never lowers the
best achievable gap total, which is what the branch-and-bound adversary uses.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fragments import (GAP, CurveFragment, Leg, fragment_integral, length, normalize,
                        pareto_fragments, undef)
from .parallel import pmap
from .space import TOL, ball, doubling_constant, maximal_function

CERTIFIED = "certified-yes"
REFUTED = "refuted"
UNKNOWN = "no-counterexample-found"

DEFAULT_EXHAUSTION_LIMIT = 22


class ExhaustionLimitError(RuntimeError):
    pass


class DegenerateFitError(RuntimeError):
    pass


@dataclass(frozen=True)
class ConnectivityParams:
    C: float
    delta: float
    eps: float
    r0: float | None = None

    def __post_init__(self):
        if self.C < 1:
            raise ValueError("C must be at least 1")
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if not 0 < self.eps < 1:
            raise ValueError("eps must lie in (0, 1)")

    def to_json(self):
        return {"C": self.C, "delta": self.delta, "eps": self.eps, "r0": self.r0}


@dataclass
class ConnectivityVerdict:
    x: int
    y: int
    params: ConnectivityParams
    status: str
    mode: str
    min_undef: float
    distance: float
    witness_obstacle: tuple | None = None
    witness_fragment: CurveFragment | None = None
    margins: dict = field(default_factory=dict)

    @property
    def zero_margin(self) -> bool:
        return self.status == CERTIFIED and abs(self.margins.get("undef", 1.0)) <= TOL

    def to_json(self):
        return {
            "pair": [int(self.x), int(self.y)],
            "params": self.params.to_json(),
            "status": self.status,
            "mode": self.mode,
            "min_undef": self.min_undef,
            "distance": self.distance,
            "witness_obstacle": None if self.witness_obstacle is None
            else [int(v) for v in self.witness_obstacle],
            "witness_fragment": None if self.witness_fragment is None
            else self.witness_fragment.to_json(),
            "margins": self.margins,
            "zero_margin": self.zero_margin,
        }


# --- adversary -------------------------------------------------------------


@dataclass
class _Game:
    space: object
    x: int
    y: int
    budget_len: float
    candidates: list
    mass_budget: float
    ball_size: int

    def best(self, E):
        """Least-undef fragment avoiding ``E`` within the length budget."""
        front = pareto_fragments(self.space, self.x, self.y, E, self.budget_len)
        return front.min_undef(self.budget_len)

    def value(self, E) -> float:
        b = self.best(E)
        return math.inf if b is None else b[1]


def _game(space, x, y, C, eps) -> _Game:
    r = float(space.dist[x, y])
    b = ball(space, x, C * r)
    cands = [v for v in b.members if v not in (x, y)]
    return _Game(space, x, y, C * r, cands, eps * b.mass, len(b.members))


def _fits(mass: float, budget: float) -> bool:
    return mass < budget - TOL


def worst_obstacle(space, x, y, C, eps, limit=DEFAULT_EXHAUSTION_LIMIT,
                   stop_above: float | None = None):
    """Obstacle within the mass budget maximising the least achievable undef.

    Returns ``(E, min_undef, fragment)``.  Among obstacles of equal value the
    one sitting closest to the middle of ``x`` and ``y`` wins (smallest
    ``sum |d(x,v) - d(y,v)|``), then the lexicographically smallest.  With
    ``stop_above`` the search ends at the first obstacle whose value exceeds it.
    """
    x, y = int(x), int(y)
    if x == y:
        return (), 0.0, CurveFragment(x, x)
    g = _game(space, x, y, C, eps)
    if g.ball_size > limit:
        raise ExhaustionLimitError(
            f"ball B({x}, {C}*d) has {g.ball_size} vertices, above the limit {limit}")
    w = space.weights
    skew = np.abs(space.dist[x] - space.dist[y])
    cands = [v for v in g.candidates if _fits(w[v], g.mass_budget)]
    best_E, best_val, best_skew = (), g.value(()), 0.0
    target = math.inf if stop_above is None else stop_above

    def better(val, sk):
        if val > best_val + TOL:
            return True
        return val >= best_val - TOL and sk < best_skew - TOL

    def dfs(start, E, mass, sk):
        nonlocal best_E, best_val, best_skew
        reachable = [v for v in cands[start:] if _fits(mass + w[v], g.mass_budget)]
        if not reachable:
            return
        bound = g.value(E + tuple(reachable))
        if bound < best_val - TOL or (bound <= best_val + TOL and sk >= best_skew - TOL):
            return
        if stop_above is not None and bound <= target + TOL:
            return
        for i in range(start, len(cands)):
            v = cands[i]
            if not _fits(mass + w[v], g.mass_budget):
                continue
            E2, sk2 = E + (v,), sk + skew[v]
            val = g.value(E2)
            if better(val, sk2):
                best_E, best_val, best_skew = E2, val, sk2
                if best_val > target + TOL:
                    return
            dfs(i + 1, E2, mass + w[v], sk2)
            if best_val > target + TOL:
                return

    if best_val <= target + TOL:
        dfs(0, (), 0.0, 0.0)
    b = g.best(best_E)
    return best_E, best_val, (None if b is None else b[2])


def _greedy_obstacle(g: _Game, target: float):
    w = g.space.weights
    E, mass = (), 0.0
    best_E, best_val = (), g.value(())
    while True:
        b = g.best(E)
        if b is None:
            break
        interior = [v for v in b[2].vertices()[1:-1] if v not in E]
        options = [v for v in sorted(set(interior)) if _fits(mass + w[v], g.mass_budget)]
        if not options:
            options = [v for v in g.candidates if v not in E and _fits(mass + w[v], g.mass_budget)]
        if not options:
            break
        scored = [(g.value(E + (v,)), -v) for v in options]
        val, negv = max(scored)
        E, mass = E + (-negv,), mass + w[-negv]
        if val > best_val + TOL:
            best_E, best_val = E, val
        if best_val > target + TOL:
            break
    return best_E, best_val


def _band_obstacles(g: _Game, target: float):
    """Distance bands around ``x`` trimmed to the budget (ρ-level sets with E = ∅)."""
    from .poincare import rho_test_function

    rho, _ = rho_test_function(g.space, g.x, (), B=1.0)
    w = g.space.weights
    cands = sorted(g.candidates, key=lambda v: (rho[v], v))
    best_E, best_val = (), g.value(())
    levels = sorted(set(round(float(rho[v]), 12) for v in cands))
    for i, lo in enumerate(levels):
        for hi in levels[i:]:
            band = [v for v in cands if lo - TOL <= rho[v] <= hi + TOL]
            E, mass = [], 0.0
            for v in sorted(band, key=lambda v: (w[v], v)):
                if _fits(mass + w[v], g.mass_budget):
                    E.append(v)
                    mass += w[v]
            if not E:
                continue
            val = g.value(tuple(sorted(E)))
            if val > best_val + TOL:
                best_E, best_val = tuple(sorted(E)), val
            if best_val > target + TOL:
                return best_E, best_val
    return best_E, best_val


def verify_pair(space, x, y, params: ConnectivityParams, mode: str = "exact",
                limit: int = DEFAULT_EXHAUSTION_LIMIT) -> ConnectivityVerdict:
    """Decide (or probe, in heuristic modes) whether ``(x, y)`` is ``(C, δ, ε)``-connected."""
    x, y = int(x), int(y)
    r = float(space.dist[x, y])
    if params.r0 is not None and r > params.r0 + TOL:
        raise ValueError(f"d({x},{y})={r} exceeds the scale cap {params.r0}")
    if mode not in ("exact", "greedy", "rho"):
        raise ValueError(f"unknown adversary mode {mode!r}")
    threshold = params.delta * r

    def verdict(status, E, val, frag):
        margins = {"undef": threshold - val}
        if frag is not None:
            margins["length"] = params.C * r - length(space, frag)
        return ConnectivityVerdict(x, y, params, status, mode, val, r,
                                   None if E is None else tuple(E), frag, margins)

    if x == y:
        return verdict(CERTIFIED, (), 0.0, CurveFragment(x, x))
    if params.delta >= 1:
        return verdict(CERTIFIED, None, r, CurveFragment.gap(x, y))
    if mode == "exact":
        E, val, frag = worst_obstacle(space, x, y, params.C, params.eps, limit)
        status = REFUTED if val > threshold + TOL else CERTIFIED
        return verdict(status, E, val, frag)
    g = _game(space, x, y, params.C, params.eps)
    E, val = (_greedy_obstacle if mode == "greedy" else _band_obstacles)(g, threshold)
    b = g.best(E)
    status = REFUTED if val > threshold + TOL else UNKNOWN
    return verdict(status, E, val, None if b is None else b[2])


def certify_pairs(space, params, pairs=None, mode="exact", limit=DEFAULT_EXHAUSTION_LIMIT):
    """Run :func:`verify_pair` over ``pairs`` (default: all pairs within the scale cap)."""
    if pairs is None:
        pairs = default_pairs(space, params.r0)
    return pmap(lambda p: verify_pair(space, p[0], p[1], params, mode, limit), pairs)


def default_pairs(space, r0=None, C=None, limit=None):
    cap = space.scale_cap if r0 is None else r0
    out = []
    for x in range(space.n):
        for y in range(x + 1, space.n):
            r = space.dist[x, y]
            if r > cap + TOL:
                continue
            if limit is not None and C is not None and \
                    int(np.count_nonzero(space.dist[x] < C * r - TOL)) > limit:
                continue
            out.append((x, y))
    return out


def critical_delta(space, x, y, C, eps, limit=DEFAULT_EXHAUSTION_LIMIT) -> float:
    """Smallest δ for which the pair passes: worst undef over the distance."""
    E, val, _ = worst_obstacle(space, x, y, C, eps, limit)
    return val / float(space.dist[x, y])


# --- fine connectivity -----------------------------------------------------


@dataclass
class FineAlphaResult:
    alpha: float
    C2: float
    residual: float
    table: list  # dicts with tau, delta, pair, obstacle

    def to_json(self):
        return {"alpha": self.alpha, "C2": self.C2, "residual": self.residual,
                "table": self.table}


def _delta_row(space, C1, tau, pairs, limit):
    worst = (0.0, None, ())
    for x, y in pairs:
        E, val, _ = worst_obstacle(space, x, y, C1, tau, limit)
        dl = val / float(space.dist[x, y])
        if dl > worst[0] + TOL:
            worst = (dl, (int(x), int(y)), tuple(int(v) for v in E))
    return {"tau": float(tau), "delta": worst[0], "pair": worst[1], "obstacle": list(worst[2])}


def informative_window(space, C1, pairs, limit=DEFAULT_EXHAUSTION_LIMIT, tau_max=0.5,
                       steps=12):
    """``(τ_lo, τ_hi)``: the first τ admitting an obstacle and the first τ where δ(τ) hits 1.

    ``τ_hi`` is located by bisection in log scale and sits just above the
    saturation jump; it falls back to ``tau_max`` when δ never saturates.
    """
    w = space.weights
    lo = math.inf
    for x, y in pairs:
        g = _game(space, x, y, C1, 0.5)
        if g.candidates:
            lo = min(lo, min(w[v] for v in g.candidates) / (2 * g.mass_budget))
    if not math.isfinite(lo) or lo >= tau_max:
        return None
    lo *= 1 + 1e-6
    if _delta_row(space, C1, tau_max, pairs, limit)["delta"] < 1 - TOL:
        return lo, tau_max
    a, b = lo, tau_max
    if _delta_row(space, C1, a, pairs, limit)["delta"] >= 1 - TOL:
        return lo, lo
    for _ in range(steps):
        m = math.sqrt(a * b)
        if _delta_row(space, C1, m, pairs, limit)["delta"] >= 1 - TOL:
            b = m
        else:
            a = m
    return lo, b


def estimate_fine_alpha(space, C1, tau_grid=None, pairs=None,
                        limit=DEFAULT_EXHAUSTION_LIMIT, n_tau=6) -> FineAlphaResult:
    """Fit ``δ(τ) ≈ C2 τ^α`` where ``δ(τ)`` is the least δ certified at obstacle fraction τ.

    The default grid is geometric over :func:`informative_window`.  Points
    with δ = 0 and all but the first saturated point (δ >= 1) are left out of
    the log-log least-squares fit.
    """
    if pairs is None:
        pairs = default_pairs(space, C=C1, limit=limit)
    if tau_grid is None:
        window = informative_window(space, C1, pairs, limit)
        if window is None:
            tau_grid = np.geomspace(0.01, 0.5, n_tau)
        else:
            lo, hi = window
            tau_grid = np.geomspace(lo, max(hi, lo * 1.5), n_tau)
    tau_grid = [float(t) for t in tau_grid]
    if any(not 0 < t < 1 for t in tau_grid):
        raise ValueError("τ values must lie in (0, 1)")
    table = pmap(lambda t: _delta_row(space, C1, t, pairs, limit), tau_grid)
    deltas = np.array([row["delta"] for row in table])
    if np.all(deltas <= TOL):
        return FineAlphaResult(0.0, 0.0, 0.0, table)
    if np.all(deltas >= 1 - TOL):
        raise DegenerateFitError("every δ(τ) sits in the trivial regime δ >= 1")
    order = np.argsort(tau_grid)
    usable = np.zeros(len(deltas), dtype=bool)
    seen_sat = False
    for i in order:
        if deltas[i] <= TOL:
            continue
        if deltas[i] >= 1 - TOL:
            if seen_sat:
                continue
            seen_sat = True
        usable[i] = True
    if usable.sum() < 2:
        raise DegenerateFitError("fewer than two informative τ values")
    lt = np.log(np.array(tau_grid)[usable])
    ld = np.log(deltas[usable])
    A = np.vstack([lt, np.ones_like(lt)]).T
    coef, *_ = np.linalg.lstsq(A, ld, rcond=None)
    resid = float(np.sqrt(np.mean((A @ coef - ld) ** 2)))
    return FineAlphaResult(float(coef[0]), float(math.exp(coef[1])), resid, table)


# --- gap filling -----------------------------------------------------------


def geodesic_path(space, u, v) -> CurveFragment | None:
    """A solid fragment realising the graph distance, or ``None`` if the graph is too sparse."""
    from scipy.sparse.csgraph import dijkstra
    graph = _graph(space)
    if graph is None:
        return None
    dist, pred = dijkstra(graph, directed=False, indices=u, return_predecessors=True)
    if not np.isfinite(dist[v]) or dist[v] > space.dist[u, v] + TOL:
        return None
    seq = [v]
    while seq[-1] != u:
        seq.append(int(pred[seq[-1]]))
    return CurveFragment.path(seq[::-1])


def _graph(space):
    if not space.edges:
        return None
    cache = space.__dict__.setdefault("_csr_cache", {})
    if "g" not in cache:
        from scipy.sparse import csr_matrix
        u, v, l = zip(*space.edges)
        cache["g"] = csr_matrix((l, (u, v)), shape=(space.n, space.n))
    return cache["g"]


@dataclass
class GapFillResult:
    fragment: CurveFragment
    ledger: list
    converged: bool
    length: float
    undef: float
    extra: dict = field(default_factory=dict)


def quasiconvexify(space, x, y, C, delta, max_iters=50, fragment=None, h=None):
    """Repeatedly fill every gap longer than ``h`` by a fragment with ``E = ∅``.

    The ledger records ``(iteration, length, undef, δ^n d)`` after each pass.
    Remaining gaps of length at most ``h`` are replaced by graph geodesics.
    """
    x, y = int(x), int(y)
    h = space.resolution if h is None else h
    d = float(space.dist[x, y])
    frag = CurveFragment.gap(x, y) if fragment is None else fragment
    ledger = [(0, length(space, frag), undef(space, frag), d)]
    converged = True
    n = 0
    while any(space.dist[l.u, l.v] > h + TOL for l in frag.legs if l.kind == GAP):
        n += 1
        if n > max_iters:
            converged = False
            break
        legs, stuck = [], True
        for leg in frag.legs:
            dl = float(space.dist[leg.u, leg.v])
            if leg.kind != GAP or dl <= h + TOL:
                legs.append(leg)
                continue
            front = pareto_fragments(space, leg.u, leg.v, (), C * dl)
            ok = [e for e in front.entries if e[1] <= delta * dl + TOL]
            if not ok:
                legs.append(leg)
                continue
            stuck = False
            legs.extend(min(ok, key=lambda e: (e[0], e[1]))[2].legs)
        frag = normalize(space, CurveFragment(x, y, tuple(legs)))
        ledger.append((n, length(space, frag), undef(space, frag), delta ** n * d))
        if stuck:
            converged = False
            break
    legs = []
    for leg in frag.legs:
        geo = geodesic_path(space, leg.u, leg.v) if leg.kind == GAP else None
        legs.extend(geo.legs if geo is not None else (leg,))
    frag = normalize(space, CurveFragment(x, y, tuple(legs)))
    return GapFillResult(frag, ledger, converged, length(space, frag), undef(space, frag))


def small_integral_constants(D, alpha, C1, p):
    """``(M, δ, C3)`` of the integral-avoiding curve construction."""
    if p * alpha <= 1:
        raise ValueError(f"p={p} must exceed 1/alpha={1 / alpha}")
    M = 2 * (D ** 4) ** (1 / (p * alpha - 1))
    dl = math.exp(alpha * (4 * math.log(D) - p * math.log(M)))
    return M, dl, C1 * M / (1 - M * dl)


def avoid_integral_curve(space, x, y, g, p, alpha, C1, D=None, max_iters=30,
                         level=None, min_gap=None):
    """Build a fragment from ``x`` to ``y`` along which ``∫ g`` stays small.

    Each gap ``(a, b)`` opened at round ``n`` is filled by a least-undef
    fragment avoiding the level set ``{M_s g^p > level * M^(p (n-1))}`` with
    ``s = 2 C1 δ d(a, b)``.  ``level`` defaults to ``M^p``.  Gaps no longer
    than ``min_gap`` (default: the resolution) are left as they are.
    """
    x, y = int(x), int(y)
    g = np.asarray(g, dtype=float)
    r = float(space.dist[x, y])
    if x == y:
        return GapFillResult(CurveFragment(x, x), [], True, 0.0, 0.0,
                             {"integral": 0.0, "C3": None, "status": CERTIFIED})
    gp = np.abs(g) ** p
    b = ball(space, x, 2 * C1 * r)
    norm = float(np.dot(space.weights[list(b.members)], gp[list(b.members)]) / b.mass)
    if norm > 1 + 1e-9:
        raise ValueError(f"average of g^p over B(x, 2 C1 r) is {norm} > 1")
    D = doubling_constant(space) if D is None else D
    M, dl, C3 = small_integral_constants(D, alpha, C1, p)
    lam = M ** p if level is None else float(level)
    min_gap = space.resolution if min_gap is None else min_gap
    cache = {}
    frag = CurveFragment.gap(x, y)
    depth = {(x, y): 1}
    ledger = []
    status, refuting = CERTIFIED, None
    for n in range(1, max_iters + 1):
        open_gaps = [l for l in frag.legs if l.kind == GAP and space.dist[l.u, l.v] > min_gap + TOL]
        if not open_gaps:
            break
        legs = []
        for leg in frag.legs:
            di = float(space.dist[leg.u, leg.v])
            if leg.kind != GAP or di <= min_gap + TOL:
                legs.append(leg)
                continue
            k = depth.get((leg.u, leg.v), n)
            s = 2 * C1 * dl * di
            if s not in cache:
                cache[s] = maximal_function(space, gp, s)
            thr = lam * M ** (p * (k - 1))
            local = ball(space, leg.u, C1 * di).members
            E = tuple(v for v in local if cache[s][v] > thr and v not in (leg.u, leg.v))
            front = pareto_fragments(space, leg.u, leg.v, E, C1 * di)
            best = min(front.entries, key=lambda e: (e[1], fragment_integral(space, e[2], g), e[0]))
            if best[1] >= di - TOL:
                status, refuting = "refuted", E
                legs.append(leg)
                continue
            for sub in best[2].legs:
                if sub.kind == GAP:
                    depth[(sub.u, sub.v)] = k + 1
                legs.append(sub)
        frag = normalize(space, CurveFragment(x, y, tuple(legs)))
        ledger.append((n, length(space, frag), undef(space, frag)))
        if status == "refuted":
            break
    integral = fragment_integral(space, frag, g)
    converged = status == CERTIFIED and not any(
        l.kind == GAP and space.dist[l.u, l.v] > min_gap + TOL for l in frag.legs)
    extra = {"integral": integral, "C3": C3, "bound": C3 * r, "M": M, "delta": dl,
             "status": status, "refuting_obstacle": refuting,
             "within_bound": bool(integral <= C3 * r + TOL)}
    return GapFillResult(frag, ledger, converged, length(space, frag), undef(space, frag), extra)


# --- constants -------------------------------------------------------------


@dataclass(frozen=True)
class PredictedConstants:
    D: float
    C: float
    delta: float
    eps: float
    p: float
    M: float
    alpha: float
    C1: float
    C2: float
    M_prime: float
    delta_prime: float
    C3: float
    C_PI: float
    k: float
    half_ball_ratio: float  # ε^k, the implied lower bound on μ(B(x,r/2))/μ(B(x,r))

    def to_json(self):
        return dict(self.__dict__)


def fine_constants(D, C, delta, eps):
    """``(M, α, C1, C2)``: the fine-connectivity exponent and constants implied by ``(C, δ, ε)``."""
    if not 0 < delta < 1 or not 0 < eps < 1 or D < 1:
        raise ValueError("need 0 < delta < 1, 0 < eps < 1 and D >= 1")
    M = 2 * max(D ** (-math.log2(1 - delta) + 1), D ** 3)
    alpha = math.log(delta) / math.log(eps / (2 * M))
    return M, alpha, C / (1 - delta), 2 * M / eps


def predicted_constants(D, C, delta, eps, p) -> PredictedConstants:
    M, alpha, C1, C2 = fine_constants(D, C, delta, eps)
    Mp, dp, C3 = small_integral_constants(D, alpha, C1, p)
    k = 1 - 1 / math.log2(delta)
    return PredictedConstants(D, C, delta, eps, p, M, alpha, C1, C2, Mp, dp, C3, 2 * C3,
                              k, eps ** k)


@dataclass
class DoublingCheck:
    passed: bool
    k: float
    bound: float
    worst_margin: float
    witness: tuple | None
    checked: int

    def to_json(self):
        return dict(self.__dict__)


def implied_doubling_check(space, params: ConnectivityParams, scale_cap=None) -> DoublingCheck:
    """Check ``μ(B(x, r/2)) >= ε^k μ(B(x, r))`` at every radius where either ball changes."""
    if not 0 < params.delta < 1:
        raise ValueError("the implied doubling bound needs 0 < delta < 1")
    k = 1 - 1 / math.log2(params.delta)
    bound = params.eps ** k
    cap = space.scale_cap if scale_cap is None else scale_cap
    order, dsorted = space.sorted_rows
    worst, witness, count = math.inf, None, 0
    for x in range(space.n):
        dx = dsorted[x]
        cum = np.concatenate([[0.0], np.cumsum(space.weights[order[x]])])
        pos = dx[dx > TOL]
        radii = np.unique(np.concatenate([pos, 2 * pos, [cap]]))
        radii = radii[radii <= cap + TOL]
        small = cum[np.searchsorted(dx, radii / 2 - TOL, side="left")]
        big = cum[np.searchsorted(dx, radii - TOL, side="left")]
        margin = small - bound * big
        count += radii.size
        i = int(np.argmin(margin))
        if margin[i] < worst:
            worst, witness = float(margin[i]), (int(x), float(radii[i]))
    return DoublingCheck(bool(worst >= -TOL), k, bound, worst, witness, count)


def change_scale_params(C, delta, eps, K, D):
    if K < 0 or int(K) != K:
        raise ValueError("K must be a nonnegative integer")
    return 2 ** int(K) * C, delta, eps * D ** (-int(K) - 1)


__all__ = [
    "CERTIFIED", "REFUTED", "UNKNOWN", "ConnectivityParams", "ConnectivityVerdict",
    "ExhaustionLimitError", "DegenerateFitError", "worst_obstacle", "verify_pair",
    "certify_pairs", "default_pairs", "critical_delta", "FineAlphaResult",
    "estimate_fine_alpha", "informative_window", "quasiconvexify", "avoid_integral_curve",
    "small_integral_constants", "fine_constants", "GapFillResult", "PredictedConstants",
    "predicted_constants", "implied_doubling_check", "DoublingCheck",
    "change_scale_params", "geodesic_path",
]
