"""Poincaré-type inequalities, curve-family modulus and weight conditions."""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .space import TOL, ball_mask, doubling_constant, lip_field
from .parallel import pmap

# --- ρ test functions ------------------------------------------------------


def rho_test_function(space, x, E=(), B: float = 1.0):
    """Obstacle-weighted distance from ``x`` and its upper gradient ``1_E + 1/B``.

    An edge ``(u, v)`` of length ``l`` costs ``l / (2B)`` plus ``l / 2`` for each
    endpoint lying in ``E``, which is the trapezoid integral of the upper
    gradient minus ``l / (2B)``.  Hence ``|ρ(a) - ρ(b)|`` never exceeds the
    trapezoid integral of the gradient along any solid path.
    """
    if B < 1:
        raise ValueError("B must be at least 1")
    inE = np.zeros(space.n)
    inE[list(E)] = 1.0
    rho = np.full(space.n, np.inf)
    rho[x] = 0.0
    heap = [(0.0, int(x))]
    adj = space.adjacency
    while heap:
        c, u = heapq.heappop(heap)
        if c > rho[u]:
            continue
        for v, l in adj[u].items():
            nc = c + l / (2 * B) + l * (inE[u] + inE[v]) / 2
            if nc < rho[v] - 1e-15:
                rho[v] = nc
                heapq.heappush(heap, (nc, v))
    return rho, inE + 1.0 / B


# --- Poincaré scan ---------------------------------------------------------


@dataclass
class PoincareReport:
    p: float
    C: float
    radii: list
    C_PI_hat: float
    witness: tuple | None  # (center, radius, function index)
    entries: list  # (center, radius, function index, lhs, rhs, ratio)
    zero_gradient_violations: list = field(default_factory=list)
    predicted_C_PI: float | None = None

    def to_json(self):
        return {"p": self.p, "C": self.C, "radii": list(self.radii),
                "C_PI_hat": self.C_PI_hat, "label": "empirical sup",
                "witness": self.witness, "predicted_C_PI": self.predicted_C_PI,
                "zero_gradient_violations": self.zero_gradient_violations,
                "evaluated": len(self.entries)}


def _power_mean(vals, wts, p):
    """``(Σ w v^p / Σ w)^(1/p)`` evaluated stably for large ``p`` (rows of ``vals``)."""
    top = vals.max(axis=1)
    safe = np.where(top > 0, top, 1.0)
    scaled = (vals / safe[:, None]) ** p
    mean = scaled @ wts / wts.sum()
    return np.where(top > 0, top * mean ** (1.0 / p), 0.0)


def inf_convolution_fields(space, count, seed=0, seeds_per_field=3):
    """Random 1-Lipschitz fields ``min_s (a_s + d(s, ·))``."""
    rng = np.random.default_rng(seed)
    out = []
    scale = float(space.dist.max()) or 1.0
    for _ in range(count):
        S = rng.choice(space.n, size=min(seeds_per_field, space.n), replace=False)
        a = rng.random(len(S)) * scale
        out.append(np.min(a[:, None] + space.dist[S], axis=0))
    return out


def default_family(space, seed=0, n_dist=8, n_rho=4, n_conv=8):
    rng = np.random.default_rng(seed)
    fams = [space.dist[v].copy() for v in range(min(space.n, n_dist))]
    for _ in range(n_dist):
        S = rng.choice(space.n, size=min(space.n, int(rng.integers(1, 4))), replace=False)
        fams.append(space.dist[S].min(axis=0))
    for _ in range(n_rho):
        x = int(rng.integers(space.n))
        E = rng.choice(space.n, size=min(space.n, 2), replace=False)
        rho, _ = rho_test_function(space, x, E, B=float(rng.choice([1.0, 2.0])))
        if np.all(np.isfinite(rho)):
            fams.append(rho)
    fams += inf_convolution_fields(space, n_conv, seed + 1)
    return fams


def pi_scan(space, p, C=1.0, family=None, radii=None, centers=None, predicted=None,
            seed=0) -> PoincareReport:
    """Empirical Poincaré constant over balls ``B(x, r)`` and a finite function family.

    ``ratio = avg_B |f - f_B| / (r (avg_{B(x, C r)} lip^p)^(1/p))``.
    """
    fam = default_family(space, seed) if family is None else [np.asarray(f, float) for f in family]
    if not fam:
        raise ValueError("function family is empty")
    F = np.vstack(fam)
    LIP = np.vstack([lip_field(space, f) for f in F])
    if radii is None:
        dd = space.distinct_distances
        radii = [float(r) for r in dd[(dd > 0) & (dd <= space.scale_cap + TOL)]] + [space.scale_cap]
        radii = sorted(set(radii))
    centers = range(space.n) if centers is None else centers
    w = space.weights

    def one(task):
        x, r = task
        m = ball_mask(space, x, r)
        if not m.any():
            return []
        wb = w[m]
        vals = F[:, m]
        mean = vals @ wb / wb.sum()
        lhs = np.abs(vals - mean[:, None]) @ wb / wb.sum()
        mc = ball_mask(space, x, C * r)
        rhs = r * _power_mean(LIP[:, mc], w[mc], p)
        return [(x, r, i, float(lhs[i]), float(rhs[i])) for i in range(len(F))]

    tasks = [(int(x), float(r)) for x in centers for r in radii]
    entries, zero_viol = [], []
    best, wit = 0.0, None
    for chunk in pmap(one, tasks):
        for x, r, i, lhs, rhs in chunk:
            if rhs <= TOL * max(1.0, r):
                if lhs > TOL:
                    zero_viol.append((x, r, i))
                    entries.append((x, r, i, lhs, rhs, math.inf))
                continue
            ratio = lhs / rhs
            entries.append((x, r, i, lhs, rhs, ratio))
            if ratio > best + 1e-15:
                best, wit = ratio, (x, r, i)
    if zero_viol:
        best, wit = math.inf, zero_viol[0]
    return PoincareReport(p, C, list(radii), best, wit, entries, zero_viol, predicted)


# --- modulus ---------------------------------------------------------------


@dataclass
class ModulusResult:
    value: float
    rho: np.ndarray
    paths: list
    dual_bound: float
    iterations: int
    admissible: bool
    ball: list
    flags: list = field(default_factory=list)

    def to_json(self):
        return {"value": self.value, "rho": self.rho.tolist(),
                "paths": [list(map(int, p)) for p in self.paths],
                "dual_bound": self.dual_bound, "iterations": self.iterations,
                "admissible": self.admissible, "ball": self.ball, "flags": self.flags}


def cheapest_budgeted_path(space, x, y, rho, budget):
    """Least trapezoid ``∫ ρ`` over solid paths ``x -> y`` of length at most ``budget``."""
    dy = space.dist[:, y]
    adj = space.adjacency
    store = [(0.0, 0.0, x, -1)]
    heap = [(0.0, 0.0, 0)]
    settled = [[] for _ in range(space.n)]
    best = None
    while heap:
        c, l, idx = heapq.heappop(heap)
        v = store[idx][2]
        if best is not None and c >= best[0] - 1e-15:
            break
        if any(c2 <= c + 1e-15 and l2 <= l + TOL for c2, l2 in settled[v]):
            continue
        settled[v].append((c, l))
        if v == y:
            best = (c, idx)
            break
        for u, el in adj[v].items():
            if u == x:
                continue
            nl = l + el
            if nl + dy[u] > budget + TOL:
                continue
            store.append((c + el * (rho[v] + rho[u]) / 2, nl, u, idx))
            heapq.heappush(heap, (store[-1][0], nl, len(store) - 1))
    if best is None:
        return None
    seq, idx = [], best[1]
    while idx >= 0:
        seq.append(store[idx][2])
        idx = store[idx][3]
    return best[0], seq[::-1]


def _path_row(space, seq, n):
    row = np.zeros(n)
    for a, b in zip(seq[:-1], seq[1:]):
        l = space.edge_length(a, b)
        row[a] += l / 2
        row[b] += l / 2
    return row


def _solve_restricted(A, a, p):
    """``min Σ a ρ^p`` s.t. ``A ρ >= 1``, ``ρ >= 0`` through its smooth concave dual.

    Returns ``(ρ, primal, dual)``; ``ρ`` is rescaled to be exactly feasible.
    The path lengths are normalised first so that large ``p`` stays in range.
    """
    m = float(A.sum(axis=1).max())
    A = A / m

    def rho_of(lam):
        t = A.T @ lam
        return np.where(t > 0, (np.maximum(t, 0) / (p * a)) ** (1 / (p - 1)), 0.0)

    def negdual(lam):
        r = rho_of(lam)
        lag = lam.sum() + np.sum(a * r ** p) - lam @ (A @ r)
        return -lag, -(1 - A @ r)

    k = A.shape[0]
    lam0 = np.full(k, 1.0 / k)
    res = minimize(negdual, lam0, jac=True, method="L-BFGS-B",
                   bounds=[(0, None)] * k,
                   options={"ftol": 1e-15, "gtol": 1e-13, "maxiter": 5000, "maxfun": 20000})
    lam = res.x
    r = rho_of(lam)
    dual = -res.fun
    s = (A @ r).min()
    if s <= 0:
        raise RuntimeError("modulus subproblem failed to produce a feasible density")
    r = r / s
    scale = m ** -p
    return r / m, float(np.sum(a * r ** p)) * scale, float(dual) * scale


def modulus(space, x, y, C, p, s, max_iters=500, tol=1e-6) -> ModulusResult:
    """Cutting-plane computation of ``Mod_p`` for paths of length at most ``C d(x, y)``.

    Densities live on the open ball ``B(x, s)`` and vanish outside it; the
    objective is the ``μ``-average of ``ρ^p`` over that ball.
    """
    if p <= 1:
        raise ValueError("p must exceed 1")
    x, y = int(x), int(y)
    n = space.n
    inball = ball_mask(space, x, s)
    idx = np.flatnonzero(inball)
    mu = space.weights[inball].sum()
    a = space.weights[idx] / mu
    budget = C * float(space.dist[x, y])
    flags = []
    if s < budget - TOL:
        flags.append("scale-below-family-reach")
    rho_full = np.zeros(n)
    first = cheapest_budgeted_path(space, x, y, rho_full, budget)
    if first is None:
        return ModulusResult(0.0, rho_full, [], 0.0, 0, True, idx.tolist(),
                             flags + ["no-admissible-path"])
    paths, rows = [], []
    cand = first[1]
    dual = 0.0
    for it in range(1, max_iters + 1):
        paths.append(cand)
        rows.append(_path_row(space, cand, n)[idx])
        A = np.vstack(rows)
        if not A.any(axis=1).all():
            # a path meeting no weighted vertex can never be made costly
            return ModulusResult(math.inf, rho_full, paths, math.inf, it, False,
                                 idx.tolist(), flags + ["path-outside-ball"])
        r, primal, dual = _solve_restricted(A, a, p)
        rho_full = np.zeros(n)
        rho_full[idx] = r
        nxt = cheapest_budgeted_path(space, x, y, rho_full, budget)
        if nxt[0] >= 1 - tol:
            return ModulusResult(primal, rho_full, paths, min(dual, primal), it, True,
                                 idx.tolist(), flags)
        cand = nxt[1]
    flags.append("iteration-cap")
    return ModulusResult(primal, rho_full, paths, dual, max_iters, False, idx.tolist(), flags)


def modulus_lower_bounds(C3, r, p):
    """The stated bound ``C3^p / r^(p-1)`` and the one the contradiction argument yields."""
    return {"stated": C3 ** p / r ** (p - 1), "argument": 1.0 / (2 * C3 ** p * r ** p)}


# --- non-homogeneous forms -------------------------------------------------


@dataclass
class Monotone:
    """Increasing ``F: [0, ∞) -> [0, ∞)`` with ``F(0) = 0`` and its generalised inverses."""
    fn: object
    lower_inv: object  # t -> inf{s : F(s) >= t}
    upper_inv: object  # t -> sup{s : F(s) <= t}
    name: str = ""

    def __call__(self, t):
        return self.fn(t)


def monotone(spec) -> Monotone:
    if isinstance(spec, Monotone):
        return spec
    if isinstance(spec, str):
        parts = spec.split(":")
        if parts[0] == "identity":
            c, e = 1.0, 1.0
        elif parts[0] == "power" and len(parts) == 2:
            c, e = 1.0, float(parts[1])
        elif parts[0] == "scaled_power" and len(parts) == 3:
            c, e = float(parts[1]), float(parts[2])
        else:
            raise ValueError(f"unknown form {spec!r}")
        if c <= 0 or e <= 0:
            raise ValueError("forms need positive scale and exponent")
        f = lambda t: c * np.power(np.asarray(t, float), e)
        inv = lambda t: (np.asarray(t, float) / c) ** (1 / e)
        return Monotone(f, inv, inv, spec)
    s, v = (np.asarray(col, float) for col in zip(*spec))
    if s[0] != 0 or v[0] != 0 or np.any(np.diff(s) <= 0) or np.any(np.diff(v) < 0):
        raise ValueError("tabulated forms need increasing samples starting at (0, 0)")

    def f(t):
        t = np.asarray(t, float)
        slope = (v[-1] - v[-2]) / (s[-1] - s[-2])
        return np.where(t <= s[-1], np.interp(t, s, v), v[-1] + slope * (t - s[-1]))

    def lower(t):
        i = np.searchsorted(v, t, side="left")
        if i >= len(v):
            slope = (v[-1] - v[-2]) / (s[-1] - s[-2])
            return s[-1] + (t - v[-1]) / slope if slope > 0 else math.inf
        if i == 0 or v[i] == t:
            return float(s[i])
        return float(s[i - 1] + (t - v[i - 1]) * (s[i] - s[i - 1]) / (v[i] - v[i - 1]))

    def upper(t):
        i = np.searchsorted(v, t, side="right")
        if i >= len(v):
            slope = (v[-1] - v[-2]) / (s[-1] - s[-2])
            return s[-1] + (t - v[-1]) / slope if slope > 0 else math.inf
        if v[i - 1] == t:
            return float(s[i - 1])
        return float(s[i - 1] + (t - v[i - 1]) * (s[i] - s[i - 1]) / (v[i] - v[i - 1]))

    return Monotone(f, lower, upper, "tabulated")


@dataclass
class NonHomogeneousForm:
    phi: Monotone
    psi: Monotone

    @classmethod
    def parse(cls, phi, psi):
        return cls(monotone(phi), monotone(psi))

    def xi(self, t):
        return float(self.psi.lower_inv(t))

    def sigma(self, t):
        return float(self.phi.upper_inv(t))

    def adversary_B(self, C, D):
        return max(C, 1.0 / (self.sigma(self.xi(1.0 / (20 * D ** 5)) / 2)))


class UpperGradientError(ValueError):
    pass


def check_upper_gradient(space, f, g):
    """Edgewise trapezoid test; paths are unions of edges so this covers every path."""
    for u, v, l in space.edges:
        if abs(f[u] - f[v]) > l * (g[u] + g[v]) / 2 + TOL:
            return (u, v)
    return None


@dataclass
class NonHomogeneousReport:
    worst_margin: float
    witness: tuple | None
    adversary_B: float
    evaluated: int
    holds: bool

    def to_json(self):
        return dict(self.__dict__)


def check_nonhomogeneous_pi(space, form: NonHomogeneousForm, C, family, radii=None, D=None):
    """Worst margin of ``avg|f - f_B| <= r Ψ(avg_{B(x,Cr)} Φ(g))`` over balls and ``(f, g)`` pairs."""
    pairs = [(np.asarray(f, float), np.asarray(g, float)) for f, g in family]
    for i, (f, g) in enumerate(pairs):
        bad = check_upper_gradient(space, f, g)
        if bad is not None:
            raise UpperGradientError(f"family member {i} fails the upper-gradient test on edge {bad}")
    if radii is None:
        dd = space.distinct_distances
        radii = sorted(set(float(r) for r in dd[(dd > 0) & (dd <= space.scale_cap + TOL)]))
    D = doubling_constant(space) if D is None else D
    w = space.weights
    worst, wit, count = math.inf, None, 0
    for x in range(space.n):
        for r in radii:
            m = ball_mask(space, x, r)
            mc = ball_mask(space, x, C * r)
            for i, (f, g) in enumerate(pairs):
                fb = np.dot(w[m], f[m]) / w[m].sum()
                lhs = np.dot(w[m], np.abs(f[m] - fb)) / w[m].sum()
                rhs = r * float(form.psi(np.dot(w[mc], form.phi(g[mc])) / w[mc].sum()))
                count += 1
                if rhs - lhs < worst:
                    worst, wit = rhs - lhs, (x, r, i)
    return NonHomogeneousReport(float(worst), wit, form.adversary_B(C, D), count,
                                bool(worst >= -TOL))


# --- weights ---------------------------------------------------------------


def weighted_space(space, w):
    w = np.asarray(w, float)
    if np.any(w <= 0):
        raise ValueError("weights must be positive")
    return space.with_weights(space.weights * w)


def _max_mass_under(mu, nu, cap, need):
    """0/1 knapsack: a subset with ``Σ nu <= cap`` and ``Σ mu > need`` if one exists.

    Items are scanned by ascending ``nu/mu``; the fractional relaxation bounds
    each branch.  Returns ``(best mass, subset)``: the exact optimum, or the
    first subset found beyond ``need``.
    """
    order = sorted(range(len(mu)), key=lambda i: (nu[i] / mu[i], i))
    mu = [mu[i] for i in order]
    nu = [nu[i] for i in order]
    best = [0.0, []]

    def bound(k, m, c):
        for j in range(k, len(mu)):
            if nu[j] <= c:
                c -= nu[j]
                m += mu[j]
            else:
                return m + mu[j] * c / nu[j]
        return m

    def rec(k, m, c, chosen):
        if m > best[0]:
            best[0], best[1] = m, list(chosen)
        if best[0] > need or k == len(mu) or bound(k, m, c) <= best[0] + 1e-15:
            return
        if nu[k] <= c + 1e-15:
            chosen.append(k)
            rec(k + 1, m + mu[k], c - nu[k], chosen)
            chosen.pop()
        rec(k + 1, m, c, chosen)

    rec(0, 0.0, cap, [])
    return best[0], [order[i] for i in best[1]]


@dataclass
class AInftyVerdict:
    holds: bool
    violations: list  # (center, radius, witness set, mu(E)/mu(B), nu(E)/nu(B))
    checked: int
    worst_margin: float

    def to_json(self):
        return dict(self.__dict__)


def check_ainfty(space, w, delta, eps, radii):
    """Test ``ν(E) <= δ ν(B) ⟹ μ(E) <= ε μ(B)`` for every ball at ``radii`` exactly.

    The prefix sweep by ascending weight gives a quick witness; a knapsack
    branch-and-bound settles the remaining balls.
    """
    if not (0 < delta < 1 and 0 < eps < 1):
        raise ValueError("need 0 < delta, eps < 1")
    w = np.asarray(w, float)
    if np.any(w <= 0):
        raise ValueError("weights must be positive")
    mu_all = space.weights
    viol, worst, count = [], math.inf, 0
    for x in range(space.n):
        for r in radii:
            members = np.flatnonzero(ball_mask(space, x, r))
            mu = mu_all[members]
            nu = mu * w[members]
            muB, nuB = mu.sum(), nu.sum()
            cap, need = delta * nuB + TOL * nuB, eps * muB
            count += 1
            order = np.argsort(w[members], kind="stable")
            cn, cm = np.cumsum(nu[order]), np.cumsum(mu[order])
            ok = cn <= cap
            prefix_best = cm[ok].max() if ok.any() else 0.0
            if prefix_best > need + TOL * muB:
                k = int(np.flatnonzero(ok & (cm > need + TOL * muB))[0])
                E = sorted(members[order[:k + 1]].tolist())
                best = cm[k]
            else:
                best, sel = _max_mass_under(mu.tolist(), nu.tolist(), cap, need + TOL * muB)
                E = sorted(members[sel].tolist())
            margin = (need - best) / muB
            worst = min(worst, margin)
            if best > need + TOL * muB:
                nuE = float(np.dot(mu_all[E], w[E]))
                viol.append((int(x), float(r), E, float(best / muB), nuE / nuB))
    return AInftyVerdict(not viol, viol, count, float(worst))


__all__ = [
    "rho_test_function", "PoincareReport", "pi_scan", "default_family",
    "inf_convolution_fields", "ModulusResult", "modulus", "cheapest_budgeted_path",
    "modulus_lower_bounds", "Monotone", "monotone", "NonHomogeneousForm",
    "NonHomogeneousReport", "check_nonhomogeneous_pi", "check_upper_gradient",
    "UpperGradientError", "weighted_space", "AInftyVerdict", "check_ainfty",
]
