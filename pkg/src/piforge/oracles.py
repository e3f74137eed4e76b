"""Brute-force references for the searches in :mod:`fragments`, :mod:`connectivity` and :mod:`poincare`.

Everything here enumerates explicitly and is only meant for spaces of at most
a handful of vertices.
"""
from __future__ import annotations

import itertools
import math

import numpy as np
from scipy.optimize import minimize

from .space import TOL, ball

ORACLE_MAX_VERTICES = 8


def _guard(space, cap=ORACLE_MAX_VERTICES):
    if space.n > cap:
        raise ValueError(f"oracle enumeration limited to {cap} vertices, got {space.n}")


def enumerate_fragments(space, x, y, len_budget=math.inf):
    """All simple fragments ``x -> y`` within the budget as ``(len, undef, interior mask)``.

    Each step is a solid edge or a gap; two gaps never follow each other
    (they would merge into one).  Revisiting a vertex is never useful, since
    cutting the loop shortens both coordinates.
    """
    _guard(space)
    x, y = int(x), int(y)
    if x == y:
        return [(0.0, 0.0, 0)]
    d, adj = space.dist, space.adjacency
    out = []

    def walk(v, seen, l, u, mask, last_gap):
        if l + d[v, y] > len_budget + TOL:
            return
        for w in range(space.n):
            if w in seen:
                continue
            steps = []
            if w in adj[v]:
                steps.append((adj[v][w], 0.0, False))
            if not last_gap:
                steps.append((d[v, w], d[v, w], True))
            for dl, du, is_gap in steps:
                nl, nu = l + dl, u + du
                if nl > len_budget + TOL:
                    continue
                if w == y:
                    out.append((nl, nu, mask))
                else:
                    walk(w, seen | {w}, nl, nu, mask | (1 << w), is_gap)

    walk(x, {x}, 0.0, 0.0, 0, False)
    return out


def pareto_front_bruteforce(space, x, y, E=(), len_budget=math.inf):
    """Sorted nondominated ``(len, undef)`` pairs among fragments avoiding ``E``."""
    emask = sum(1 << int(v) for v in E if v not in (x, y))
    pts = sorted({(round(l, 12), round(u, 12)) for l, u, m in
                  enumerate_fragments(space, x, y, len_budget) if not m & emask})
    front = []
    for l, u in pts:
        if not any(l2 <= l + TOL and u2 <= u + TOL for l2, u2 in front):
            front.append((l, u))
    return front


def worst_obstacle_bruteforce(space, x, y, C, eps):
    """``(value, optimal obstacles)`` over every subset within the mass budget."""
    _guard(space)
    x, y = int(x), int(y)
    r = float(space.dist[x, y])
    if x == y:
        return 0.0, [()]
    budget_len = C * r
    b = ball(space, x, budget_len)
    budget = eps * b.mass
    cands = [v for v in b.members if v not in (x, y)]
    frags = enumerate_fragments(space, x, y, budget_len)
    w = space.weights
    best, argbest = -math.inf, []
    for k in range(len(cands) + 1):
        for E in itertools.combinations(cands, k):
            if sum(w[v] for v in E) >= budget - TOL:
                continue
            emask = sum(1 << v for v in E)
            val = min((u for l, u, m in frags if not m & emask), default=math.inf)
            if val > best + TOL:
                best, argbest = val, [E]
            elif val >= best - TOL:
                argbest.append(E)
    return best, argbest


def simple_paths(space, x, y, len_budget):
    """Solid vertex sequences ``x -> y`` without repeats and within the length budget."""
    _guard(space)
    adj, out = space.adjacency, []

    def walk(v, seq, l):
        if v == y:
            out.append(list(seq))
            return
        for w, el in adj[v].items():
            if w not in seq and l + el + space.dist[w, y] <= len_budget + TOL:
                seq.append(w)
                walk(w, seq, l + el)
                seq.pop()

    walk(int(x), [int(x)], 0.0)
    return out


def modulus_bruteforce(space, x, y, C, p, s):
    """Primal ``min avg_{B(x,s)} ρ^p`` over every admissibility constraint at once.

    Solved with SLSQP from a feasible start.  Returns ``inf`` when some
    admissible path meets no weighted vertex of the ball.
    """
    _guard(space, 6)
    inball = np.flatnonzero([space.dist[x, v] < s - TOL for v in range(space.n)])
    paths = simple_paths(space, x, y, C * float(space.dist[x, y]))
    if not paths:
        return 0.0
    pos = {v: i for i, v in enumerate(inball)}
    A = np.zeros((len(paths), len(inball)))
    for k, seq in enumerate(paths):
        for a, b in zip(seq[:-1], seq[1:]):
            el = space.edge_length(a, b)
            for v in (a, b):
                if v in pos:
                    A[k, pos[v]] += el / 2
    if not A.any(axis=1).all():
        return math.inf
    a = space.weights[inball] / space.weights[inball].sum()
    x0 = np.full(len(inball), 1.0 / A.sum(axis=1).min())
    res = minimize(lambda r: np.sum(a * np.abs(r) ** p), x0,
                   jac=lambda r: p * a * np.abs(r) ** (p - 1) * np.sign(r),
                   constraints=[{"type": "ineq", "fun": lambda r: A @ r - 1, "jac": lambda r: A}],
                   bounds=[(0, None)] * len(inball), method="SLSQP",
                   options={"ftol": 1e-14, "maxiter": 1000})
    r = np.maximum(res.x, 0)
    r = r / min(1.0, (A @ r).min())
    return float(np.sum(a * r ** p))


__all__ = ["ORACLE_MAX_VERTICES", "enumerate_fragments", "pareto_front_bruteforce",
           "worst_obstacle_bruteforce", "simple_paths", "modulus_bruteforce"]
