"""Command-line front end: ``piforge <subcommand> [flags]``.

Every subcommand writes a report of inequality checks (to ``--out`` or
stdout).  Exit status: 0 when every check holds, 1 when one is refuted,
2 on usage errors.  ``--config FILE`` supplies flag values as a JSON object
whose keys are the flag names; flags given on the command line win.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import connectivity as conn
from . import oracles, poincare, thickening
from .corpus import generate, weighted_line_parts
from .spaceio import (SchemaError, build_report, check, check_passed, dumps_report,
                      load_space, save_report, validate_report)

INFO = " [informational]"


class UsageError(Exception):
    pass


# --- flag parsing helpers ----------------------------------------------------


def floats(text):
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    return [float(v) for v in str(text).split(",") if v.strip()]


def pair_list(text):
    if isinstance(text, (list, tuple)):
        return [tuple(int(v) for v in p) for p in text]
    out = []
    for chunk in str(text).split(";"):
        if chunk.strip():
            a, b = chunk.split(",")
            out.append((int(a), int(b)))
    return out


def load(spec):
    """Space plus designated subsets from a generator spec or a JSON file."""
    if spec.endswith(".json") or Path(spec).is_file():
        return load_space(spec), {}
    return generate(spec)


# --- subcommands -------------------------------------------------------------


def run_certify(a):
    S, _ = load(a.space)
    params = conn.ConnectivityParams(a.C, a.delta, a.eps, a.r0)
    pairs = pair_list(a.pairs) if a.pairs else conn.default_pairs(S, a.r0)
    out = []
    for x, y in pairs:
        mode = a.mode
        try:
            v = conn.verify_pair(S, x, y, params, mode, a.limit)
        except conn.ExhaustionLimitError:
            mode = "greedy"
            v = conn.verify_pair(S, x, y, params, mode, a.limit)
        out.append(check(f"undef({x},{y}) <= delta*d", v.min_undef, a.delta * v.distance, {
            "status": v.status, "mode": mode, "obstacle": v.witness_obstacle,
            "fragment": v.witness_fragment}))
    return out


def run_alpha(a):
    S, _ = load(a.space)
    try:
        res = conn.estimate_fine_alpha(S, a.C1, floats(a.tau) if a.tau else None,
                                       pair_list(a.pairs) if a.pairs else None,
                                       a.limit, a.n_tau)
    except conn.DegenerateFitError as exc:
        return [check("fine exponent fit", 0.0, 1.0, {"error": str(exc)}, ">=")]
    return [check("fine exponent > 0", res.alpha, 0.0, res, ">=")]


def run_quasiconvex(a):
    S, _ = load(a.space)
    h = S.resolution if a.h is None else a.h
    pairs = pair_list(a.pairs) if a.pairs else conn.default_pairs(S)
    out = []
    for x, y in pairs:
        r = conn.quasiconvexify(S, x, y, a.C, a.delta, a.max_iters, h=h)
        bound = a.C / (1 - a.delta) * float(S.dist[x, y]) + 2 * h
        out.append(check(f"length({x},{y}) <= C/(1-delta)*d + 2h", r.length, bound,
                         {"ledger": r.ledger, "converged": r.converged,
                          "fragment": r.fragment}))
    return out


def run_poincare(a):
    S, _ = load(a.space)
    rep = poincare.pi_scan(S, a.p, a.C, radii=floats(a.radii) if a.radii else None,
                           centers=[int(v) for v in floats(a.centers)] if a.centers else None,
                           predicted=a.predicted, seed=a.seed)
    out = [check("empirical C_PI finite", rep.C_PI_hat, sys.float_info.max, rep)]
    if a.predicted is not None:
        out.append(check("empirical C_PI <= predicted", rep.C_PI_hat, a.predicted, rep.witness))
    return out


def run_modulus(a):
    S, _ = load(a.space)
    res = poincare.modulus(S, a.x, a.y, a.C, a.p, a.s, a.max_iters)
    gap = res.value - res.dual_bound
    out = [check("primal - dual", gap, 1e-6 * max(1.0, abs(res.value)), res)]
    if a.C3 is not None:
        r = float(S.dist[a.x, a.y])
        bounds = poincare.modulus_lower_bounds(a.C3, r, a.p)
        out.append(check("modulus >= 1/(2 C3^p r^p)", res.value, bounds["argument"],
                         bounds, ">="))
    return out


def run_ainfty(a):
    if a.weights:
        S, _ = load(a.space)
        text = a.weights[1:] if str(a.weights).startswith("@") else None
        w = json.loads(Path(text).read_text()) if text else floats(a.weights)
    elif a.space.startswith("weighted_line"):
        _, _, args = a.space.partition(":")
        vals = [v for v in args.split(",") if v.strip()]
        S, w = weighted_line_parts(int(vals[0]) if vals else 21,
                                   float(vals[1]) if len(vals) > 1 else 0.5)
    else:
        raise UsageError("ainfty needs --weights unless the space is weighted_line")
    w = np.asarray(w, float)
    if w.shape != (S.n,):
        raise UsageError(f"--weights has {w.size} entries, the space has {S.n} vertices")
    radii = floats(a.radii) if a.radii else [float(S.scale_cap)]
    v = poincare.check_ainfty(S, w, a.delta, a.eps, radii)
    return [check("A-infinity margin", v.worst_margin, 0.0,
                  {"violations": v.violations[:5], "checked": v.checked}, ">=")]


def run_thicken(a):
    X, subsets = load(a.space)
    if "K" not in subsets:
        raise UsageError("thicken needs a generator that designates K, such as fat_cantor")
    cx = thickening.thicken(X, subsets["A"], subsets["K"], a.r0)
    out = []
    for e in thickening.verify_estimates(cx).entries:
        info = e.status in ("informational", "holds by construction")
        margin = 0.0 if e.worst_margin is None else e.worst_margin
        out.append(check(e.name + (INFO if info else ""), 0.0, margin,
                         {"status": e.status, "checked": e.checked, "witness": e.witness}))
    if not a.skip_certify:
        cert = thickening.certify_thickened(cx, a.C, a.delta, tuple(floats(a.eps_grid)),
                                            max_nodes=a.max_nodes, seed=a.seed)
        D = max(cert.doubling, 1.0)
        out.append(check("log2 glued doubling <= bound", math.log2(D), cert.doubling_bound_log2,
                         {"doubling": cert.doubling}))
        out.append(check("glued pi_scan finite",
                         math.inf if not cert.pi_finite else 0.0, sys.float_info.max, cert))
    return out


def run_constants(a):
    pc = conn.predicted_constants(a.D, a.C, a.delta, a.eps, a.p)
    for k, v in pc.to_json().items():
        print(f"{k:16s} {v:.6g}", file=sys.stderr)
    return [check("p * alpha > 1", a.p * pc.alpha, 1.0, pc, ">=")]


def run_oracle(a):
    S, _ = load(a.space)
    if S.n > oracles.ORACLE_MAX_VERTICES:
        raise UsageError(f"oracle cross-checks need at most {oracles.ORACLE_MAX_VERTICES} vertices")
    front_bad, adv_bad, n_front, n_adv = [], [], 0, 0
    for x in range(S.n):
        for y in range(S.n):
            if x == y:
                continue
            for C in floats(a.Cs):
                budget = C * float(S.dist[x, y])
                got = sorted((l, u) for l, u, _ in
                             conn.pareto_fragments(S, x, y, (), budget).entries)
                want = oracles.pareto_front_bruteforce(S, x, y, (), budget)
                n_front += 1
                if len(got) != len(want) or any(
                        abs(g[0] - w[0]) > 1e-9 or abs(g[1] - w[1]) > 1e-9
                        for g, w in zip(got, want)):
                    front_bad.append((x, y, C))
                if x > y:
                    continue
                for eps in floats(a.eps_list):
                    E, val, _ = conn.worst_obstacle(S, x, y, C, eps)
                    bval, opts = oracles.worst_obstacle_bruteforce(S, x, y, C, eps)
                    n_adv += 1
                    if abs(val - bval) > 1e-9 or tuple(E) not in [tuple(o) for o in opts]:
                        adv_bad.append((x, y, C, eps))
    out = [check("pareto front mismatches", len(front_bad), 0,
                 {"checked": n_front, "cases": front_bad[:5]}),
           check("worst obstacle mismatches", len(adv_bad), 0,
                 {"checked": n_adv, "cases": adv_bad[:5]})]
    if S.n <= 6:
        worst, wit = 0.0, None
        for x in range(S.n):
            for y in range(x + 1, S.n):
                s = 2 * float(S.dist[x].max()) + 1
                m = poincare.modulus(S, x, y, a.C, a.p, s).value
                o = oracles.modulus_bruteforce(S, x, y, a.C, a.p, s)
                diff = 0.0 if m == o else abs(m - o)
                if diff > worst:
                    worst, wit = diff, (x, y, m, o)
        out.append(check("modulus vs brute force", worst, 1e-4, wit))
    return out


# --- parser ------------------------------------------------------------------


def _common(p, space_default=None):
    p.add_argument("--config", help="JSON file whose keys mirror these flags")
    p.add_argument("--space", default=space_default, required=space_default is None,
                   help="generator spec such as path:5, or a space JSON file")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=("exact", "greedy", "rho"), default="exact")
    p.add_argument("--limit", type=int, default=conn.DEFAULT_EXHAUSTION_LIMIT,
                   help="largest ball the exact adversary may enumerate")


def build_parser():
    parser = argparse.ArgumentParser(prog="piforge", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("certify", help="verify_pair over a set of pairs")
    _common(p)
    p.add_argument("--C", type=float, default=1.0)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--r0", type=float)
    p.add_argument("--pairs", help='"x,y;x,y"; default: every pair within the scale cap')
    p.set_defaults(func=run_certify)

    p = sub.add_parser("alpha", help="fit the fine connectivity exponent")
    _common(p)
    p.add_argument("--C1", type=float, default=2.0)
    p.add_argument("--n-tau", type=int, default=6)
    p.add_argument("--tau", help="comma-separated obstacle fractions")
    p.add_argument("--pairs")
    p.set_defaults(func=run_alpha)

    p = sub.add_parser("quasiconvex", help="fill gaps and check the length bound")
    _common(p)
    p.add_argument("--C", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--h", type=float)
    p.add_argument("--max-iters", type=int, default=50)
    p.add_argument("--pairs")
    p.set_defaults(func=run_quasiconvex)

    p = sub.add_parser("poincare", help="empirical Poincaré constant")
    _common(p)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--C", type=float, default=1.0)
    p.add_argument("--radii")
    p.add_argument("--centers")
    p.add_argument("--predicted", type=float)
    p.set_defaults(func=run_poincare)

    p = sub.add_parser("modulus", help="p-modulus of length-bounded paths")
    _common(p)
    for name in ("x", "y"):
        p.add_argument(f"--{name}", type=int, required=True)
    p.add_argument("--C", type=float, default=1.0)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--C3", type=float)
    p.add_argument("--max-iters", type=int, default=500)
    p.set_defaults(func=run_modulus)

    p = sub.add_parser("ainfty", help="A-infinity check of a weight")
    _common(p)
    p.add_argument("--weights", help="comma list, or @file.json")
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--radii")
    p.set_defaults(func=run_ainfty)

    p = sub.add_parser("thicken", help="thicken a compact set and verify the estimates")
    _common(p, "fat_cantor:3")
    p.add_argument("--r0", type=float, default=2.0 ** 16)
    p.add_argument("--C", type=float, default=2.0)
    p.add_argument("--delta", type=float, default=0.5)
    p.add_argument("--eps-grid", default="0.05,0.1,0.2")
    p.add_argument("--max-nodes", type=int, default=6500)
    p.add_argument("--skip-certify", action="store_true")
    p.set_defaults(func=run_thicken)

    p = sub.add_parser("constants", help="print the predicted constants")
    p.add_argument("--config")
    p.add_argument("--out")
    for name in ("D", "C", "delta", "eps", "p"):
        p.add_argument(f"--{name}", type=float, required=True)
    p.set_defaults(func=run_constants, space=None)

    p = sub.add_parser("oracle", help="brute-force cross-checks on a small space")
    _common(p)
    p.add_argument("--Cs", default="1,1.5,2")
    p.add_argument("--eps-list", default="0.2,0.4")
    p.add_argument("--C", type=float, default=1.5, help="length factor for the modulus check")
    p.add_argument("--p", type=float, default=2.0)
    p.set_defaults(func=run_oracle)
    return parser


def _apply_config(parser, argv):
    """Parse ``argv`` with the config file's values as defaults so explicit flags win."""
    argv = list(sys.argv[1:] if argv is None else argv)
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("command", nargs="?")
    pre.add_argument("--config")
    known_args, _ = pre.parse_known_args(argv)
    subs = parser._subparsers._group_actions[0].choices
    if not known_args.config or known_args.command not in subs:
        return parser.parse_args(argv)
    try:
        doc = json.loads(Path(known_args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {known_args.config}: {exc}") from None
    if not isinstance(doc, dict):
        raise UsageError("config must be a JSON object")
    sub = subs[known_args.command]
    known = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, val in doc.items():
        dest = key.lstrip("-").replace("-", "_")
        if dest not in known or dest in ("help", "config"):
            raise UsageError(f"config key {key!r} is not a flag of {known_args.command}")
        defaults[dest] = val
        known[dest].required = False
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
    except UsageError as exc:
        print(f"piforge: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:
        return int(exc.code or 0)
    params = {k: v for k, v in sorted(vars(args).items())
              if k not in ("func", "config", "out", "command", "space")}
    try:
        results = args.func(args)
    except (UsageError, SchemaError, ValueError) as exc:
        print(f"piforge: {exc}", file=sys.stderr)
        return 2
    report = build_report(args.space, args.command, params, results)
    validate_report(report)
    if args.out:
        save_report(args.out, report)
    else:
        sys.stdout.write(dumps_report(report))
    failed = [r for r in report["results"]
              if not r["check"].endswith(INFO) and not check_passed(r)]
    for r in failed:
        print(f"refuted: {r['check']} (margin {r['margin']})", file=sys.stderr)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
