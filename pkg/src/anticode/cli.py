"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 a verified property violation
(a finding), 3 budget exhausted or verdict unknown.  Reports are written
one JSON object per line.
"""
from __future__ import annotations

import argparse
import sys
from fractions import Fraction

import numpy as np

from . import codes, configurations as cf, extremal, gluing, pseudorandom as pr, suites
from .analysis import (MarkovChain, ProductMeasure, RealFn, hoffman_check, hypercontract_check,
                       noise_stability, noise_stability_es, chain_correlation, chain_correlation_mc)
from .analysis import realfn as realfn_io
from .compression import compress_coord, compress_family, compress_full, is_compressed, mu_p, reduce
from .reports import SCHEMA_VERSION, dumps, to_jsonable
from .rng import effective_seed, rng_for

OK, USAGE, FINDING, UNKNOWN = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _frac(s: str) -> Fraction:
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {s!r}")


def _coords(s: str) -> list[int]:
    if not s:
        return []
    try:
        out = [int(v) - 1 for v in s.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad coordinate list {s!r}")
    if any(v < 0 for v in out):
        raise argparse.ArgumentTypeError("coordinates are 1-based")
    return out


# file helpers


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path) as fh:
        return fh.read()


def _write(path: str, text: str):
    with open(path, "w") as fh:
        fh.write(text)


def load_code(path: str) -> codes.Code:
    return codes.loads(_read(path))


def load_function(path: str) -> RealFn:
    text = _read(path)
    head = text.split(None, 1)[0] if text.strip() else ""
    if head == "realfn":
        return realfn_io.loads(text)
    return RealFn.indicator(codes.loads(text))


def _emit_code(args, F: codes.Code, rep: dict, key: str = "code"):
    text = codes.dumps(F, getattr(args, "enc", "list"))
    if getattr(args, "out", None):
        _write(args.out, text)
        rep[key + "_file"] = args.out
    else:
        rep[key] = text


# handlers: each returns (exit code, report dict)


def cmd_ball(args):
    shape = codes.Shape(args.m, args.n)
    if args.r is None:
        r, size, B = codes.best_ball(shape, args.t)
    else:
        B = codes.ball(shape, codes.BallSpec(args.t, args.r))
        r, size = args.r, len(B)
    rep = {"m": args.m, "n": args.n, "t": args.t, "r": r, "size": size, "measure": B.measure(),
           "t_intersecting": codes.is_t_intersecting(B, args.t)}
    _emit_code(args, B, rep)
    return OK, rep


def cmd_compress(args):
    F = load_code(args.input)
    if args.coord is not None and args.symbol is not None:
        C = compress_family(F, args.coord - 1, args.symbol - 1)
    elif args.coord is not None:
        C = compress_coord(F, args.coord - 1)
    else:
        C = compress_full(F)
    rep = {"size_in": len(F), "size_out": len(C), "compressed": is_compressed(C)}
    _emit_code(args, C, rep)
    return (OK if len(C) == len(F) else FINDING), rep


def cmd_reduce(args):
    F = load_code(args.input)
    comp = is_compressed(F)
    if not comp:
        F = compress_full(F)
    B = reduce(F)
    p = Fraction(1, F.m)
    mp = mu_p(B, p)
    rep = {"compressed_input": comp, "monotone": B.is_monotone(), "p": p, "mu_p": mp,
           "measure": F.measure(), "mu_p_at_least_measure": mp >= F.measure()}
    _emit_code(args, B.code, rep)
    ok = rep["monotone"] and rep["mu_p_at_least_measure"]
    return (OK if ok else FINDING), rep


def cmd_decompose(args):
    F = load_code(args.input)
    if args.style == "small":
        dec = pr.regularity_small_m(F, args.r, args.eps, args.delta, budget=args.budget or pr.PATTERN_BUDGET)
        recount = pr.bad_pattern_mass(F, dec.T, args.r, args.eps)
        rep = dec.to_json()
        rep["recount_bad_mass"] = recount
        c = dec.checks
        ok = c["increments_ok"] and c["iterations_ok"] and c["bad_mass_ok"] and recount <= args.delta
        return (OK if ok else FINDING), rep
    dec = pr.regularity_large_m(F, args.r, args.k, args.eps, budget=args.budget or pr.CAPTURE_BUDGET)
    rep = dec.to_json()
    c = dec.checks
    if not (c["leftover_ok"] and c["count_ok"] and c["codim_ok"]):
        return FINDING, rep
    return (UNKNOWN if c["flagged"] else OK), rep


def _verdict_code(verdict: str) -> int:
    return UNKNOWN if verdict == "unknown" else OK


def _pair_witness(F: codes.Code, pred):
    P = F.points()
    A = codes.agreement_matrix(P, P)
    iu = np.triu_indices(len(P), 1)
    bad = pred(A[iu])
    if not np.any(bad):
        return None
    k = int(np.flatnonzero(bad)[0])
    x, y = P[iu[0][k]], P[iu[1][k]]
    return {"x": [int(a) + 1 for a in x], "y": [int(a) + 1 for a in y], "agreement": int(A[iu][k])}


def cmd_check(args):
    F = load_code(args.input)
    if args.what in ("pseudo", "global", "uncap"):
        if args.r is None or args.eps is None:
            raise UsageError("--r and --eps are required")
        if args.what == "pseudo":
            rep = pr.is_pseudorandom(F, args.r, args.eps)
        elif args.what == "global":
            rep = pr.is_global(F, args.r, args.eps)
        else:
            rep = pr.is_uncapturable(F, args.r, args.eps)
        return _verdict_code(rep.verdict), rep.to_json()
    if args.what == "avoid":
        if args.s is None:
            raise UsageError("--s is required")
        w = _pair_witness(F, lambda a: a == args.s)
        return OK, {"kind": "avoiding", "s": args.s, "verdict": w is None, "witness": w}
    if args.t is None:
        raise UsageError("--t is required")
    w = _pair_witness(F, lambda a: a < args.t)
    return OK, {"kind": "intersecting", "t": args.t, "verdict": w is None, "witness": w}


def cmd_glue(args):
    seed = effective_seed(args.seed)
    if args.action == "sample":
        pi = gluing.sample_gluing(args.m, args.k, args.b, seed=seed, n=args.n)
        rep = {"seed": seed, "gluing": pi, "balanced": gluing.is_balanced(pi, args.b)}
        text = gluing.dumps(pi)
        if args.out:
            _write(args.out, text)
            rep["gluing_file"] = args.out
        else:
            rep["gluing_text"] = text
        return OK, rep
    F = load_code(args.input)
    if args.action == "apply":
        pi = gluing.loads(_read(args.gluing))
        G = gluing.glue_code(F, pi)
        nu = ProductMeasure.uniform(F.m, F.n)
        glued = gluing.glue_measure(nu, pi).measure_of(G.table)
        rep = {"measure": F.measure(), "glued_measure": glued, "image_uniform_measure": G.measure(),
               "size": len(F), "image_size": len(G), "monotone": glued >= F.measure()}
        _emit_code(args, G, rep)
        return (OK if rep["monotone"] else FINDING), rep
    nu = ProductMeasure.uniform(F.m, F.n)
    res = gluing.boost_measure(F, nu, args.eps, args.b, seed=seed, c=args.c, max_iter=args.max_iter)
    res["seed"] = seed
    return (OK if res["reached"] else UNKNOWN), res


def cmd_stab(args):
    f = load_function(args.input)
    a = noise_stability(f, args.rho)
    b = noise_stability_es(f, args.rho)
    rep = {"rho": args.rho, "stab": a, "stab_es": b, "agree": abs(a - b) <= 1e-10}
    return (OK if rep["agree"] else FINDING), rep


def cmd_hyper(args):
    f = load_function(args.input)
    rep = hypercontract_check(f, args.rho)
    return (FINDING if rep["guaranteed"] and not rep["satisfied"] else OK), rep


def cmd_hoffman(args):
    F, G = load_code(args.input), load_code(args.input2)
    lam = args.lam if args.lam is not None else Fraction(1, F.m)
    rep = hoffman_check(F, G, ProductMeasure.uniform(F.m, F.n), lam)
    return (FINDING if rep["cross_intersecting"] and not rep["satisfied"] else OK), rep


def cmd_shadow(args):
    F = load_code(args.input)
    if args.config:
        H = cf.loads(_read(args.config))
        rep = cf.shadow_lower_check(F, H)
        return (FINDING if rep["satisfied"] is False else OK), rep
    S = cf.shadow_set(F, args.coords)
    rep = {"coords": [i + 1 for i in sorted(set(args.coords))], "size_in": len(F), "size": len(S)}
    _emit_code(args, S, rep)
    return OK, rep


def cmd_shearer(args):
    F = load_code(args.input)
    rep = cf.shearer_check(F, args.k)
    rep["lhs"], rep["rhs"] = str(rep["lhs"]), str(rep["rhs"])
    return (OK if rep["satisfied"] else FINDING), rep


def cmd_config(args):
    H = cf.loads(_read(args.config))
    budget = args.budget or cf.NODE_BUDGET
    if args.action == "crosscut":
        res = cf.crosscut(H, budget)
        rep = {"h": H.h, "ell": H.ell, "kernel": sorted([k + 1, v + 1] for k, v in cf.kernel(H))}
        if res is None:
            rep.update(sigma=None, cover=None)
        else:
            rep.update(sigma=res[0], cover=[[k + 1, v + 1] for k, v in res[1]])
        return OK, rep
    if not args.input:
        raise UsageError("--in is required")
    fams = [load_code(p) for p in args.input]
    if len(fams) == 1:
        fams = fams * H.h
    R = cf.find_cross(fams, H, budget)
    rep = {"found": R is not None, "realisation": R,
           "verified": cf.verify_realisation(fams, H, R) if R is not None else None}
    if R is not None and not rep["verified"]:
        return FINDING, rep
    return OK, rep


def cmd_extremal(args):
    budget = args.budget or extremal.NODE_BUDGET
    if args.action == "verify":
        rep = extremal.verify_main_theorem(args.m, args.n, args.t, budget)
        if rep["optimality"] != extremal.EXACT:
            return UNKNOWN, rep
        return (FINDING if "finding" in rep else OK), rep
    fn = extremal.max_avoiding if args.action == "avoid" else extremal.max_intersecting
    res = fn(args.m, args.n, args.t, budget)
    rep = res.to_json()
    rep["ball"] = codes.best_ball(codes.Shape(args.m, args.n), args.t)[1] if args.t else None
    rep["witness_file"] = codes.dumps(res.witness)
    return (OK if res.optimal else UNKNOWN), rep


def _chain(args, rng=None):
    if args.kind == "disagreement":
        return MarkovChain.disagreement(args.m)
    nu = np.full(args.m, 1.0 / args.m)
    if args.kind == "noise":
        return MarkovChain.noise(nu, args.rho)
    if args.kind == "avoiding":
        return MarkovChain.avoiding(nu)
    return MarkovChain.random_floored(rng, args.k, args.alpha)


def cmd_chain(args):
    seed = effective_seed(args.seed)
    if args.action == "gap":
        rng = rng_for(seed)
        T = _chain(args, rng)
        gap = T.abs_spectral_gap()
        rep = {"kind": args.kind, "size": T.size, "gap": gap, "stationary": T.stationary(),
               "reversible": T.is_reversible()}
        if args.kind == "random":
            rep["seed"] = seed
        if args.kind == "disagreement":
            rep["expected"] = 0.0 if args.m == 2 else 1 - 1 / (args.m - 1)
        if args.alpha is not None:
            hyp = T.gap_floor_holds(args.alpha)
            rep.update(alpha=args.alpha, floor_hypothesis=hyp)
            if hyp and gap < args.alpha - 1e-10:
                return FINDING, rep
        return OK, rep
    F, G = load_code(args.input), load_code(args.input2)
    nu = np.full(F.m, 1.0 / F.m)
    chains = [MarkovChain.noise(nu, args.rho) for _ in range(F.n)]
    exact = chain_correlation(F, G, chains)
    est, err = chain_correlation_mc(F, G, chains, args.trials, seed, args.jobs)
    rep = {"seed": seed, "rho": args.rho, "trials": args.trials, "exact": exact,
           "estimate": est, "stderr": err}
    return OK, rep


def cmd_fairness(args):
    seed = effective_seed(args.seed)
    F = load_code(args.input)
    rep = pr.fairness_estimate(F, args.s, args.trials, args.delta, seed, args.jobs)
    return OK, rep


def cmd_suite(args, out):
    name = args.name
    if name == "explore":
        rows = list(suites.run_explore(args.m, args.nmax, args.t, args.budget or extremal.NODE_BUDGET))
        for row in rows:
            out(row)
        return UNKNOWN if any(r["avoiding_optimality"] != extremal.EXACT for r in rows) else OK
    if name == "acceptance":
        results = suites.run_acceptance(args.filter, args.scale)
    elif name == "smoke":
        results = suites.run_smoke()
    else:
        raise UsageError(f"unknown suite {name!r}")
    failed = 0
    total = 0
    for res in results:
        total += 1
        failed += not res["passed"]
        out(res)
    if total == 0:
        raise UsageError("filter selected no criteria")
    out({"suite": name, "criteria": total, "failed": failed})
    return FINDING if failed else OK


# parser


def _common(p: argparse.ArgumentParser, suppress: bool):
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--seed", type=int, default=d, help="random seed (default: $ANTICODE_SEED, else 0)")
    p.add_argument("--jobs", type=int, default=d if suppress else 1, help="worker threads")
    p.add_argument("--format", choices=["json", "text"], default=d if suppress else "json")
    p.add_argument("--budget", type=int, default=d, help="search node budget")


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="anticode", description=__doc__.splitlines()[0])
    _common(top, False)
    sub = top.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def leaf(parent, name, **kw):
        p = parent.add_parser(name, **kw)
        _common(p, True)
        return p

    def code_out(p):
        p.add_argument("--out")
        p.add_argument("--enc", choices=["list", "hex"], default="list")

    p = leaf(sub, "ball", help="ball S_{t,r}[m]^n (largest one if --r is omitted)")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--r", type=int)
    code_out(p)
    p.set_defaults(fn=cmd_ball)

    p = leaf(sub, "compress", help="compression T_{i,j}, T_i or the full T")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--coord", type=int)
    p.add_argument("--symbol", type=int)
    code_out(p)
    p.set_defaults(fn=cmd_compress)

    p = leaf(sub, "reduce", help="compress, then map to the biased hypercube")
    p.add_argument("--in", dest="input", required=True)
    code_out(p)
    p.set_defaults(fn=cmd_reduce)

    dec = sub.add_parser("decompose", help="regularity decompositions")
    dsub = dec.add_subparsers(dest="style", required=True, parser_class=_Parser)
    p = leaf(dsub, "small")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--eps", type=_frac, required=True)
    p.add_argument("--delta", type=_frac, required=True)
    p.set_defaults(fn=cmd_decompose)
    p = leaf(dsub, "large")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--eps", type=_frac, required=True)
    p.set_defaults(fn=cmd_decompose)

    chk = sub.add_parser("check", help="pseudorandomness and intersection checks")
    csub = chk.add_subparsers(dest="what", required=True, parser_class=_Parser)
    for what in ("pseudo", "global", "uncap", "avoid", "intersect"):
        p = leaf(csub, what)
        p.add_argument("--in", dest="input", required=True)
        p.add_argument("--r", type=int)
        p.add_argument("--eps", type=_frac)
        p.add_argument("--s", type=int)
        p.add_argument("--t", type=int)
        p.set_defaults(fn=cmd_check)

    gl = sub.add_parser("glue", help="balanced gluings")
    gsub = gl.add_subparsers(dest="action", required=True, parser_class=_Parser)
    p = leaf(gsub, "sample")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--b", type=_frac, default=Fraction(1))
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_glue)
    p = leaf(gsub, "apply")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--gluing", required=True)
    code_out(p)
    p.set_defaults(fn=cmd_glue)
    p = leaf(gsub, "boost")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--eps", type=_frac, required=True)
    p.add_argument("--b", type=int, required=True)
    p.add_argument("--c", type=float, default=0.1)
    p.add_argument("--max-iter", type=int, default=50)
    p.set_defaults(fn=cmd_glue)

    p = leaf(sub, "stab", help="noise stability by matrix and by Efron-Stein formula")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--rho", type=float, required=True)
    p.set_defaults(fn=cmd_stab)

    p = leaf(sub, "hyper", help="global hypercontractivity inequality")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--rho", type=float, default=1 / 160)
    p.set_defaults(fn=cmd_hyper)

    p = leaf(sub, "hoffman", help="spectral bound for cross-intersecting pairs")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--in2", dest="input2", required=True)
    p.add_argument("--lam", type=_frac)
    p.set_defaults(fn=cmd_hoffman)

    p = leaf(sub, "shadow", help="shadows, or the shadow lower bound with --config")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--coords", type=_coords, default=[])
    p.add_argument("--config")
    code_out(p)
    p.set_defaults(fn=cmd_shadow)

    p = leaf(sub, "shearer", help="projection inequality, exact")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--k", type=int, required=True)
    p.set_defaults(fn=cmd_shearer)

    cfg = sub.add_parser("config", help="configurations")
    fsub = cfg.add_subparsers(dest="action", required=True, parser_class=_Parser)
    p = leaf(fsub, "find")
    p.add_argument("--config", required=True)
    p.add_argument("--in", dest="input", action="append")
    p.set_defaults(fn=cmd_config)
    p = leaf(fsub, "crosscut")
    p.add_argument("--config", required=True)
    p.set_defaults(fn=cmd_config)

    ex = sub.add_parser("extremal", help="exact extremal search")
    esub = ex.add_subparsers(dest="action", required=True, parser_class=_Parser)
    for action in ("avoid", "intersect", "verify"):
        p = leaf(esub, action)
        p.add_argument("--m", type=int, required=True)
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--t", type=int, required=True)
        p.set_defaults(fn=cmd_extremal)

    ch = sub.add_parser("chain", help="Markov chains")
    chsub = ch.add_subparsers(dest="action", required=True, parser_class=_Parser)
    p = leaf(chsub, "gap")
    p.add_argument("--kind", choices=["disagreement", "noise", "avoiding", "random"], default="disagreement")
    p.add_argument("--m", type=int, default=3)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--rho", type=float, default=0.5)
    p.add_argument("--alpha", type=float)
    p.set_defaults(fn=cmd_chain)
    p = leaf(chsub, "correlate")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--in2", dest="input2", required=True)
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--trials", type=int, default=10 ** 4)
    p.set_defaults(fn=cmd_chain)

    p = leaf(sub, "fairness", help="restriction fairness estimate")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--trials", type=int, default=10 ** 4)
    p.add_argument("--delta", type=_frac, default=Fraction(1, 10))
    p.set_defaults(fn=cmd_fairness)

    p = leaf(sub, "suite", help="acceptance | smoke | explore")
    p.add_argument("name")
    p.add_argument("--filter")
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--m", type=int, default=3)
    p.add_argument("--nmax", type=int, default=4)
    p.add_argument("--t", type=int, default=2)
    p.set_defaults(fn=None)
    return top


def _text(rep, indent=""):
    lines = []
    for k in sorted(rep):
        v = rep[k]
        if isinstance(v, dict):
            lines.append(f"{indent}{k}:")
            lines.extend(_text(v, indent + "  "))
        elif isinstance(v, str) and "\n" in v:
            lines.append(f"{indent}{k}:")
            lines.extend(indent + "  " + ln for ln in v.rstrip("\n").split("\n"))
        else:
            lines.append(f"{indent}{k}: {dumps(v)}")
    return lines


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        sys.stderr.write(f"anticode: {e}\n")
        return USAGE
    except SystemExit as e:  # --help
        return int(e.code or 0)
    for key, default in (("seed", None), ("jobs", 1), ("format", "json"), ("budget", None)):
        if not hasattr(args, key):
            setattr(args, key, default)
    fmt = args.format
    command = " ".join(a for a in (args.command, getattr(args, "style", None), getattr(args, "what", None),
                                   getattr(args, "action", None)) if a)

    def out(rep):
        rep = dict(rep)
        rep.setdefault("command", command)
        rep.setdefault("schema", SCHEMA_VERSION)
        if fmt == "json":
            sys.stdout.write(dumps(rep) + "\n")
        else:
            sys.stdout.write("\n".join(_text(to_jsonable(rep))) + "\n")

    try:
        if args.command == "suite":
            return cmd_suite(args, out)
        code, rep = args.fn(args)
    except UsageError as e:
        sys.stderr.write(f"anticode: {e}\n")
        return USAGE
    except cf.BudgetExceeded as e:
        out({"error": "budget", "message": str(e)})
        return UNKNOWN
    except (OSError, ValueError, KeyError) as e:
        sys.stderr.write(f"anticode: {type(e).__name__}: {e}\n")
        return USAGE
    out(rep)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
