"""``spanforge`` command-line front end.

Reports go to stdout as JSON (``--pretty`` for aligned tables), diagnostics to
stderr. Exit status: 0 success, 1 verification failure, 2 usage or format error.
"""

from __future__ import annotations

import argparse
import json
import sys
from math import comb

import numpy as np

from . import gallery
from .adversary import (InvalidAdversaryMatrix, adversary_value, check_dual_feasibility, dual_objective,
                        dual_to_nbsp, dual_to_nbspwoi, nbsp_to_dual)
from .algorithms import check_zero_error, compile_nbsp, compile_woi, deutsch_parity_example
from .config import ENV_EPS, Tolerances, default_tolerances
from .functions import PartialFunction, validate_certificate_structure
from .io import Bundle, FormatError, dumps, parse_bundle
from .learning_graph import DEFAULT_COLUMN_CAP, lg_complexity, lg_to_nbsp, lg_to_nbspwoi, validate_flows
from .linalg import InfeasibleError
from .relations import (RelationSpanProgram, canonicalize_relation, check_state_conversion_feasibility,
                        choose_one_relation, evaluates_relation, is_canonical_relation, relation_complexity,
                        relation_to_state_solution, state_objective)
from .span import (InvalidWitnessError, Kind, complexity, canonicalize, evaluates, is_canonical,
                   optimal_witnesses, woi_to_general)
from .triangle import (NOT_COLORFUL, RNG_ALGORITHM, monte_carlo_negative_size, sample_instance,
                       triangle_label, triangle_program, triangle_witnesses)


class UsageError(Exception):
    """Wrong kind of input for the command (exit 2)."""


class Failure(Exception):
    """Verification or feasibility failure (exit 1)."""


# -- helpers ---------------------------------------------------------------------------

def _require(b: Bundle, *types: str) -> None:
    if b.type not in types:
        raise UsageError(f"expected a bundle of type {' or '.join(types)}, got {b.type!r}")


def _target(b: Bundle):
    """The function or relation a span-program bundle is checked against."""
    target = b.get("function") or b.get("relation")
    if target is None:
        raise UsageError("span_program bundle carries neither 'function' nor 'relation'")
    P = b["program"]
    is_rel = isinstance(P, RelationSpanProgram)
    if is_rel != ("relation" in b.data):
        raise UsageError("relation programs pair with a 'relation', other programs with a 'function'")
    core = P.program if is_rel else P
    if (core.n, core.ell, core.m) != (target.n, target.ell, target.m):
        raise UsageError(f"program (n, ell, m) = {(core.n, core.ell, core.m)} does not match "
                         f"{(target.n, target.ell, target.m)}")
    return target


def _witnesses(b: Bundle, tol: Tolerances):
    """Supplied witnesses, or solver-optimal ones for plain function programs."""
    W = b.get("witnesses")
    if W is not None:
        return W, False
    if isinstance(b["program"], RelationSpanProgram):
        raise UsageError("relation programs need explicit witnesses")
    try:
        return optimal_witnesses(b["program"], b["function"], tol), True
    except InfeasibleError as exc:
        raise Failure(f"the program does not compute the function: {exc}") from None


def _failures(report) -> list[dict]:
    return [{"x": list(x), **report.residuals[x].as_dict()} for x in report.failures]


def _history(b: Bundle, entry: dict) -> dict:
    prov = dict(b.provenance)
    prov["history"] = list(prov.get("history", [])) + [entry]
    return prov


def _base(command: str, tol: Tolerances, seed=None) -> dict:
    return {"command": command, "tolerances": tol.as_dict(), "seed": seed}


def _one_based(S) -> list[int]:
    return [i + 1 for i in sorted(S)]


def _seed_of(b: Bundle):
    return b.provenance.get("seed")


# -- verify / complexity -------------------------------------------------------------------

def _verify_program(b: Bundle, tol: Tolerances, report: dict) -> bool:
    target = _target(b)
    W, solved = _witnesses(b, tol)
    report["witnesses"] = "solved" if solved else "supplied"
    P = b["program"]
    if isinstance(P, RelationSpanProgram):
        rep = evaluates_relation(P, target, W, tol)
    else:
        rep = evaluates(P, target, W, tol)
    report["inputs"] = len(target.domain)
    report["max_residual"] = rep.max_residual
    report["failures"] = _failures(rep)
    if rep.valid:
        if isinstance(P, RelationSpanProgram):
            pos, neg, wsize = relation_complexity(P, target, W, tol)
            report.update(wsize=wsize, wsize_plus=pos, wsize_minus=neg, balanced=float(np.sqrt(pos * neg)))
        else:
            report.update(complexity(P, target, W, check=False).as_dict())
    return rep.valid


def cmd_verify(args, tol):
    b = parse_bundle(args.path)
    report = _base("verify", tol, _seed_of(b))
    report["type"] = b.type
    if b.type == "span_program":
        ok = _verify_program(b, tol, report)
    elif b.type == "dual_solution":
        res = check_dual_feasibility(b["dual"], b["function"])
        ok = res <= tol.eps_feas
        report.update(max_residual=res, objective=dual_objective(b["dual"]))
    elif b.type == "state_solution":
        res = check_state_conversion_feasibility(b["dual"], b["relation"])
        ok = res <= tol.eps_feas
        report.update(max_residual=res, objective=state_objective(b["dual"]))
    elif b.type == "algorithm":
        rep = check_zero_error(b["algorithm"], b["function"], tol)
        ok = rep.valid
        report.update(max_residual=rep.max_deviation, failures=[list(x) for x in rep.failures],
                      Q=b["algorithm"].Q)
    elif b.type == "learning_graph":
        rep = validate_flows(b["graph"], b["flows"], b["function"], tol=tol)
        ok = rep.valid
        report.update(max_residual=rep.max_residual, illegal_sinks=[[list(x), _one_based(S)] for x, S in rep.illegal_sinks],
                      missing=[list(x) for x in rep.missing],
                      negative_values=[list(x) for x in rep.negative_values])
        if ok:
            N, Pc, C = lg_complexity(b["graph"], b["flows"])
            report.update(N=N, P=Pc, C=C)
    elif b.type == "certificates":
        rep = validate_certificate_structure(b["function"], b["certificates"])
        ok = rep.valid
        report.update(max_residual=0.0, missing=[list(x) for x in rep.missing],
                      failing=[[list(x), _one_based(S)] for x, S in rep.failing])
    elif b.type == "adversary_matrix":
        report["max_residual"] = 0.0
        try:
            b["adversary"].validate(b["function"], tol.eps)
            ok = True
        except InvalidAdversaryMatrix as exc:
            report["error"] = str(exc)
            ok = False
    else:
        raise UsageError(f"nothing to verify in a {b.type!r} bundle")
    report["valid"] = bool(ok)
    return report, 0 if ok else 1


def cmd_complexity(args, tol):
    b = parse_bundle(args.path)
    report = _base("complexity", tol, _seed_of(b))
    if b.type == "learning_graph":
        rep = validate_flows(b["graph"], b["flows"], b["function"], tol=tol)
        report["max_residual"] = rep.max_residual
        if not rep.valid:
            report["valid"] = False
            return report, 1
        N, Pc, C = lg_complexity(b["graph"], b["flows"])
        report.update(valid=True, N=N, P=Pc, C=C)
        return report, 0
    _require(b, "span_program")
    ok = _verify_program(b, tol, report)
    report["valid"] = ok
    if ok and not isinstance(b["program"], RelationSpanProgram):
        W, _ = _witnesses(b, tol)
        cr = complexity(b["program"], b["function"], W, check=False)
        report["balancing_factor"] = cr.balancing_factor()
        report["per_input"] = [{"x": list(x), "positive": cr.positive[x], "negative": cr.negative[x]}
                               for x in b["function"].domain]
    return report, 0 if ok else 1


# -- transformations ---------------------------------------------------------------------------

def _canonical(b: Bundle, tol: Tolerances):
    """Canonical program and witnesses of a span-program bundle, plus a report entry."""
    target = _target(b)
    W, _ = _witnesses(b, tol)
    P = b["program"]
    try:
        if isinstance(P, RelationSpanProgram):
            _, _, before = relation_complexity(P, target, W, tol)
            P2, W2 = canonicalize_relation(P, target, W, tol)
            _, _, after = relation_complexity(P2, target, W2, tol)
            rep = evaluates_relation(P2, target, W2, tol)
        else:
            before = complexity(P, target, W, tol=tol).wsize
            P2, W2 = canonicalize(P, target, W, tol)
            after = complexity(P2, target, W2, tol=tol).wsize
            rep = evaluates(P2, target, W2, tol)
    except InvalidWitnessError as exc:
        raise Failure(str(exc)) from None
    entry = {"command": "canonicalize", "tolerances": tol.as_dict(), "wsize_before": before,
             "wsize_after": after, "max_residual": rep.max_residual}
    return P2, W2, entry


def cmd_canonicalize(args, tol):
    b = parse_bundle(args.path)
    _require(b, "span_program")
    P2, W2, entry = _canonical(b, tol)
    data = dict(b.data, program=P2, witnesses=W2)
    return Bundle("span_program", data, _history(b, entry)), 0


def _as_canonical(b: Bundle, tol: Tolerances):
    P, target = b["program"], _target(b)
    check = is_canonical_relation if isinstance(P, RelationSpanProgram) else is_canonical
    if check(P, target, tol) and b.get("witnesses") is not None:
        return P, b["witnesses"], []
    P2, W2, entry = _canonical(b, tol)
    return P2, W2, [entry]


def cmd_convert(args, tol):
    b = parse_bundle(args.path)
    to = args.to
    entry = {"command": f"convert --to {to}", "tolerances": tol.as_dict()}
    if to in ("dual", "state-solution"):
        _require(b, "span_program")
        want_rel = to == "state-solution"
        if isinstance(b["program"], RelationSpanProgram) != want_rel:
            raise UsageError(f"--to {to} needs a {'relation' if want_rel else 'function'} span program")
        P, W, pre = _as_canonical(b, tol)
        if want_rel:
            r = b["relation"]
            sol = relation_to_state_solution(P, W, r, tol)
            res = check_state_conversion_feasibility(sol, r)
            _, _, wsize = relation_complexity(P, r, W, tol)
            entry.update(max_residual=res, objective=state_objective(sol), wsize=wsize)
            out = Bundle("state_solution", {"dual": sol, "relation": r}, {})
        else:
            f = b["function"]
            sol = nbsp_to_dual(P, W, f, tol)
            res = check_dual_feasibility(sol, f)
            entry.update(max_residual=res, objective=dual_objective(sol), wsize=complexity(P, f, W, tol=tol).wsize)
            out = Bundle("dual_solution", {"dual": sol, "function": f}, {})
        prov = dict(b.provenance, history=list(b.provenance.get("history", [])) + pre + [entry])
        out.provenance = prov
        return out, 0 if res <= tol.eps_feas else 1
    if to == "nbsp" and b.type == "span_program":
        P = b["program"]
        if isinstance(P, RelationSpanProgram) or P.kind is Kind.GENERAL:
            raise UsageError("--to nbsp on a span program expects an orthogonal-inputs function program")
        P2 = woi_to_general(P)
        entry["max_residual"] = 0.0
        return Bundle("span_program", dict(b.data, program=P2), _history(b, entry)), 0
    _require(b, "dual_solution")
    sol, f = b["dual"], b["function"]
    objective = dual_objective(sol)
    try:
        P, W = (dual_to_nbsp if to == "nbsp" else dual_to_nbspwoi)(sol, f, tol)
    except InfeasibleError as exc:
        raise Failure(str(exc)) from None
    rep = evaluates(P, f, W, tol)
    wsize = complexity(P, f, W, check=False).wsize
    entry.update(max_residual=rep.max_residual, objective=objective, wsize=wsize,
                 ratio=wsize / objective if objective else None, valid=rep.valid)
    return Bundle("span_program", {"program": P, "witnesses": W, "function": f}, _history(b, entry)), \
        0 if rep.valid else 1


def cmd_compile(args, tol):
    b = parse_bundle(args.path)
    entry = {"command": f"compile --from {args.source} --variant {args.variant}", "tolerances": tol.as_dict()}
    f = b["function"] if "function" in b.data else None
    try:
        if args.source == "learning-graph":
            _require(b, "learning_graph")
            flow_rep = validate_flows(b["graph"], b["flows"], f, tol=tol)
            if not flow_rep.valid:
                raise Failure(f"invalid flows (max residual {flow_rep.max_residual:.3e})")
            fn = lg_to_nbsp if args.variant == "nbsp" else lg_to_nbspwoi
            P, W = fn(b["graph"], b["flows"], f, realized_only=args.realized_only, cap=args.cap, tol=tol)
            entry.update(cap=args.cap, realized_only=args.realized_only,
                         C=lg_complexity(b["graph"], b["flows"])[2])
        else:
            _require(b, "algorithm")
            fn = compile_nbsp if args.variant == "nbsp" else compile_woi
            P, W = fn(b["algorithm"], f, tol)
            entry["Q"] = b["algorithm"].Q
    except (InfeasibleError, InvalidWitnessError) as exc:
        raise Failure(str(exc)) from None
    rep = evaluates(P, f, W, tol)
    entry.update(max_residual=rep.max_residual, valid=rep.valid)
    if rep.valid:
        entry.update(complexity(P, f, W, check=False).as_dict())
    return Bundle("span_program", {"program": P, "witnesses": W, "function": f}, _history(b, entry)), \
        0 if rep.valid else 1


# -- generators --------------------------------------------------------------------------------------

def _triangle_bundle(n_vertices: int, seed: int, max_tries: int = 1000) -> Bundle:
    for t in range(max_tries):
        G, col = sample_instance(n_vertices, seed ^ t)
        label = triangle_label(G, col)
        if label is not NOT_COLORFUL:
            break
    else:
        raise Failure(f"no colourful instance in {max_tries} draws")
    P = triangle_program(n_vertices, col)
    w, wbar = triangle_witnesses(P, G, col)
    x = G.word()
    f = PartialFunction(comb(n_vertices, 2), 2, P.m, {x: label})
    from .span import WitnessSet
    W = WitnessSet()
    W.add(x, w, wbar)
    prov = {"example": "triangle", "parameters": {"n_vertices": n_vertices}, "seed": seed, "trial": t,
            "rng": RNG_ALGORITHM, "graph_edges": sorted([list(e) for e in G.edges]),
            "triangle": list(G.triangle), "coloring": list(col.colors)}
    return Bundle("span_program", {"program": P, "witnesses": W, "function": f}, prov)


def cmd_gallery(args, tol):
    name = args.name
    params = {}
    if name in ("sparse-identity", "max-woi", "max-nbsp", "star-learning-graph"):
        params = {"ell": args.ell, "n": args.n}
    try:
        if name == "sparse-identity":
            P, W, f = gallery.sparse_identity(args.ell, args.n)
        elif name == "max-woi":
            P, W, f = gallery.max_woi(args.ell, args.n)
        elif name == "max-nbsp":
            P, W, f = gallery.max_nbsp(args.ell, args.n)
        elif name == "triangle":
            return _triangle_bundle(args.n_vertices, args.seed), 0
        elif name == "choose-one":
            R, W, r = choose_one_relation()
            return Bundle("span_program", {"program": R, "witnesses": W, "relation": r},
                          {"example": name, "parameters": {}, "seed": None}), 0
        elif name == "deutsch":
            alg, f = deutsch_parity_example()
            return Bundle("algorithm", {"algorithm": alg, "function": f},
                          {"example": name, "parameters": {}, "seed": None}), 0
        elif name == "or-promise":
            G, f = gallery.or_promise_adversary()
            return Bundle("adversary_matrix", {"adversary": G, "function": f},
                          {"example": name, "parameters": {}, "seed": None}), 0
        elif name == "star-learning-graph":
            G, F, f = gallery.star_learning_graph(args.ell, args.n)
            return Bundle("learning_graph", {"graph": G, "flows": F, "function": f},
                          {"example": name, "parameters": params, "seed": None}), 0
        else:  # pragma: no cover - argparse restricts the choices
            raise UsageError(f"unknown example {name!r}")
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return Bundle("span_program", {"program": P, "witnesses": W, "function": f},
                  {"example": name, "parameters": params, "seed": None}), 0


def cmd_adversary_eval(args, tol):
    b = parse_bundle(args.path)
    _require(b, "adversary_matrix")
    G, f = b["adversary"], b["function"]
    report = _base("adversary-eval", tol, _seed_of(b))
    try:
        value = adversary_value(G, f, tol)
    except (InvalidAdversaryMatrix, ValueError) as exc:
        report.update(valid=False, error=str(exc), max_residual=None)
        return report, 1
    report.update(value=value, max_residual=0.0, valid=True)
    if args.against:
        other = parse_bundle(args.against)
        if other.type == "span_program":
            if tuple(other["function"].domain) != tuple(f.domain):
                raise UsageError("program and adversary matrix have different domains")
            P, W, _ = _as_canonical(other, tol)
            sol = nbsp_to_dual(P, W, f, tol)
        else:
            _require(other, "dual_solution")
            sol = other["dual"]
        res = check_dual_feasibility(sol, f)
        obj = dual_objective(sol)
        ok = res <= tol.eps_feas and value <= obj + tol.eps_feas
        report.update(objective=obj, max_residual=res, bound_holds=bool(value <= obj + tol.eps_feas), valid=ok)
        return report, 0 if ok else 1
    return report, 0


def cmd_triangle_mc(args, tol):
    report = _base("triangle-mc", tol, args.seed)
    report.update(trials=args.trials, rng=RNG_ALGORITHM, results=[])
    ok = True
    max_res = 0.0
    for nv in args.n_vertices:
        s = monte_carlo_negative_size(nv, args.trials, args.seed)
        p = 6 / 27
        sigma = np.sqrt(p * (1 - p) / s.trials)
        checks = {
            "hit_rate_within_3_sigma": bool(abs(s.hit_rate - p) <= 3 * sigma),
            "positive_size_is_3": bool(s.max_positive_deviation <= 1e-10),
            "residuals_ok": bool(s.max_residual <= tol.eps),
            "mean_negative_below_120n2": bool(s.mean_negative <= 120 * nv ** 2),
        }
        ok &= all(checks.values())
        max_res = max(max_res, s.max_residual)
        report["results"].append({**s.as_dict(), "expected_hit_rate": p, "sigma": sigma, "checks": checks})
    report.update(max_residual=max_res, valid=bool(ok))
    return report, 0 if ok else 1


# -- parser and output -----------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    # the subcommand copy must not reset a --pretty given before the subcommand
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--pretty", action="store_true", default=argparse.SUPPRESS,
                        help="aligned text instead of JSON")
    parser = argparse.ArgumentParser(prog="spanforge", parents=[common],
                                     description="Span programs, adversary duals and their conversions.",
                                     epilog=f"Set {ENV_EPS} to override the residual tolerance.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, fn, help_):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.set_defaults(fn=fn)
        return p

    for name, fn, help_ in [("verify", cmd_verify, "check witnesses or feasibility"),
                            ("complexity", cmd_complexity, "witness sizes and balanced complexity"),
                            ("canonicalize", cmd_canonicalize, "canonical form of a span program")]:
        add(name, fn, help_).add_argument("path", nargs="?", default="-")

    p = add("convert", cmd_convert, "span program <-> dual adversary solution")
    p.add_argument("--to", required=True, choices=["dual", "nbsp", "nbspwoi", "state-solution"])
    p.add_argument("path", nargs="?", default="-")

    p = add("compile", cmd_compile, "learning graph or algorithm to span program")
    p.add_argument("--from", dest="source", required=True, choices=["learning-graph", "algorithm"])
    p.add_argument("--variant", choices=["nbsp", "woi"], default="nbsp")
    p.add_argument("--cap", type=int, default=DEFAULT_COLUMN_CAP, help="refuse more non-free columns than this")
    p.add_argument("--realized-only", action="store_true",
                   help="only assignments that some domain word realises")
    p.add_argument("path", nargs="?", default="-")

    p = add("gallery", cmd_gallery, "emit an example as a bundle")
    p.add_argument("name", choices=["sparse-identity", "max-woi", "max-nbsp", "triangle", "choose-one",
                                    "deutsch", "or-promise", "star-learning-graph"])
    p.add_argument("--ell", type=int, default=3)
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--n-vertices", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)

    p = add("adversary-eval", cmd_adversary_eval, "value of an adversary matrix")
    p.add_argument("path", nargs="?", default="-")
    p.add_argument("--against", help="span program or dual solution whose objective bounds the value")

    p = add("triangle-mc", cmd_triangle_mc, "Monte Carlo check of the triangle witnesses")
    p.add_argument("--n-vertices", type=int, nargs="+", default=list(range(6, 13)))
    p.add_argument("--trials", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    return parser


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else str(v)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _table(obj, prefix="") -> list[str]:
    rows = []
    if isinstance(obj, dict):
        for k, v in obj.items():
            rows += _table(v, f"{prefix}{k}.")
    elif isinstance(obj, list) and obj and isinstance(obj[0], (dict, list)):
        for i, v in enumerate(obj):
            rows += _table(v, f"{prefix}{i}.")
    else:
        rows.append((prefix[:-1], json.dumps(obj)))
    return rows


def render(result, pretty: bool) -> str:
    if isinstance(result, Bundle):
        if not pretty:
            return dumps(result)
        result = {"type": result.type, "provenance": result.provenance}
    result = _jsonable(result)
    if not pretty:
        return json.dumps(result, sort_keys=True, indent=1) + "\n"
    rows = _table(result)
    width = max((len(k) for k, _ in rows), default=0)
    return "".join(f"{k.ljust(width)}  {v}\n" for k, v in rows)


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        tol = default_tolerances()
    except ValueError:
        print(f"error: {ENV_EPS} must be a number", file=sys.stderr)
        return 2
    try:
        result, code = args.fn(args, tol)
    except (Failure, InfeasibleError, InvalidWitnessError) as exc:
        print(f"failure: {exc}", file=sys.stderr)
        return 1
    except (FormatError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    sys.stdout.write(render(result, getattr(args, "pretty", False)))
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
