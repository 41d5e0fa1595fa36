"""JSON bundles: schema-checked parsing and deterministic serialisation.

Every file is an object with a ``"type"`` tag, an optional ``"provenance"``
object and type-specific payload. Complex numbers are ``[re, im]`` pairs;
index positions ``j`` and index sets ``S`` are 1-based, input symbols and
outputs are 0-based as in ``[ell]`` and ``[m]``. Serialisation sorts keys, so
``dumps(loads(text)) == text`` for text produced by :func:`dumps`.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass, field
from typing import Any

import jsonschema
import numpy as np

from .adversary import AdversaryMatrix, DualAdversarySolution
from .algorithms import ZeroErrorAlgorithm
from .functions import CertificateStructure, PartialFunction, Relation
from .learning_graph import FlowSet, LearningGraph
from .relations import RelationSpanProgram, StateConversionSolution
from .span import Kind, SpanProgram, WitnessSet


class FormatError(ValueError):
    """Malformed or schema-violating input."""


# -- schemas -------------------------------------------------------------------------

_num = {"type": "number"}
_int = {"type": "integer"}
_nat = {"type": "integer", "minimum": 0}
_pos = {"type": "integer", "minimum": 1}
_complex = {"type": "array", "items": _num, "minItems": 2, "maxItems": 2}
_vector = {"type": "array", "items": _complex}
_matrix = {"type": "array", "items": _vector}
_word = {"type": "array", "items": _nat}
_subset = {"type": "array", "items": _pos}


def _obj(required: dict, optional: dict | None = None) -> dict:
    props = dict(required)
    props.update(optional or {})
    return {"type": "object", "properties": props, "required": sorted(required), "additionalProperties": False}


_function = _obj({"n": _pos, "ell": {"type": "integer", "minimum": 2}, "m": _pos,
                  "table": {"type": "array", "minItems": 1, "items": _obj({"x": _word, "f": _nat})}})
_relation = _obj({"n": _pos, "ell": {"type": "integer", "minimum": 2}, "m": _pos,
                  "table": {"type": "array", "minItems": 1,
                            "items": _obj({"x": _word, "r": {"type": "array", "items": _nat, "minItems": 1}})}})
_witness = _obj({"x": _word, "w": _vector, "wbar": _vector})
_program = {
    "type": "object",
    "properties": {
        "kind": {"enum": ["general", "orthogonal_inputs", "relation"]},
        "n": _pos, "ell": {"type": "integer", "minimum": 2},
        "targets": {"type": "array", "items": _vector, "minItems": 1},
        "inputs": {"type": "array", "items": {
            "type": "object",
            "properties": {"j": _pos, "q": _nat, "vectors": _matrix, "generators": _matrix},
            "required": ["j", "q"], "additionalProperties": False}},
        "free": _matrix,
        "block_dims": {"type": "array", "items": _nat},
        "free_dim": _nat,
        "A": _matrix,
        "domain_order": {"type": "array", "items": _word},
    },
    "required": ["kind", "n", "ell", "targets", "inputs"],
    "additionalProperties": False,
    "allOf": [{"if": {"properties": {"kind": {"const": "general"}}},
               "then": {"required": ["A", "block_dims", "free_dim"]}}],
}
_provenance = {"type": "object"}
_dual = _obj({"d_u": _nat, "vectors": {"type": "array", "items": _obj(
    {"x": _word, "j": _pos, "u": _vector, "v": _vector})}},
    {"sigma_dim": _nat, "sigma": {"type": "array", "items": _obj({"x": _word, "alpha": _nat, "vector": _vector})}})
_graph = _obj({"n": _pos, "edges": {"type": "array", "minItems": 1,
                                   "items": _obj({"S": _subset, "j": _pos, "w": _num})}})
_flows = {"type": "array", "items": _obj({"x": _word, "p": {"type": "array", "items": _obj(
    {"S": _subset, "j": _pos, "value": _num})}})}
_algorithm = _obj({"r": _nat, "n": _pos, "ell": {"type": "integer", "minimum": 2}, "m": _pos, "Q": _nat,
                   "unitaries": {"type": "array", "items": _matrix, "minItems": 1}})
_adversary = _obj({"domain_order": {"type": "array", "items": _word},
                   "matrix": {"type": "array", "items": {"type": "array", "items": _num}}})
_certs = _obj({"certs": {"type": "array", "items": _obj(
    {"x": _word, "minimal_sets": {"type": "array", "items": _subset}})}})


def _bundle_schema(tag: str, required: dict, optional: dict | None = None) -> dict:
    req = {"type": {"const": tag}}
    req.update(required)
    opt = {"provenance": _provenance}
    opt.update(optional or {})
    return _obj(req, opt)


SCHEMAS = {
    "function": _bundle_schema("function", {"function": _function}),
    "relation": _bundle_schema("relation", {"relation": _relation}),
    "certificates": _bundle_schema("certificates", {"function": _function, "certificates": _certs}),
    "span_program": _bundle_schema("span_program", {"program": _program},
                                   {"function": _function, "relation": _relation,
                                    "witnesses": {"type": "array", "items": _witness}}),
    "dual_solution": _bundle_schema("dual_solution", {"dual": _dual, "function": _function}),
    "state_solution": _bundle_schema("state_solution", {"dual": _dual, "relation": _relation}),
    "adversary_matrix": _bundle_schema("adversary_matrix", {"adversary": _adversary, "function": _function}),
    "learning_graph": _bundle_schema("learning_graph", {"graph": _graph, "flows": _flows, "function": _function}),
    "algorithm": _bundle_schema("algorithm", {"algorithm": _algorithm, "function": _function}),
}


# -- encoding helpers ---------------------------------------------------------------

def enc_c(z) -> list[float]:
    z = complex(z)
    if not (np.isfinite(z.real) and np.isfinite(z.imag)):
        raise FormatError("non-finite value")
    return [float(z.real) + 0.0, float(z.imag) + 0.0]  # + 0.0 folds -0.0


def enc_vec(v) -> list:
    return [enc_c(z) for z in np.asarray(v, dtype=complex).ravel()]


def enc_cols(M) -> list:
    """A matrix as the list of its columns."""
    M = np.asarray(M, dtype=complex)
    return [enc_vec(M[:, k]) for k in range(M.shape[1])]


def enc_rows(M) -> list:
    M = np.asarray(M, dtype=complex)
    return [enc_vec(row) for row in M]


def dec_vec(data) -> np.ndarray:
    if not data:
        return np.zeros(0, complex)
    a = np.asarray(data, dtype=float)
    out = np.empty(len(a), complex)
    out.real, out.imag = a[:, 0], a[:, 1]
    return out


def dec_rows(data, ncols: int | None = None) -> np.ndarray:
    if not data:
        return np.zeros((0, ncols or 0), complex)
    return np.array([dec_vec(r) for r in data])


def dec_cols(data, nrows: int) -> np.ndarray:
    if not data:
        return np.zeros((nrows, 0), complex)
    return np.array([dec_vec(c) for c in data]).T


def _words(xs) -> list:
    return [list(map(int, x)) for x in xs]


def enc_function(f: PartialFunction) -> dict:
    return {"n": f.n, "ell": f.ell, "m": f.m, "table": [{"x": list(x), "f": f(x)} for x in f.domain]}


def dec_function(d) -> PartialFunction:
    return PartialFunction(d["n"], d["ell"], d["m"], {tuple(e["x"]): e["f"] for e in d["table"]})


def enc_relation(r: Relation) -> dict:
    return {"n": r.n, "ell": r.ell, "m": r.m, "table": [{"x": list(x), "r": sorted(r(x))} for x in r.domain]}


def dec_relation(d) -> Relation:
    return Relation(d["n"], d["ell"], d["m"], {tuple(e["x"]): frozenset(e["r"]) for e in d["table"]})


def enc_program(P: SpanProgram, kind: str | None = None) -> dict:
    out = {"kind": kind or P.kind.value, "n": P.n, "ell": P.ell, "targets": enc_rows(P.targets)}
    if P.kind is Kind.ORTHOGONAL_INPUTS:
        out["inputs"] = [{"j": j + 1, "q": q, "vectors": enc_cols(P.inputs[(j, q)])}
                         for (j, q) in sorted(P.inputs) if P.inputs[(j, q)].shape[1]]
        if kind != "relation":
            out["free"] = enc_cols(P.free)
    else:
        out["inputs"] = [{"j": j + 1, "q": q, "generators": enc_cols(P.generators[(j, q)])}
                         for (j, q) in sorted(P.generators) if P.generators[(j, q)].shape[1]]
        out["block_dims"] = list(P.block_dims)
        out["free_dim"] = P.free_dim
        out["A"] = enc_rows(P.A)
    if P.domain_order is not None:
        out["domain_order"] = _words(P.domain_order)
    return out


def dec_program(d):
    targets = dec_rows(d["targets"])
    dim = targets.shape[1]
    order = None if "domain_order" not in d else [tuple(x) for x in d["domain_order"]]
    n, ell = d["n"], d["ell"]
    for e in d["inputs"]:
        if not 1 <= e["j"] <= n or not 0 <= e["q"] < ell:
            raise FormatError(f"input entry (j={e['j']}, q={e['q']}) out of range")
    if d["kind"] == "general":
        gens = {}
        for e in d["inputs"]:
            if "generators" not in e:
                raise FormatError("general programs list 'generators' per (j, q)")
            gens[(e["j"] - 1, e["q"])] = dec_cols(e["generators"], d["block_dims"][e["j"] - 1])
        A = dec_rows(d["A"], sum(d["block_dims"]) + d["free_dim"])
        return SpanProgram.general(n, ell, targets, d["block_dims"], gens, A,
                                   free_dim=d["free_dim"], domain_order=order)
    inputs = {}
    for e in d["inputs"]:
        if "vectors" not in e:
            raise FormatError("orthogonal-input programs list 'vectors' per (j, q)")
        inputs[(e["j"] - 1, e["q"])] = dec_cols(e["vectors"], dim)
    if d["kind"] == "relation":
        if d.get("free"):
            raise FormatError("relation programs have no free vectors")
        return RelationSpanProgram(n, ell, targets, inputs, None if order is None else tuple(order))
    return SpanProgram.orthogonal(n, ell, targets, inputs, dec_cols(d.get("free", []), dim), domain_order=order)


def enc_witnesses(W: WitnessSet, domain) -> list:
    return [{"x": list(x), "w": enc_vec(W.positive[x]), "wbar": enc_vec(W.negative[x])}
            for x in domain if x in W]


def dec_witnesses(data) -> WitnessSet:
    W = WitnessSet()
    for e in data:
        W.add(tuple(e["x"]), dec_vec(e["w"]), dec_vec(e["wbar"]))
    return W


def enc_dual(sol: DualAdversarySolution) -> dict:
    out = {"d_u": sol.d_u, "vectors": [
        {"x": list(x), "j": j + 1, "u": enc_vec(sol.u[i, j]), "v": enc_vec(sol.v[i, j])}
        for i, x in enumerate(sol.domain) for j in range(sol.n)]}
    if isinstance(sol, StateConversionSolution):
        out["sigma_dim"] = sol.sigma.shape[2]
        out["sigma"] = [{"x": list(x), "alpha": a, "vector": enc_vec(sol.sigma[i, a])}
                        for i, x in enumerate(sol.domain) for a in range(sol.sigma.shape[1])]
    return out


def dec_dual(d, n: int, m: int | None = None):
    order = []
    for e in d["vectors"]:
        x = tuple(e["x"])
        if x not in order:
            order.append(x)
    pos = {x: i for i, x in enumerate(order)}
    U = np.zeros((len(order), n, d["d_u"]), complex)
    V = np.zeros_like(U)
    seen = set()
    for e in d["vectors"]:
        i, j = pos[tuple(e["x"])], e["j"] - 1
        if not 0 <= j < n:
            raise FormatError(f"dual vector index j={e['j']} out of range")
        u, v = dec_vec(e["u"]), dec_vec(e["v"])
        if u.size != d["d_u"] or v.size != d["d_u"]:
            raise FormatError(f"dual vectors for x={e['x']}, j={e['j']} do not have dimension d_u")
        U[i, j], V[i, j] = u, v
        seen.add((i, j))
    if len(seen) != len(order) * n:
        raise FormatError("dual solution does not list every (x, j)")
    if m is None:
        return DualAdversarySolution(tuple(order), U, V)
    S = np.zeros((len(order), m, d.get("sigma_dim", m)), complex)
    for e in d.get("sigma", []):
        S[pos[tuple(e["x"])], e["alpha"]] = dec_vec(e["vector"])
    return StateConversionSolution(tuple(order), U, V, S)


def enc_graph(G: LearningGraph) -> dict:
    return {"n": G.n, "edges": [{"S": [i + 1 for i in sorted(S)], "j": j + 1, "w": G.weights[(S, j)]}
                                for S, j in G.edges]}


def dec_graph(d) -> LearningGraph:
    return LearningGraph(d["n"], {(frozenset(i - 1 for i in e["S"]), e["j"] - 1): e["w"] for e in d["edges"]})


def enc_flows(F: FlowSet, G: LearningGraph) -> list:
    out = []
    for x in sorted(F.flows):
        fl = F.flows[x]
        out.append({"x": list(x), "p": [{"S": [i + 1 for i in sorted(S)], "j": j + 1, "value": fl[(S, j)]}
                                        for S, j in G.edges if (S, j) in fl]})
    return out


def dec_flows(data) -> FlowSet:
    return FlowSet({tuple(e["x"]): {(frozenset(i - 1 for i in p["S"]), p["j"] - 1): p["value"] for p in e["p"]}
                    for e in data})


def enc_algorithm(alg: ZeroErrorAlgorithm) -> dict:
    return {"r": alg.r, "n": alg.n, "ell": alg.ell, "m": alg.m, "Q": alg.Q,
            "unitaries": [enc_rows(U) for U in alg.unitaries]}


def dec_algorithm(d) -> ZeroErrorAlgorithm:
    if len(d["unitaries"]) != d["Q"] + 1:
        raise FormatError(f"Q={d['Q']} needs {d['Q'] + 1} unitaries, got {len(d['unitaries'])}")
    return ZeroErrorAlgorithm(d["r"], d["n"], d["ell"], d["m"], tuple(dec_rows(U) for U in d["unitaries"]))


# -- bundles -----------------------------------------------------------------------------

@dataclass
class Bundle:
    """A tagged collection of objects. ``data`` keys depend on ``type``:

    function: function; relation: relation; certificates: function, certificates;
    span_program: program, function or relation, witnesses (optional);
    dual_solution: dual, function; state_solution: dual, relation;
    adversary_matrix: adversary, function; learning_graph: graph, flows, function;
    algorithm: algorithm, function.
    """

    type: str
    data: dict[str, Any]
    provenance: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.data[key]

    def get(self, key, default=None):
        return self.data.get(key, default)


def _domain_of(b: Bundle):
    target = b.get("function") or b.get("relation")
    if target is not None:
        return target.domain
    return sorted(b["witnesses"].positive)


def to_json(b: Bundle) -> dict:
    out: dict[str, Any] = {"type": b.type}
    if b.provenance:
        out["provenance"] = b.provenance
    d = b.data
    if "function" in d:
        out["function"] = enc_function(d["function"])
    if "relation" in d:
        out["relation"] = enc_relation(d["relation"])
    if b.type == "certificates":
        E = d["certificates"]
        out["certificates"] = {"certs": [{"x": list(x), "minimal_sets": [[i + 1 for i in sorted(S)] for S in E.certs[x]]}
                                         for x in sorted(E.certs)]}
    elif b.type == "span_program":
        P = d["program"]
        if isinstance(P, RelationSpanProgram):
            out["program"] = enc_program(P.program, kind="relation")
        else:
            out["program"] = enc_program(P)
        if d.get("witnesses") is not None:
            out["witnesses"] = enc_witnesses(d["witnesses"], _domain_of(b))
    elif b.type in ("dual_solution", "state_solution"):
        out["dual"] = enc_dual(d["dual"])
    elif b.type == "adversary_matrix":
        G = d["adversary"]
        out["adversary"] = {"domain_order": _words(G.domain), "matrix": [[float(v) for v in row] for row in G.gamma]}
    elif b.type == "learning_graph":
        out["graph"] = enc_graph(d["graph"])
        out["flows"] = enc_flows(d["flows"], d["graph"])
    elif b.type == "algorithm":
        out["algorithm"] = enc_algorithm(d["algorithm"])
    elif b.type not in ("function", "relation"):
        raise FormatError(f"unknown bundle type {b.type!r}")
    return out


def dumps(b: Bundle) -> str:
    try:
        return json.dumps(to_json(b), sort_keys=True, allow_nan=False, indent=1) + "\n"
    except ValueError as exc:
        raise FormatError(f"cannot serialise: {exc}") from None


serialize_bundle = dumps


def _reject_constant(name):
    raise FormatError(f"non-finite number {name} is not allowed")


def _validate(obj) -> None:
    if not isinstance(obj, dict) or "type" not in obj:
        raise FormatError("top level must be an object with a 'type' field")
    tag = obj["type"]
    if tag not in SCHEMAS:
        raise FormatError(f"unknown bundle type {tag!r}; expected one of {sorted(SCHEMAS)}")
    validator = jsonschema.Draft202012Validator(SCHEMAS[tag])
    errors = sorted(validator.iter_errors(obj), key=lambda e: list(e.absolute_path))
    if errors:
        lines = [f"{e.json_path}: {e.message}" for e in errors[:8]]
        more = f" (+{len(errors) - 8} more)" if len(errors) > 8 else ""
        raise FormatError("schema violation at " + "; ".join(lines) + more)


def from_json(obj) -> Bundle:
    _validate(obj)
    tag = obj["type"]
    prov = obj.get("provenance", {})
    data: dict[str, Any] = {}
    try:
        if "function" in obj:
            data["function"] = dec_function(obj["function"])
        if "relation" in obj:
            data["relation"] = dec_relation(obj["relation"])
        if tag == "certificates":
            data["certificates"] = CertificateStructure(
                {tuple(e["x"]): tuple(frozenset(i - 1 for i in S) for S in e["minimal_sets"])
                 for e in obj["certificates"]["certs"]})
        elif tag == "span_program":
            data["program"] = dec_program(obj["program"])
            if "witnesses" in obj:
                data["witnesses"] = dec_witnesses(obj["witnesses"])
        elif tag == "dual_solution":
            data["dual"] = dec_dual(obj["dual"], data["function"].n)
        elif tag == "state_solution":
            r = data["relation"]
            data["dual"] = dec_dual(obj["dual"], r.n, r.m)
        elif tag == "adversary_matrix":
            a = obj["adversary"]
            data["adversary"] = AdversaryMatrix(tuple(tuple(x) for x in a["domain_order"]),
                                                np.array(a["matrix"], dtype=float))
        elif tag == "learning_graph":
            data["graph"] = dec_graph(obj["graph"])
            data["flows"] = dec_flows(obj["flows"])
        elif tag == "algorithm":
            data["algorithm"] = dec_algorithm(obj["algorithm"])
    except FormatError:
        raise
    except (ValueError, KeyError, IndexError, TypeError) as exc:
        raise FormatError(f"invalid {tag} data: {exc}") from None
    return Bundle(tag, data, prov)


def loads(text: str) -> Bundle:
    try:
        obj = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return from_json(obj)


def parse_bundle(path: str = "-") -> Bundle:
    if path == "-":
        return loads(sys.stdin.read())
    try:
        with open(path) as fh:
            return loads(fh.read())
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from None
