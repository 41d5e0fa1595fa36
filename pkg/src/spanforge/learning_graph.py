"""Non-binary learning graphs, flows, and their compilation into span programs.

Vertices are index subsets, an edge ``e_{S,j}`` goes from ``S`` to ``S u {j}``.
Assignments ``psi_S`` are tuples of symbols aligned with ``sorted(S)``.

The output register of the compiled programs is ``C^m`` and the gadget vectors
``mu_alpha``, ``nu_alpha`` are the m-dimensional ones, since they are indexed by
outputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from typing import Mapping

import numpy as np

from .adversary import mu_nu
from .config import TOL, Tolerances
from .functions import CertificateStructure, PartialFunction, Word, assignment_certifies, certificate_structure
from .linalg import orth
from .span import SpanProgram, WitnessSet

Edge = tuple[frozenset, int]
DEFAULT_COLUMN_CAP = 200_000


def _edge(S, j) -> Edge:
    return frozenset(int(i) for i in S), int(j)


def _subset_key(S) -> tuple:
    return (len(S), tuple(sorted(S)))


def _edge_key(e: Edge) -> tuple:
    return (e[1],) + _subset_key(e[0])


@dataclass(frozen=True)
class LearningGraph:
    n: int
    weights: Mapping[Edge, float]

    def __post_init__(self):
        weights = {}
        for (S, j), w in self.weights.items():
            S, j = _edge(S, j)
            if not 0 <= j < self.n or any(not 0 <= i < self.n for i in S):
                raise ValueError(f"edge ({sorted(S)}, {j}) leaves [0, {self.n})")
            if j in S:
                raise ValueError(f"edge ({sorted(S)}, {j}) does not add a new index")
            if not w > 0:
                raise ValueError(f"edge ({sorted(S)}, {j}) has non-positive weight {w}")
            weights[(S, j)] = float(w)
        if not weights:
            raise ValueError("a learning graph needs at least one edge")
        object.__setattr__(self, "weights", weights)

    @classmethod
    def star(cls, n: int, weight: float = 1.0) -> "LearningGraph":
        return cls(n, {(frozenset(), j): weight for j in range(n)})

    @cached_property
    def edges(self) -> tuple[Edge, ...]:
        return tuple(sorted(self.weights, key=_edge_key))

    @cached_property
    def vertices(self) -> tuple[frozenset, ...]:
        vs = {frozenset()}
        for S, j in self.weights:
            vs.add(S)
            vs.add(S | {j})
        return tuple(sorted(vs, key=_subset_key))

    def scaled(self, c: float) -> "LearningGraph":
        return LearningGraph(self.n, {e: c * w for e, w in self.weights.items()})


@dataclass(frozen=True)
class FlowSet:
    flows: Mapping[Word, Mapping[Edge, float]] = field(default_factory=dict)

    def __post_init__(self):
        flows = {tuple(int(s) for s in x): {_edge(*e): float(p) for e, p in fl.items()}
                 for x, fl in self.flows.items()}
        object.__setattr__(self, "flows", flows)

    def __getitem__(self, x) -> dict:
        return self.flows[tuple(x)]


def star_flows(f: PartialFunction) -> FlowSet:
    """Unit flow on ``e_{{}, j}`` for the first ``j`` such that ``{j}`` certifies ``f(x)``."""
    from .functions import certifies
    flows = {}
    for x in f.domain:
        if f(x) == 0:
            continue
        j = next((j for j in range(f.n) if certifies(f, x, {j})), None)
        if j is None:
            raise ValueError(f"no single index certifies f({x}); the star graph carries no flow for it")
        flows[x] = {(frozenset(), j): 1.0}
    return FlowSet(flows)


# -- validation and complexity --------------------------------------------------------

@dataclass
class FlowReport:
    eps: float
    conservation: dict = field(default_factory=dict)  # x -> max |in - out| at non-sink vertices
    source: dict = field(default_factory=dict)  # x -> |outflow(empty) - 1|
    illegal_sinks: list = field(default_factory=list)  # (x, S) absorbing outside M_x
    missing: list = field(default_factory=list)  # x with f(x) != 0 but no flow
    negative_values: list = field(default_factory=list)  # x whose flow has negative entries

    @property
    def max_residual(self) -> float:
        return max(list(self.conservation.values()) + list(self.source.values()), default=0.0)

    @property
    def valid(self) -> bool:
        return self.max_residual <= self.eps and not self.illegal_sinks and not self.missing


def net_absorption(G: LearningGraph, flow: Mapping[Edge, float]) -> dict:
    """``inflow - outflow`` at every vertex."""
    net = {S: 0.0 for S in G.vertices}
    for e, p in flow.items():
        if e not in G.weights:
            S, j = e
            raise KeyError(f"flow references unknown edge ({sorted(S)}, {j})")
        S, j = e
        net[S] -= p
        net[S | {j}] += p
    return net


def validate_flows(G: LearningGraph, flows: FlowSet, f: PartialFunction,
                   E: CertificateStructure | None = None, tol: Tolerances = TOL) -> FlowReport:
    if E is None:
        E = certificate_structure(f)
    report = FlowReport(tol.eps)
    for x in f.domain:
        if f(x) == 0:
            continue
        if x not in flows.flows:
            report.missing.append(x)
            continue
        flow = flows[x]
        if any(p < 0 for p in flow.values()):
            report.negative_values.append(x)
        net = net_absorption(G, flow)
        report.source[x] = abs(-net[frozenset()] - 1.0)
        worst = 0.0
        for S, a in net.items():
            if not S or abs(a) <= tol.eps:
                continue
            if a > 0 and E.contains(x, S):
                continue
            if a > 0:
                report.illegal_sinks.append((x, S))
            else:
                worst = max(worst, abs(a))  # a second source
        report.conservation[x] = worst
    return report


def lg_complexity(G: LearningGraph, flows: FlowSet) -> tuple[float, float, float]:
    """``(N, P, C)`` with ``N = sum w_e``, ``P = max_x sum p_e^2 / w_e``, ``C = sqrt(N P)``."""
    N = float(sum(G.weights.values()))
    P = max((sum(p * p / G.weights[e] for e, p in fl.items()) for fl in flows.flows.values()), default=0.0)
    return N, P, float(np.sqrt(N * P))


# -- compilation ------------------------------------------------------------------------

def restrict(x, S) -> tuple[int, ...]:
    return tuple(x[i] for i in sorted(S))


def extend(S, psi, j: int, q: int) -> tuple[int, ...]:
    items = dict(zip(sorted(S), psi))
    items[j] = q
    return tuple(items[i] for i in sorted(items))


class _Layout:
    """Assignment universe, coordinates of ``V`` and the certified free pairs."""

    def __init__(self, G: LearningGraph, f: PartialFunction, realized_only: bool, cap: int):
        if any(f(x) == 0 for x in f.domain):
            raise ValueError("learning-graph compilation needs f(x) != 0 on the whole domain; "
                             "restrict the function first")
        self.G, self.f, self.m, self.ell = G, f, f.m, f.ell
        if realized_only:
            real = {S: sorted({restrict(x, S) for x in f.domain}) for S in G.vertices}
            self.universe = lambda S: real[S]
        else:
            self.universe = lambda S: list(product(range(f.ell), repeat=len(S)))
        keys = set()
        for S in G.vertices:
            keys.update((S, psi) for psi in self.universe(S))
        for S, j in G.edges:
            for psi in self.universe(S):
                keys.update((S | {j}, extend(S, psi, j, q)) for q in range(f.ell))
        self.vkeys = sorted(keys, key=lambda k: (_subset_key(k[0]), k[1]))
        self.vindex = {k: f.m + i * f.m for i, k in enumerate(self.vkeys)}  # t_alpha first
        self.d = f.m + len(self.vkeys) * f.m
        self.free_pairs = []
        for S in G.vertices:
            if not S:
                continue
            for psi in self.universe(S):
                alpha = assignment_certifies(f, S, psi)
                if alpha is not None:
                    self.free_pairs.append((alpha, S, psi))
        self.free_pairs.sort(key=lambda t: (t[0], _subset_key(t[1]), t[2]))
        n_cols = sum(len(self.universe(S)) for S, _ in G.edges) * f.ell * f.m + len(self.free_pairs)
        if n_cols > cap:
            raise ValueError(f"compiled program would have {n_cols} columns, above the cap of {cap}")
        self.n_cols = n_cols
        self.gadget = mu_nu(f.m) if f.m >= 2 else None

    def coord(self, S, psi, a: int) -> int:
        return self.vindex[(frozenset(S), tuple(psi))] + a

    def mu(self, alpha):
        return self.gadget.mu[alpha]

    def nu(self, alpha):
        return self.gadget.nu[alpha]

    def targets(self) -> np.ndarray:
        T = np.zeros((self.m, self.d), complex)
        T[:, :self.m] = np.eye(self.m)
        return T

    def free_matrix(self) -> np.ndarray:
        F = np.zeros((self.d, len(self.free_pairs)), complex)
        empty = self.vindex[(frozenset(), ())]
        for c, (alpha, S, psi) in enumerate(self.free_pairs):
            F[alpha, c] = 1.0
            F[empty:empty + self.m, c] -= self.mu(alpha)
            start = self.vindex[(S, psi)]
            F[start:start + self.m, c] += self.mu(alpha)
        return F

    def negative(self, x) -> np.ndarray:
        alpha = self.f(x)
        wbar = np.zeros(self.d, complex)
        wbar[:self.m] = 1.0
        wbar[alpha] = 0.0
        for S in self.G.vertices:
            start = self.vindex[(S, restrict(x, S))]
            wbar[start:start + self.m] = self.nu(alpha)
        return wbar

    def free_coefficients(self, x, flow) -> np.ndarray:
        alpha = self.f(x)
        net = net_absorption(self.G, flow)
        pos = {(a, S, psi): c for c, (a, S, psi) in enumerate(self.free_pairs)}
        out = np.zeros(len(self.free_pairs), complex)
        for S, a in net.items():
            if S and abs(a) > 0:
                key = (alpha, S, restrict(x, S))
                if key not in pos:
                    raise ValueError(f"flow of {x} is absorbed at {sorted(S)}, which is not an "
                                     f"{alpha}-certificate for that assignment")
                out[pos[key]] = a
        return out


def _prepare(G, flows, f, E, realized_only, cap, tol):
    if f.m < 2:
        raise ValueError("learning-graph compilation needs m >= 2")
    report = validate_flows(G, flows, f, E, tol)
    if not report.valid:
        raise ValueError(f"invalid flows: residual {report.max_residual:.3e}, "
                         f"illegal sinks {report.illegal_sinks[:3]}, missing {report.missing[:3]}")
    return _Layout(G, f, realized_only, cap)


def lg_to_nbspwoi(G: LearningGraph, flows: FlowSet, f: PartialFunction,
                  E: CertificateStructure | None = None, realized_only: bool = False,
                  cap: int = DEFAULT_COLUMN_CAP, tol: Tolerances = TOL) -> tuple[SpanProgram, WitnessSet]:
    L = _prepare(G, flows, f, E, realized_only, cap, tol)
    ell, m = f.ell, f.m
    cols = {(j, q): [] for j in range(f.n) for q in range(ell)}
    where = {}  # (j, q, e, psi, a) -> position inside I_{j,q}
    for e in G.edges:
        S, j = e
        sw = np.sqrt(G.weights[e])
        for psi in L.universe(S):
            for q in range(ell):
                head = extend(S, psi, j, q)
                for a in range(m):
                    v = np.zeros(L.d, complex)
                    v[L.coord(S, psi, a)] -= sw
                    v[L.coord(S | {j}, head, a)] += sw
                    where[(j, q, e, psi, a)] = len(cols[(j, q)])
                    cols[(j, q)].append(v)
    inputs = {k: np.array(v).T if v else np.zeros((L.d, 0), complex) for k, v in cols.items()}
    P = SpanProgram.orthogonal(f.n, ell, L.targets(), inputs, L.free_matrix(), tol=tol)
    col_start = {}
    for j in range(f.n):
        start = P.offsets[j]
        for q in range(ell):
            col_start[(j, q)] = start
            start += inputs[(j, q)].shape[1]
    W = WitnessSet()
    for x in f.domain:
        alpha, flow = f(x), flows[x]
        w = np.zeros(P.H_dim, complex)
        for e, p in flow.items():
            S, j = e
            coef = -p / np.sqrt(G.weights[e]) * L.mu(alpha)
            psi = restrict(x, S)
            for a in range(m):
                w[col_start[(j, x[j])] + where[(j, x[j], e, psi, a)]] += coef[a]
        w[P.free_slice] = L.free_coefficients(x, flow)
        W.add(x, w, L.negative(x))
    return P, W


def _difference_frame(ell: int) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal basis ``E`` of ``span{h_q - t}`` in ``C^{ell+1}`` (``t`` first) and the
    coordinates ``c_q = E^dag (h_q - t)`` as columns."""
    D = np.zeros((ell + 1, ell))
    D[0] = -1.0
    D[1:] = np.eye(ell)
    E = orth(D)
    return E, E.conj().T @ D


def lg_to_nbsp(G: LearningGraph, flows: FlowSet, f: PartialFunction,
               E: CertificateStructure | None = None, realized_only: bool = False,
               cap: int = DEFAULT_COLUMN_CAP, tol: Tolerances = TOL) -> tuple[SpanProgram, WitnessSet]:
    """General-form compilation.

    Each ``(e_{S,j}, psi_S, a)`` owns an ell-dimensional slice of ``H_j`` realising
    ``span{|head_q> - |tail> : q}``; ``H_{j,q}`` is spanned by the ``q``-th difference in
    every slice, so the subspaces for different ``q`` overlap at 60 degrees.
    """
    L = _prepare(G, flows, f, E, realized_only, cap, tol)
    ell, m = f.ell, f.m
    frame, coords = _difference_frame(ell)
    slices = {j: [] for j in range(f.n)}  # j -> list of (e, psi, a)
    for e in G.edges:
        S, j = e
        for psi in L.universe(S):
            for a in range(m):
                slices[j].append((e, psi, a))
    block_dims = [ell * len(slices[j]) for j in range(f.n)]
    free = L.free_matrix()
    A = np.zeros((L.d, sum(block_dims) + free.shape[1]), complex)
    gens = {}
    slot = {}
    off = 0
    for j in range(f.n):
        for q in range(ell):
            gens[(j, q)] = np.zeros((block_dims[j], len(slices[j])), complex)
        for s, (e, psi, a) in enumerate(slices[j]):
            S, _ = e
            sw = np.sqrt(G.weights[e])
            base = ell * s
            slot[(e, psi, a)] = off + base
            rows = [L.coord(S, psi, a)] + [L.coord(S | {j}, extend(S, psi, j, q), a) for q in range(ell)]
            A[rows, off + base:off + base + ell] += sw * frame
            for q in range(ell):
                gens[(j, q)][base:base + ell, s] = coords[:, q]
        off += block_dims[j]
    A[:, off:] = free
    P = SpanProgram.general(f.n, ell, L.targets(), block_dims, gens, A, free_dim=free.shape[1], tol=tol)
    W = WitnessSet()
    for x in f.domain:
        alpha, flow = f(x), flows[x]
        w = np.zeros(P.H_dim, complex)
        for e, p in flow.items():
            S, j = e
            coef = -p / np.sqrt(G.weights[e]) * L.mu(alpha)
            psi = restrict(x, S)
            for a in range(m):
                start = slot[(e, psi, a)]
                w[start:start + ell] += coef[a] * coords[:, x[j]]
        w[P.free_slice] = L.free_coefficients(x, flow)
        W.add(x, w, L.negative(x))
    return P, W


def nonfree_column_count(G: LearningGraph, f: PartialFunction, realized_only: bool = False) -> int:
    """``sum_e |assignments of S| * ell * m``."""
    if realized_only:
        count = lambda S: len({restrict(x, S) for x in f.domain})
    else:
        count = lambda S: f.ell ** len(S)
    return sum(count(S) for S, _ in G.edges) * f.ell * f.m
