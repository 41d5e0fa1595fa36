"""Span programs for relations with uniform image size ``k`` and their
conversion to feasible points of the state-conversion dual SDP.

A positive witness must satisfy ``A w_x = (1/k) sum_{alpha in r(x)} t_alpha``;
a negative witness must be orthogonal to ``I(x)`` and have unit overlap with
every ``t_beta`` for ``beta`` outside ``r(x)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import product

import numpy as np

from .adversary import DualAdversarySolution, dual_objective, feasibility_matrix
from .config import TOL, Tolerances
from .functions import Relation
from .span import (InvalidWitnessError, Kind, Residuals, SpanProgram, VerificationReport, WitnessSet,
                   negative_size, positive_size, witness_residuals)


@dataclass(frozen=True, eq=False)
class RelationSpanProgram:
    """Orthogonal-inputs data without free vectors."""

    n: int
    ell: int
    targets: np.ndarray
    inputs: dict
    domain_order: tuple | None = None

    def __post_init__(self):
        self.program  # validate eagerly

    @cached_property
    def program(self) -> SpanProgram:
        return SpanProgram.orthogonal(self.n, self.ell, self.targets, self.inputs,
                                      domain_order=self.domain_order)

    @classmethod
    def from_program(cls, P: SpanProgram) -> "RelationSpanProgram":
        if P.kind is not Kind.ORTHOGONAL_INPUTS:
            raise TypeError("relation span programs use orthogonal inputs")
        if P.free_dim:
            raise ValueError("relation span programs have no free vectors")
        return cls(P.n, P.ell, P.targets, dict(P.inputs), P.domain_order)

    @property
    def m(self) -> int:
        return self.program.m


def _mean_target(P: SpanProgram, image) -> np.ndarray:
    return P.targets[sorted(image)].sum(axis=0) / len(image)


def verify_relation_witnesses(R: RelationSpanProgram, r: Relation, x, w, wbar) -> Residuals:
    image = r(x)
    P = R.program
    if P.m != r.m:
        raise ValueError(f"program has {P.m} targets, relation has m={r.m}")
    excluded = [b for b in range(r.m) if b not in image]
    return witness_residuals(P, x, _mean_target(P, image), excluded, w, wbar)


def evaluates_relation(R: RelationSpanProgram, r: Relation, W: WitnessSet,
                       tol: Tolerances = TOL) -> VerificationReport:
    res = {}
    for x in r.domain:
        if x not in W:
            res[x] = Residuals(np.inf, np.inf, np.inf, np.inf)
        else:
            res[x] = verify_relation_witnesses(R, r, x, *W[x])
    return VerificationReport(res, tol.eps)


def relation_complexity(R: RelationSpanProgram, r: Relation, W: WitnessSet,
                        tol: Tolerances = TOL) -> tuple[float, float, float]:
    """``(wsize_plus, wsize_minus, wsize)`` after checking validity."""
    report = evaluates_relation(R, r, W, tol)
    if not report.valid:
        raise InvalidWitnessError(f"invalid relation witnesses for {report.failures[:5]}")
    P = R.program
    pos = max(positive_size(P, W.positive[x]) for x in r.domain)
    neg = max(negative_size(P, W.negative[x]) for x in r.domain)
    wsize = max(max(positive_size(P, W.positive[x]), negative_size(P, W.negative[x])) for x in r.domain)
    return pos, neg, wsize


def canonical_relation_targets(r: Relation) -> np.ndarray:
    return np.array([[1.0 if a not in r(x) else 0.0 for x in r.domain] for a in range(r.m)], dtype=complex)


def canonicalize_relation(R: RelationSpanProgram, r: Relation, W: WitnessSet,
                          tol: Tolerances = TOL) -> tuple[RelationSpanProgram, WitnessSet]:
    """``B = sum_y |e_y><wbar_y|`` applied to targets and inputs; ``wbar'_x = e_x``.

    The canonical targets need ``<wbar_y|t_alpha> = 0`` for ``alpha`` in ``r(y)``,
    which the relation witness conditions do not force when ``k > 1``; such
    triples are rejected.
    """
    report = evaluates_relation(R, r, W, tol)
    if not report.valid:
        raise InvalidWitnessError(f"cannot canonicalize: invalid witnesses for {report.failures[:5]}")
    P = R.program
    B = np.array([W.negative[y].conj() for y in r.domain])
    targets = P.targets @ B.T
    expected = canonical_relation_targets(r)
    dev = float(np.max(np.abs(targets - expected)))
    if dev > tol.eps_feas:
        raise ValueError(f"negative witnesses overlap targets inside r(y) (deviation {dev:.3e}); "
                         "the canonical form does not exist for this triple")
    zero = [a for a in range(r.m) if not expected[a].any()]
    if zero:
        raise ValueError(f"canonical targets {zero} vanish: those outputs lie in r(x) for every x")
    R2 = RelationSpanProgram(r.n, r.ell, expected, {k: B @ v for k, v in P.inputs.items()},
                             domain_order=r.domain)
    eye = np.eye(len(r.domain), dtype=complex)
    W2 = WitnessSet()
    for i, y in enumerate(r.domain):
        W2.add(y, W.positive[y], eye[i])
    return R2, W2


def is_canonical_relation(R: RelationSpanProgram, r: Relation, tol: Tolerances = TOL) -> bool:
    P = R.program
    if P.target_dim != len(r.domain) or P.m != r.m:
        return False
    if R.domain_order is not None and tuple(R.domain_order) != r.domain:
        return False
    return bool(np.max(np.abs(P.targets - canonical_relation_targets(r))) <= tol.eps)


# -- the state-conversion SDP ----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class StateConversionSolution(DualAdversarySolution):
    """Dual vectors plus ``sigma[i, alpha]`` in ``C^m`` for the ``i``-th domain word."""

    sigma: np.ndarray = None

    def __post_init__(self):
        super().__post_init__()
        s = np.asarray(self.sigma, dtype=complex)
        if s.ndim != 3 or s.shape[0] != len(self.domain):
            raise ValueError("sigma must have shape (|D|, m, dim)")
        object.__setattr__(self, "sigma", s)


def relation_to_state_solution(R: RelationSpanProgram, W: WitnessSet, r: Relation,
                               tol: Tolerances = TOL) -> StateConversionSolution:
    if not is_canonical_relation(R, r, tol):
        raise ValueError("relation_to_state_solution needs a canonical relation program")
    P = R.program
    k = r.k
    d_u = max(P.block_dims, default=0)
    D = len(r.domain)
    U = np.zeros((D, r.n, d_u), complex)
    V = np.zeros((D, r.n, d_u), complex)
    S = np.zeros((D, r.m, r.m), complex)
    for i, x in enumerate(r.domain):
        w = np.asarray(W.positive[x], complex)
        for j in range(r.n):
            b = P.block(j)
            U[i, j, :P.block_dims[j]] = P.A[i, b].conj()
            V[i, j, :P.block_dims[j]] = w[b]
        for a in r(x):
            S[i, a, a] = 1 / np.sqrt(k)
    return StateConversionSolution(r.domain, U, V, S)


def check_state_conversion_feasibility(sol: StateConversionSolution, r: Relation) -> float:
    """Max residual of both constraint families of the state-conversion SDP."""
    Sx = feasibility_matrix(sol, r)
    order = [sol.domain.index(x) for x in r.domain]
    sig = sol.sigma[order]
    overlap = np.einsum("xad,yad->xy", sig.conj(), sig)
    res_b = float(np.max(np.abs(1 - overlap - Sx)))
    res_c = 0.0
    for i, x in enumerate(r.domain):
        outside = [a for a in range(r.m) if a not in r(x)]
        res_c = max(res_c, float(np.sum(np.abs(sig[i, outside]) ** 2)))
    return max(res_b, res_c)


def state_objective(sol: StateConversionSolution) -> float:
    return dual_objective(sol)


def choose_one_relation() -> tuple[RelationSpanProgram, WitnessSet, Relation]:
    """Weight-2 words of ``{0,1}^3`` with ``r(x) = {j : x_j = 1}``."""
    domain = sorted(x for x in product((0, 1), repeat=3) if sum(x) == 2)
    r = Relation(3, 2, 3, {x: frozenset(j for j in range(3) if x[j]) for x in domain})
    eye = np.eye(len(domain))
    idx = {x: i for i, x in enumerate(domain)}
    hole = {j: next(y for y in domain if y[j] == 0) for j in range(3)}
    inputs = {(j, 1): eye[:, [idx[hole[j]]]] for j in range(3)}
    targets = np.array([eye[idx[hole[a]]] for a in range(3)])
    R = RelationSpanProgram(3, 2, targets, inputs, domain_order=tuple(domain))
    W = WitnessSet()
    P = R.program
    for x in domain:
        w = np.zeros(P.H_dim)
        for j in r(x):
            w[P.offsets[j]] = 0.5  # I_{j,0} is empty, so I_{j,1} starts the block
        W.add(x, w, eye[idx[x]])
    return R, W, r
