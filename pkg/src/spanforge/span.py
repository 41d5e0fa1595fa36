"""Non-binary span programs: representation, verification, witness solving,
rescaling, canonicalisation and the binary-pair combination.

Both flavours share one coordinate system. A GENERAL program lives on
``H = H_1 + ... + H_n + H_free`` with explicit block dimensions; an
ORTHOGONAL_INPUTS program is laid out so that its columns (``I_{j,q}`` for
``j`` then ``q``, free vectors last) are exactly those coordinates. A positive
witness is therefore always a vector of length ``H_dim``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping

import numpy as np

from .config import TOL, Tolerances
from .functions import PartialFunction, Word
from .linalg import InfeasibleError, affine_min_norm, as_complex_matrix, orth


class Kind(str, enum.Enum):
    GENERAL = "general"
    ORTHOGONAL_INPUTS = "orthogonal_inputs"


class InvalidWitnessError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SpanProgram:
    """A span program over ``[ell]^n`` with ``m`` targets in ``V = C^d``.

    Build with :meth:`general` or :meth:`orthogonal` rather than directly.
    """

    kind: Kind
    n: int
    ell: int
    targets: np.ndarray  # (m, d)
    block_dims: tuple[int, ...]
    free_dim: int
    generators: Mapping[tuple[int, int], np.ndarray]  # (j, q) -> (d_j, k) in block coordinates
    A: np.ndarray  # (d, H_dim)
    inputs: Mapping[tuple[int, int], np.ndarray] | None = None  # WOI only: (j, q) -> (d, k)
    free: np.ndarray | None = None  # WOI only: (d, k_free)
    domain_order: tuple[Word, ...] | None = None

    # -- constructors -------------------------------------------------------

    @classmethod
    def general(cls, n, ell, targets, block_dims, generators, A, free_dim=0,
                domain_order=None, tol: Tolerances = TOL):
        targets = np.atleast_2d(np.asarray(targets, dtype=complex))
        A = np.asarray(A, dtype=complex)
        block_dims = tuple(int(d) for d in block_dims)
        if len(block_dims) != n:
            raise ValueError(f"expected {n} block dimensions, got {len(block_dims)}")
        gens = {}
        for j in range(n):
            for q in range(ell):
                G = generators.get((j, q))
                G = np.zeros((block_dims[j], 0), complex) if G is None else as_complex_matrix(G, block_dims[j])
                if G.shape[0] != block_dims[j]:
                    raise ValueError(f"generator ({j},{q}) has {G.shape[0]} rows, H_{j} has dim {block_dims[j]}")
                gens[(j, q)] = G
        if A.ndim != 2 or A.shape != (targets.shape[1], sum(block_dims) + free_dim):
            raise ValueError(f"A has shape {A.shape}, expected {(targets.shape[1], sum(block_dims) + free_dim)}")
        P = cls(Kind.GENERAL, n, ell, targets, block_dims, int(free_dim), gens, A,
                domain_order=None if domain_order is None else tuple(map(tuple, domain_order)))
        P._check(tol)
        return P

    @classmethod
    def orthogonal(cls, n, ell, targets, inputs, free=None, domain_order=None,
                   tol: Tolerances = TOL):
        targets = np.atleast_2d(np.asarray(targets, dtype=complex))
        d = targets.shape[1]
        ins = {}
        for j in range(n):
            for q in range(ell):
                vecs = inputs.get((j, q))
                ins[(j, q)] = np.zeros((d, 0), complex) if vecs is None else as_complex_matrix(vecs, d)
                if ins[(j, q)].shape[0] != d:
                    raise ValueError(f"input vectors ({j},{q}) have dimension {ins[(j, q)].shape[0]}, expected {d}")
        free = np.zeros((d, 0), complex) if free is None else as_complex_matrix(free, d)
        if free.shape[0] != d:
            raise ValueError("free vectors have the wrong dimension")
        block_dims, gens, cols = [], {}, []
        for j in range(n):
            sizes = [ins[(j, q)].shape[1] for q in range(ell)]
            dj = sum(sizes)
            block_dims.append(dj)
            eye = np.eye(dj, dtype=complex)
            start = 0
            for q in range(ell):
                gens[(j, q)] = eye[:, start:start + sizes[q]]
                cols.append(ins[(j, q)])
                start += sizes[q]
        cols.append(free)
        A = np.hstack(cols) if cols else np.zeros((d, 0), complex)
        P = cls(Kind.ORTHOGONAL_INPUTS, n, ell, targets, tuple(block_dims), free.shape[1], gens, A,
                inputs=ins, free=free,
                domain_order=None if domain_order is None else tuple(map(tuple, domain_order)))
        P._check(tol)
        return P

    def _check(self, tol: Tolerances):
        if self.targets.shape[0] < 1:
            raise ValueError("a span program needs at least one target")
        norms = np.linalg.norm(self.targets, axis=1)
        if np.any(norms <= tol.eps):
            raise ValueError(f"targets {np.flatnonzero(norms <= tol.eps).tolist()} are zero")
        if not np.all(np.isfinite(self.A)) or not np.all(np.isfinite(self.targets)):
            raise ValueError("non-finite entries in program data")

    def replace(self, **changes) -> "SpanProgram":
        """Rebuild with modified data through the public constructors."""
        if self.kind is Kind.ORTHOGONAL_INPUTS:
            args = dict(n=self.n, ell=self.ell, targets=self.targets, inputs=self.inputs,
                        free=self.free, domain_order=self.domain_order)
            args.update(changes)
            return SpanProgram.orthogonal(**args)
        args = dict(n=self.n, ell=self.ell, targets=self.targets, block_dims=self.block_dims,
                    generators=self.generators, A=self.A, free_dim=self.free_dim,
                    domain_order=self.domain_order)
        args.update(changes)
        return SpanProgram.general(**args)

    # -- shape bookkeeping -------------------------------------------------

    @property
    def m(self) -> int:
        return self.targets.shape[0]

    @property
    def target_dim(self) -> int:
        return self.targets.shape[1]

    @property
    def nonfree_dim(self) -> int:
        return sum(self.block_dims)

    @property
    def H_dim(self) -> int:
        return self.nonfree_dim + self.free_dim

    @cached_property
    def offsets(self) -> tuple[int, ...]:
        return tuple(np.concatenate([[0], np.cumsum(self.block_dims)]).astype(int))

    def block(self, j: int) -> slice:
        return slice(self.offsets[j], self.offsets[j + 1])

    @property
    def free_slice(self) -> slice:
        return slice(self.nonfree_dim, self.H_dim)

    @cached_property
    def _bases(self) -> dict:
        """Orthonormal bases of each ``H_{j,q}`` and their images under ``A``."""
        out = {}
        for (j, q), G in self.generators.items():
            if self.kind is Kind.ORTHOGONAL_INPUTS:
                Q = G  # unit axes already
            else:
                Q = orth(G)
            out[(j, q)] = (Q, self.A[:, self.block(j)] @ Q)
        return out

    def _check_word(self, x) -> tuple[int, ...]:
        x = tuple(int(s) for s in x)
        if len(x) != self.n or any(not 0 <= s < self.ell for s in x):
            raise ValueError(f"{x} is not a word in [{self.ell}]^{self.n}")
        return x

    def available_basis(self, x) -> np.ndarray:
        """Orthonormal basis of ``H(x)`` in ``H`` coordinates (``H_dim`` x r)."""
        x = self._check_word(x)
        cols = []
        for j in range(self.n):
            Q, _ = self._bases[(j, x[j])]
            E = np.zeros((self.H_dim, Q.shape[1]), complex)
            E[self.block(j)] = Q
            cols.append(E)
        E = np.zeros((self.H_dim, self.free_dim), complex)
        E[self.free_slice] = np.eye(self.free_dim)
        cols.append(E)
        return np.hstack(cols)

    def available_columns(self, x) -> np.ndarray:
        """Column indices of ``I(x)`` (orthogonal-inputs programs only)."""
        if self.kind is not Kind.ORTHOGONAL_INPUTS:
            raise TypeError("available_columns needs an orthogonal-inputs program")
        x = self._check_word(x)
        idx = []
        for j in range(self.n):
            G = self.generators[(j, x[j])]
            idx.extend(self.offsets[j] + np.flatnonzero(G.any(axis=1)))
        idx.extend(range(self.nonfree_dim, self.H_dim))
        return np.array(sorted(idx), dtype=int)

    def available_image(self, x) -> np.ndarray:
        """Orthonormal basis of ``A H(x)`` inside ``V``."""
        x = self._check_word(x)
        parts = [self._bases[(j, x[j])][1] for j in range(self.n)]
        parts.append(self.A[:, self.free_slice])
        M = np.hstack(parts)
        return orth(M)


def available_subspace(P: SpanProgram, x):
    """Generators of ``H(x)`` (GENERAL) or the column index set ``I(x)``."""
    if P.kind is Kind.ORTHOGONAL_INPUTS:
        return P.available_columns(x)
    return P.available_basis(x)


@dataclass
class WitnessSet:
    positive: dict[Word, np.ndarray] = field(default_factory=dict)
    negative: dict[Word, np.ndarray] = field(default_factory=dict)

    def __getitem__(self, x):
        x = tuple(x)
        return self.positive[x], self.negative[x]

    def __contains__(self, x):
        x = tuple(x)
        return x in self.positive and x in self.negative

    def add(self, x, w, wbar):
        x = tuple(int(s) for s in x)
        self.positive[x] = np.asarray(w, dtype=complex)
        self.negative[x] = np.asarray(wbar, dtype=complex)


@dataclass(frozen=True)
class Residuals:
    membership: float  # distance of w_x from H(x)
    target: float  # ||A w_x - t_alpha||
    orthogonality: float  # max |<wbar | basis of A H(x)>|
    negative_targets: float  # max_{beta != alpha} |<wbar | t_beta> - 1|

    @property
    def max(self) -> float:
        return max(self.membership, self.target, self.orthogonality, self.negative_targets)

    def valid(self, eps: float = TOL.eps) -> bool:
        return self.max <= eps

    def as_dict(self) -> dict:
        return {"membership": self.membership, "target": self.target,
                "orthogonality": self.orthogonality, "negative_targets": self.negative_targets}


def check_pair(P: SpanProgram, x, alpha: int, w, wbar) -> Residuals:
    """Residuals of a witness pair for an input ``x`` whose intended output is ``alpha``."""
    others = [b for b in range(P.m) if b != alpha]
    return witness_residuals(P, x, P.targets[alpha], others, w, wbar)


def witness_residuals(P: SpanProgram, x, target, excluded, w, wbar) -> Residuals:
    """Shared residual computation: ``A w`` must hit ``target`` and ``wbar`` must have unit
    overlap with every target listed in ``excluded``."""
    x = P._check_word(x)
    w = np.asarray(w, dtype=complex).ravel()
    wbar = np.asarray(wbar, dtype=complex).ravel()
    if w.size != P.H_dim or wbar.size != P.target_dim:
        raise ValueError(f"witness shapes {w.size}, {wbar.size} do not match program "
                         f"({P.H_dim}, {P.target_dim})")
    if P.kind is Kind.ORTHOGONAL_INPUTS:
        mask = np.ones(P.H_dim, bool)
        mask[P.available_columns(x)] = False
        membership = float(np.max(np.abs(w[mask]), initial=0.0))
    else:
        B = P.available_basis(x)
        membership = float(np.linalg.norm(w - B @ (B.conj().T @ w)))
    target = float(np.linalg.norm(P.A @ w - target))
    Q = P.available_image(x)
    orthogonality = float(np.max(np.abs(Q.conj().T @ wbar), initial=0.0))
    overlaps = P.targets[list(excluded)].conj() @ wbar  # <t_beta | wbar>
    negative_targets = float(np.max(np.abs(overlaps - 1.0), initial=0.0))
    return Residuals(membership, target, orthogonality, negative_targets)


def verify_witnesses(P: SpanProgram, f: PartialFunction, x, w, wbar) -> Residuals:
    return check_pair(P, x, f(x), w, wbar)


@dataclass
class VerificationReport:
    residuals: dict[Word, Residuals]
    eps: float

    @property
    def max_residual(self) -> float:
        return max((r.max for r in self.residuals.values()), default=0.0)

    @property
    def failures(self) -> list[Word]:
        return [x for x, r in self.residuals.items() if not r.valid(self.eps)]

    @property
    def valid(self) -> bool:
        return not self.failures


def evaluates(P: SpanProgram, f: PartialFunction, W: WitnessSet, tol: Tolerances = TOL) -> VerificationReport:
    """Check the witness pair of every domain input; missing pairs count as failures."""
    res = {}
    for x in f.domain:
        if x not in W:
            res[x] = Residuals(np.inf, np.inf, np.inf, np.inf)
            continue
        res[x] = verify_witnesses(P, f, x, *W[x])
    return VerificationReport(res, tol.eps)


# -- sizes ------------------------------------------------------------------

def positive_size(P: SpanProgram, w) -> float:
    w = np.asarray(w, dtype=complex).ravel()
    return float(np.vdot(w[:P.nonfree_dim], w[:P.nonfree_dim]).real)


def negative_size(P: SpanProgram, wbar) -> float:
    v = P.A.conj().T @ np.asarray(wbar, dtype=complex).ravel()
    return float(np.vdot(v, v).real)


@dataclass(frozen=True)
class ComplexityReport:
    positive: dict[Word, float]
    negative: dict[Word, float]

    @property
    def wsize_plus(self) -> float:
        return max(self.positive.values())

    @property
    def wsize_minus(self) -> float:
        return max(self.negative.values())

    @property
    def wsize(self) -> float:
        return max(max(self.positive[x], self.negative[x]) for x in self.positive)

    @property
    def balanced(self) -> float:
        return float(np.sqrt(self.wsize_plus * self.wsize_minus))

    def balancing_factor(self) -> float:
        """The ``gamma`` for :func:`rescale` that equalises both sides."""
        return float((self.wsize_minus / self.wsize_plus) ** 0.25)

    def as_dict(self) -> dict:
        return {"wsize": self.wsize, "wsize_plus": self.wsize_plus,
                "wsize_minus": self.wsize_minus, "balanced": self.balanced}


def complexity(P: SpanProgram, f: PartialFunction, W: WitnessSet, check: bool = True,
               tol: Tolerances = TOL) -> ComplexityReport:
    if check:
        report = evaluates(P, f, W, tol)
        if not report.valid:
            raise InvalidWitnessError(f"invalid witnesses for {report.failures[:5]} "
                                      f"(max residual {report.max_residual:.3e})")
    pos = {x: positive_size(P, W.positive[x]) for x in f.domain}
    neg = {x: negative_size(P, W.negative[x]) for x in f.domain}
    return ComplexityReport(pos, neg)


# -- optimal witnesses ----------------------------------------------------------

def solve_positive_witness(P: SpanProgram, f: PartialFunction, x, tol: Tolerances = TOL) -> np.ndarray:
    """Minimise ``||Pi_nonfree w||^2`` over ``w`` in ``H(x)`` with ``A w = t_f(x)``."""
    alpha = f(x)
    B = P.available_basis(x)
    t = P.targets[alpha]
    Pnf = B[:P.nonfree_dim]
    try:
        c = affine_min_norm(P.A @ B, t, Pnf, tol.eps_feas * max(1.0, np.linalg.norm(t)))
    except InfeasibleError as exc:
        raise InfeasibleError(f"t_{alpha} is not in A H({x}): {exc}") from None
    return B @ c


def solve_negative_witness(P: SpanProgram, f: PartialFunction, x, tol: Tolerances = TOL) -> np.ndarray:
    """Minimise ``||A^dag wbar||^2`` with ``wbar`` orthogonal to ``A H(x)`` and
    ``<t_beta|wbar> = 1`` for ``beta != f(x)``."""
    alpha = f(x)
    Q = P.available_image(x)
    others = [b for b in range(P.m) if b != alpha]
    C = np.vstack([Q.conj().T, P.targets[others].conj()])
    d = np.concatenate([np.zeros(Q.shape[1], complex), np.ones(len(others), complex)])
    try:
        return affine_min_norm(C, d, P.A.conj().T, tol.eps_feas)
    except InfeasibleError as exc:
        raise InfeasibleError(f"negative witness constraints for {x} are inconsistent: {exc}") from None


def optimal_witnesses(P: SpanProgram, f: PartialFunction, tol: Tolerances = TOL) -> WitnessSet:
    W = WitnessSet()
    for x in f.domain:
        W.add(x, solve_positive_witness(P, f, x, tol), solve_negative_witness(P, f, x, tol))
    return W


# -- transformations ---------------------------------------------------------------

def rescale(P: SpanProgram, W: WitnessSet, gamma: float) -> tuple[SpanProgram, WitnessSet]:
    """``A -> A / gamma`` and ``w -> gamma w``; targets and negative witnesses unchanged."""
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    if P.kind is Kind.ORTHOGONAL_INPUTS:
        Q = P.replace(inputs={k: v / gamma for k, v in P.inputs.items()}, free=P.free / gamma)
    else:
        Q = P.replace(A=P.A / gamma)
    W2 = WitnessSet({x: gamma * w for x, w in W.positive.items()}, dict(W.negative))
    return Q, W2


def woi_to_general(P: SpanProgram) -> SpanProgram:
    """The GENERAL program with one axis per input vector; witnesses carry over unchanged."""
    if P.kind is Kind.GENERAL:
        return P
    return SpanProgram.general(P.n, P.ell, P.targets, P.block_dims, dict(P.generators), P.A,
                               free_dim=P.free_dim, domain_order=P.domain_order)


def canonical_targets(f: PartialFunction) -> np.ndarray:
    """``t_alpha = sum_{y: f(y) != alpha} e_y`` in the order of ``f.domain``."""
    out = np.array([[1.0 if f(y) != a else 0.0 for y in f.domain] for a in range(f.m)], dtype=complex)
    return out


def canonicalize(P: SpanProgram, f: PartialFunction, W: WitnessSet,
                 tol: Tolerances = TOL) -> tuple[SpanProgram, WitnessSet]:
    """Map ``V`` onto ``C^{D_f}`` with ``B = sum_y |e_y><wbar_y|`` and drop ``H_free``."""
    report = evaluates(P, f, W, tol)
    if not report.valid:
        raise InvalidWitnessError(f"cannot canonicalize: invalid witnesses for {report.failures[:5]}")
    constant = [a for a in range(f.m) if all(f(y) == a for y in f.domain)]
    if constant:
        raise ValueError(f"f is constant ({constant[0]}) on its domain, so the canonical target "
                         f"t_{constant[0]} would be zero")
    B = np.array([W.negative[y].conj() for y in f.domain])
    targets = P.targets @ B.T
    nf = P.nonfree_dim
    if P.kind is Kind.ORTHOGONAL_INPUTS:
        Q = SpanProgram.orthogonal(P.n, P.ell, targets,
                                   {k: B @ v for k, v in P.inputs.items()},
                                   domain_order=f.domain, tol=tol)
    else:
        Q = SpanProgram.general(P.n, P.ell, targets, P.block_dims, dict(P.generators),
                                B @ P.A[:, :nf], domain_order=f.domain, tol=tol)
    eye = np.eye(len(f.domain), dtype=complex)
    W2 = WitnessSet()
    for i, y in enumerate(f.domain):
        W2.add(y, W.positive[y][:nf], eye[i])
    return Q, W2


def is_canonical(P: SpanProgram, f: PartialFunction, tol: Tolerances = TOL) -> bool:
    if P.target_dim != len(f) or P.free_dim != 0 or P.m != f.m:
        return False
    if P.domain_order is not None and tuple(P.domain_order) != f.domain:
        return False
    return bool(np.max(np.abs(P.targets - canonical_targets(f))) <= tol.eps)


# -- binary span programs and the pair combination -------------------------------------

@dataclass(frozen=True, eq=False)
class BinarySpanProgram:
    """A single-target span program with witnesses on complementary output classes.

    ``positive`` maps inputs with output 1 to coefficient vectors over the columns
    (inputs in ``(j, q)`` order, then free vectors); ``negative`` maps inputs with
    output 0 to vectors in ``V``.
    """

    n: int
    ell: int
    target: np.ndarray
    inputs: Mapping[tuple[int, int], np.ndarray]
    positive: Mapping[Word, np.ndarray]
    negative: Mapping[Word, np.ndarray]
    free: np.ndarray | None = None

    def as_program(self) -> SpanProgram:
        return SpanProgram.orthogonal(self.n, self.ell, [self.target], self.inputs, self.free)


def _embed_inputs(P: SpanProgram, d_total: int, offset: int):
    out = {}
    for k, v in P.inputs.items():
        E = np.zeros((d_total, v.shape[1]), complex)
        E[offset:offset + P.target_dim] = v
        out[k] = E
    F = np.zeros((d_total, P.free.shape[1]), complex)
    F[offset:offset + P.target_dim] = P.free
    return out, F


def combine_binary_pair(Pf: BinarySpanProgram, Pc: BinarySpanProgram,
                        f: PartialFunction) -> tuple[SpanProgram, WitnessSet]:
    """Merge programs for ``f`` and ``1 - f`` into one orthogonal-inputs program for ``f``.

    ``V'' = V + V'``, ``I''_{j,q} = I_{j,q} u I'_{j,q}``, ``t_1 = t`` and ``t_0 = t'``.
    """
    if (Pf.n, Pf.ell) != (Pc.n, Pc.ell) or (Pf.n, Pf.ell) != (f.n, f.ell):
        raise ValueError("mismatched n or ell")
    if f.m != 2:
        raise ValueError("the combination needs a two-valued function")
    P, Pp = Pf.as_program(), Pc.as_program()
    d1, d2 = P.target_dim, Pp.target_dim
    d = d1 + d2
    ins1, free1 = _embed_inputs(P, d, 0)
    ins2, free2 = _embed_inputs(Pp, d, d1)
    inputs = {k: np.hstack([ins1[k], ins2[k]]) for k in ins1}
    free = np.hstack([free1, free2])
    t1 = np.concatenate([P.targets[0], np.zeros(d2)])
    t0 = np.concatenate([np.zeros(d1), Pp.targets[0]])
    R = SpanProgram.orthogonal(f.n, f.ell, [t0, t1], inputs, free)

    def spread(cw1, cw2):
        """Interleave coefficient vectors of the two programs into R's column layout."""
        out = []
        for j in range(f.n):
            for q in range(f.ell):
                out.append(cw1[P.offsets[j]:P.offsets[j + 1]][_block_cols(P, j, q)])
                out.append(cw2[Pp.offsets[j]:Pp.offsets[j + 1]][_block_cols(Pp, j, q)])
        out.append(cw1[P.free_slice])
        out.append(cw2[Pp.free_slice])
        return np.concatenate(out)

    W = WitnessSet()
    for x in f.domain:
        if f(x) == 1:
            if x not in Pf.positive or x not in Pc.negative:
                raise ValueError(f"missing witnesses for {x}")
            w = spread(np.asarray(Pf.positive[x], complex), np.zeros(Pp.H_dim, complex))
            wbar = np.concatenate([np.zeros(d1), Pc.negative[x]])
        else:
            if x not in Pc.positive or x not in Pf.negative:
                raise ValueError(f"missing witnesses for {x}")
            w = spread(np.zeros(P.H_dim, complex), np.asarray(Pc.positive[x], complex))
            wbar = np.concatenate([Pf.negative[x], np.zeros(d2)])
        W.add(x, w, wbar)
    return R, W


def _block_cols(P: SpanProgram, j: int, q: int) -> np.ndarray:
    return np.flatnonzero(P.generators[(j, q)].any(axis=1))
