"""Dual adversary solutions, adversary-matrix evaluation and the conversions
between span programs and feasible points of the vector-form dual SDP.

A dual solution assigns to every ``(x, j)`` a pair of vectors ``u_{x,j}``,
``v_{x,j}`` in a common space ``U = C^{d_u}`` such that

    sum_{j : x_j != y_j} <u_{x,j} | v_{y,j}> = 1 - delta_{f(x), f(y)}

for all ordered pairs ``(x, y)``. Its objective is
``max_x max(sum_j |u_{x,j}|^2, sum_j |v_{x,j}|^2)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import TOL, Tolerances
from .functions import PartialFunction, Word
from .linalg import InfeasibleError, orth_complement, spectral_norm
from .span import SpanProgram, WitnessSet, canonical_targets, is_canonical


@dataclass(frozen=True)
class MuNuPair:
    ell: int
    theta: float
    mu: np.ndarray  # (ell, ell), row q is mu_q
    nu: np.ndarray

    def nu_perp(self, q: int) -> np.ndarray:
        """Deterministic orthonormal basis of ``nu_q^perp`` (ell x (ell - 1))."""
        return orth_complement(self.nu[q])


def mu_nu(ell: int) -> MuNuPair:
    if ell < 2:
        raise ValueError("mu/nu vectors need ell >= 2")
    # max(0, .) guards the ell = 2 case where the radicand is a rounding-level negative
    theta = float(np.sqrt(max(0.0, 0.5 - np.sqrt(ell - 1) / ell)))
    scale = np.sqrt(2 * (ell - 1) / ell)
    off = np.ones((ell, ell)) - np.eye(ell)
    mu = scale * (-theta * np.eye(ell) + np.sqrt(1 - theta ** 2) / np.sqrt(ell - 1) * off)
    nu = scale * (np.sqrt(1 - theta ** 2) * np.eye(ell) + theta / np.sqrt(ell - 1) * off)
    return MuNuPair(ell, theta, mu.astype(complex), nu.astype(complex))


# -- dual solutions -------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DualAdversarySolution:
    """Vectors ``u[i, j]`` and ``v[i, j]`` for the ``i``-th word of ``domain``."""

    domain: tuple[Word, ...]
    u: np.ndarray  # (|D|, n, d_u)
    v: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, dtype=complex)
        v = np.asarray(self.v, dtype=complex)
        if u.ndim != 3 or u.shape != v.shape or u.shape[0] != len(self.domain):
            raise ValueError(f"u and v must both have shape (|D|, n, d_u); got {u.shape}, {v.shape}")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "domain", tuple(tuple(int(s) for s in x) for x in self.domain))

    @property
    def n(self) -> int:
        return self.u.shape[1]

    @property
    def d_u(self) -> int:
        return self.u.shape[2]

    def scaled(self, c: float) -> "DualAdversarySolution":
        return DualAdversarySolution(self.domain, c * self.u, c * self.v)


def _aligned(sol: DualAdversarySolution, f: PartialFunction):
    if set(sol.domain) != set(f.domain) or len(sol.domain) != len(f.domain):
        raise ValueError("dual solution is not indexed by the domain of f")
    if sol.n != f.n:
        raise ValueError(f"dual solution has n={sol.n}, function has n={f.n}")
    order = [sol.domain.index(x) for x in f.domain]
    return sol.u[order], sol.v[order]


def feasibility_matrix(sol: DualAdversarySolution, f: PartialFunction) -> np.ndarray:
    """``S[x, y] = sum_{j: x_j != y_j} <u_{x,j}|v_{y,j}>`` in the order of ``f.domain``."""
    U, V = _aligned(sol, f)
    X = np.array(f.domain)
    S = np.zeros((len(X), len(X)), complex)
    for j in range(f.n):
        differ = X[:, j][:, None] != X[:, j][None, :]
        S += differ * (U[:, j].conj() @ V[:, j].T)
    return S


def check_dual_feasibility(sol: DualAdversarySolution, f: PartialFunction) -> float:
    S = feasibility_matrix(sol, f)
    out = np.array([f(x) for x in f.domain])
    T = (out[:, None] != out[None, :]).astype(float)
    return float(np.max(np.abs(S - T)))


def dual_objective(sol: DualAdversarySolution) -> float:
    if sol.u.size == 0:
        return 0.0
    pu = np.sum(np.abs(sol.u) ** 2, axis=(1, 2))
    pv = np.sum(np.abs(sol.v) ** 2, axis=(1, 2))
    return float(max(pu.max(), pv.max()))


# -- adversary matrices ----------------------------------------------------------

class InvalidAdversaryMatrix(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class AdversaryMatrix:
    domain: tuple[Word, ...]
    gamma: np.ndarray

    def __post_init__(self):
        G = np.asarray(self.gamma, dtype=float)
        if G.shape != (len(self.domain), len(self.domain)):
            raise ValueError("adversary matrix shape does not match its domain order")
        object.__setattr__(self, "gamma", G)
        object.__setattr__(self, "domain", tuple(tuple(int(s) for s in x) for x in self.domain))

    def aligned(self, f: PartialFunction) -> np.ndarray:
        if set(self.domain) != set(f.domain) or len(self.domain) != len(f.domain):
            raise ValueError("adversary matrix is not indexed by the domain of f")
        order = [self.domain.index(x) for x in f.domain]
        return self.gamma[np.ix_(order, order)]

    def validate(self, f: PartialFunction, eps: float = TOL.eps) -> None:
        G = self.aligned(f)
        if np.max(np.abs(G - G.T)) > eps:
            raise InvalidAdversaryMatrix("adversary matrix is not symmetric")
        if not np.any(np.abs(G) > eps):
            raise InvalidAdversaryMatrix("adversary matrix is zero")
        out = np.array([f(x) for x in f.domain])
        same = out[:, None] == out[None, :]
        if np.any(np.abs(G[same]) > eps):
            raise InvalidAdversaryMatrix("nonzero entry between inputs with equal outputs")


def difference_mask(f: PartialFunction, j: int) -> np.ndarray:
    X = np.array(f.domain)
    return (X[:, j][:, None] != X[:, j][None, :]).astype(float)


def adversary_value(gamma: AdversaryMatrix, f: PartialFunction, tol: Tolerances = TOL) -> float:
    """``||Gamma|| / max_j ||Gamma o Delta_j||`` for a given adversary matrix."""
    gamma.validate(f, tol.eps)
    G = gamma.aligned(f)
    denom = max(spectral_norm(G * difference_mask(f, j)) for j in range(f.n))
    if denom <= tol.eps:
        raise InvalidAdversaryMatrix("Gamma o Delta_j vanishes for every j")
    return spectral_norm(G) / denom


# -- conversions -------------------------------------------------------------------

def nbsp_to_dual(P: SpanProgram, W: WitnessSet, f: PartialFunction,
                 tol: Tolerances = TOL) -> DualAdversarySolution:
    """``u_{x,j}`` = block ``j`` of row ``x`` of ``A`` (as a ket), ``v_{x,j}`` = block ``j`` of ``w_x``."""
    if not is_canonical(P, f, tol):
        raise ValueError("nbsp_to_dual needs a canonical program (canonicalize first)")
    d_u = max(P.block_dims, default=0)
    D = len(f.domain)
    U = np.zeros((D, f.n, d_u), complex)
    V = np.zeros((D, f.n, d_u), complex)
    for i, x in enumerate(f.domain):
        w = np.asarray(W.positive[x], complex)
        for j in range(f.n):
            b = P.block(j)
            U[i, j, :P.block_dims[j]] = P.A[i, b].conj()
            V[i, j, :P.block_dims[j]] = w[b]
    return DualAdversarySolution(f.domain, U, V)


def _require_feasible(sol, f, tol):
    res = check_dual_feasibility(sol, f)
    if res > tol.eps_feas:
        raise InfeasibleError(f"dual solution residual {res:.3e} exceeds {tol.eps_feas:.1e}")


def dual_to_nbsp(sol: DualAdversarySolution, f: PartialFunction,
                 tol: Tolerances = TOL) -> tuple[SpanProgram, WitnessSet]:
    """``H = U (x) C^n (x) C^ell`` with ``H_{j,q} = U (x) |j> (x) nu_q^perp``; coordinates
    of ``H_j`` are ``k * ell + q``."""
    _require_feasible(sol, f, tol)
    U, V = _aligned(sol, f)
    ell, d_u, n = f.ell, sol.d_u, f.n
    g = mu_nu(ell)
    X = np.array(f.domain)
    eye = np.eye(d_u, dtype=complex)
    gens = {(j, q): np.kron(eye, g.nu_perp(q)) for j in range(n) for q in range(ell)}
    blocks = []
    for j in range(n):
        nu_rows = g.nu[X[:, j]].conj()  # <nu_{y_j}|q>
        # A[y, (k, q)] = conj(v_{y,j}[k]) conj(nu_{y_j}[q])
        blocks.append((V[:, j].conj()[:, :, None] * nu_rows[:, None, :]).reshape(len(X), d_u * ell))
    A = np.hstack(blocks) if blocks else np.zeros((len(X), 0), complex)
    P = SpanProgram.general(n, ell, canonical_targets(f), [d_u * ell] * n, gens, A,
                            domain_order=f.domain, tol=tol)
    W = WitnessSet()
    E = np.eye(len(X), dtype=complex)
    for i, x in enumerate(f.domain):
        w = np.concatenate([np.kron(U[i, j], g.mu[x[j]]) for j in range(n)])
        W.add(x, w, E[i])
    return P, W


def dual_to_nbspwoi(sol: DualAdversarySolution, f: PartialFunction,
                    tol: Tolerances = TOL) -> tuple[SpanProgram, WitnessSet]:
    """Canonical orthogonal-inputs program with ``gamma^2 = sqrt(ell - 1)``.

    Row ``y`` of ``A`` restricted to block ``(j, q)`` is ``<a_{y,jq}|`` with
    ``a_{y,jq} = (1 - delta_{y_j,q}) u_{y,j} / gamma``; ``w_x`` has
    ``gamma v_{x,j}`` in block ``(j, x_j)``.
    """
    _require_feasible(sol, f, tol)
    U, V = _aligned(sol, f)
    ell, d_u, n = f.ell, sol.d_u, f.n
    gamma = (ell - 1) ** 0.25
    X = np.array(f.domain)
    inputs = {}
    for j in range(n):
        for q in range(ell):
            keep = (X[:, j] != q)[:, None]
            inputs[(j, q)] = keep * U[:, j].conj() / gamma  # (|D|, d_u): column k is an input vector
    P = SpanProgram.orthogonal(n, ell, canonical_targets(f), inputs, domain_order=f.domain, tol=tol)
    W = WitnessSet()
    E = np.eye(len(X), dtype=complex)
    for i, x in enumerate(f.domain):
        w = np.zeros(P.H_dim, complex)
        for j in range(n):
            start = P.offsets[j] + x[j] * d_u
            w[start:start + d_u] = gamma * V[i, j]
        W.add(x, w, E[i])
    return P, W
