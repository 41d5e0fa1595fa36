"""Zero-error phase-oracle query algorithms and their compilation into span programs.

The state space has basis ``|p, j, alpha>`` with ``p`` in ``{0,1}^r``, ``j`` an
index and ``alpha`` an output, at position ``p * n * m + j * m + alpha``. The
oracle acts as ``O_x |p, j, alpha> = omega^{x_j} |p, j, alpha>`` with
``omega = exp(2 pi i / ell)``. Time-stamped copies ``|tau, b>`` for
``tau = 0 .. 2Q+1`` sit at ``tau * D + b``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import TOL, Tolerances
from .functions import PartialFunction, Word
from .span import SpanProgram, WitnessSet


@dataclass(frozen=True, eq=False)
class ZeroErrorAlgorithm:
    r: int
    n: int
    ell: int
    m: int
    unitaries: tuple  # U_1, U_3, ..., U_{2Q+1}

    def __post_init__(self):
        Us = tuple(np.asarray(U, dtype=complex) for U in self.unitaries)
        if not Us:
            raise ValueError("need at least U_1")
        D = self.dim
        for k, U in enumerate(Us):
            if U.shape != (D, D):
                raise ValueError(f"U_{2 * k + 1} has shape {U.shape}, expected {(D, D)}")
            dev = np.linalg.norm(U.conj().T @ U - np.eye(D))
            if dev > TOL.eps_feas:
                raise ValueError(f"U_{2 * k + 1} is not unitary (deviation {dev:.2e})")
        object.__setattr__(self, "unitaries", Us)

    @property
    def dim(self) -> int:
        return 2 ** self.r * self.n * self.m

    @property
    def Q(self) -> int:
        return len(self.unitaries) - 1

    def basis_index(self, p: int, j: int, alpha: int) -> int:
        return p * self.n * self.m + j * self.m + alpha

    def oracle_phases(self, x) -> np.ndarray:
        omega = np.exp(2j * np.pi / self.ell)
        j_of = (np.arange(self.dim) // self.m) % self.n
        return omega ** np.asarray(x)[j_of]


def simulate(alg: ZeroErrorAlgorithm, x) -> list[np.ndarray]:
    """States ``phi_0 .. phi_{2Q+1}``: odd steps apply ``U``, even steps the oracle."""
    x = tuple(int(s) for s in x)
    if len(x) != alg.n or any(not 0 <= s < alg.ell for s in x):
        raise ValueError(f"{x} is not a word in [{alg.ell}]^{alg.n}")
    phase = alg.oracle_phases(x)
    phi = np.zeros(alg.dim, complex)
    phi[0] = 1.0
    states = [phi]
    for k, U in enumerate(alg.unitaries):
        if k:
            phi = phase * phi
            states.append(phi)
        phi = U @ phi
        states.append(phi)
    return states


@dataclass
class ZeroErrorReport:
    deviation: dict[Word, float] = field(default_factory=dict)
    eps: float = TOL.eps

    @property
    def max_deviation(self) -> float:
        return max(self.deviation.values(), default=0.0)

    @property
    def failures(self) -> list[Word]:
        return [x for x, d in self.deviation.items() if d > self.eps]

    @property
    def valid(self) -> bool:
        return not self.failures


def check_zero_error(alg: ZeroErrorAlgorithm, f: PartialFunction, tol: Tolerances = TOL) -> ZeroErrorReport:
    """Deviation of ``phi_{2Q+1}`` from ``|0^r, 1, f(x)>`` (phase included)."""
    report = ZeroErrorReport(eps=tol.eps)
    for x in f.domain:
        final = simulate(alg, x)[-1]
        target = np.zeros(alg.dim, complex)
        target[alg.basis_index(0, 0, f(x))] = 1.0
        report.deviation[x] = float(np.linalg.norm(final - target))
    return report


def _check(alg, f, tol):
    if (alg.n, alg.ell, alg.m) != (f.n, f.ell, f.m):
        raise ValueError("algorithm and function disagree on n, ell or m")
    report = check_zero_error(alg, f, tol)
    if not report.valid:
        raise ValueError(f"algorithm is not zero-error on {report.failures[:5]} "
                         f"(max deviation {report.max_deviation:.2e})")


def _targets(alg) -> np.ndarray:
    D, T = alg.dim, 2 * alg.Q + 2
    t = np.zeros((alg.m, T * D), complex)
    t[:, 0] = 1.0
    for a in range(alg.m):
        t[a, (T - 1) * D + alg.basis_index(0, 0, a)] -= 1.0
    return t


def _free_columns(alg) -> np.ndarray:
    """``|tau-1, b> - |tau> U_tau |b>`` for odd ``tau`` and every ``b``."""
    D, T = alg.dim, 2 * alg.Q + 2
    F = np.zeros((T * D, (alg.Q + 1) * D), complex)
    for k, U in enumerate(alg.unitaries):
        tau = 2 * k + 1
        cols = slice(k * D, (k + 1) * D)
        F[(tau - 1) * D:tau * D, cols] = np.eye(D)
        F[tau * D:(tau + 1) * D, cols] = -U
    return F


def _free_coefficients(alg, states) -> np.ndarray:
    return np.concatenate([states[2 * k] for k in range(alg.Q + 1)])


def _local(alg, j):
    """``(tau, p, alpha)`` triples with a fixed ``j`` and their positions in ``V``."""
    D, T = alg.dim, 2 * alg.Q + 2
    out = []
    for tau in range(T):
        for p in range(2 ** alg.r):
            for a in range(alg.m):
                out.append((tau, p, a, tau * D + alg.basis_index(p, j, a)))
    return out


def compile_woi(alg: ZeroErrorAlgorithm, f: PartialFunction,
                tol: Tolerances = TOL) -> tuple[SpanProgram, WitnessSet]:
    """``I_{j,q} = {|tau-1, p, j, a> - omega^q |tau, p, j, a> : tau even}``."""
    _check(alg, f, tol)
    D, T = alg.dim, 2 * alg.Q + 2
    omega = np.exp(2j * np.pi / alg.ell)
    even = range(2, T - 1, 2)
    inputs, where = {}, {}
    for j in range(alg.n):
        for q in range(alg.ell):
            cols = []
            for tau in even:
                for p in range(2 ** alg.r):
                    for a in range(alg.m):
                        b = alg.basis_index(p, j, a)
                        v = np.zeros(T * D, complex)
                        v[(tau - 1) * D + b] = 1.0
                        v[tau * D + b] = -omega ** q
                        where[(j, q, tau, b)] = len(cols)
                        cols.append(v)
            inputs[(j, q)] = np.array(cols).T if cols else np.zeros((T * D, 0), complex)
    P = SpanProgram.orthogonal(alg.n, alg.ell, _targets(alg), inputs, _free_columns(alg), tol=tol)
    starts = {}
    for j in range(alg.n):
        s = P.offsets[j]
        for q in range(alg.ell):
            starts[(j, q)] = s
            s += inputs[(j, q)].shape[1]
    W = WitnessSet()
    for x in f.domain:
        states = simulate(alg, x)
        w = np.zeros(P.H_dim, complex)
        for tau in even:
            for b in range(D):
                j = (b // alg.m) % alg.n
                w[starts[(j, x[j])] + where[(j, x[j], tau, b)]] = states[tau - 1][b]
        w[P.free_slice] = _free_coefficients(alg, states)
        W.add(x, w, np.concatenate(states))
    return P, W


def compile_nbsp(alg: ZeroErrorAlgorithm, f: PartialFunction,
                 tol: Tolerances = TOL) -> tuple[SpanProgram, WitnessSet]:
    """``H_j`` holds a copy of every ``|tau, p, j, a>`` and ``A`` embeds it identically into ``V``;
    ``H_{j,q}`` is spanned by the phase differences at even ``tau``."""
    _check(alg, f, tol)
    D, T = alg.dim, 2 * alg.Q + 2
    omega = np.exp(2j * np.pi / alg.ell)
    per = 2 ** alg.r * alg.m
    dj = T * per
    loc = lambda tau, p, a: tau * per + p * alg.m + a
    even = range(2, T - 1, 2)
    gens = {}
    for j in range(alg.n):
        for q in range(alg.ell):
            G = np.zeros((dj, len(even) * per), complex)
            c = 0
            for tau in even:
                for p in range(2 ** alg.r):
                    for a in range(alg.m):
                        G[loc(tau - 1, p, a), c] = 1.0
                        G[loc(tau, p, a), c] = -omega ** q
                        c += 1
            gens[(j, q)] = G
    free = _free_columns(alg)
    A = np.zeros((T * D, alg.n * dj + free.shape[1]), complex)
    for j in range(alg.n):
        for tau, p, a, row in _local(alg, j):
            A[row, j * dj + loc(tau, p, a)] = 1.0
    A[:, alg.n * dj:] = free
    P = SpanProgram.general(alg.n, alg.ell, _targets(alg), [dj] * alg.n, gens, A,
                            free_dim=free.shape[1], tol=tol)
    W = WitnessSet()
    for x in f.domain:
        states = simulate(alg, x)
        w = np.zeros(P.H_dim, complex)
        for tau in even:
            for p in range(2 ** alg.r):
                for j in range(alg.n):
                    for a in range(alg.m):
                        amp = states[tau - 1][alg.basis_index(p, j, a)]
                        w[j * dj + loc(tau - 1, p, a)] += amp
                        w[j * dj + loc(tau, p, a)] -= omega ** x[j] * amp
        w[P.free_slice] = _free_coefficients(alg, states)
        W.add(x, w, np.concatenate(states))
    return P, W


def deutsch_parity_example() -> tuple[ZeroErrorAlgorithm, PartialFunction]:
    """Two-query parity of two bits with ``r = 0``.

    ``U_1`` spreads ``|1,0>`` over both indices, the first query imprints
    ``(-1)^{x_1}, (-1)^{x_2}``, ``U_3`` interferes to ``(-1)^{x_1} |1, x_1 xor x_2>``
    and the second query (index register at 1) removes the phase.
    """
    s = 1 / np.sqrt(2)
    e = np.eye(4)
    U1 = np.column_stack([s * (e[0] + e[2]), e[1], s * (e[0] - e[2]), e[3]])
    # U3 maps (e0+e2)/sqrt2 -> e0, (e0-e2)/sqrt2 -> e1, e1 -> e2, e3 -> e3
    ins = np.column_stack([s * (e[0] + e[2]), s * (e[0] - e[2]), e[1], e[3]])
    outs = np.column_stack([e[0], e[1], e[2], e[3]])
    U3 = outs @ ins.conj().T
    alg = ZeroErrorAlgorithm(0, 2, 2, 2, (U1, U3, np.eye(4)))
    f = PartialFunction(2, 2, 2, {(a, b): a ^ b for a in (0, 1) for b in (0, 1)})
    return alg, f
