"""Closed-form span programs for the sparse identity and Max functions.

Coordinates ``|j, q>`` (``j`` 0-based) sit at index ``j * ell + q``. For Max the
extra ``|q>`` coordinates follow at ``n * ell + q``.
"""

from __future__ import annotations

from itertools import product

import numpy as np

from .functions import PartialFunction
from .span import SpanProgram, WitnessSet


def sparse_identity_domain(ell: int, n: int) -> list[tuple[int, ...]]:
    """``x_(0)`` followed by ``x_(j,q)`` in ``(j, q)``-lexicographic order."""
    words = [(0,) * n]
    for j in range(n):
        for q in range(1, ell):
            x = [0] * n
            x[j] = q
            words.append(tuple(x))
    return words


def sparse_identity_function(ell: int, n: int) -> PartialFunction:
    """Identity on words with at most one nonzero symbol; outputs label the words
    in the order of :func:`sparse_identity_domain`."""
    words = sparse_identity_domain(ell, n)
    return PartialFunction(n, ell, len(words), {x: i for i, x in enumerate(words)})


def sparse_identity(ell: int, n: int) -> tuple[SpanProgram, WitnessSet, PartialFunction]:
    if ell < 2 or n < 2:
        raise ValueError("sparse identity needs ell >= 2 and n >= 2")
    f = sparse_identity_function(ell, n)
    d = n * ell
    a = np.sqrt(np.sqrt((ell - 1) / n))
    b = np.sqrt(np.sqrt((ell - 1) * n) / (n - 1))
    c = np.sqrt(np.sqrt((ell - 1) * n))

    def ket(j, q):
        e = np.zeros(d)
        e[j * ell + q] = 1.0
        return e

    zeros = sum(ket(i, 0) for i in range(n))
    targets = [a * zeros]
    for j in range(n):
        for q in range(1, ell):
            targets.append(b * (zeros - ket(j, 0)) + c * ket(j, q))
    inputs = {(j, q): ket(j, q)[:, None] for j in range(n) for q in range(ell)}
    P = SpanProgram.orthogonal(n, ell, np.array(targets), inputs)

    # the columns of P are exactly the |j,q> axes, so coefficients equal coordinates
    W = WitnessSet()
    nonzero = np.ones(d)
    nonzero[::ell] = 0.0  # sum_{i, p != 0} |i, p>
    W.add((0,) * n, a * zeros, nonzero / c)
    for j in range(n):
        for q in range(1, ell):
            x = [0] * n
            x[j] = q
            w = b * (zeros - ket(j, 0)) + c * ket(j, q)
            others = nonzero.copy()
            others[j * ell:(j + 1) * ell] = 0.0
            own = np.zeros(d)
            own[j * ell + 1:(j + 1) * ell] = 1.0
            own[j * ell + q] = 0.0
            wbar = ket(j, 0) / a + own / c + (1 - b / a) / c * others
            W.add(x, w, wbar)
    return P, W, f


def max_function(ell: int, n: int) -> PartialFunction:
    return PartialFunction(n, ell, ell, {x: max(x) for x in product(range(ell), repeat=n)})


def _max_negative(ell: int, n: int, x, c2: float) -> np.ndarray:
    """``c^-1 sum_{q > alpha} |q> + c sum_{q < alpha} |j0, q>`` with ``j0`` the first argmax."""
    alpha = max(x)
    j0 = x.index(alpha)
    c = np.sqrt(c2)
    wbar = np.zeros((n + 1) * ell)
    wbar[n * ell + alpha + 1:] = 1 / c
    wbar[j0 * ell:j0 * ell + alpha] = c
    return wbar


def _max_targets(ell: int, n: int, c2: float) -> np.ndarray:
    c = np.sqrt(c2)
    T = np.zeros((ell, (n + 1) * ell))
    for alpha in range(ell):
        T[alpha, n * ell + alpha] = c
        T[alpha, alpha:n * ell:ell] = 1 / c
    return T


def max_woi(ell: int, n: int) -> tuple[SpanProgram, WitnessSet, PartialFunction]:
    """Orthogonal-inputs program with ``I_{j,q} = {|q>} u {|j,r> : r >= q}``, ``c^2 = sqrt(n / (ell - 1))``."""
    if ell < 2 or n < 1:
        raise ValueError("Max needs ell >= 2 and n >= 1")
    f = max_function(ell, n)
    d = (n + 1) * ell
    c2 = np.sqrt(n / (ell - 1))
    c = np.sqrt(c2)
    eye = np.eye(d)
    inputs = {}
    for j in range(n):
        for q in range(ell):
            cols = [n * ell + q] + [j * ell + r for r in range(q, ell)]
            inputs[(j, q)] = eye[:, cols]
    P = SpanProgram.orthogonal(n, ell, _max_targets(ell, n, c2), inputs)
    W = WitnessSet()
    for x in f.domain:
        alpha = max(x)
        j0 = x.index(alpha)
        w = np.zeros(P.H_dim)
        # |alpha> is the first column of I_{j0, alpha}
        w[P.offsets[j0] + _col_start(ell, alpha)] = c
        for j in range(n):
            # |j, alpha> inside I_{j, x_j}: after |x_j> and |j, x_j .. alpha - 1>
            w[P.offsets[j] + _col_start(ell, x[j]) + 1 + (alpha - x[j])] = 1 / c
        W.add(x, w, _max_negative(ell, n, x, c2))
    return P, W, f


def _col_start(ell: int, q: int) -> int:
    """Offset of ``I_{j,q}`` inside block ``j``; ``I_{j,p}`` holds ``1 + (ell - p)`` columns."""
    return sum(1 + ell - p for p in range(q))


def max_nbsp(ell: int, n: int) -> tuple[SpanProgram, WitnessSet, PartialFunction]:
    """General program with ``dim H_j = 2 ell`` and ``c^2 = sqrt(n)``.

    Local coordinates of ``H_j``: ``|j>|q>`` at ``q`` and ``|j>|j,q>`` at ``ell + q``.
    """
    if ell < 2 or n < 1:
        raise ValueError("Max needs ell >= 2 and n >= 1")
    f = max_function(ell, n)
    d = (n + 1) * ell
    c2 = np.sqrt(n)
    c = np.sqrt(c2)
    local = np.eye(2 * ell)
    gens = {(j, q): local[:, [q] + [ell + r for r in range(q, ell)]]
            for j in range(n) for q in range(ell)}
    A = np.zeros((d, 2 * ell * n))
    for j in range(n):
        for q in range(ell):
            A[n * ell + q, 2 * ell * j + q] = 1.0
            A[j * ell + q, 2 * ell * j + ell + q] = 1.0
    P = SpanProgram.general(n, ell, _max_targets(ell, n, c2), [2 * ell] * n, gens, A)
    W = WitnessSet()
    for x in f.domain:
        alpha = max(x)
        j0 = x.index(alpha)
        w = np.zeros(P.H_dim)
        w[2 * ell * j0 + alpha] = c
        w[ell + alpha::2 * ell] = 1 / c
        W.add(x, w, _max_negative(ell, n, x, c2))
    return P, W, f


# -- small fixtures for the adversary evaluator and the binary pair combination ---------

def or_promise_function() -> PartialFunction:
    """OR on two bits promised to have at most one 1."""
    return PartialFunction(2, 2, 2, {(0, 0): 0, (1, 0): 1, (0, 1): 1})


def or_promise_adversary():
    """``Gamma`` joining ``00`` to both weight-one words; its value is ``sqrt(2)``."""
    from .adversary import AdversaryMatrix
    f = or_promise_function()
    G = np.zeros((3, 3))
    G[0, 1:] = G[1:, 0] = 1.0
    return AdversaryMatrix(f.domain, G), f


def identity_bit_pair():
    """Binary span programs for ``f(x) = x_1`` and ``1 - f`` on one bit."""
    from .span import BinarySpanProgram
    f = PartialFunction(1, 2, 2, {(0,): 0, (1,): 1})
    e = np.ones((1, 1))
    Pf = BinarySpanProgram(1, 2, np.ones(1), {(0, 1): e}, {(1,): np.ones(1)}, {(0,): np.ones(1)})
    Pc = BinarySpanProgram(1, 2, np.ones(1), {(0, 0): e}, {(0,): np.ones(1)}, {(1,): np.ones(1)})
    return Pf, Pc, f


def star_learning_graph(ell: int, n: int, weight: float = 1.0):
    """Star graph with unit flows for the sparse identity on the inputs with nonzero output."""
    from .learning_graph import LearningGraph, star_flows
    f = sparse_identity_function(ell, n).restrict(lambda x, a: a != 0)
    return LearningGraph.star(n, weight), star_flows(f), f


def or_promise_program():
    """Orthogonal-inputs program for the OR promise built from a binary pair; wsize 2."""
    from .span import BinarySpanProgram, combine_binary_pair
    f = or_promise_function()
    e = np.eye(2)
    one = np.ones((1, 1))
    # OR: t = 1 is available from either index set to 1
    Pf = BinarySpanProgram(2, 2, np.ones(1), {(0, 1): one, (1, 1): one},
                           {(1, 0): e[0], (0, 1): e[1]}, {(0, 0): np.ones(1)})
    # NOR: t' = e_0 + e_1 needs both indices at 0
    Pc = BinarySpanProgram(2, 2, np.ones(2), {(0, 0): e[:, [0]], (1, 0): e[:, [1]]},
                           {(0, 0): np.ones(2)}, {(1, 0): e[0], (0, 1): e[1]})
    P, W = combine_binary_pair(Pf, Pc, f)
    return P, W, f
