"""Shared fixtures and independent oracles.

The oracles here recompute quantities with plain loops and textbook formulas so
that tests do not lean on the vectorised code they are checking.
"""

import itertools

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("ci", max_examples=40, deadline=None)
settings.load_profile("ci")

ACCEPTANCE_LINES: dict[int, str] = {}


def dual_residual_oracle(sol, f) -> float:
    """max |sum_{j: x_j != y_j} <u_xj|v_yj> - (1 - delta_{f(x), f(y)})| by explicit loops."""
    pos = {x: i for i, x in enumerate(sol.domain)}
    worst = 0.0
    for x, y in itertools.product(f.domain, repeat=2):
        s = 0j
        for j in range(f.n):
            if x[j] != y[j]:
                s += np.vdot(sol.u[pos[x], j], sol.v[pos[y], j])
        want = 0.0 if f(x) == f(y) else 1.0
        worst = max(worst, abs(s - want))
    return worst


def dual_objective_oracle(sol) -> float:
    best = 0.0
    for i in range(len(sol.domain)):
        su = sum(np.linalg.norm(sol.u[i, j]) ** 2 for j in range(sol.n))
        sv = sum(np.linalg.norm(sol.v[i, j]) ** 2 for j in range(sol.n))
        best = max(best, su, sv)
    return best


def adversary_value_oracle(G, f) -> float:
    """||Gamma|| / max_j ||Gamma o Delta_j|| with norms from singular values."""
    order = [G.domain.index(x) for x in f.domain]
    M = G.gamma[np.ix_(order, order)]
    top = np.linalg.svd(M, compute_uv=False)[0]
    den = 0.0
    for j in range(f.n):
        D = np.array([[float(x[j] != y[j]) for y in f.domain] for x in f.domain])
        den = max(den, np.linalg.svd(M * D, compute_uv=False)[0])
    return top / den


def sizes_oracle(P, W, f):
    """(max positive, max negative, wsize) straight from the definitions."""
    pos = neg = ws = 0.0
    for x in f.domain:
        w, wbar = W[x]
        p = float(np.sum(np.abs(np.asarray(w)[:P.nonfree_dim]) ** 2))
        nvec = P.A.conj().T @ np.asarray(wbar)
        q = float(np.sum(np.abs(nvec) ** 2))
        pos, neg, ws = max(pos, p), max(neg, q), max(ws, p, q)
    return pos, neg, ws


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
