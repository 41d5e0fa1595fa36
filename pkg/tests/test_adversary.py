import numpy as np
import pytest
from hypothesis import given, strategies as st

from spanforge.adversary import (AdversaryMatrix, DualAdversarySolution, InvalidAdversaryMatrix,
                                 adversary_value, check_dual_feasibility, dual_objective, dual_to_nbsp,
                                 dual_to_nbspwoi, mu_nu, nbsp_to_dual)
from spanforge.gallery import max_function, max_nbsp, max_woi, or_promise_adversary, sparse_identity
from spanforge.linalg import InfeasibleError
from spanforge.span import canonicalize, complexity, evaluates, is_canonical

from conftest import adversary_value_oracle, dual_objective_oracle, dual_residual_oracle


def canonical_dual(build, ell, n):
    P, W, f = build(ell, n)
    C, W2 = canonicalize(P, f, W)
    return nbsp_to_dual(C, W2, f), complexity(C, f, W2).wsize, f


@pytest.mark.parametrize("ell", range(2, 17))
def test_mu_nu_gram(ell):
    g = mu_nu(ell)
    gram = np.array([[np.vdot(g.mu[q], g.nu[p]) for p in range(ell)] for q in range(ell)])
    np.testing.assert_allclose(gram, 1 - np.eye(ell), atol=1e-10)
    norms = np.array([np.vdot(v, v).real for v in g.mu])
    np.testing.assert_allclose(norms, 2 * (ell - 1) / ell, atol=1e-10)


def test_nu_perp_is_orthonormal_complement():
    g = mu_nu(5)
    for q in range(5):
        B = g.nu_perp(q)
        np.testing.assert_allclose(B.conj().T @ B, np.eye(4), atol=1e-12)
        np.testing.assert_allclose(B.conj().T @ g.nu[q], 0, atol=1e-12)


def test_mu_nu_rejects_ell_one():
    with pytest.raises(ValueError):
        mu_nu(1)


@pytest.mark.parametrize("build", [sparse_identity, max_woi, max_nbsp])
@pytest.mark.parametrize("ell", [2, 3, 4])
def test_forward_conversion(build, ell):
    sol, wsize, f = canonical_dual(build, ell, 3)
    assert dual_residual_oracle(sol, f) <= 1e-8
    assert check_dual_feasibility(sol, f) == pytest.approx(dual_residual_oracle(sol, f), abs=1e-12)
    assert dual_objective(sol) == pytest.approx(dual_objective_oracle(sol))
    assert dual_objective(sol) == pytest.approx(wsize, rel=1e-8)


def test_forward_needs_canonical_program():
    P, W, f = max_woi(3, 2)
    with pytest.raises(ValueError):
        nbsp_to_dual(P, W, f)


@pytest.mark.parametrize("ell", [2, 3, 5])
def test_reverse_conversions(ell):
    sol, _, f = canonical_dual(max_nbsp, ell, 2)
    obj = dual_objective(sol)
    P, W = dual_to_nbsp(sol, f)
    assert evaluates(P, f, W).valid
    assert complexity(P, f, W).wsize <= 2 * obj + 1e-6
    Q, W2 = dual_to_nbspwoi(sol, f)
    assert is_canonical(Q, f)
    assert evaluates(Q, f, W2).valid
    assert complexity(Q, f, W2).wsize / obj == pytest.approx(np.sqrt(ell - 1), rel=1e-6)


def test_reverse_rejects_infeasible():
    sol, _, f = canonical_dual(max_woi, 3, 2)
    bad = sol.scaled(1.1)
    with pytest.raises(InfeasibleError):
        dual_to_nbsp(bad, f)
    with pytest.raises(InfeasibleError):
        dual_to_nbspwoi(bad, f)


def test_dual_domain_mismatch():
    sol, _, f = canonical_dual(max_woi, 2, 2)
    with pytest.raises(ValueError):
        check_dual_feasibility(sol, max_function(2, 3))


def test_permuted_dual_domain_is_aligned():
    sol, _, f = canonical_dual(max_woi, 3, 2)
    perm = np.random.default_rng(3).permutation(len(sol.domain))
    shuffled = DualAdversarySolution(tuple(sol.domain[i] for i in perm), sol.u[perm], sol.v[perm])
    assert check_dual_feasibility(shuffled, f) <= 1e-9


def test_or_promise_value():
    G, f = or_promise_adversary()
    assert adversary_value(G, f) == pytest.approx(np.sqrt(2), abs=1e-9)
    assert adversary_value(G, f) == pytest.approx(adversary_value_oracle(G, f))


def test_adversary_matrix_validation():
    G, f = or_promise_adversary()
    bad = G.gamma.copy()
    bad[1, 2] = bad[2, 1] = 1.0  # both inputs have output 1
    with pytest.raises(InvalidAdversaryMatrix):
        adversary_value(AdversaryMatrix(G.domain, bad), f)
    asym = G.gamma.copy()
    asym[0, 1] = 2.0
    with pytest.raises(InvalidAdversaryMatrix):
        adversary_value(AdversaryMatrix(G.domain, asym), f)
    with pytest.raises(InvalidAdversaryMatrix):
        adversary_value(AdversaryMatrix(G.domain, np.zeros((3, 3))), f)


@given(st.integers(0, 2 ** 32 - 1), st.sampled_from([2, 3]), st.sampled_from([1, 2, 3]))
def test_weak_duality_random_gamma(seed, ell, n):
    """Any valid Gamma scores at most the objective of any feasible dual point."""
    f = max_function(ell, n)
    rng = np.random.default_rng(seed)
    out = np.array([f(x) for x in f.domain])
    M = rng.random((len(out), len(out)))
    M = (M + M.T) * (out[:, None] != out[None, :])
    if not M.any():
        return
    G = AdversaryMatrix(f.domain, M)
    value = adversary_value(G, f)
    assert value == pytest.approx(adversary_value_oracle(G, f))
    for build in (max_woi, max_nbsp):
        sol, _, _ = canonical_dual(build, ell, n)
        assert value <= dual_objective(sol) + 1e-9
