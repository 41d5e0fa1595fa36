import numpy as np
import pytest
from hypothesis import given, strategies as st

from spanforge.functions import PartialFunction
from spanforge.gallery import identity_bit_pair, max_nbsp, max_woi, or_promise_program, sparse_identity
from spanforge.linalg import InfeasibleError
from spanforge.span import (InvalidWitnessError, Kind, SpanProgram, canonicalize, check_pair, complexity,
                            combine_binary_pair, evaluates, is_canonical, negative_size, optimal_witnesses,
                            positive_size, rescale, woi_to_general)

from conftest import sizes_oracle


def bit_program():
    """f(x) = x on one bit: t_0 = e_0, t_1 = e_1, I_{0,q} = {e_q}."""
    e = np.eye(2)
    P = SpanProgram.orthogonal(1, 2, e, {(0, 0): e[:, [0]], (0, 1): e[:, [1]]})
    f = PartialFunction(1, 2, 2, {(0,): 0, (1,): 1})
    return P, f


def test_orthogonal_layout():
    P, W, f = max_woi(3, 2)
    assert P.kind is Kind.ORTHOGONAL_INPUTS
    assert P.H_dim == P.nonfree_dim == sum(P.block_dims)
    assert P.A.shape == (P.target_dim, P.H_dim)
    # A is the concatenation of the input vectors
    np.testing.assert_allclose(P.A[:, P.block(0)][:, :4], P.inputs[(0, 0)])


def test_general_rejects_bad_shapes():
    with pytest.raises(ValueError):
        SpanProgram.general(1, 2, np.eye(2), [2], {(0, 0): np.eye(3)}, np.eye(2))


def test_bit_program_witnesses():
    P, f = bit_program()
    W = optimal_witnesses(P, f)
    assert evaluates(P, f, W).valid
    rep = complexity(P, f, W)
    assert rep.wsize == pytest.approx(1.0)


def test_corrupted_witness_detected():
    P, W, f = sparse_identity(3, 3)
    x = f.domain[1]
    w, wbar = W[x]
    W.add(x, w * 1.01, wbar)
    rep = evaluates(P, f, W)
    assert not rep.valid and rep.failures == [x]
    with pytest.raises(InvalidWitnessError):
        complexity(P, f, W)


def test_negative_witness_must_avoid_available_span():
    P, f = bit_program()
    r = check_pair(P, (0,), 0, np.array([1.0, 0.0]), np.array([1.0, 1.0]))
    assert r.orthogonality == pytest.approx(1.0)
    assert r.negative_targets == pytest.approx(0.0)


def test_infeasible_program():
    e = np.eye(2)
    P = SpanProgram.orthogonal(1, 2, e, {(0, 0): e[:, [0]]})
    f = PartialFunction(1, 2, 2, {(0,): 0, (1,): 1})
    with pytest.raises(InfeasibleError):
        optimal_witnesses(P, f)


@pytest.mark.parametrize("build", [sparse_identity, max_woi, max_nbsp])
def test_sizes_match_oracle(build):
    P, W, f = build(3, 3)
    rep = complexity(P, f, W)
    pos, neg, ws = sizes_oracle(P, W, f)
    assert rep.wsize_plus == pytest.approx(pos)
    assert rep.wsize_minus == pytest.approx(neg)
    assert rep.wsize == pytest.approx(ws)


@given(st.floats(0.2, 5.0))
def test_rescale_trades_sides(gamma):
    P, W, f = max_woi(3, 2)
    before = complexity(P, f, W)
    Q, W2 = rescale(P, W, gamma)
    after = complexity(Q, f, W2)
    assert after.wsize_plus == pytest.approx(gamma ** 2 * before.wsize_plus)
    assert after.wsize_minus == pytest.approx(before.wsize_minus / gamma ** 2)
    assert after.balanced == pytest.approx(before.balanced)


def test_balancing_factor_equalises():
    P, W, f = max_woi(4, 3)
    rep = complexity(P, f, W)
    Q, W2 = rescale(P, W, rep.balancing_factor())
    bal = complexity(Q, f, W2)
    assert bal.wsize_plus == pytest.approx(bal.wsize_minus)
    assert bal.wsize == pytest.approx(rep.balanced)


def test_woi_to_general_keeps_witnesses():
    P, W, f = max_woi(3, 2)
    G = woi_to_general(P)
    assert G.kind is Kind.GENERAL
    assert evaluates(G, f, W).valid
    assert complexity(G, f, W).wsize == pytest.approx(complexity(P, f, W).wsize)


@pytest.mark.parametrize("build", [sparse_identity, max_woi, max_nbsp])
def test_canonicalize(build):
    P, W, f = build(3, 2)
    C, W2 = canonicalize(P, f, W)
    assert is_canonical(C, f)
    assert evaluates(C, f, W2).valid
    assert complexity(C, f, W2).wsize == pytest.approx(complexity(P, f, W).wsize)
    for x in f.domain:
        assert positive_size(C, W2.positive[x]) == pytest.approx(positive_size(P, W.positive[x]))
        assert negative_size(C, W2.negative[x]) == pytest.approx(negative_size(P, W.negative[x]))


def test_canonicalize_rejects_invalid_witnesses():
    P, W, f = max_woi(2, 2)
    x = f.domain[0]
    W.add(x, W.positive[x], 2 * W.negative[x])
    with pytest.raises(InvalidWitnessError):
        canonicalize(P, f, W)


def test_combine_binary_pair_identity():
    Pf, Pc, f = identity_bit_pair()
    P, W = combine_binary_pair(Pf, Pc, f)
    assert evaluates(P, f, W).valid
    assert complexity(P, f, W).wsize == pytest.approx(1.0, abs=1e-12)


def test_combine_binary_pair_or_promise():
    P, W, f = or_promise_program()
    assert evaluates(P, f, W).valid
    assert complexity(P, f, W).wsize == pytest.approx(2.0)


def test_canonicalize_rejects_constant_function():
    P, f = bit_program()
    g = PartialFunction(1, 2, 2, {(0,): 0})
    W = optimal_witnesses(P, g)
    with pytest.raises(ValueError, match="constant"):
        canonicalize(P, g, W)
