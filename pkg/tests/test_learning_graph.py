import numpy as np
import pytest
from hypothesis import given, strategies as st

from spanforge.adversary import mu_nu, nbsp_to_dual
from spanforge.gallery import max_function, star_learning_graph
from spanforge.learning_graph import (FlowSet, LearningGraph, lg_complexity, lg_to_nbsp, lg_to_nbspwoi,
                                      nonfree_column_count, star_flows, validate_flows)
from spanforge.span import canonicalize, complexity, evaluates

from conftest import dual_residual_oracle

E0, E1 = (frozenset(), 0), (frozenset(), 1)


def max_graph():
    """Max on [3]^2 without the zero output; two-step paths for inputs whose max is 1."""
    f = max_function(3, 2).restrict(lambda x, a: a != 0)
    G = LearningGraph(2, {E0: 1.0, E1: 1.0, (frozenset({0}), 1): 0.5, (frozenset({1}), 0): 0.5})
    flows = {}
    for x in f.domain:
        if x[0] == 2:
            flows[x] = {E0: 1.0}
        elif x[1] == 2:
            flows[x] = {E1: 1.0}
        elif x[0] == 1:
            flows[x] = {E0: 1.0, (frozenset({0}), 1): 1.0}
        else:
            flows[x] = {E1: 1.0, (frozenset({1}), 0): 1.0}
    return G, FlowSet(flows), f


def test_graph_validation():
    with pytest.raises(ValueError):
        LearningGraph(2, {(frozenset({0}), 0): 1.0})
    with pytest.raises(ValueError):
        LearningGraph(2, {E0: 0.0})
    G = LearningGraph.star(3)
    assert frozenset() in G.vertices and len(G.edges) == 3


def test_star_flows_valid():
    G, F, f = star_learning_graph(3, 4)
    assert validate_flows(G, F, f).valid


def test_source_value_two_gives_residual_one():
    G, F, f = star_learning_graph(2, 3)
    x = f.domain[0]
    doubled = dict(F.flows)
    doubled[x] = {e: 2 * p for e, p in F.flows[x].items()}
    rep = validate_flows(G, FlowSet(doubled), f)
    assert rep.source[x] == pytest.approx(1.0)
    assert not rep.valid


def test_illegal_sink_reported():
    G, F, f = star_learning_graph(2, 3)
    x = next(x for x in f.domain if x[0] == 0)
    bad = dict(F.flows)
    bad[x] = {E0: 1.0}
    rep = validate_flows(G, FlowSet(bad), f)
    assert (x, frozenset({0})) in rep.illegal_sinks


def test_unknown_edge():
    G, F, f = star_learning_graph(2, 3)
    x = f.domain[0]
    bad = dict(F.flows)
    bad[x] = {(frozenset({0}), 1): 1.0}
    with pytest.raises(KeyError):
        validate_flows(G, FlowSet(bad), f)


def test_lg_complexity_examples():
    G = LearningGraph.star(4)
    F = FlowSet({(1, 0, 0, 0): {E0: 1.0}})
    assert lg_complexity(G, F) == pytest.approx((4.0, 1.0, 2.0))
    split = FlowSet({(1, 1): {E0: 0.5, E1: 0.5}})
    assert lg_complexity(LearningGraph.star(2), split)[1] == pytest.approx(0.5)


@given(st.floats(0.1, 10.0))
def test_complexity_scale_invariant(c):
    G, F, f = max_graph()
    N, P, C = lg_complexity(G, F)
    N2, P2, C2 = lg_complexity(G.scaled(c), F)
    assert (N2, P2, C2) == pytest.approx((c * N, P / c, C))


@pytest.mark.parametrize("ell,n", [(2, 3), (3, 2)])
def test_woi_sizes(ell, n):
    G, F, f = star_learning_graph(ell, n)
    P, W = lg_to_nbspwoi(G, F, f)
    assert evaluates(P, f, W).valid
    g = mu_nu(f.m)
    norm2 = np.vdot(g.mu[1], g.mu[1]).real
    rep = complexity(P, f, W)
    assert rep.wsize_plus == pytest.approx(norm2 * 1.0)
    assert rep.wsize_minus == pytest.approx((ell - 1) * norm2 * n)


@pytest.mark.parametrize("ell,n", [(2, 3), (3, 4)])
def test_nbsp_sizes(ell, n):
    G, F, f = star_learning_graph(ell, n)
    P, W = lg_to_nbsp(G, F, f)
    assert evaluates(P, f, W).valid
    g = mu_nu(f.m)
    norm2 = np.vdot(g.mu[1], g.mu[1]).real
    rep = complexity(P, f, W)
    assert rep.wsize_plus == pytest.approx(2 * norm2)
    assert rep.wsize_minus == pytest.approx(2 * (ell - 1) / (ell + 1) * norm2 * n)
    assert rep.balanced <= 4 * lg_complexity(G, F)[2] + 1e-6


@pytest.mark.parametrize("compile_", [lg_to_nbsp, lg_to_nbspwoi])
def test_two_level_graph(compile_):
    G, F, f = max_graph()
    assert validate_flows(G, F, f).valid
    P, W = compile_(G, F, f)
    assert evaluates(P, f, W).valid
    C, W2 = canonicalize(P, f, W)
    assert dual_residual_oracle(nbsp_to_dual(C, W2, f), f) <= 1e-8


def test_realized_only_and_cap():
    G, F, f = max_graph()
    full = nonfree_column_count(G, f)
    real = nonfree_column_count(G, f, realized_only=True)
    assert real <= full
    P, W = lg_to_nbspwoi(G, F, f, realized_only=True)
    assert evaluates(P, f, W).valid
    with pytest.raises(ValueError, match="cap"):
        lg_to_nbspwoi(G, F, f, cap=10)


def test_zero_output_must_be_removed():
    G = LearningGraph.star(2)
    f = max_function(2, 2)
    F = star_flows(f)
    with pytest.raises(ValueError):
        lg_to_nbsp(G, F, f)
