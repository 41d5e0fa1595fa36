import itertools

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, strategies as st

from spanforge.span import check_pair, negative_size, positive_size
from spanforge.triangle import (NOT_COLORFUL, PromiseViolation, TriangleColoring, UnicyclicTriangleGraph,
                                auxiliary_graph, gamma_labels, monte_carlo_negative_size,
                                random_unicyclic_graph, sample_instance, triangle_label, triangle_program,
                                triangle_witnesses, vertex_pairs)


def bare_triangle():
    return UnicyclicTriangleGraph(3, frozenset({(0, 1), (1, 2), (0, 2)}), (0, 1, 2))


def test_vertex_pairs_lexicographic():
    assert vertex_pairs(4) == ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))


def test_promise_enforced():
    with pytest.raises(PromiseViolation):
        UnicyclicTriangleGraph(4, frozenset({(0, 1), (1, 2), (2, 3), (0, 3)}), (0, 1, 2))
    with pytest.raises(PromiseViolation):
        UnicyclicTriangleGraph(4, frozenset({(0, 1), (1, 2), (2, 3)}), (0, 1, 2))


def test_random_graph_small_and_deterministic():
    G = random_unicyclic_graph(3, 7)
    assert G.edges == bare_triangle().edges
    assert random_unicyclic_graph(10, 42) == random_unicyclic_graph(10, 42)


@given(st.integers(3, 14), st.integers(0, 2 ** 63 - 1))
def test_random_graph_has_one_triangle(n, seed):
    G = random_unicyclic_graph(n, seed)
    cycles = nx.cycle_basis(G.graph())
    assert len(cycles) == 1 and len(cycles[0]) == 3
    assert nx.is_connected(G.graph())


def test_program_rules():
    col = TriangleColoring((0, 1, 2, 0))
    P = triangle_program(4, col)
    assert P.m == 2
    for j, (u, v) in enumerate(vertex_pairs(4)):
        assert P.inputs[(j, 0)].shape[1] == 0
        assert P.inputs[(j, 1)].shape[1] == (0 if col.colors[u] == col.colors[v] else 1)
    # colour 2 -> colour 0 wraps to the |., 3> copy
    j = vertex_pairs(4).index((2, 3))
    vec = P.inputs[(j, 1)][:, 0].real
    assert vec[4 * 2 + 2] == 1 and vec[4 * 3 + 3] == -1


def test_program_needs_colour_zero():
    with pytest.raises(ValueError):
        triangle_program(3, TriangleColoring((1, 1, 2)))


def test_bare_triangle_witnesses():
    G, col = bare_triangle(), TriangleColoring((0, 1, 2))
    P = triangle_program(3, col)
    w, wbar = triangle_witnesses(P, G, col)
    assert positive_size(P, w) == pytest.approx(3.0)
    r = check_pair(P, G.word(), 0, w, wbar)
    assert r.max <= 1e-12
    assert not np.any(wbar)  # gamma is zero on the contracted component
    # neg size equals the explicit sum over input vectors
    total = sum(abs(np.vdot(wbar, v)) ** 2 for v in P.A.T)
    assert negative_size(P, wbar) == pytest.approx(total)


def test_not_colorful():
    G, col = bare_triangle(), TriangleColoring((0, 0, 1))
    assert triangle_label(G, col) is NOT_COLORFUL
    assert triangle_witnesses(triangle_program(3, col), G, col) is NOT_COLORFUL


def test_auxiliary_graph_doubles_colour_zero():
    G, col = bare_triangle(), TriangleColoring((0, 1, 2))
    H = auxiliary_graph(G, col)
    assert set(H.nodes) == {(0, 0), (0, 3), (1, 1), (2, 2)}
    assert nx.cycle_basis(H)  # the lifted triangle x0 - y1 - z2 - x3 - x0


def _colourful(n, seed):
    for t in itertools.count():
        G, col = sample_instance(n, seed ^ t)
        if triangle_label(G, col) is not NOT_COLORFUL:
            return G, col


@given(st.integers(4, 12), st.integers(0, 2 ** 32))
def test_negative_witness_properties(n, seed):
    G, col = _colourful(n, seed)
    P = triangle_program(n, col)
    w, wbar = triangle_witnesses(P, G, col)
    alpha = triangle_label(G, col)
    assert check_pair(P, G.word(), alpha, w, wbar).max <= 1e-9
    x = col.color_zero()[alpha]
    for k, v in enumerate(col.color_zero()):
        if v != x:
            assert np.vdot(P.targets[k], wbar) == pytest.approx(1.0)


def test_gamma_steps_only_across_doubled_vertices():
    G, col = _colourful(10, 11)
    gamma = gamma_labels(G, col)
    H = auxiliary_graph(G, col)
    for a, b in H.edges:
        if a[0] != b[0]:
            assert gamma[a] == gamma[b]


def test_monte_carlo_deterministic():
    a = monte_carlo_negative_size(7, 50, 3)
    b = monte_carlo_negative_size(7, 50, 3)
    assert a == b
    assert a.max_positive_deviation <= 1e-10 and a.max_residual <= 1e-9
    one = monte_carlo_negative_size(7, 1, 3)
    assert one.trials == 1


def test_triangle_family_is_canonicalisable():
    from spanforge.adversary import nbsp_to_dual
    from spanforge.span import canonicalize, evaluates, is_canonical
    from spanforge.triangle import triangle_family
    P, W, f = triangle_family(7, 3, size=5)
    assert len(f) == 5 and len(set(f.table.values())) >= 2
    assert evaluates(P, f, W).valid
    C, W2 = canonicalize(P, f, W)
    assert is_canonical(C, f)
    from conftest import dual_residual_oracle
    assert dual_residual_oracle(nbsp_to_dual(C, W2, f), f) <= 1e-9
