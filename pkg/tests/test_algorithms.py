import numpy as np
import pytest

from spanforge.adversary import nbsp_to_dual
from spanforge.algorithms import (ZeroErrorAlgorithm, check_zero_error, compile_nbsp, compile_woi,
                                  deutsch_parity_example, simulate)
from spanforge.functions import PartialFunction
from spanforge.span import canonicalize, complexity, evaluates

from conftest import dual_residual_oracle


@pytest.mark.parametrize("x,out", [((0, 0), 0), ((1, 1), 0), ((1, 0), 1), ((0, 1), 1)])
def test_deutsch_trace(x, out):
    alg, f = deutsch_parity_example()
    final = simulate(alg, x)[-1]
    expected = np.zeros(alg.dim)
    expected[alg.basis_index(0, 0, out)] = 1.0
    np.testing.assert_allclose(final, expected, atol=1e-12)
    assert f(x) == out


def test_states_are_normalised():
    alg, _ = deutsch_parity_example()
    states = simulate(alg, (1, 0))
    assert len(states) == 2 * alg.Q + 2
    for phi in states:
        assert np.linalg.norm(phi) == pytest.approx(1.0)


def test_non_unitary_rejected():
    with pytest.raises(ValueError):
        ZeroErrorAlgorithm(0, 1, 2, 2, (2 * np.eye(2),))


def test_global_phase_counts_as_error():
    alg, f = deutsch_parity_example()
    flipped = ZeroErrorAlgorithm(0, 2, 2, 2, alg.unitaries[:-1] + (-alg.unitaries[-1],))
    rep = check_zero_error(flipped, f)
    assert not rep.valid and rep.max_deviation == pytest.approx(2.0)
    with pytest.raises(ValueError):
        compile_woi(flipped, f)


def test_wrong_function_rejected():
    alg, _ = deutsch_parity_example()
    g = PartialFunction(2, 2, 2, {(a, b): a & b for a in (0, 1) for b in (0, 1)})
    assert not check_zero_error(alg, g).valid


def test_compile_woi_sizes():
    alg, f = deutsch_parity_example()
    P, W = compile_woi(alg, f)
    assert evaluates(P, f, W).valid
    rep = complexity(P, f, W)
    assert rep.wsize_plus == pytest.approx(alg.Q, abs=1e-9)
    assert rep.wsize_minus <= 4 * alg.Q + 1e-9


def test_compile_nbsp_sizes():
    alg, f = deutsch_parity_example()
    P, W = compile_nbsp(alg, f)
    assert evaluates(P, f, W).valid
    rep = complexity(P, f, W)
    assert rep.wsize_minus == pytest.approx(2 * alg.Q + 2, abs=1e-8)
    # each even step contributes |phi_{tau-1}|^2 twice: once at tau-1 and once at tau
    assert rep.wsize_plus == pytest.approx(2 * alg.Q, abs=1e-8)


@pytest.mark.parametrize("compile_", [compile_woi, compile_nbsp])
def test_compiled_programs_dualise(compile_):
    alg, f = deutsch_parity_example()
    P, W = compile_(alg, f)
    C, W2 = canonicalize(P, f, W)
    sol = nbsp_to_dual(C, W2, f)
    assert dual_residual_oracle(sol, f) <= 1e-8


def test_single_query_identity():
    """One query on a single bit: phase kickback then a Hadamard-like U_3."""
    s = 1 / np.sqrt(2)
    # basis |j=0, a> for a in {0, 1}; start |0,0>
    U1 = np.array([[s, s], [s, -s]])
    U3 = np.array([[s, s], [s, -s]])
    alg = ZeroErrorAlgorithm(0, 1, 2, 2, (U1, U3))
    states = simulate(alg, (1,))
    # after the oracle both amplitudes carry (-1)
    np.testing.assert_allclose(states[2], -states[1], atol=1e-12)
