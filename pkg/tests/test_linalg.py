import numpy as np
import pytest
from hypothesis import given, strategies as st

from spanforge.config import Tolerances, default_tolerances
from spanforge.linalg import InfeasibleError, affine_min_norm, null_space, orth, orth_complement, spectral_norm


def test_orth_rank_deficient():
    M = np.array([[1.0, 2.0, 0.0], [2.0, 4.0, 0.0]])
    Q = orth(M)
    assert Q.shape == (2, 1)
    np.testing.assert_allclose(Q.conj().T @ Q, np.eye(1), atol=1e-12)


def test_null_space():
    M = np.array([[1.0, 1.0, 0.0]])
    N = null_space(M)
    assert N.shape == (3, 2)
    np.testing.assert_allclose(M @ N, 0, atol=1e-12)


@given(st.integers(2, 8), st.integers(0, 2 ** 32 - 1))
def test_orth_complement(d, seed):
    v = np.random.default_rng(seed).normal(size=d) + 1j * np.random.default_rng(seed + 1).normal(size=d)
    B = orth_complement(v)
    np.testing.assert_allclose(B.conj().T @ B, np.eye(d - 1), atol=1e-10)
    np.testing.assert_allclose(B.conj().T @ v, 0, atol=1e-10)


def test_affine_min_norm_against_closed_form():
    """min ||z|| subject to C z = d is the pseudo-inverse solution."""
    rng = np.random.default_rng(5)
    C = rng.normal(size=(2, 5))
    d = rng.normal(size=2)
    z = affine_min_norm(C, d, np.eye(5), 1e-9)
    np.testing.assert_allclose(z, np.linalg.pinv(C) @ d, atol=1e-10)


def test_affine_min_norm_weighted():
    # minimise |z_0| with z_0 + z_1 = 1: the free z_1 takes everything
    z = affine_min_norm(np.array([[1.0, 1.0]]), np.array([1.0]), np.array([[1.0, 0.0]]), 1e-9)
    np.testing.assert_allclose(z, [0.0, 1.0], atol=1e-12)


def test_affine_min_norm_infeasible():
    with pytest.raises(InfeasibleError):
        affine_min_norm(np.array([[1.0, 0.0], [1.0, 0.0]]), np.array([0.0, 1.0]), np.eye(2), 1e-9)


def test_spectral_norm():
    M = np.array([[0.0, 1.0], [1.0, 0.0]])
    assert spectral_norm(M) == pytest.approx(1.0)
    assert spectral_norm(np.array([[1.0, 2.0], [0.0, 0.0]])) == pytest.approx(np.sqrt(5))


def test_tolerances_env(monkeypatch):
    monkeypatch.setenv("SPANFORGE_EPS", "1e-5")
    assert default_tolerances() == Tolerances(eps=1e-5)
    monkeypatch.delenv("SPANFORGE_EPS")
    assert default_tolerances().eps == 1e-9
