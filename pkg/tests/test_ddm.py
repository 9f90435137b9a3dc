import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bmtm.ddm import ddm_mle, ddm_mle_tree, sorted_path_tree, verify_kkt
from bmtm.errors import DisconnectedSupport, DuplicateValue, ZeroValue
from bmtm.likelihood import fiedler_inverse, is_ddm, log_likelihood
from bmtm.mle import mle
from bmtm.suites import random_tree, random_weights
from bmtm.tree_model import build_covariance

from conftest import FIG_X

seeds = st.integers(0, 2**32 - 1)


def _data(d, seed):
    return np.random.default_rng(seed).standard_normal(d)


def test_sorted_path_examples():
    assert sorted_path_tree(FIG_X).order == (1, 2, 0, 3, 4)
    assert sorted_path_tree([3.0]).order == (0, 1)
    with pytest.raises(DuplicateValue):
        sorted_path_tree([1.0, 1.0])
    with pytest.raises(ZeroValue):
        sorted_path_tree([1.0, 0.0])


def test_fig_values():
    P, K = ddm_mle(FIG_X)
    expected_P = np.zeros((5, 5))
    for i, j, v in [(1, 2, 1 / 9), (2, 0, 1 / 4), (0, 3, 1 / 16), (3, 4, 1 / 16)]:
        expected_P[i, j] = expected_P[j, i] = v
    expected_K = np.array([
        [1 / 9, -1 / 9, 0, 0],
        [-1 / 9, 13 / 36, 0, 0],
        [0, 0, 1 / 8, -1 / 16],
        [0, 0, -1 / 16, 1 / 16],
    ])
    assert np.allclose(P, expected_P, rtol=0, atol=1e-12)
    assert np.allclose(K, expected_K, rtol=0, atol=1e-12)


def test_univariate():
    _, K = ddm_mle([3.0])
    assert np.allclose(K, [[1 / 9]])
    tree, theta = ddm_mle_tree([3.0])
    assert tree.parent == (-1, 0) and theta[1] == 9.0


def test_fig_tree_shape():
    tree, theta = ddm_mle_tree(FIG_X)
    _, K = ddm_mle(FIG_X)
    assert np.allclose(np.linalg.inv(build_covariance(tree, theta)), K, atol=1e-12)
    assert sorted(theta[1:]) == [0, 0, 0, 4, 9, 16, 16]


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 6), seeds)
def test_tree_inverts_to_K(d, seed):
    x = _data(d, seed)
    tree, theta = ddm_mle_tree(x)
    _, K = ddm_mle(x)
    Kt = np.linalg.inv(build_covariance(tree, theta))
    assert np.allclose(Kt, K, rtol=1e-10, atol=1e-10 * np.abs(K).max())


@settings(max_examples=80, deadline=None)
@given(st.integers(2, 6), seeds)
def test_kkt_passes(d, seed):
    x = _data(d, seed)
    rep = verify_kkt(ddm_mle(x).P, x, tol=1e-9)
    assert rep.passed, rep.failures()
    assert is_ddm(ddm_mle(x).K)


def test_kkt_fig_tree_edges_zero_and_off_tree_negative():
    est = ddm_mle(FIG_X)
    rep = verify_kkt(est.P, FIG_X)
    for i, j in est.path.edges:
        assert abs(rep.gradient[i, j]) < 1e-12
    # 1 and 0 are not adjacent on the path
    assert rep.gradient[1, 0] < 0


def test_kkt_catches_violation():
    est = ddm_mle(FIG_X)
    P = est.P.copy()
    xa = np.concatenate([[0.0], FIG_X])
    D = (xa[1] - xa[0]) ** 2
    P[1, 0] = P[0, 1] = 2 / D
    assert not verify_kkt(P, FIG_X).complementary


def test_kkt_spanning_tree_method_agrees():
    x = [0.3, -1.2, 2.0]
    P = ddm_mle(x).P
    a = verify_kkt(P, x, method="path").gradient
    b = verify_kkt(P, x, method="spanning_trees").gradient
    assert np.allclose(a, b, atol=1e-10)


def test_kkt_disconnected():
    with pytest.raises(DisconnectedSupport):
        verify_kkt(np.zeros((3, 3)), [1.0, 2.0])


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), seeds)
def test_beats_random_ddms(d, seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(d)
    best = log_likelihood(ddm_mle(x).K, x)
    for _ in range(500):
        P = random_weights(d + 1, rng) * rng.exponential()
        assert log_likelihood(fiedler_inverse(P), x) <= best + 1e-9


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 5), seeds)
def test_beats_every_bmtm_mle(d, seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(d)
    best = log_likelihood(ddm_mle(x).K, x)
    for _ in range(10):
        tree = random_tree(d, rng, p_multi=0.4)
        assert mle(tree, x).loglik <= best + 1e-9


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), seeds, st.floats(-10, 10).filter(lambda v: abs(v) > 1e-3))
def test_scaling(d, seed, lam):
    x = _data(d, seed)
    K1 = ddm_mle(x).K
    K2 = ddm_mle(lam * x).K
    assert np.allclose(K2, K1 / lam**2, rtol=1e-12, atol=0)


def test_block_structure():
    K = ddm_mle(FIG_X).K
    assert K[0, 2] == 0 and K[1, 3] == 0 and K[0, 3] == 0
