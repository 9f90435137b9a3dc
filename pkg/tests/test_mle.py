import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bmtm.errors import DuplicateValue, InvalidTree, NotFullyObserved, ZeroValue
from bmtm.mle import (
    brute_force_mle,
    log_objective,
    loglik_of_result,
    mle,
    objective,
    result_for_sparsity,
)
from bmtm.suites import check_oracle_instance, random_tree
from bmtm.tree_model import (
    RootedTree,
    contract_set,
    is_fully_observed,
    parse_newick,
    star_tree,
)

from conftest import FIG_NEWICK, FIG_X, tree_and_data


@pytest.fixture
def fig_tree():
    return parse_newick(FIG_NEWICK)[0]


def test_objective_fig(fig_tree):
    # hub edge, leaf 2 and leaf 3 zeroed: chain -5 - -2 - 0 - 4 - 8
    assert math.isclose(objective(fig_tree, {5, 2, 3}, FIG_X), 3 * 2 * 4 * 4)


def test_objective_star_examples():
    t = star_tree(3)
    x = (-1.0, 3.0, 4.0)
    assert math.isclose(objective(t, {4}, x), 1 * 3 * 4)
    # hub takes the value of leaf 2
    assert math.isclose(objective(t, {2}, x), 3 * 4 * 1)
    with pytest.raises(NotFullyObserved):
        objective(t, set(), x)


def test_mle_fig(fig_tree):
    r = mle(fig_tree, FIG_X)
    assert math.isclose(r.objective, 96, rel_tol=1e-9)
    assert r.sparsity == {5, 2, 3}
    assert r.tie_count == 1
    hub = fig_tree.root_child
    assert r.value_index[hub] == 0
    left, right = fig_tree.children[hub]
    assert {r.value_index[left], r.value_index[right]} == {2, 3}


def test_mle_nonunique_star():
    r = mle(star_tree(3), (-1.0, 3.0, 4.0))
    assert math.isclose(r.objective, 12)
    assert r.tie_count == 2
    assert r.sparsity == {4}  # zero edge preferred on ties


def test_mle_contrast_star():
    r = mle(star_tree(3), (1.0, 6.0, 4.0))
    assert math.isclose(r.objective, 15)
    assert r.sparsity == {1}


def test_mle_univariate():
    r = mle(RootedTree((-1, 0)), [-3.0])
    assert r.theta[1] == 9.0 and math.isclose(r.objective, 3.0)
    assert math.isclose(loglik_of_result(r, [-3.0]), -0.5 * math.log(9) - 0.5)


def test_mle_errors():
    with pytest.raises(DuplicateValue):
        mle(star_tree(3), [1.0, 1.0, 2.0])
    with pytest.raises(ZeroValue):
        mle(star_tree(2), [0.0, 1.0])
    with pytest.raises(InvalidTree):
        mle((-1, 3, 3, 0), [1.0, 2.0])


def test_brute_force_examples(fig_tree):
    assert math.isclose(brute_force_mle(fig_tree, FIG_X).objective, 96)
    b = brute_force_mle(star_tree(3), (-1.0, 3.0, 4.0))
    assert math.isclose(b.objective, 12) and b.tie_count == 2


@settings(max_examples=150, deadline=None)
@given(tree_and_data(max_d=7))
def test_oracle_invariants(instance):
    tree, x = instance
    checks = check_oracle_instance(tree, x)
    assert all(checks.values()), checks


@settings(max_examples=80, deadline=None)
@given(tree_and_data(max_d=8))
def test_theta_matches_contraction(instance):
    tree, x = instance
    r = mle(tree, x)
    again = result_for_sparsity(tree, r.sparsity, x)
    assert np.allclose(r.theta, again.theta, rtol=1e-12, atol=0)
    assert is_fully_observed(tree, r.sparsity)
    assert len(contract_set(tree, r.sparsity).nodes) == tree.d + 1


@settings(max_examples=60, deadline=None)
@given(tree_and_data(max_d=6), st.floats(0.1, 10))
def test_loglik_scaling(instance, lam):
    tree, x = instance
    a = mle(tree, x).loglik
    b = mle(tree, lam * x).loglik
    assert math.isclose(a - b, tree.d * math.log(lam), rel_tol=1e-9, abs_tol=1e-9)


def test_ties_measure_zero():
    rng = np.random.default_rng(5)
    for _ in range(2000):
        d = int(rng.integers(2, 9))
        tree = random_tree(d, rng, p_multi=0.3)
        assert mle(tree, rng.standard_normal(d)).tie_count == 1


def test_large_tree_runs():
    rng = np.random.default_rng(0)
    tree = random_tree(200, rng, p_multi=0.2)
    x = rng.standard_normal(200)
    r = mle(tree, x)
    assert math.isclose(r.objective_log, log_objective(tree, r.sparsity, x), rel_tol=1e-12)
