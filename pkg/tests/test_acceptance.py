"""Acceptance criteria, one test each, with a PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v``; the summary lines are
written straight to the terminal.
"""
import math
import statistics
import time

import numpy as np
import pytest

from bmtm.contrast import contrast_mle, plgtm_divergence_witness
from bmtm.ddm import ddm_mle
from bmtm.likelihood import fiedler_inverse, laplacian_embed, laplacian_restrict, log_likelihood
from bmtm.mle import brute_force_mle, loglik_of_result, mle, result_for_sparsity
from bmtm.simulate import ExperimentConfig, run_experiment
from bmtm.suites import (
    curvature_suite,
    kkt_suite,
    matrixtree_suite,
    random_tree,
    random_weights,
)
from bmtm.tree_model import RootedTree, enumerate_fully_observed, is_fully_observed, parse_newick, star_tree

from conftest import FIG_NEWICK, FIG_X


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {n}: {detail}")
        return ok

    return emit


def _median_time(fn, reps=200):
    fn()
    times = []
    for _ in range(reps):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return statistics.median(times)


def test_c01_ddm_exact(report):
    P, K = ddm_mle(FIG_X)
    eP = np.zeros((5, 5))
    for i, j, v in [(1, 2, 1 / 9), (2, 0, 1 / 4), (0, 3, 1 / 16), (3, 4, 1 / 16)]:
        eP[i, j] = eP[j, i] = v
    eK = np.array([
        [1 / 9, -1 / 9, 0, 0],
        [-1 / 9, 13 / 36, 0, 0],
        [0, 0, 1 / 8, -1 / 16],
        [0, 0, -1 / 16, 1 / 16],
    ])
    err = max(np.abs(P - eP).max(), np.abs(K - eK).max())
    t = _median_time(lambda: ddm_mle(FIG_X))
    ok = err <= 1e-12 and t < 1e-3
    assert report(1, ok, f"max entry error {err:.1e}, median runtime {t * 1e3:.3f} ms"), (err, t)


def test_c02_dp_worked_example(report):
    tree, _ = parse_newick(FIG_NEWICK)
    r = mle(tree, FIG_X)
    rel = abs(r.objective - 96) / 96
    t = _median_time(lambda: mle(tree, FIG_X))
    # top row of the figure: zeros on the hub edge, above -2 and above 4
    ok = rel <= 1e-9 and r.sparsity == {tree.root_child, 2, 3} and t < 1e-3
    assert report(2, ok, f"objective {r.objective:.12g}, sparsity {sorted(r.sparsity)}, median runtime {t * 1e3:.3f} ms")


def test_c03_nonuniqueness(report):
    r = mle(star_tree(3), (-1.0, 3.0, 4.0))
    ok = math.isclose(r.objective, 12, rel_tol=1e-12) and r.tie_count == 2
    assert report(3, ok, f"objective {r.objective:.12g}, tie_count {r.tie_count}")


def test_c04_contrast(report):
    c = contrast_mle(star_tree(3), [1.0, 6.0, 4.0])
    zero_leaf = [c.rerooted.leaf_origin[i - 1] for i in c.mle.sparsity if c.tree.is_leaf(i)]
    direct = mle(star_tree(3), [1.0, 6.0, 4.0])
    ok = (
        math.isclose(c.mle.objective, 6)
        and c.mle.sparsity == {2}
        and zero_leaf == [3]
        and math.isclose(direct.objective, 15)
        and direct.sparsity == {1}
    )
    assert report(4, ok, f"contrast objective {c.mle.objective:.12g} zero above original leaf {zero_leaf}; "
                         f"direct objective {direct.objective:.12g} zero {sorted(direct.sparsity)}")


def _instances():
    rng = np.random.default_rng(2024)
    for d in range(2, 9):
        for k in range(200):
            tree = random_tree(d, rng, p_multi=0.0 if k % 2 == 0 else 0.5)
            yield tree, rng.standard_normal(d)


@pytest.fixture(scope="module")
def oracle_runs():
    runs = []
    t = time.perf_counter()
    for tree, x in _instances():
        runs.append((tree, x, mle(tree, x), brute_force_mle(tree, x)))
    return runs, time.perf_counter() - t


def test_c05_oracle_equivalence(report, oracle_runs):
    runs, elapsed = oracle_runs
    bad = 0
    for tree, x, r, b in runs:
        same_obj = abs(r.objective_log - b.objective_log) <= 1e-9 * max(1.0, abs(b.objective_log))
        same_s = r.tie_count != 1 or r.sparsity == b.sparsity
        bad += not (same_obj and same_s)
    multi = sum(any(len(c) > 2 for c in tree.children) for tree, *_ in runs)
    ok = bad == 0 and elapsed < 60
    assert report(5, ok, f"{len(runs) - bad}/{len(runs)} agree ({multi} multifurcating), {elapsed:.1f} s")


def test_c06_structural(report, oracle_runs):
    runs, _ = oracle_runs
    fails = {"fully_observed": 0, "zero_location": 0, "sandwich": 0}
    for tree, x, r, _ in runs:
        fails["fully_observed"] += not is_fully_observed(tree, r.sparsity)
        fails["zero_location"] += not any(tree.is_leaf(i) or i == tree.root_child for i in r.sparsity)
        ll = loglik_of_result(r, x)
        ll_ddm = log_likelihood(ddm_mle(x).K, x)
        slack = 1e-9 * max(1.0, abs(ll))
        cands = (result_for_sparsity(tree, s, x).loglik for s in enumerate_fully_observed(tree))
        fails["sandwich"] += not (ll_ddm >= ll - slack and all(ll >= c - slack for c in cands))
    ok = not any(fails.values())
    assert report(6, ok, f"failures over {len(runs)} instances: {fails}")


def test_c07_kkt(report):
    rep = kkt_suite(instances=500, seed=7, d_values=range(2, 7))
    assert report(7, rep.ok, f"{rep.passed}/500 certificates pass at tol 1e-9"), rep.first_failure


def test_c08_matrix_tree(report):
    rep = matrixtree_suite(instances=100, seed=8, max_d=5)
    assert report(8, rep.ok, f"{rep.passed}/100 match dense logdet within 1e-9 relative"), rep.first_failure


def test_c09_curvature(report):
    rep = curvature_suite(instances=100, seed=9, d_values=range(2, 7))
    assert report(9, rep.ok, f"{rep.passed}/100 positive and matching finite differences within 1e-5"), rep.first_failure


def test_c10_bijection(report):
    rng = np.random.default_rng(10)
    ddm_exact = lap_exact = 0
    lap_float_err = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 8))
        K = fiedler_inverse(random_weights(n, rng))
        ddm_exact += np.array_equal(laplacian_restrict(laplacian_embed(K)), K)
        # integer weights keep every row sum exact in floating point
        Pi = np.round(random_weights(n, rng) * 8)
        Pi[np.arange(n - 1), np.arange(1, n)] = Pi[np.arange(1, n), np.arange(n - 1)] = np.maximum(
            Pi[np.arange(n - 1), np.arange(1, n)], 1.0)
        L = np.diag(Pi.sum(axis=1)) - Pi
        lap_exact += np.array_equal(laplacian_embed(laplacian_restrict(L)), L)
        Pf = random_weights(n, rng)
        Lf = np.diag(Pf.sum(axis=1)) - Pf
        err = np.abs(laplacian_embed(laplacian_restrict(Lf)) - Lf).max() / np.abs(Lf).max()
        lap_float_err = max(lap_float_err, err)
    ok = ddm_exact == 100 and lap_exact == 100 and lap_float_err <= 1e-12
    assert report(10, ok, f"DDM exact {ddm_exact}/100, integer Laplacian exact {lap_exact}/100, "
                          f"real-weight Laplacian max rel error {lap_float_err:.1e}")


def test_c11_plgtm(report):
    eps = 10.0 ** -np.arange(7)
    rng = np.random.default_rng(11)
    worst = 0.0
    for d in range(2, 7):
        x = rng.standard_normal(d)
        x[1] = x[0]
        lls = [ll for _, ll in plgtm_divergence_witness(x, eps)]
        steps = np.diff(lls)
        worst = max(worst, float(np.abs(steps - 0.5 * math.log(10)).max()))
    ok = worst <= 1e-6
    assert report(11, ok, f"max deviation of per-decade increase from log(10)/2: {worst:.1e}")


def test_c12_direction(report):
    cfg = ExperimentConfig(d_values=(8,), trials=500, seed=12, estimators=("bmtm_mle", "ddm_mle"),
                           metrics=("bias", "variance"), bias_replicates=50, workers=1)
    t = time.perf_counter()
    table = run_experiment(cfg)
    elapsed = time.perf_counter() - t
    b_bm, b_ddm = table.get(8, "bmtm_mle", "bias").mean, table.get(8, "ddm_mle", "bias").mean
    v_bm, v_ddm = table.get(8, "bmtm_mle", "variance").mean, table.get(8, "ddm_mle", "variance").mean
    ok = b_ddm > b_bm and v_ddm < v_bm and elapsed < 300
    assert report(12, ok, f"bias DDM {b_ddm:.4f} > BMTM {b_bm:.4f}; variance DDM {v_ddm:.4f} < BMTM {v_bm:.4f}; {elapsed:.1f} s")


def balanced_tree(d: int) -> RootedTree:
    active = list(range(1, d + 1))
    parent = {}
    node = d + 1
    while len(active) > 1:
        nxt = []
        for i in range(0, len(active) - 1, 2):
            parent[active[i]] = parent[active[i + 1]] = node
            nxt.append(node)
            node += 1
        if len(active) % 2:
            nxt.append(active[-1])
        active = nxt
    parent[active[0]] = 0
    par = [-1] * node
    for c, p in parent.items():
        par[c] = p
    return RootedTree(tuple(par))


def test_c13_complexity(report):
    rng = np.random.default_rng(13)
    times = {}
    for d in (100, 400, 500):
        tree = balanced_tree(d)
        x = rng.standard_normal(d)
        times[d] = statistics.median(_timed(lambda: mle(tree, x)) for _ in range(5))
    slope = math.log(times[400] / times[100]) / math.log(4)
    ok = slope <= 3.5 and times[500] <= 5
    assert report(13, ok, f"log-log slope {slope:.2f} (100 -> 400), d=500 in {times[500]:.3f} s")


def _timed(fn):
    t = time.perf_counter()
    fn()
    return time.perf_counter() - t
