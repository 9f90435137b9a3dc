"""Randomized property suites shared by the CLI ``verify`` command and tests.

Each suite draws ``instances`` problems from a seeded generator and returns a
:class:`SuiteReport`. The first failing instance is kept in JSON-ready form
so it can be replayed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .ddm import ddm_mle, verify_kkt
from .likelihood import (
    curvature_probe,
    fiedler_inverse,
    laplacian_embed,
    laplacian_restrict,
    log_likelihood,
    logdet_via_matrix_tree,
)
from .mle import brute_force_mle, loglik_of_result, mle, result_for_sparsity
from .tree_model import (
    ROOT,
    RootedTree,
    build_covariance,
    canonical_form,
    enumerate_fully_observed,
    is_fully_observed,
    parse_newick,
    to_newick,
)


# --- generators ---------------------------------------------------------------


def random_tree(d: int, rng: np.random.Generator, p_multi: float = 0.3) -> RootedTree:
    """Random topology by merging 2 clusters, or 3 with probability ``p_multi``."""
    if d == 1:
        return RootedTree((-1, 0))
    active = list(range(1, d + 1))
    parent = {}
    node = d + 1
    while len(active) > 1:
        k = 3 if len(active) >= 3 and rng.random() < p_multi else 2
        pick = sorted(rng.choice(len(active), size=k, replace=False).tolist())
        for j in pick:
            parent[active[j]] = node
        active = [v for j, v in enumerate(active) if j not in pick] + [node]
        node += 1
    parent[active[0]] = ROOT
    par = [-1] * node
    for c, p in parent.items():
        par[c] = p
    return RootedTree(tuple(par))


def random_theta(tree: RootedTree, rng: np.random.Generator) -> np.ndarray:
    theta = rng.exponential(size=tree.n)
    theta[0] = 0.0
    return theta


def random_weights(n: int, rng: np.random.Generator, density: float = 0.6) -> np.ndarray:
    """Symmetric hollow nonnegative weights with a connected support."""
    P = np.zeros((n, n))
    order = rng.permutation(n)
    for k in range(1, n):  # random spanning tree keeps it connected
        j = order[rng.integers(k)]
        P[order[k], j] = P[j, order[k]] = rng.exponential()
    extra = np.triu(rng.random((n, n)) < density, 1) & (P == 0)
    w = rng.exponential(size=(n, n))
    P[extra] = w[extra]
    P = np.triu(P, 1)
    return P + P.T


# --- reports ------------------------------------------------------------------


@dataclass
class SuiteReport:
    suite: str
    passed: int = 0
    failed: int = 0
    first_failure: dict | None = None
    details: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def record(self, ok: bool, instance: dict):
        if ok:
            self.passed += 1
        else:
            self.failed += 1
            if self.first_failure is None:
                self.first_failure = instance

    def to_json(self) -> dict:
        return {
            "suite": self.suite,
            "passed": self.passed,
            "failed": self.failed,
            "first_failure": self.first_failure,
        }


def _rel_close(a, b, rtol):
    return abs(a - b) <= rtol * max(1.0, abs(a), abs(b))


LAPLACIAN_ATOL = 1e-12  # the border of L is recomputed from row sums


# --- suites -------------------------------------------------------------------


def check_oracle_instance(tree: RootedTree, x) -> dict[str, bool]:
    """All bmtm_mle invariants on one instance."""
    r = mle(tree, x)
    b = brute_force_mle(tree, x)
    checks = {
        "objective": _rel_close(r.objective_log, b.objective_log, 1e-9),
        "sparsity": r.tie_count != 1 or r.sparsity == b.sparsity,
        "tie_count": r.tie_count == b.tie_count,
        "fully_observed": is_fully_observed(tree, r.sparsity),
        "zero_location": tree.d < 2
        or any(tree.is_leaf(i) or i == tree.root_child for i in r.sparsity),
    }
    ll = loglik_of_result(r, x)
    ll_ddm = log_likelihood(ddm_mle(x).K, x)
    cands = [result_for_sparsity(tree, s, x).loglik for s in enumerate_fully_observed(tree)]
    slack = 1e-9 * max(1.0, abs(ll))
    checks["sandwich"] = ll_ddm >= ll - slack and all(ll >= c - slack for c in cands)
    return checks


def oracle_suite(instances: int = 50, seed: int = 0, d_values=range(2, 9)) -> SuiteReport:
    rep = SuiteReport("oracle")
    rng = np.random.default_rng(seed)
    for d in d_values:
        for k in range(instances):
            tree = random_tree(d, rng, p_multi=0.0 if k % 2 == 0 else 0.5)
            x = rng.standard_normal(d)
            checks = check_oracle_instance(tree, x)
            rep.record(all(checks.values()), {
                "parent": list(tree.parent), "x": x.tolist(),
                "failed": [k for k, v in checks.items() if not v],
            })
    return rep


def kkt_suite(instances: int = 500, seed: int = 0, d_values=range(2, 7)) -> SuiteReport:
    rep = SuiteReport("kkt")
    rng = np.random.default_rng(seed)
    d_values = list(d_values)
    for k in range(instances):
        d = d_values[k % len(d_values)]
        x = rng.standard_normal(d)
        rep.record(verify_kkt(ddm_mle(x).P, x, tol=1e-9).passed, {"x": x.tolist()})
    return rep


def finite_difference_curvature(Sigma, A, x, h=None) -> float:
    """Second derivative of ``logdet(K) - x'K x`` along ``Sigma + tA``.

    The function is evaluated in the basis that whitens ``Sigma`` and
    diagonalizes the whitened ``A``, where ``f(t) - f(0)`` is a sum of
    ``-log1p(t mu) + w t mu / (1 + t mu)`` terms without cancellation.
    Central differences at ``h`` and ``h/2`` are combined by Richardson
    extrapolation.
    """
    Sigma = np.asarray(Sigma, dtype=float)
    A = np.asarray(A, dtype=float)
    x = np.asarray(x, dtype=float)
    s, V = np.linalg.eigh(Sigma)
    half = (V / np.sqrt(s)) @ V.T
    mu, U = np.linalg.eigh(half @ A @ half)
    w = (U.T @ (half @ x)) ** 2

    def g(t):
        tm = t * mu
        return math.fsum(-np.log1p(tm) + w * tm / (1 + tm))

    if h is None:
        h = 1e-2 / max(float(np.max(np.abs(mu))), 1e-300)

    def second(step):
        return (g(step) + g(-step)) / step**2

    return (4 * second(h / 2) - second(h)) / 3


def curvature_scale(Sigma, A, x) -> float:
    """Size of the terms in the second derivative, for relative thresholds."""
    inv = np.linalg.inv(Sigma)
    B = inv @ (2 * np.outer(x, x) - Sigma) @ inv
    return float(np.linalg.norm(A, 2) ** 2 * np.linalg.norm(B, 2) * np.linalg.norm(Sigma, 2))


def check_curvature_instance(tree: RootedTree, theta, x) -> dict[str, bool]:
    Sigma = build_covariance(tree, theta)
    direction, value = curvature_probe(tree, Sigma, x)
    scale = curvature_scale(Sigma, direction.matrix, x)
    fd = finite_difference_curvature(Sigma, direction.matrix, x)
    return {
        "positive": value > 1e-10 * scale,
        "finite_difference": abs(fd - value) <= 1e-5 * max(abs(value), 1e-300),
        "tree_direction": np.allclose(direction.reconstruct(tree), direction.matrix, atol=1e-12 * max(1.0, np.abs(direction.matrix).max())),
    }


def curvature_suite(instances: int = 100, seed: int = 0, d_values=range(2, 7)) -> SuiteReport:
    rep = SuiteReport("curvature")
    rng = np.random.default_rng(seed)
    d_values = list(d_values)
    for k in range(instances):
        d = d_values[k % len(d_values)]
        tree = random_tree(d, rng)
        theta = random_theta(tree, rng)
        x = rng.standard_normal(d)
        checks = check_curvature_instance(tree, theta, x)
        rep.record(all(checks.values()), {
            "parent": list(tree.parent), "theta": theta.tolist(), "x": x.tolist(),
            "failed": [k for k, v in checks.items() if not v],
        })
    return rep


def roundtrip_suite(instances: int = 100, seed: int = 0) -> SuiteReport:
    """Newick text and Laplacian embed/restrict round trips."""
    rep = SuiteReport("roundtrip")
    rng = np.random.default_rng(seed)
    for _ in range(instances):
        d = int(rng.integers(1, 9))
        tree = random_tree(d, rng)
        theta = random_theta(tree, rng)
        t2, th2 = parse_newick(to_newick(tree, theta))
        ok = canonical_form(tree, theta) == canonical_form(t2, th2)
        rep.record(ok, {"kind": "newick", "parent": list(tree.parent), "theta": theta.tolist()})

        n = int(rng.integers(2, 8))
        P = random_weights(n, rng)
        K = fiedler_inverse(P)  # a DDM
        ok = np.array_equal(laplacian_restrict(laplacian_embed(K)), K)
        rep.record(ok, {"kind": "ddm", "P": P.tolist()})
        L = np.diag(P.sum(axis=1)) - P  # a connected-graph Laplacian
        back = laplacian_embed(laplacian_restrict(L))
        ok = np.allclose(back, L, rtol=0, atol=LAPLACIAN_ATOL * np.abs(L).max())
        rep.record(ok, {"kind": "laplacian", "P": P.tolist()})
    return rep


def matrixtree_suite(instances: int = 100, seed: int = 0, max_d: int = 5) -> SuiteReport:
    rep = SuiteReport("matrixtree")
    rng = np.random.default_rng(seed)
    for _ in range(instances):
        d = int(rng.integers(1, max_d + 1))
        P = random_weights(d + 1, rng)
        mt = logdet_via_matrix_tree(P)
        _, dense = np.linalg.slogdet(fiedler_inverse(P))
        rep.record(_rel_close(mt, dense, 1e-9), {"P": P.tolist()})
    return rep


SUITES = {
    "oracle": oracle_suite,
    "kkt": kkt_suite,
    "curvature": curvature_suite,
    "roundtrip": roundtrip_suite,
    "matrixtree": matrixtree_suite,
}
