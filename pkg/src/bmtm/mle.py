"""Exact one-sample BMTM MLE on a fixed tree.

The maximizer is fully observed: every latent node copies the value of the
root or of a leaf through zero-variance edges. For such a sparsity structure
``S`` the likelihood is maximized by putting ``(x_i - x_j)^2`` on every
surviving edge, and its value is proportional to ``1 / prod |x_i - x_j|``
over the contracted edges. :func:`mle` minimizes that product over all
fully-observed structures with a dynamic program over
``(node, value of parent)`` states; :func:`brute_force_mle` enumerates them.

All products are handled as sums of logs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ddm import check_data
from .errors import InvalidTree, NotFullyObserved, SingularCovariance
from .likelihood import covariance_log_likelihood, is_positive_definite
from .tree_model import (
    ROOT,
    RootedTree,
    augmented,
    build_covariance,
    contract_set,
    enumerate_fully_observed,
    is_fully_observed,
)

TIE_RTOL = 1e-12


@dataclass(frozen=True)
class MleResult:
    """Fitted sparsity structure and edge variances.

    ``value_index[i]`` is the determined node (0 for the root, ``k`` for leaf
    ``k``) whose data value node ``i`` takes. ``loglik`` omits the
    ``-(d/2) log(2 pi)`` constant.
    """

    tree: RootedTree
    sparsity: frozenset[int]
    theta: np.ndarray
    objective_log: float
    loglik: float
    tie_count: int
    value_index: tuple[int, ...]

    @property
    def objective(self) -> float:
        return math.exp(self.objective_log)

    @property
    def covariance(self) -> np.ndarray:
        return build_covariance(self.tree, self.theta)

    def to_json(self) -> dict:
        return {
            "sparsity": sorted(self.sparsity),
            "theta": [float(v) for v in self.theta],
            "objective_log": float(self.objective_log),
            "loglik": float(self.loglik),
            "tie_count": int(self.tie_count),
        }


def _prepare(tree: RootedTree, x) -> np.ndarray:
    if not isinstance(tree, RootedTree):
        raise InvalidTree("expected a validated RootedTree")
    x = check_data(x)
    if x.size != tree.d:
        raise ValueError(f"data has {x.size} entries, tree has {tree.d} leaves")
    return augmented(x)


def _log_abs_diff(xa: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(np.abs(xa[:, None] - xa[None, :]))


def _close(a, b):
    return np.abs(a - b) <= TIE_RTOL * np.maximum(1.0, np.maximum(np.abs(a), np.abs(b)))


@dataclass
class DpTable:
    """Dense memo over ``(node, parent value index)``.

    ``R[i, l]``: log of the best product for the subtree at ``i`` including
    its parent edge when the parent shows value ``l``. ``C[i, l]``: sum of
    ``R`` over the children of ``i`` when ``i`` itself shows ``l``.
    ``choice[i, l]`` is -1 for the zero-edge branch (``i`` copies ``l``) and
    otherwise the leaf whose value ``i`` takes. ``count`` tracks how many
    optimal structures realize each entry.
    """

    R: np.ndarray
    C: np.ndarray
    choice: np.ndarray
    count: np.ndarray


def _solve(tree: RootedTree, xa: np.ndarray) -> DpTable:
    n, d = tree.n, tree.d
    logdiff = _log_abs_diff(xa)
    R = np.full((n, d + 1), np.inf)
    C = np.zeros((n, d + 1))
    choice = np.full((n, d + 1), -1, dtype=np.int64)
    count = np.ones((n, d + 1))
    Ccount = np.ones((n, d + 1))
    order = np.argsort(xa, kind="stable")  # tie-break: smallest candidate value
    rank = np.empty(d + 1, dtype=np.int64)
    rank[order] = np.arange(d + 1)

    for i in reversed(tree.preorder):
        if i == ROOT:
            continue
        if tree.is_leaf(i):
            R[i] = logdiff[:, i]
            R[i, i] = 0.0
            continue
        kids = tree.children[i]
        C[i] = R[kids[0]].copy()
        Ccount[i] = count[kids[0]].copy()
        for k in kids[1:]:
            C[i] += R[k]
            Ccount[i] *= count[k]

        inside = np.flatnonzero(tree.below[i]) + 1
        inside = inside[np.argsort(rank[inside], kind="stable")]
        cand = logdiff[:, inside] + C[i, inside][None, :]
        cand[inside, :] = np.inf  # parent value from inside forces the zero edge
        best_nz = cand.min(axis=1)
        zero = C[i]
        best = np.minimum(zero, best_nz)
        zero_ok = _close(zero, best)
        nz_ok = _close(cand, best[:, None]) & np.isfinite(cand)
        R[i] = best
        first = np.argmax(nz_ok, axis=1)
        choice[i] = np.where(zero_ok, -1, inside[first])
        count[i] = np.where(zero_ok, Ccount[i], 0.0) + nz_ok @ Ccount[i, inside]
        count[i, inside] = Ccount[i, inside]
        choice[i, inside] = -1
        R[i, inside] = C[i, inside]
    return DpTable(R, C, choice, count)


def mle(tree: RootedTree, x) -> MleResult:
    """One-sample MLE of the edge variances of ``tree`` for data ``x``."""
    xa = _prepare(tree, x)
    table = _solve(tree, xa)
    val = [0] * tree.n
    theta = np.zeros(tree.n)
    zeroed = set()
    for i in tree.preorder[1:]:
        up = val[tree.parent[i]]
        if tree.is_leaf(i):
            take = i
            zero = up == i
        else:
            c = int(table.choice[i, up])
            zero = c < 0
            take = up if zero else c
        val[i] = take
        if zero:
            zeroed.add(i)
        else:
            theta[i] = (xa[take] - xa[up]) ** 2
    rc = tree.root_child
    obj = float(table.R[rc, 0])
    sparsity = frozenset(zeroed)
    return MleResult(
        tree=tree,
        sparsity=sparsity,
        theta=theta,
        objective_log=obj,
        loglik=-0.5 * tree.d - obj,
        tie_count=int(round(table.count[rc, 0])),
        value_index=tuple(val),
    )


def log_objective(tree: RootedTree, zeroed, x) -> float:
    """``sum log |x_i - x_j|`` over the edges left after contracting ``zeroed``."""
    xa = _prepare(tree, x)
    if not is_fully_observed(tree, zeroed):
        raise NotFullyObserved(f"zeroing {sorted(zeroed)} does not give a fully-observed tree")
    ct = contract_set(tree, zeroed)
    return float(sum(math.log(abs(xa[u] - xa[v])) for u, v, _ in ct.edges))


def objective(tree: RootedTree, zeroed, x) -> float:
    """``prod |x_i - x_j|`` over the contracted edges (root value 0)."""
    return math.exp(log_objective(tree, zeroed, x))


def result_for_sparsity(tree: RootedTree, zeroed, x, tie_count: int = 1) -> MleResult:
    """Best edge variances within one fully-observed sparsity structure."""
    xa = _prepare(tree, x)
    zeroed = frozenset(zeroed)
    if not is_fully_observed(tree, zeroed):
        raise NotFullyObserved(f"zeroing {sorted(zeroed)} does not give a fully-observed tree")
    ct = contract_set(tree, zeroed)
    theta = np.zeros(tree.n)
    obj = 0.0
    for u, v, orig in ct.edges:
        theta[orig] = (xa[u] - xa[v]) ** 2
        obj += math.log(abs(xa[u] - xa[v]))
    return MleResult(tree, zeroed, theta, obj, -0.5 * tree.d - obj, tie_count, ct.node_map)


def _preference(tree: RootedTree, res: MleResult, xa: np.ndarray):
    # DP tie-break: per node in preorder, zero edge first, then smaller value
    return tuple(
        (0, 0.0) if i in res.sparsity else (1, float(xa[res.value_index[i]]))
        for i in tree.preorder[1:]
    )


def brute_force_mle(tree: RootedTree, x, cap: int = 10) -> MleResult:
    """Reference MLE by scoring every fully-observed sparsity structure."""
    xa = _prepare(tree, x)
    structures = enumerate_fully_observed(tree, cap=cap)
    fits = [result_for_sparsity(tree, s, x) for s in structures]
    scores = np.array([f.objective_log for f in fits])
    best = scores.min()
    tied = [f for f, s in zip(fits, scores) if _close(s, best)]
    pick = min(tied, key=lambda f: _preference(tree, f, xa))
    return MleResult(
        pick.tree, pick.sparsity, pick.theta, pick.objective_log, pick.loglik, len(tied),
        pick.value_index,
    )


def loglik_of_result(result: MleResult, x, rtol: float = 1e-9) -> float:
    """Dense Gaussian log-likelihood at the fitted covariance.

    Also checks it against the closed form ``-d/2 - objective_log`` and
    raises AssertionError on disagreement beyond ``rtol``.
    """
    Sigma = build_covariance(result.tree, result.theta)
    if not is_positive_definite(Sigma):
        raise SingularCovariance("fitted covariance is singular")
    dense = covariance_log_likelihood(Sigma, x)
    closed = -0.5 * result.tree.d - result.objective_log
    if abs(dense - closed) > rtol * max(1.0, abs(closed)):
        raise AssertionError(f"dense log-likelihood {dense!r} != closed form {closed!r}")
    return dense
