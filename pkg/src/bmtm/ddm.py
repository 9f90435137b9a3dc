"""Closed-form one-sample MLE over diagonally dominant M-matrices.

With ``x_0 = 0`` prepended and the ``d + 1`` values sorted, the optimal edge
weights sit on the path joining consecutive values, with weight
``1 / (x_i - x_j)^2`` on each path edge. The same point is a Brownian motion
tree model on a caterpillar-like tree (see :func:`ddm_mle_tree`).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DisconnectedSupport, DuplicateValue, ZeroValue
from .likelihood import (
    MATRIX_TREE_MAX_NODES,
    effective_resistance,
    fiedler_inverse,
    spanning_tree_gradient,
    squared_distance,
)
from .tree_model import RootedTree


def check_data(x) -> np.ndarray:
    """Return ``x`` as a float vector; reject zeros and repeated values."""
    x = np.asarray(x, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("empty data vector")
    if not np.all(np.isfinite(x)):
        raise ValueError("data must be finite")
    zero = np.flatnonzero(x == 0)
    if zero.size:
        raise ZeroValue(f"x[{int(zero[0]) + 1}] is zero")
    s = np.sort(x)
    dup = np.flatnonzero(s[1:] == s[:-1])
    if dup.size:
        raise DuplicateValue(f"value {float(s[dup[0]])!r} appears more than once")
    return x


@dataclass(frozen=True)
class SortedPathTree:
    """Path through ``0..d`` in increasing order of the augmented data."""

    order: tuple[int, ...]

    @property
    def edges(self) -> list[tuple[int, int]]:
        return list(zip(self.order[:-1], self.order[1:]))


def sorted_path_tree(x) -> SortedPathTree:
    x = check_data(x)
    xa = np.concatenate([[0.0], x])
    return SortedPathTree(tuple(int(i) for i in np.argsort(xa, kind="stable")))


@dataclass(frozen=True)
class DDMEstimate:
    P: np.ndarray
    K: np.ndarray
    path: SortedPathTree = field(repr=False)

    def __iter__(self):
        yield self.P
        yield self.K


def ddm_mle(x) -> DDMEstimate:
    """Fiedler weights ``P_hat`` and precision ``K_hat`` of the DDM MLE."""
    path = sorted_path_tree(x)
    xa = np.concatenate([[0.0], np.asarray(x, dtype=float).ravel()])
    P = np.zeros((xa.size, xa.size))
    for i, j in path.edges:
        P[i, j] = P[j, i] = 1.0 / (xa[i] - xa[j]) ** 2
    return DDMEstimate(P, fiedler_inverse(P), path)


@dataclass
class KKTReport:
    """First-order optimality check for edge weights ``P``.

    ``gradient[k, l]`` is the derivative of ``log sum_T prod P - <<P, D>>``
    with respect to ``P_kl``. The three conditions are feasibility
    (``P >= 0``), no ascent direction (``gradient <= tol``) and complementary
    slackness (``|gradient * P| <= tol``).
    """

    gradient: np.ndarray
    feasible: bool
    stationary: bool
    complementary: bool
    method: str
    tol: float

    @property
    def passed(self) -> bool:
        return self.feasible and self.stationary and self.complementary

    def failures(self) -> list[tuple[str, int, int, float]]:
        out = []
        n = self.gradient.shape[0]
        for k in range(n):
            for l in range(k + 1, n):
                g = self.gradient[k, l]
                if g > self.tol:
                    out.append(("two", k, l, float(g)))
        return out


def _support_is_tree(P) -> tuple[bool, list[tuple[int, int]]]:
    n = P.shape[0]
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if P[i, j] != 0]
    if len(edges) != n - 1:
        return False, edges
    return _connected(n, edges), edges


def _connected(n, edges) -> bool:
    adj = [[] for _ in range(n)]
    for i, j in edges:
        adj[i].append(j)
        adj[j].append(i)
    seen = {0}
    stack = [0]
    while stack:
        for j in adj[stack.pop()]:
            if j not in seen:
                seen.add(j)
                stack.append(j)
    return len(seen) == n


def _path_sum_gradient(P, edges, D) -> np.ndarray:
    """Sum of ``1/P`` along the tree path between each pair, minus ``D``."""
    n = P.shape[0]
    adj = [[] for _ in range(n)]
    for i, j in edges:
        adj[i].append(j)
        adj[j].append(i)
    R = np.zeros((n, n))
    for s in range(n):
        stack = [s]
        seen = {s}
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    R[s, v] = R[s, u] + 1.0 / P[u, v]
                    stack.append(v)
    return R - D


def verify_kkt(P, x, tol: float = 1e-9, method: str = "auto") -> KKTReport:
    """Check the optimality conditions of ``P`` for data ``x``.

    ``method`` is ``"path"`` (tree-supported ``P`` only), ``"resistance"``
    (Laplacian pseudo-inverse), ``"spanning_trees"`` (exhaustive, small
    graphs) or ``"auto"``: path sums on tree support, resistances otherwise.
    """
    P = np.asarray(P, dtype=float)
    D = squared_distance(x)
    if P.shape != D.shape:
        raise ValueError(f"P has shape {P.shape}, data needs {D.shape}")
    off = P[~np.eye(P.shape[0], dtype=bool)]
    feasible = bool(np.all(off >= 0) and np.allclose(P, P.T, rtol=0, atol=1e-15))
    support = np.where(P > 0, P, 0.0)
    is_tree, edges = _support_is_tree(support)
    if not _connected(P.shape[0], edges):
        raise DisconnectedSupport("support of P is not a connected graph")
    if method == "auto":
        method = "path" if is_tree else "resistance"
    if method == "path":
        if not is_tree:
            raise ValueError("path-sum gradient needs a tree-supported P")
        grad = _path_sum_gradient(support, edges, D)
    elif method == "resistance":
        grad = effective_resistance(support) - D
    elif method == "spanning_trees":
        if P.shape[0] > MATRIX_TREE_MAX_NODES:
            raise ValueError("exhaustive gradient limited to small graphs")
        grad = spanning_tree_gradient(support) - D
    else:
        raise ValueError(f"unknown method {method!r}")
    np.fill_diagonal(grad, 0.0)
    iu = np.triu_indices(P.shape[0], 1)
    stationary = bool(np.all(grad[iu] <= tol))
    complementary = bool(np.all(np.abs(grad[iu] * P[iu]) <= tol))
    return KKTReport(grad, feasible, stationary, complementary, method, tol)


def ddm_mle_tree(x) -> tuple[RootedTree, np.ndarray]:
    """Brownian motion tree whose covariance inverts to the DDM MLE.

    The sorted path is rooted at 0. Each data value with a successor on its
    side of 0 becomes a latent node carrying a zero-length pendant leaf;
    the outermost value on each side is a leaf itself. When 0 lies strictly
    inside the sorted order, a zero-length edge joins the root to a hub from
    which both halves hang.
    """
    x = check_data(x)
    d = x.size
    path = sorted_path_tree(x).order
    pos = path.index(0)
    chains = [list(reversed(path[:pos])), list(path[pos + 1 :])]
    chains = [c for c in chains if c]

    # ids: leaves keep their data index; latent path nodes and hub follow
    next_id = d + 1
    parent: dict[int, int] = {}
    theta: dict[int, float] = {}
    if len(chains) == 2:
        hub = next_id
        next_id += 1
        parent[hub] = 0
        theta[hub] = 0.0
        top = hub
    else:
        top = 0
    for chain in chains:
        above, above_val = top, 0.0
        for k, i in enumerate(chain):
            val = x[i - 1]
            edge = (val - above_val) ** 2
            if k == len(chain) - 1:
                parent[i] = above
                theta[i] = edge
            else:
                node = next_id
                next_id += 1
                parent[node] = above
                theta[node] = edge
                parent[i] = node
                theta[i] = 0.0
                above = node
            above_val = val
    n = next_id
    par = [-1] * n
    th = np.zeros(n)
    for i, p in parent.items():
        par[i] = p
        th[i] = theta[i]
    return RootedTree(tuple(par)), th
