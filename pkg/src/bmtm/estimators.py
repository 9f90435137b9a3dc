"""Comparison estimators for one-sample covariance estimation.

Tree builders (UPGMA, neighbor joining), constrained least squares on a
known tree, and three shrinkage rules. Each returns an
:class:`EstimatorOutput` except :func:`one_third_shrink`, which acts on edge
variances directly.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import nnls

from .errors import NonConvergence, SpectrumViolation, TooSmall
from .ddm import check_data
from .tree_model import ROOT, RootedTree, build_covariance


@dataclass(frozen=True)
class EstimatorOutput:
    covariance: np.ndarray
    tree: RootedTree | None = None
    theta: np.ndarray | None = None
    flags: dict = field(default_factory=dict)


def _single_leaf(x: np.ndarray) -> EstimatorOutput:
    tree = RootedTree((-1, 0))
    theta = np.array([0.0, x[0] ** 2])
    return EstimatorOutput(build_covariance(tree, theta), tree, theta)


def _assemble(d: int, parent: dict[int, int], theta: dict[int, float]) -> tuple[RootedTree, np.ndarray]:
    n = max(parent) + 1
    par = [-1] * n
    th = np.zeros(n)
    for i, p in parent.items():
        par[i] = p
        th[i] = theta[i]
    return RootedTree(tuple(par)), th


def upgma(x) -> EstimatorOutput:
    """Average-linkage clustering on ``|a - b|``.

    A merge at distance ``delta`` puts the new node at height ``delta / 2``;
    each edge gets the height difference. The root edge has zero variance.
    """
    x = check_data(x)
    d = x.size
    if d == 1:
        return _single_leaf(x)
    members = {i: [i - 1] for i in range(1, d + 1)}
    height = {i: 0.0 for i in members}
    absdiff = np.abs(x[:, None] - x[None, :])
    parent: dict[int, int] = {}
    theta: dict[int, float] = {}
    nxt = d + 1
    while len(members) > 1:
        ids = sorted(members)
        best = None
        for a_pos, a in enumerate(ids):
            for b in ids[a_pos + 1 :]:
                dist = absdiff[np.ix_(members[a], members[b])].mean()
                if best is None or dist < best[0]:
                    best = (dist, a, b)
        dist, a, b = best
        h = dist / 2.0
        for c in (a, b):
            parent[c] = nxt
            theta[c] = max(h - height[c], 0.0)
        members[nxt] = members.pop(a) + members.pop(b)
        height[nxt] = h
        nxt += 1
    (top,) = members
    parent[top] = ROOT
    theta[top] = 0.0
    tree, th = _assemble(d, parent, theta)
    return EstimatorOutput(build_covariance(tree, th), tree, th)


def neighbor_joining(x) -> EstimatorOutput:
    """Neighbor joining with ``m`` the smallest squared gap between clusters.

    Pairs are joined by the minimum of
    ``(r - 2) m(a, b) - sum_i m(a, i) - sum_i m(b, i)`` over the ``r``
    current clusters. Branch lengths follow the usual two-point split and are
    clamped at zero. The last two clusters meet at a node hung from the root
    by a zero-variance edge.
    """
    x = check_data(x)
    d = x.size
    if d < 2:
        raise TooSmall("neighbor joining needs at least two leaves")
    members = {i: [i - 1] for i in range(1, d + 1)}
    sq = (x[:, None] - x[None, :]) ** 2
    parent: dict[int, int] = {}
    theta: dict[int, float] = {}
    clamped = False
    nxt = d + 1

    def m(a, b):
        return sq[np.ix_(members[a], members[b])].min()

    while len(members) > 2:
        ids = sorted(members)
        r = len(ids)
        M = np.array([[m(a, b) if a != b else 0.0 for b in ids] for a in ids])
        S = M.sum(axis=1)
        best = None
        for p in range(r):
            for q in range(p + 1, r):
                crit = (r - 2) * M[p, q] - S[p] - S[q]
                if best is None or crit < best[0]:
                    best = (crit, p, q)
        _, p, q = best
        a, b = ids[p], ids[q]
        la = 0.5 * M[p, q] + (S[p] - S[q]) / (2.0 * (r - 2))
        lb = M[p, q] - la
        for c, length in ((a, la), (b, lb)):
            clamped |= bool(length < 0)
            parent[c] = nxt
            theta[c] = max(length, 0.0)
        members[nxt] = members.pop(a) + members.pop(b)
        nxt += 1
    a, b = sorted(members)
    half = 0.5 * m(a, b)
    for c in (a, b):
        parent[c] = nxt
        theta[c] = half
    parent[nxt] = ROOT
    theta[nxt] = 0.0
    tree, th = _assemble(d, parent, theta)
    return EstimatorOutput(build_covariance(tree, th), tree, th, {"clamped": clamped})


def _design(tree: RootedTree) -> np.ndarray:
    """Columns ``vec(e_de(i) e_de(i)^T)`` for the non-root edges."""
    V = tree.below[1:].astype(float)
    return np.einsum("ka,kb->abk", V, V).reshape(tree.d * tree.d, tree.n - 1)


def least_squares_objective(tree: RootedTree, theta, x) -> float:
    x = np.asarray(x, dtype=float)
    return float(np.sum((build_covariance(tree, theta) - np.outer(x, x)) ** 2))


def least_squares(tree: RootedTree, x, tol: float = 1e-8, maxiter: int = 100_000) -> EstimatorOutput:
    """Minimize ``||Sigma_theta - x x^T||_F^2`` over ``theta >= 0``.

    Solved exactly by Lawson-Hanson NNLS. The KKT residual
    ``max |min(theta, grad)|`` is checked against ``tol`` relative to the
    scale of ``x x^T``.
    """
    x = np.asarray(x, dtype=float).ravel()
    if x.size != tree.d:
        raise ValueError(f"data has {x.size} entries, tree has {tree.d} leaves")
    if maxiter < 1:
        raise ValueError("maxiter must be positive")
    A = _design(tree)
    target = np.outer(x, x).ravel()
    try:
        sol, _ = nnls(A, target, maxiter=maxiter)
    except RuntimeError as exc:
        raise NonConvergence(f"NNLS did not converge: {exc}") from exc
    grad = A.T @ (A @ sol - target)
    residual = float(np.max(np.abs(np.minimum(sol, grad)), initial=0.0))
    scale = max(1.0, float(np.max(np.abs(target))))
    if residual > tol * scale:
        raise NonConvergence(f"KKT residual {residual:.3g} above tolerance", residual)
    theta = np.concatenate([[0.0], sol])
    return EstimatorOutput(build_covariance(tree, theta), tree, theta, {"kkt_residual": residual})


def one_third_shrink(theta) -> np.ndarray:
    return np.asarray(theta, dtype=float) / 3.0


def mxshrink(covariance, clamp: bool = True) -> EstimatorOutput:
    """Divide the ``i``-th largest eigenvalue by ``1 + d - 2i``.

    With ``clamp`` the divisor is floored at 1, which keeps the output PSD.
    Without it, a zero divisor raises SpectrumViolation and negative ones
    flip the sign of the eigenvalue.
    """
    S = np.asarray(covariance, dtype=float)
    S = 0.5 * (S + S.T)
    d = S.shape[0]
    lam, V = np.linalg.eigh(S)
    lam, V = lam[::-1], V[:, ::-1]
    div = 1.0 + d - 2.0 * np.arange(1, d + 1)
    was_clamped = bool(np.any(div < 1))
    if clamp:
        div = np.maximum(div, 1.0)
    elif np.any(div == 0):
        raise SpectrumViolation("unclamped divisor is zero")
    out = (V * (lam / div)) @ V.T
    return EstimatorOutput(0.5 * (out + out.T), flags={"clamped": clamp and was_clamped})


def linear_shrink(Sigma_hat, Sigma_star, beta_sq: float) -> EstimatorOutput:
    """``delta1 I + delta2 Sigma_hat`` with oracle weights from ``Sigma_star``.

    ``mu = tr(Sigma_star)/d``, ``alpha^2 = ||Sigma_star - mu I||_F^2``,
    ``delta1 = beta^2 mu / (alpha^2 + beta^2)`` and
    ``delta2 = alpha^2 / (alpha^2 + beta^2)``.
    """
    Sh = np.asarray(Sigma_hat, dtype=float)
    Ss = np.asarray(Sigma_star, dtype=float)
    if beta_sq < 0:
        raise ValueError("beta_sq must be nonnegative")
    d = Ss.shape[0]
    mu = np.trace(Ss) / d
    alpha_sq = float(np.sum((Ss - mu * np.eye(d)) ** 2))
    total = alpha_sq + beta_sq
    if total == 0:
        return EstimatorOutput(Ss.copy(), flags={"delta1": 0.0, "delta2": 0.0})
    d1 = beta_sq / total * mu
    d2 = alpha_sq / total
    return EstimatorOutput(d1 * np.eye(d) + d2 * Sh, flags={"delta1": d1, "delta2": d2})
