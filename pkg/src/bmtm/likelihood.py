"""Gaussian log-likelihood and the reparametrizations around it.

Conventions: precision matrices ``K`` are ``d x d``; Fiedler matrices ``P``,
Laplacians ``L`` and squared-distance matrices ``D`` are ``(d+1) x (d+1)``
with index 0 standing for the root (data value 0).

The log-likelihood is ``0.5 * logdet(K) - 0.5 * x' K x``; the constant
``-(d/2) log(2 pi)`` is dropped everywhere.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import NotDDM, NotLaplacian, NotPositiveDefinite, SpectrumViolation, TooLarge, ZeroTotal
from .tree_model import RootedTree

PD_RTOL = 1e-12
DDM_TOL = 1e-12


def _sym(M) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    return M


def is_positive_definite(M, rtol: float = PD_RTOL) -> bool:
    """Smallest eigenvalue above ``rtol`` times the largest."""
    M = _sym(M)
    if M.size == 0:
        return False
    w = np.linalg.eigvalsh((M + M.T) / 2)
    return bool(w[-1] > 0 and w[0] > rtol * w[-1])


def log_likelihood(K, x) -> float:
    """``0.5 * logdet(K) - 0.5 * x' K x`` for a positive definite ``K``."""
    K = _sym(K)
    x = np.asarray(x, dtype=float).ravel()
    if not is_positive_definite(K):
        raise NotPositiveDefinite("precision matrix is not positive definite")
    sign, logdet = np.linalg.slogdet(K)
    return 0.5 * logdet - 0.5 * float(x @ K @ x)


def covariance_log_likelihood(Sigma, x) -> float:
    """Same as :func:`log_likelihood` but parametrized by the covariance."""
    Sigma = _sym(Sigma)
    if not is_positive_definite(Sigma):
        raise NotPositiveDefinite("covariance is not positive definite")
    x = np.asarray(x, dtype=float).ravel()
    c = np.linalg.cholesky(Sigma)
    z = np.linalg.solve(c, x)
    return -float(np.sum(np.log(np.diag(c)))) - 0.5 * float(z @ z)


def is_ddm(K, tol: float = DDM_TOL) -> bool:
    """Positive definite, nonpositive off-diagonal, nonnegative row sums.

    ``tol`` is relative to the largest entry, since row sums cancel.
    """
    K = _sym(K)
    scale = tol * max(1.0, float(np.max(np.abs(K), initial=0.0)))
    off = K - np.diag(np.diag(K))
    return bool(
        np.all(off <= scale) and np.all(K.sum(axis=1) >= -scale) and is_positive_definite(K)
    )


def fiedler(K) -> np.ndarray:
    """Edge-weight matrix ``P`` of a precision matrix ``K``.

    ``P[0, j]`` is the j-th column sum of ``K``, ``P[i, j] = -K[i, j]`` for
    ``i, j >= 1``, and the diagonal is zero.
    """
    K = _sym(K)
    d = K.shape[0]
    P = np.zeros((d + 1, d + 1))
    P[1:, 1:] = -K
    col = K.sum(axis=0)
    P[0, 1:] = col
    P[1:, 0] = col
    np.fill_diagonal(P, 0.0)
    return P


def fiedler_inverse(P) -> np.ndarray:
    """Precision matrix with ``K[i, i] = sum_k P[i, k]`` and ``K[i, j] = -P[i, j]``."""
    P = _sym(P)
    P = P - np.diag(np.diag(P))
    K = -P[1:, 1:].copy()
    np.fill_diagonal(K, P[1:].sum(axis=1))
    return K


def laplacian(P) -> np.ndarray:
    """Weighted Laplacian ``diag(P 1) - P`` of a hollow weight matrix."""
    P = _sym(P)
    P = P - np.diag(np.diag(P))
    return np.diag(P.sum(axis=1)) - P


def laplacian_embed(K, check: bool = True) -> np.ndarray:
    """Laplacian ``L(K)`` on ``d+1`` nodes whose block on ``1..d`` is ``K``."""
    K = _sym(K)
    if check and not is_ddm(K):
        raise NotDDM("matrix is not a diagonally dominant M-matrix")
    d = K.shape[0]
    L = np.empty((d + 1, d + 1))
    L[1:, 1:] = K
    L[1:, 0] = -K.sum(axis=1)
    L[0, 1:] = -K.sum(axis=0)
    L[0, 0] = K.sum()
    return L


def is_laplacian(L, tol: float = 1e-10) -> bool:
    """Connected-graph Laplacian: nonpositive off-diagonal, zero row sums, rank ``n-1``."""
    L = _sym(L)
    n = L.shape[0]
    scale = max(1.0, float(np.max(np.abs(L))))
    off = L - np.diag(np.diag(L))
    if np.any(off > tol * scale) or np.any(np.abs(L.sum(axis=1)) > tol * scale):
        return False
    if np.max(np.abs(L - L.T)) > tol * scale:
        return False
    w = np.linalg.eigvalsh((L + L.T) / 2)
    return bool(n >= 2 and w[1] > PD_RTOL * w[-1])


def laplacian_restrict(L, check: bool = True) -> np.ndarray:
    """Principal submatrix of ``L`` on rows and columns ``1..d``."""
    L = _sym(L)
    if check and not is_laplacian(L):
        raise NotLaplacian("matrix is not the Laplacian of a connected graph")
    return L[1:, 1:].copy()


def squared_distance(x) -> np.ndarray:
    """``D[i, j] = (x_i - x_j)^2`` over the data with ``x_0 = 0`` prepended."""
    xa = np.concatenate([[0.0], np.asarray(x, dtype=float).ravel()])
    diff = xa[:, None] - xa[None, :]
    return diff * diff


def pair_inner(P, D) -> float:
    """``<<P, D>> = sum_{i<j} P_ij D_ij`` on hollow symmetric matrices."""
    return 0.5 * float(np.sum(np.asarray(P) * np.asarray(D)))


# --- spanning trees -------------------------------------------------------------


def prufer_decode(seq, n: int) -> list[tuple[int, int]]:
    """Edges of the labeled tree on ``n`` nodes with Prüfer sequence ``seq``."""
    degree = [1] * n
    for v in seq:
        degree[v] += 1
    edges = []
    for v in seq:
        leaf = next(u for u in range(n) if degree[u] == 1)
        edges.append((min(leaf, v), max(leaf, v)))
        degree[leaf] -= 1
        degree[v] -= 1
    u, w = (u for u in range(n) if degree[u] == 1)
    edges.append((u, w))
    return edges


def spanning_trees(n: int):
    """Every spanning tree of the complete graph on ``n`` nodes, once each."""
    if n == 1:
        yield []
        return
    if n == 2:
        yield [(0, 1)]
        return
    for seq in itertools.product(range(n), repeat=n - 2):
        yield prufer_decode(seq, n)


MATRIX_TREE_MAX_NODES = 8


def _tree_log_weights(P, max_nodes: int):
    P = _sym(P)
    n = P.shape[0]
    if n > max_nodes:
        raise TooLarge(f"{n} nodes exceeds exhaustive spanning-tree limit {max_nodes}")
    if np.any(P - np.diag(np.diag(P)) < 0):
        raise ValueError("edge weights must be nonnegative")
    with np.errstate(divide="ignore"):
        logP = np.log(P)
    for edges in spanning_trees(n):
        yield edges, float(sum(logP[i, j] for i, j in edges))


def logdet_via_matrix_tree(P, max_nodes: int = MATRIX_TREE_MAX_NODES) -> float:
    """``log sum_T prod_{(k,j) in T} P_kj`` over spanning trees of the complete graph.

    Equals ``log det(fiedler_inverse(P))`` whenever that matrix is positive
    definite. Enumeration is exhaustive, so ``P`` is limited to
    ``max_nodes`` rows.
    """
    logs = np.array([w for _, w in _tree_log_weights(P, max_nodes)])
    logs = logs[np.isfinite(logs)]
    if logs.size == 0:
        raise ZeroTotal("no spanning tree has positive weight")
    top = logs.max()
    return float(top + math.log(np.sum(np.exp(logs - top))))


def spanning_tree_gradient(P, max_nodes: int = MATRIX_TREE_MAX_NODES) -> np.ndarray:
    """``d/dP_kl log sum_T prod P`` by exhaustive enumeration.

    Entry ``(k, l)`` is the weight of trees through edge ``kl`` with that edge
    left out of the product, divided by the total weight.
    """
    P = _sym(P)
    n = P.shape[0]
    num = np.zeros((n, n))
    total = 0.0
    for edges, _ in _tree_log_weights(P, max_nodes):
        w = np.array([P[i, j] for i, j in edges])
        prod = float(np.prod(w))
        total += prod
        for k, (i, j) in enumerate(edges):
            rest = float(np.prod(np.delete(w, k)))
            num[i, j] += rest
            num[j, i] += rest
    if total <= 0:
        raise ZeroTotal("no spanning tree has positive weight")
    return num / total


def effective_resistance(P) -> np.ndarray:
    """Effective resistances of the weighted graph ``P``.

    The same quantity as :func:`spanning_tree_gradient` (Kirchhoff), computed
    from the Laplacian pseudo-inverse.
    """
    L = laplacian(P)
    Lp = np.linalg.pinv(L, hermitian=True)
    g = np.diag(Lp)
    return g[:, None] + g[None, :] - 2 * Lp


def reparametrized_log_likelihood(P, x) -> float:
    """``0.5 * (log sum_T prod P - <<P, D(x)>>)``."""
    return 0.5 * (logdet_via_matrix_tree(P) - pair_inner(P, squared_distance(x)))


# --- curvature ----------------------------------------------------------------------


def _inv_sqrt(Sigma):
    w, V = np.linalg.eigh(Sigma)
    return (V / np.sqrt(w)) @ V.T


def second_directional_derivative(Sigma, A, x) -> float:
    """``-tr(S^-1/2 A S^-1 (2xx' - S) S^-1 A S^-1/2)`` with ``S = Sigma``.

    This is the second derivative of ``logdet(K) - x' K x`` (twice the
    log-likelihood) along ``Sigma + tA``.
    """
    Sigma = _sym(Sigma)
    A = np.asarray(A.matrix if isinstance(A, DirectionMatrix) else A, dtype=float)
    if not is_positive_definite(Sigma):
        raise NotPositiveDefinite("covariance is not positive definite")
    x = np.asarray(x, dtype=float).ravel()
    inv = np.linalg.inv(Sigma)
    half = _inv_sqrt(Sigma)
    B = 2 * np.outer(x, x) - Sigma
    M = half @ A @ inv @ B @ inv @ A @ half
    return -float(np.trace(M))


@dataclass(frozen=True)
class DirectionMatrix:
    """Perturbation ``A = sum_i c_i e_de(i) e_de(i)'`` of a tree covariance.

    ``coef`` is indexed by tree node (``coef[0]`` unused); when no tree is
    attached, ``coef`` holds ``(c_all, c_1, ..., c_d)`` for the all-ones and
    leaf directions. ``case`` records which construction produced it.
    """

    matrix: np.ndarray
    coef: np.ndarray
    case: str

    def reconstruct(self, tree: RootedTree | None = None) -> np.ndarray:
        if tree is None:
            d = len(self.coef) - 1
            return self.coef[0] * np.ones((d, d)) + np.diag(self.coef[1:])
        E = tree.below.astype(float)
        return (E.T * self.coef) @ E


NEG_TOL = 1e-10
CASE1_RTOL = 1e-10
COEF_LIMIT = 1e12
SINGULAR_RTOL = 1e-12


def negative_curvature_direction(B, tree: RootedTree | None = None) -> DirectionMatrix:
    """Direction ``A = c0 11' + sum_i c_i e_i e_i'`` with ``A B A`` negative semidefinite.

    ``B`` needs at least ``d - 1`` eigenvalues below ``-1e-10``; the ``d - 1``
    most negative ones span the subspace ``U`` that the columns of ``A`` are
    placed in. If ``U`` contains the all-ones vector or a coordinate vector,
    ``A`` is that rank-one projector ("canonical"). Otherwise ``C = [U, 1]`` is
    inverted and ``A = 11' - diag(1 / r)`` with ``r`` the last row of
    ``C^-1`` ("generic"). A near-singular ``C`` or huge coefficients fall back
    to the rank-one direction closest to ``U`` ("fallback").
    """
    B = _sym(B)
    B = (B + B.T) / 2
    d = B.shape[0]
    w, V = np.linalg.eigh(B)
    n_neg = int(np.sum(w < -NEG_TOL))
    if n_neg < d - 1 or d == 0:
        raise SpectrumViolation(f"need {d - 1} negative eigenvalues, found {n_neg}")
    U = V[:, : d - 1]
    ones = np.ones(d)

    candidates = [ones / math.sqrt(d)] + [np.eye(d)[i] for i in range(d)]
    resid = [float(np.linalg.norm(v - U @ (U.T @ v))) for v in candidates]

    def rank_one(k, case):
        coef = np.zeros(d + 1)
        coef[k] = 1.0
        return _direction(coef, case, tree)

    if d == 1:
        # U is trivial and A B A = c^2 B needs B < 0, which n_neg >= 0 doesn't give
        if w[0] < -NEG_TOL:
            return rank_one(1, "canonical")
        raise SpectrumViolation("1x1 matrix is not negative")
    k_best = int(np.argmin(resid))
    if resid[k_best] <= CASE1_RTOL:
        return rank_one(k_best, "canonical")

    C = np.column_stack([U, ones])
    scale = float(np.prod(np.linalg.norm(C, axis=0)))
    if abs(np.linalg.det(C)) < SINGULAR_RTOL * scale:
        return rank_one(k_best, "fallback")
    r = np.linalg.inv(C)[-1]
    if np.any(np.abs(r) < 1.0 / COEF_LIMIT):
        return rank_one(k_best, "fallback")
    coef = np.concatenate([[1.0], -1.0 / r])
    return _direction(coef, "generic", tree)


def _direction(short_coef: np.ndarray, case: str, tree: RootedTree | None) -> DirectionMatrix:
    d = len(short_coef) - 1
    A = short_coef[0] * np.ones((d, d)) + np.diag(short_coef[1:])
    if tree is None:
        return DirectionMatrix(A, short_coef, case)
    coef = np.zeros(tree.n)
    coef[tree.root_child] += short_coef[0]
    coef[1 : d + 1] += short_coef[1:]
    return DirectionMatrix(A, coef, case)


def curvature_probe(tree: RootedTree, Sigma, x) -> tuple[DirectionMatrix, float]:
    """Ascent direction for the likelihood at an interior covariance.

    Conjugates ``2xx' - Sigma`` by ``Sigma^-1`` and asks
    :func:`negative_curvature_direction` for a tree direction along which the
    second derivative is positive. Returns the direction and that derivative.
    """
    Sigma = _sym(Sigma)
    x = np.asarray(x, dtype=float).ravel()
    inv = np.linalg.inv(Sigma)
    M = inv @ (2 * np.outer(x, x) - Sigma) @ inv
    A = negative_curvature_direction((M + M.T) / 2, tree)
    return A, second_directional_derivative(Sigma, A.matrix, x)
