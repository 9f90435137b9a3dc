"""Contrast models and the unbounded likelihood of positive latent trees.

The differences ``Y_i = X_i - X_ref`` of a BMTM on ``T`` follow a BMTM on
``T`` rerooted at the reference leaf, so the contrast MLE is the ordinary
MLE on the rerooted tree.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateContrast, NoDuplicate, TooSmall, ZeroValue
from .likelihood import covariance_log_likelihood
from .mle import MleResult, mle
from .tree_model import Rerooted, RootedTree, build_covariance, reroot_at_leaf, star_tree


@dataclass(frozen=True)
class ContrastResult:
    y: np.ndarray
    rerooted: Rerooted
    mle: MleResult

    @property
    def tree(self) -> RootedTree:
        return self.rerooted.tree


def contrast_data(x, reference: int = 1) -> np.ndarray:
    """``x_i - x_ref`` for the other leaves, in increasing leaf order."""
    x = np.asarray(x, dtype=float).ravel()
    keep = [i for i in range(x.size) if i != reference - 1]
    return x[keep] - x[reference - 1]


def contrast_covariance(Sigma, reference: int = 1) -> np.ndarray:
    """Covariance of ``X_i - X_ref`` given the covariance of ``X``."""
    Sigma = np.asarray(Sigma, dtype=float)
    d = Sigma.shape[0]
    keep = [i for i in range(d) if i != reference - 1]
    C = np.eye(d)[keep]
    C[:, reference - 1] = -1.0
    return C @ Sigma @ C.T


def contrast_mle(tree: RootedTree, x, reference: int = 1) -> ContrastResult:
    x = np.asarray(x, dtype=float).ravel()
    if tree.d < 2:
        raise TooSmall("contrasts need at least two leaves")
    if x.size != tree.d:
        raise ValueError(f"data has {x.size} entries, tree has {tree.d} leaves")
    rr = reroot_at_leaf(tree, reference)
    y = contrast_data(x, reference)
    if np.any(y == 0) or np.unique(y).size != y.size:
        raise DegenerateContrast("contrast data has repeated or zero entries")
    return ContrastResult(y, rr, mle(rr.tree, y))


def _duplicate_pair(x: np.ndarray) -> tuple[int, int]:
    seen: dict[float, int] = {}
    for i, v in enumerate(x):
        if v in seen:
            return seen[v], i
        seen[v] = i
    raise NoDuplicate("data has no repeated value")


def witness_theta(x, eps: float) -> tuple[RootedTree, np.ndarray]:
    """Star parameters that pin the hub to the duplicated value.

    The first copy ``a`` gets a zero edge, the second copy ``b`` gets
    ``eps``, the hub edge is ``x_a^2`` and every other leaf sits at its
    one-sample optimum ``(x_a - x_i)^2`` (1 if that is zero).
    """
    x = np.asarray(x, dtype=float).ravel()
    a, b = _duplicate_pair(x)
    if x[a] == 0:
        raise ZeroValue("the repeated value must be nonzero")
    d = x.size
    tree = star_tree(d)
    theta = np.zeros(tree.n)
    theta[d + 1] = x[a] ** 2
    for i in range(d):
        gap = (x[a] - x[i]) ** 2
        theta[i + 1] = gap if gap > 0 else 1.0
    theta[a + 1] = 0.0
    theta[b + 1] = eps
    return tree, theta


def plgtm_divergence_witness(x, epsilons) -> list[tuple[float, float]]:
    """Log-likelihoods along ``eps -> 0``; they grow like ``-log(eps) / 2``."""
    x = np.asarray(x, dtype=float).ravel()
    if x.size < 2:
        raise NoDuplicate("need at least two entries")
    eps = [float(e) for e in epsilons]
    if any(e <= 0 for e in eps) or any(b >= a for a, b in zip(eps, eps[1:])):
        raise ValueError("epsilons must be positive and strictly decreasing")
    out = []
    for e in eps:
        tree, theta = witness_theta(x, e)
        out.append((e, covariance_log_likelihood(build_covariance(tree, theta), x)))
    return out
