"""Monte Carlo comparison of covariance estimators on random ultrametric trees.

Each trial draws a ground-truth tree, scales it to a fixed operator norm,
samples one observation and scores every estimator by squared Frobenius
loss. Bias and variance are estimated per ground truth from an inner loop of
fresh draws. Every trial has its own Philox stream seeded by
``(seed, d, trial)``, so results do not depend on scheduling.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .ddm import ddm_mle
from .errors import BMTMError, ZeroCovariance
from .estimators import (
    least_squares,
    linear_shrink,
    mxshrink,
    neighbor_joining,
    one_third_shrink,
    upgma,
)
from .mle import mle
from .tree_model import ROOT, RootedTree, build_covariance

METRICS = ("risk", "bias", "variance")


def random_ultrametric_tree(d: int, rng: np.random.Generator) -> tuple[RootedTree, np.ndarray]:
    """Uniform random pair merges with sorted uniform heights on (0, 1].

    Merge ``k`` creates node ``d + k`` at the ``k``-th smallest of ``d``
    uniforms; the largest is the height of the root.
    """
    if d < 2:
        raise ValueError("need d >= 2")
    heights = np.sort(1.0 - rng.random(d))
    active = list(range(1, d + 1))
    h = {i: 0.0 for i in active}
    n = 2 * d
    parent = [-1] * n
    theta = np.zeros(n)
    for k in range(d - 1):
        i, j = sorted(rng.choice(len(active), size=2, replace=False))
        a, b = active[i], active[j]
        node = d + 1 + k
        h[node] = heights[k]
        for c in (a, b):
            parent[c] = node
            theta[c] = h[node] - h[c]
        active = [v for v in active if v not in (a, b)] + [node]
    top = active[0]
    parent[top] = ROOT
    theta[top] = heights[-1] - h[top]
    return RootedTree(tuple(parent)), theta


def normalize_operator_norm(tree: RootedTree, theta, target: float = 1.0) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    lam = float(np.linalg.eigvalsh(build_covariance(tree, theta))[-1])
    if lam <= 0:
        raise ZeroCovariance("covariance is zero")
    return theta * (target / lam)


def sample_bmtm(tree: RootedTree, theta, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Leaf values from ``W_i = W_parent(i) + N(0, theta_i)``.

    Returns shape ``(d,)`` or ``(size, d)``.
    """
    theta = np.asarray(theta, dtype=float)
    if np.any(theta < 0):
        raise ValueError("theta must be nonnegative")
    m = 1 if size is None else size
    z = rng.standard_normal((m, tree.n)) * np.sqrt(theta)
    W = np.zeros((m, tree.n))
    for i in tree.preorder[1:]:
        W[:, i] = W[:, tree.parent[i]] + z[:, i]
    out = W[:, 1 : tree.d + 1]
    return out[0] if size is None else out


@dataclass
class Context:
    """What an estimator may look at for one draw."""

    tree: RootedTree
    Sigma_star: np.ndarray
    x: np.ndarray
    beta_sq: float = 0.0
    cache: dict = field(default_factory=dict)

    def mle(self):
        if "mle" not in self.cache:
            self.cache["mle"] = mle(self.tree, self.x)
        return self.cache["mle"]


def _mle_cov(ctx):
    return ctx.mle().covariance


def _ddm_cov(ctx):
    return np.linalg.inv(ddm_mle(ctx.x).K)


ESTIMATORS: dict[str, Callable[[Context], np.ndarray]] = {
    "bmtm_mle": _mle_cov,
    "ddm_mle": _ddm_cov,
    "upgma": lambda ctx: upgma(ctx.x).covariance,
    "nj": lambda ctx: neighbor_joining(ctx.x).covariance,
    "ls": lambda ctx: least_squares(ctx.tree, ctx.x).covariance,
    "ots": lambda ctx: build_covariance(ctx.tree, one_third_shrink(ctx.mle().theta)),
    "mxshrink": lambda ctx: mxshrink(_mle_cov(ctx)).covariance,
    "linear_shrink": lambda ctx: linear_shrink(_mle_cov(ctx), ctx.Sigma_star, ctx.beta_sq).covariance,
    "oracle": lambda ctx: ctx.Sigma_star.copy(),
}


@dataclass(frozen=True)
class ExperimentConfig:
    d_values: tuple[int, ...] = (4, 8)
    trials: int = 1000
    seed: int = 0
    estimators: tuple[str, ...] = ("bmtm_mle", "ddm_mle", "upgma", "nj", "ls", "ots", "mxshrink", "linear_shrink")
    metrics: tuple[str, ...] = METRICS
    bias_replicates: int = 50
    beta_sq_replicates: int = 100
    operator_norm: float = 1.0
    workers: int | None = None
    ground_truth: Callable | None = None  # (d, rng) -> (tree, theta)

    def __post_init__(self):
        object.__setattr__(self, "d_values", tuple(int(d) for d in self.d_values))
        object.__setattr__(self, "estimators", tuple(self.estimators))
        object.__setattr__(self, "metrics", tuple(self.metrics))
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        min_d = 1 if self.ground_truth is not None else 2
        if any(d < min_d for d in self.d_values):
            raise ValueError(f"every d must be >= {min_d}")
        unknown = [e for e in self.estimators if e not in ESTIMATORS]
        if unknown:
            raise ValueError(f"unknown estimators {unknown}")
        bad = [m for m in self.metrics if m not in METRICS]
        if bad:
            raise ValueError(f"unknown metrics {bad}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")
        if self.bias_replicates < 2 and ("bias" in self.metrics or "variance" in self.metrics):
            raise ValueError("bias/variance need bias_replicates >= 2")


@dataclass(frozen=True)
class RiskRow:
    d: int
    estimator: str
    metric: str
    mean: float
    p10: float
    p90: float
    trials: int
    seed: int
    errors: int = 0


CSV_COLUMNS = ("d", "estimator", "metric", "mean", "p10", "p90", "trials", "seed", "errors")


@dataclass(frozen=True)
class RiskTable:
    rows: tuple[RiskRow, ...]

    def get(self, d: int, estimator: str, metric: str = "risk") -> RiskRow:
        for r in self.rows:
            if (r.d, r.estimator, r.metric) == (d, estimator, metric):
                return r
        raise KeyError((d, estimator, metric))

    def to_csv(self) -> str:
        lines = [",".join(CSV_COLUMNS)]
        for r in self.rows:
            lines.append(
                f"{r.d},{r.estimator},{r.metric},{r.mean:.12g},{r.p10:.12g},{r.p90:.12g},"
                f"{r.trials},{r.seed},{r.errors}"
            )
        return "\n".join(lines) + "\n"

    def to_json(self) -> list[dict]:
        return [dict(zip(CSV_COLUMNS, (r.d, r.estimator, r.metric, r.mean, r.p10, r.p90, r.trials, r.seed, r.errors))) for r in self.rows]


def trial_rng(seed: int, d: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, d, trial])))


def _frob(A) -> float:
    return float(np.sum(A * A))


def _ground_truth(config: ExperimentConfig, d: int, rng):
    make = config.ground_truth or random_ultrametric_tree
    tree, theta = make(d, rng)
    theta = normalize_operator_norm(tree, theta, config.operator_norm)
    return tree, theta, build_covariance(tree, theta)


def _estimate(name, tree, Sigma, x, beta_sq):
    return ESTIMATORS[name](Context(tree, Sigma, x, beta_sq))


def run_trial(config: ExperimentConfig, d: int, trial: int) -> dict[str, dict[str, float | None]]:
    """Metrics for one ground truth: ``{estimator: {metric: value or None}}``."""
    rng = trial_rng(config.seed, d, trial)
    tree, theta, Sigma = _ground_truth(config, d, rng)
    x = sample_bmtm(tree, theta, rng)

    beta_sq = 0.0
    if "linear_shrink" in config.estimators:
        draws = sample_bmtm(tree, theta, rng, size=config.beta_sq_replicates)
        losses = []
        for xr in draws:
            try:
                losses.append(_frob(mle(tree, xr).covariance - Sigma))
            except BMTMError:
                pass
        beta_sq = math.fsum(losses) / len(losses) if losses else 0.0

    want_bv = "bias" in config.metrics or "variance" in config.metrics
    inner = sample_bmtm(tree, theta, rng, size=config.bias_replicates) if want_bv else None

    out: dict[str, dict[str, float | None]] = {}
    for name in config.estimators:
        row: dict[str, float | None] = {m: None for m in config.metrics}
        try:
            if "risk" in config.metrics:
                row["risk"] = _frob(_estimate(name, tree, Sigma, x, beta_sq) - Sigma)
            if want_bv:
                reps = np.array([_estimate(name, tree, Sigma, xr, beta_sq) for xr in inner])
                mean = reps.mean(axis=0)
                if "bias" in config.metrics:
                    row["bias"] = _frob(mean - Sigma)
                if "variance" in config.metrics:
                    row["variance"] = math.fsum(_frob(r - mean) for r in reps) / len(reps)
        except BMTMError:
            row = {m: None for m in config.metrics}
        out[name] = row
    return out


def _workers(config: ExperimentConfig) -> int:
    if config.workers is not None:
        return max(1, int(config.workers))
    env = os.environ.get("BMTM_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def run_experiment(config: ExperimentConfig) -> RiskTable:
    rows = []
    for d in config.d_values:
        jobs = range(config.trials)
        nw = _workers(config)
        if nw > 1:
            with ThreadPoolExecutor(max_workers=nw) as pool:
                results = list(pool.map(lambda t: run_trial(config, d, t), jobs))
        else:
            results = [run_trial(config, d, t) for t in jobs]
        for name in config.estimators:
            for metric in config.metrics:
                vals = [r[name][metric] for r in results]
                ok = [v for v in vals if v is not None]
                errors = len(vals) - len(ok)
                if ok:
                    mean = math.fsum(ok) / len(ok)
                    p10, p90 = (float(v) for v in np.percentile(ok, [10, 90]))
                else:
                    mean = p10 = p90 = math.nan
                rows.append(RiskRow(d, name, metric, mean, p10, p90, config.trials, config.seed, errors))
    return RiskTable(tuple(rows))
