"""Command-line interface.

Exit status is 0 on success, 1 on a domain error (printed to stderr as one
line of JSON) and 2 on a usage error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile

import numpy as np

from .contrast import contrast_mle, plgtm_divergence_witness
from .ddm import ddm_mle, ddm_mle_tree
from .errors import BMTMError
from .estimators import EstimatorOutput, least_squares, mxshrink, neighbor_joining, one_third_shrink, upgma
from .mle import mle
from .simulate import ESTIMATORS, METRICS, ExperimentConfig, run_experiment
from .suites import SUITES
from .tree_model import build_covariance, load_tree, to_newick, tree_to_json

JITTER_SCALE = 1e-9


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# --- input --------------------------------------------------------------------


def _parse_numbers(text: str) -> np.ndarray:
    tokens = text.replace(",", " ").split()
    try:
        return np.array([float(t) for t in tokens])
    except ValueError as exc:
        raise UsageError(f"bad number in data: {exc}") from exc


def _read_data(args) -> np.ndarray:
    if args.data_inline is not None:
        x = _parse_numbers(args.data_inline)
    elif args.data is not None:
        with open(args.data) as fh:
            x = _parse_numbers(fh.read())
    else:
        raise UsageError("one of --data or --data-inline is required")
    if x.size == 0:
        raise UsageError("data is empty")
    return x


def _read_tree(args):
    if args.tree is None:
        raise UsageError("--tree is required")
    with open(args.tree) as fh:
        return load_tree(fh.read())


def _jitter(x: np.ndarray, seed: int) -> np.ndarray:
    """Break ties and zeros with noise of size ``1e-9 * max|x|``."""
    rng = np.random.default_rng(seed)
    scale = JITTER_SCALE * max(1.0, float(np.max(np.abs(x))))
    return x + scale * rng.uniform(-1.0, 1.0, size=x.size)


# --- output -------------------------------------------------------------------


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (frozenset, set)):
        return sorted(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _matrix_csv(M) -> str:
    return "\n".join(",".join(f"{v:.12g}" for v in row) for row in np.atleast_2d(M)) + "\n"


def _emit(args, payload: dict, csv_text: str | None = None):
    if args.format == "csv":
        if csv_text is None:
            raise UsageError(f"{args.command} has no CSV output")
        text = csv_text
    else:
        text = json.dumps(payload, default=_jsonable, sort_keys=True) + "\n"
    if args.out is None:
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(args.out))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".bmtm-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, args.out)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# --- commands -----------------------------------------------------------------


def cmd_mle(args):
    tree, _ = _read_tree(args)
    x = _read_data(args)
    r = mle(tree, x)
    payload = r.to_json()
    payload["newick"] = to_newick(tree, r.theta)
    _emit(args, payload, _matrix_csv(r.covariance))


def cmd_ddm_mle(args):
    x = _read_data(args)
    if args.jitter:
        x = _jitter(x, args.seed)
    est = ddm_mle(x)
    tree, theta = ddm_mle_tree(x)
    payload = {
        "P": est.P,
        "K": est.K,
        "path": list(est.path.order),
        "tree": tree_to_json(tree, theta),
        "newick": to_newick(tree, theta),
    }
    if args.jitter:
        payload["data"] = x
    _emit(args, payload, _matrix_csv(est.K))


def cmd_estimate(args):
    x = _read_data(args)
    method = args.method
    if method == "upgma":
        out = upgma(x)
    elif method == "nj":
        out = neighbor_joining(x)
    else:
        tree, _ = _read_tree(args)
        if method == "ls":
            out = least_squares(tree, x)
        else:
            r = mle(tree, x)
            if method == "ots":
                theta = one_third_shrink(r.theta)
                out = EstimatorOutput(build_covariance(tree, theta), tree, theta)
            else:
                out = mxshrink(r.covariance, clamp=not args.unclamped)
    payload = {"method": method, "covariance": out.covariance, "flags": out.flags}
    if out.tree is not None:
        payload["tree"] = tree_to_json(out.tree, out.theta)
        payload["newick"] = to_newick(out.tree, out.theta)
    _emit(args, payload, _matrix_csv(out.covariance))


def cmd_contrast_mle(args):
    tree, _ = _read_tree(args)
    x = _read_data(args)
    res = contrast_mle(tree, x, reference=args.reference)
    payload = res.mle.to_json()
    payload.update({
        "y": res.y,
        "reference": args.reference,
        "leaf_origin": list(res.rerooted.leaf_origin),
        "tree": tree_to_json(res.tree, res.mle.theta),
        "newick": to_newick(res.tree, res.mle.theta),
    })
    _emit(args, payload, _matrix_csv(res.mle.covariance))


def cmd_plgtm_witness(args):
    x = _read_data(args)
    eps = _parse_numbers(args.epsilons) if args.epsilons else 10.0 ** -np.arange(7)
    rows = plgtm_divergence_witness(x, eps)
    payload = {"witness": [{"epsilon": e, "loglik": ll} for e, ll in rows]}
    csv = "epsilon,loglik\n" + "".join(f"{e:.12g},{ll:.12g}\n" for e, ll in rows)
    _emit(args, payload, csv)


def _csv_list(text, cast=str):
    return tuple(cast(t) for t in text.replace(",", " ").split())


def cmd_simulate(args):
    try:
        config = ExperimentConfig(
            d_values=_csv_list(args.d, int),
            trials=args.trials,
            seed=args.seed,
            estimators=_csv_list(args.estimators),
            metrics=_csv_list(args.metrics),
            bias_replicates=args.bias_replicates,
            beta_sq_replicates=args.beta_sq_replicates,
            operator_norm=args.operator_norm,
            workers=args.workers,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    table = run_experiment(config)
    if args.format is None:
        args.format = "csv"
    _emit(args, {"rows": table.to_json()}, table.to_csv())


def cmd_verify(args):
    names = list(SUITES) if args.suite == "all" else [args.suite]
    reports = []
    for name in names:
        kwargs = {"seed": args.seed}
        if args.instances is not None:
            kwargs["instances"] = args.instances
        reports.append(SUITES[name](**kwargs))
    for rep in reports:
        print(f"{rep.suite}: {rep.passed} passed, {rep.failed} failed", file=sys.stderr)
    _emit(args, {"suites": [r.to_json() for r in reports]})
    return 0 if all(r.ok for r in reports) else 1


# --- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--tree", help="tree file (Newick or JSON)")
    data = common.add_mutually_exclusive_group()
    data.add_argument("--data", help="file with comma or whitespace separated values")
    data.add_argument("--data-inline", help="comma separated values")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="output file (written atomically)")
    common.add_argument("--format", choices=("json", "csv"), default=None)

    p = _Parser(prog="bmtm", description="One-sample MLE for Brownian motion tree models.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("mle", parents=[common], help="exact MLE on a fixed tree")
    s.set_defaults(func=cmd_mle)

    s = sub.add_parser("ddm-mle", parents=[common], help="closed-form DDM MLE")
    s.add_argument("--jitter", action="store_true", help="perturb data by 1e-9 * scale to break ties")
    s.set_defaults(func=cmd_ddm_mle)

    s = sub.add_parser("estimate", parents=[common], help="comparison estimators")
    s.add_argument("--method", required=True, choices=("upgma", "nj", "ls", "ots", "mxshrink"))
    s.add_argument("--unclamped", action="store_true", help="mxshrink without the divisor floor")
    s.set_defaults(func=cmd_estimate)

    s = sub.add_parser("contrast-mle", parents=[common], help="MLE of the contrast model")
    s.add_argument("--reference", type=int, default=1, help="reference leaf")
    s.set_defaults(func=cmd_contrast_mle)

    s = sub.add_parser("plgtm-witness", parents=[common], help="unbounded PLGTM likelihood")
    s.add_argument("--epsilons", help="decreasing positive values (default 1e0..1e-6)")
    s.set_defaults(func=cmd_plgtm_witness)

    s = sub.add_parser("simulate", parents=[common], help="Monte Carlo risk experiment")
    s.add_argument("--d", default="4,8", help="leaf counts")
    s.add_argument("--trials", type=int, default=1000)
    s.add_argument("--estimators", default=",".join(e for e in ESTIMATORS if e != "oracle"))
    s.add_argument("--metrics", default=",".join(METRICS))
    s.add_argument("--bias-replicates", type=int, default=50)
    s.add_argument("--beta-sq-replicates", type=int, default=100)
    s.add_argument("--operator-norm", type=float, default=1.0)
    s.add_argument("--workers", type=int, default=None, help="defaults to BMTM_THREADS or the CPU count")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("verify", parents=[common], help="randomized property suites")
    s.add_argument("--suite", choices=tuple(SUITES) + ("all",), default="all")
    s.add_argument("--instances", type=int, default=None)
    s.set_defaults(func=cmd_verify)
    return p


def _fix_negative_values(argv):
    # "--data-inline -5,-2" would otherwise read -5,-2 as an option
    out = []
    it = iter(argv)
    for a in it:
        if a in ("--data-inline", "--epsilons"):
            nxt = next(it, None)
            out.append(a if nxt is None else f"{a}={nxt}")
        else:
            out.append(a)
    return out


def run(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = build_parser().parse_args(_fix_negative_values(argv))
        if args.format is None and args.command != "simulate":
            args.format = "json"
        code = args.func(args)
        return 0 if code is None else code
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    except BMTMError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1
    except OSError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1
    except ValueError as exc:
        print(json.dumps({"error": "ValueError", "message": str(exc)}), file=sys.stderr)
        return 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
