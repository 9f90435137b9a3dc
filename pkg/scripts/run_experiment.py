"""Run the Monte Carlo risk comparison and write a CSV table.

    python scripts/run_experiment.py --d 4,8,16 --trials 200 --out risk.csv
"""
import argparse
import sys

from bmtm.simulate import ESTIMATORS, ExperimentConfig, run_experiment


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--d", default="4,8")
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--estimators", default=",".join(e for e in ESTIMATORS if e != "oracle"))
    ap.add_argument("--metrics", default="risk")
    ap.add_argument("--workers", type=int, default=None)
    ap.add_argument("--out", default=None, help="CSV path; stdout if omitted")
    args = ap.parse_args(argv)

    cfg = ExperimentConfig(
        d_values=tuple(int(v) for v in args.d.split(",")),
        trials=args.trials,
        seed=args.seed,
        estimators=tuple(args.estimators.split(",")),
        metrics=tuple(args.metrics.split(",")),
        workers=args.workers,
    )
    csv = run_experiment(cfg).to_csv()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(csv)
    else:
        sys.stdout.write(csv)


if __name__ == "__main__":
    main()
