"""Run the Monte Carlo experiments and write CSV + JSON results.

    python scripts/run_experiments.py                    # all, full size
    python scripts/run_experiments.py onepoint flip_symmetry --out results/
    python scripts/run_experiments.py --quick            # reduced sizes, seconds
"""
import argparse
import json
import time

from melonlpp.experiments import EXPERIMENTS, QUICK_OVERRIDES, run_experiment


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("names", nargs="*", choices=[[]] + sorted(EXPERIMENTS), default=[])
    p.add_argument("--out", default="results")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--quick", action="store_true", help="use the reduced smoke-test sizes")
    args = p.parse_args()

    for name in args.names or list(EXPERIMENTS):
        overrides = dict(QUICK_OVERRIDES[name]) if args.quick else {}
        overrides["seed"] = args.seed
        start = time.perf_counter()
        res = run_experiment(name, overrides, args.threads)
        res.write(args.out)
        verdict = {True: "PASS", False: "FAIL", None: "measured"}[res.passed]
        print(f"{name:24s} {verdict:8s} {time.perf_counter() - start:7.1f}s  "
              f"{json.dumps(res.statistic)}", flush=True)


if __name__ == "__main__":
    main()
