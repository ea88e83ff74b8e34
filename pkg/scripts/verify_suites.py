"""Run every randomized identity/inequality suite and print a table.

    python scripts/verify_suites.py [--seed 0] [--count N]
"""
import argparse

from melonlpp.verify import SUITES, run_suite


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=None, help="instances per suite (default per suite)")
    args = p.parse_args()
    bad = 0
    for name in SUITES:
        r = run_suite(name, args.count, args.seed)
        bad += r.violations
        print(f"{name:20s} checked={r.checked:5d} violations={r.violations} {r.seconds:6.1f}s")
    raise SystemExit(1 if bad else 0)


if __name__ == "__main__":
    main()
