"""Command-line entry point.

    melonlpp lpp --ensemble f.txt --start 0,0 --start-line 2 --end 2,2 --end-line 1
    melonlpp melon --ensemble f.txt --time 0 --out melon.txt --verify-identity
    melonlpp verify --suite quadrangle --count 200 --seed 3
    melonlpp experiment onepoint --config small.json --out results/

Exit codes: 0 success, 1 usage, 2 domain or infeasible, 3 verification failure.
Config files are JSON; command-line flags override their entries.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import lpp as lpp_mod
from .errors import DomainError, InfeasibleError, UsageError, VerificationError
from .experiments import EXPERIMENTS, run_experiment
from .lpp import lpp_multi, optimizer_extract
from .melon import check_melon_identity, dumps_melon, melon_direct, melon_sort
from .paths import EndpointPair, dumps_tuple
from .plcore import loads_ensemble
from .sampler import RngState
from .verify import SUITES, run_suite


@dataclass
class RunConfig:
    command: str
    seed: int = 0
    replicates: int | None = None
    output_dir: str | None = None
    threads: int = 1
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.replicates is not None and self.replicates < 1:
            raise UsageError("replicates must be at least 1")
        if self.threads < 1:
            raise UsageError("threads must be at least 1")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from None


def _load_config(args, command: str) -> RunConfig:
    raw = {}
    if getattr(args, "config", None):
        try:
            raw = json.loads(_read_text(args.config))
        except json.JSONDecodeError as exc:
            raise UsageError(f"bad JSON in {args.config}: {exc}") from None
        if not isinstance(raw, dict):
            raise UsageError("config must be a JSON object")
    seed = raw.pop("seed", 0)
    replicates = raw.pop("replicates", None)
    if args.seed is not None:
        seed = args.seed
    if getattr(args, "replicates", None) is not None:
        replicates = args.replicates
    return RunConfig(command, int(seed), replicates, args.out, args.threads, raw)


def _emit(text: str, out: str | None, name: str):
    if out is None:
        sys.stdout.write(text)
        return
    path = Path(out)
    if path.suffix == "":
        path.mkdir(parents=True, exist_ok=True)
        path = path / name
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


# ---------------------------------------------------------------- commands

def cmd_lpp(args) -> int:
    f = loads_ensemble(_read_text(args.ensemble))
    xs, ys = _floats(args.start), _floats(args.end)
    if len(xs) != len(ys):
        raise UsageError("--start and --end need the same number of points")
    pair = EndpointPair(np.array(xs), args.start_line, np.array(ys), args.end_line)
    value = lpp_multi(f, pair)
    print("%.17g" % value)
    if args.optimizer:
        opt = optimizer_extract(f, pair, args.side)
        _emit(dumps_tuple(opt.tuple), args.out, "optimizer.csv")
    return 0


def cmd_melon(args) -> int:
    f = loads_ensemble(_read_text(args.ensemble))
    t = f.grid.t0 if args.time is None else args.time
    W = melon_sort(f, t) if args.method == "sort" else melon_direct(f, t)
    _emit(dumps_melon(W), args.out, "melon.txt")
    if args.verify_identity:
        gen = RngState(args.seed or 0, 0).generator()
        j0 = f.grid.index(t)
        K = len(f.grid)
        k = min(int(args.k), f.n_lines)
        xi = np.sort(gen.integers(j0, K, k))
        yi = np.maximum(np.sort(gen.integers(j0, K, k)), xi)
        yi = np.maximum.accumulate(yi)
        pair = EndpointPair(f.grid.times[xi], f.last_line, f.grid.times[yi], 1)
        rep = check_melon_identity(f, pair, t, W)
        print(rep.to_json(), file=sys.stderr)
        print(f"seed={args.seed or 0}", file=sys.stderr)
        if not rep.passed:
            raise VerificationError("melon identity failed")
    return 0


def cmd_verify(args) -> int:
    cfg = _load_config(args, "verify")
    suites = args.suite or cfg.params.get("suites") or sorted(SUITES)
    count = args.count if args.count is not None else cfg.params.get("count")
    if count is not None and count < 1:
        raise UsageError("--count must be at least 1")
    if args.inject_fault:
        lpp_mod._FAULT["offset"] = 1e-3
    try:
        results = [run_suite(s, count, cfg.seed) for s in suites]
    finally:
        lpp_mod._FAULT["offset"] = 0.0
    report = {"seed": cfg.seed, "suites": [r.to_dict() for r in results],
              "pass": all(r.passed for r in results)}
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    _emit(text, cfg.output_dir, "verify.json")
    if cfg.output_dir is not None:
        print(json.dumps({"seed": cfg.seed, "pass": report["pass"]}))
    if not report["pass"]:
        raise VerificationError("verification suites reported violations")
    return 0


def cmd_experiment(args) -> int:
    if args.name not in EXPERIMENTS:
        raise UsageError(f"unknown experiment {args.name!r}; choose from {sorted(EXPERIMENTS)}")
    cfg = _load_config(args, "experiment")
    overrides = dict(cfg.params)
    overrides["seed"] = cfg.seed
    if cfg.replicates is not None:
        overrides["replicates"] = cfg.replicates
    result = run_experiment(args.name, overrides, cfg.threads)
    if cfg.output_dir is None:
        sys.stdout.write(result.to_csv())
        print(result.summary_json(), file=sys.stderr)
    else:
        result.write(cfg.output_dir)
        print(result.summary_json())
    return 0


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="melonlpp", description="Semi-discrete last passage percolation tools")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def common(sp):
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--config", default=None, help="JSON file; flags override it")
        sp.add_argument("--out", default=None, help="output file or directory")
        sp.add_argument("--threads", type=int, default=1)

    sp = sub.add_parser("lpp", help="passage value and optimizer for one endpoint pair")
    common(sp)
    sp.add_argument("--ensemble", required=True)
    sp.add_argument("--start", required=True, help="comma-separated start times")
    sp.add_argument("--start-line", type=int, required=True)
    sp.add_argument("--end", required=True, help="comma-separated end times")
    sp.add_argument("--end-line", type=int, required=True)
    sp.add_argument("--side", choices=["rightmost", "leftmost"], default="rightmost")
    sp.add_argument("--optimizer", action="store_true", help="also write the optimizer CSV")
    sp.set_defaults(func=cmd_lpp)

    sp = sub.add_parser("melon", help="melon of an ensemble file")
    common(sp)
    sp.add_argument("--ensemble", required=True)
    sp.add_argument("--time", type=float, default=None, help="opening time (default: grid start)")
    sp.add_argument("--method", choices=["sort", "direct"], default="sort")
    sp.add_argument("--verify-identity", action="store_true")
    sp.add_argument("--k", type=int, default=2, help="paths in the random identity check")
    sp.set_defaults(func=cmd_melon)

    sp = sub.add_parser("verify", help="randomized identity and inequality suites")
    common(sp)
    sp.add_argument("--suite", action="append", choices=sorted(SUITES))
    sp.add_argument("--count", type=int, default=None)
    sp.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("experiment", help="Monte Carlo experiment runner")
    common(sp)
    sp.add_argument("name")
    sp.add_argument("--replicates", type=int, default=None)
    sp.set_defaults(func=cmd_experiment)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise UsageError("choose a command: lpp, melon, verify, experiment")
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except VerificationError as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
