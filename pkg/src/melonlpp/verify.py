"""Randomized suites for the deterministic identities and inequalities.

Each suite draws its instances from a seeded generator, so a failing run can
be replayed from (suite, seed, count). Instances whose endpoint pair has no
disjoint tuple are redrawn, so every counted instance is a real check.
"""
from __future__ import annotations

import time
import zlib
from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibleError, UsageError
from .lpp import (Report, inputs_digest, lpp_multi, lpp_multi_bruteforce, verify_affine_shift,
                  verify_metric_composition, verify_monotonicity, verify_naive_bounds,
                  shift_ordered, verify_quadrangle, verify_quadrangle_split,
                  verify_refinement)
from .melon import check_melon_identity, melon_direct, melon_sort
from .paths import EndpointPair
from .plcore import Ensemble, Grid, tol_abs
from .sampler import RngState

MAX_REDRAWS = 200


@dataclass
class SuiteResult:
    suite: str
    seed: int
    count: int
    checked: int = 0
    violations: int = 0
    failures: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def to_dict(self) -> dict:
        return {"suite": self.suite, "seed": self.seed, "count": self.count,
                "checked": self.checked, "violations": self.violations, "pass": self.passed,
                "seconds": round(self.seconds, 3), "failures": self.failures[:10]}


# ---------------------------------------------------------------- generators

def random_grid(gen: np.random.Generator, m: int) -> Grid:
    """Uniform or irregular grid with m intervals starting at 0."""
    if gen.random() < 0.5:
        return Grid.uniform(0.0, float(gen.choice([0.5, 1.0, 0.25])), m)
    steps = gen.uniform(0.2, 1.5, m)
    return Grid(np.concatenate([[0.0], np.cumsum(steps)]))


def random_ensemble(gen: np.random.Generator, n_lines: int, m: int) -> Ensemble:
    """Random walks; integer-valued half the time so ties and flat pieces occur."""
    grid = random_grid(gen, m)
    if gen.random() < 0.5:
        steps = gen.integers(-2, 3, (n_lines, m)).astype(float)
    else:
        steps = gen.standard_normal((n_lines, m))
    values = np.concatenate([np.zeros((n_lines, 1)), np.cumsum(steps, axis=1)], axis=1)
    values += gen.normal(0, 1, (n_lines, 1)).round(1)
    return Ensemble(grid, values, 1)


def random_pair(gen: np.random.Generator, f: Ensemble, k: int, n=None, m=None) -> EndpointPair:
    K = len(f.grid)
    n = f.last_line if n is None else n
    m = int(gen.integers(f.first_line, n + 1)) if m is None else m
    while True:
        xi = np.sort(gen.integers(0, K, k))
        yi = np.sort(gen.integers(0, K, k))
        if np.all(yi >= xi):
            return EndpointPair(f.grid.times[xi], n, f.grid.times[yi], m)


def _feasible(f, pair) -> bool:
    try:
        lpp_multi(f, pair)
        return True
    except InfeasibleError:
        return False


def feasible_instance(gen, n_max: int, m_max: int, k_max: int, min_lines: int = 1):
    """(ensemble, pair) with a feasible pair crossing at least min_lines lines."""
    for _ in range(MAX_REDRAWS):
        n = int(gen.integers(min_lines, n_max + 1))
        f = random_ensemble(gen, n, int(gen.integers(1, m_max + 1)))
        pair = random_pair(gen, f, int(gen.integers(1, k_max + 1)))
        if pair.n - pair.m + 1 >= min_lines and _feasible(f, pair):
            return f, pair
    raise RuntimeError("could not draw a feasible instance")


# ---------------------------------------------------------------- suites

def _case_oracle(gen):
    f, pair = None, None
    for _ in range(MAX_REDRAWS):
        f = random_ensemble(gen, int(gen.integers(1, 5)), int(gen.integers(1, 8)))
        pair = random_pair(gen, f, int(gen.integers(1, 4)))
        if pair.n - pair.m <= 4:
            break
    rep = Report("oracle", inputs_digest(f, pair))
    try:
        a = lpp_multi(f, pair)
    except InfeasibleError:
        a = None
    try:
        b = lpp_multi_bruteforce(f, pair)
    except InfeasibleError:
        b = None
    rep.values = {"dp": a, "bruteforce": b}
    if a is None or b is None:
        rep.passed = a is None and b is None
    else:
        rep.slack = -abs(a - b)
        rep.passed = abs(a - b) <= 1e-9 * max(1.0, abs(a), abs(b))
    return [rep]


def _case_quadrangle(gen):
    f, A = feasible_instance(gen, 4, 6, 3)
    reps = []
    for _ in range(MAX_REDRAWS):
        B = random_pair(gen, f, A.k, A.n, A.m)
        if _feasible(f, B):
            reps.append(verify_quadrangle(f, A, B))
            break
    if A.k >= 2:
        # move one block of end points up, keep the other block fixed
        ell = int(gen.integers(1, A.k))
        yi = np.array([f.grid.index(t) for t in A.ys])
        new = yi.copy()
        if gen.random() < 0.5:
            up = np.maximum.accumulate(yi[:ell] + gen.integers(0, 3, ell))
            new[:ell] = np.minimum(up, yi[ell])
        else:
            up = np.maximum.accumulate(yi[ell:] + gen.integers(0, 3, A.k - ell))
            new[ell:] = np.minimum(up, len(f.grid) - 1)
        reps.append(verify_quadrangle_split(f, A, f.grid.times[new], ell))
    return reps


def _case_monotonicity(gen):
    # A <=_s B is only satisfiable with s <= 0 and k_B + s <= k_A (padding rule)
    f, B = feasible_instance(gen, 4, 6, 3)
    shift = -int(gen.integers(0, B.k))
    k_a = min(3, B.k + shift + int(gen.integers(0, 2)))
    K = len(f.grid)
    xb = np.array([f.grid.index(t) for t in B.xs])
    yb = np.array([f.grid.index(t) for t in B.ys])
    for _ in range(MAX_REDRAWS):
        xa = np.sort(gen.integers(0, K, k_a))
        ya = np.sort(gen.integers(0, K, k_a))
        for i in range(B.k):
            j = i + shift
            if 0 <= j < k_a:
                xa[j] = min(xa[j], xb[i])
                ya[j] = min(ya[j], yb[i])
        xa, ya = np.minimum.accumulate(xa[::-1])[::-1], np.minimum.accumulate(ya[::-1])[::-1]
        if np.all(ya >= xa):
            A = EndpointPair(f.grid.times[xa], B.n, f.grid.times[ya], B.m)
            if shift_ordered(A, B, shift) and _feasible(f, A):
                return [verify_monotonicity(f, A, B, shift)]
    return []


def _case_naive(gen):
    f, pair = feasible_instance(gen, 4, 6, 3)
    return [verify_naive_bounds(f, pair)]


def _case_metric(gen):
    f, pair = feasible_instance(gen, 4, 6, 3, min_lines=2)
    return [verify_metric_composition(f, pair)]


def _case_refinement(gen):
    f, pair = feasible_instance(gen, 4, 5, 2)
    return [verify_refinement(f, pair)]


def _case_affine(gen):
    f, pair = feasible_instance(gen, 4, 6, 3)
    return [verify_affine_shift(f, pair, float(gen.normal(0, 3)), float(gen.normal(0, 3)))]


def _case_melon_identity(gen):
    for _ in range(MAX_REDRAWS):
        n = int(gen.integers(1, 6))
        f = random_ensemble(gen, n, int(gen.integers(2, 17)))
        K = len(f.grid)
        t_idx = int(gen.integers(0, K))
        k = int(gen.integers(1, 4))
        xi = np.sort(gen.integers(t_idx, K, k))
        yi = np.sort(gen.integers(0, K, k))
        if np.any(yi < xi):
            continue
        pair = EndpointPair(f.grid.times[xi], n, f.grid.times[yi], 1)
        if _feasible(f, pair):
            return [check_melon_identity(f, pair, f.grid.times[t_idx])]
    return []


def _case_melon_sort(gen):
    n = int(gen.integers(1, 6))
    f = random_ensemble(gen, n, int(gen.integers(2, 17)))
    t = f.grid.times[int(gen.integers(0, len(f.grid) - 1))]
    W = melon_sort(f, t)
    D = melon_direct(f, t)
    at = W.at(D.lines.grid.times)
    scale = max(1.0, float(np.abs(D.lines.values).max()))
    err = float(np.abs(at - D.lines.values).max()) / scale
    j = f.grid.index(t)
    total = f.values[:, j:].sum(axis=0) - f.values[:, j].sum()
    sum_err = float(np.abs(W.at(f.grid.times[j:]).sum(axis=0) - total).max())
    zero, order = W.invariant_errors()
    rep = Report("melon_sort", inputs_digest(f))
    rep.values = {"knot_error": err, "sum_error": sum_err, "opening_error": zero,
                  "order_violation": order}
    rep.slack = -max(err, sum_err / scale)
    rep.passed = (err <= 1e-9 and sum_err <= tol_abs(scale * n)
                  and zero <= tol_abs(scale) and order <= tol_abs(scale))
    return [rep]


SUITES = {
    "oracle": _case_oracle,
    "quadrangle": _case_quadrangle,
    "monotonicity": _case_monotonicity,
    "naive_bounds": _case_naive,
    "metric_composition": _case_metric,
    "refinement": _case_refinement,
    "affine_shift": _case_affine,
    "melon_identity": _case_melon_identity,
    "melon_sort": _case_melon_sort,
}

DEFAULT_COUNTS = {"oracle": 500, "melon_identity": 200, "melon_sort": 200}


def run_suite(name: str, count: int | None = None, seed: int = 0) -> SuiteResult:
    if name not in SUITES:
        raise UsageError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    count = DEFAULT_COUNTS.get(name, 1000) if count is None else count
    if count < 1:
        raise UsageError("count must be at least 1")
    res = SuiteResult(name, seed, count)
    start = time.perf_counter()
    for i in range(count):
        gen = RngState(seed, (zlib.crc32(name.encode()) << 32) | i).generator()
        for rep in SUITES[name](gen):
            res.checked += rep.passed is not None
            if rep.violated:
                res.violations += 1
                res.failures.append({"instance": i, **rep.to_dict()})
    res.seconds = time.perf_counter() - start
    return res

