"""End-to-end acceptance checks at full size.

Each test prints one ``[criterion N] PASS|FAIL`` line; the lines are repeated
in the terminal summary. The Monte Carlo criteria take several minutes in
total (envelope crossing and disjointness dominate).
"""
import time

import numpy as np
import pytest

from melonlpp.experiments import EXPERIMENTS, QUICK_OVERRIDES, run_experiment
from melonlpp.verify import run_suite

RESULTS: list[str] = []


def report(number: int, ok: bool, detail: str):
    line = f"[criterion {number:2d}] {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


@pytest.fixture(scope="session")
def experiment():
    cache = {}

    def get(name):
        if name not in cache:
            cache[name] = run_experiment(name)
        return cache[name]

    return get


def test_c01_oracle_equivalence():
    start = time.perf_counter()
    res = run_suite("oracle", 500, seed=0)
    sec = time.perf_counter() - start
    report(1, res.passed and res.checked == 500 and sec < 60,
           f"{res.checked} instances, {res.violations} mismatches, {sec:.1f}s")


def test_c02_melon_identity():
    start = time.perf_counter()
    res = run_suite("melon_identity", 200, seed=0)
    sec = time.perf_counter() - start
    report(2, res.passed and res.checked == 200 and sec < 60,
           f"{res.checked} instances, {res.violations} violations, {sec:.1f}s")


def test_c03_sorting_network():
    res = run_suite("melon_sort", 200, seed=0)
    report(3, res.passed and res.checked == 200,
           f"{res.checked} ensembles, {res.violations} knot or sum-identity violations")


def test_c04_deterministic_suites():
    names = ["quadrangle", "monotonicity", "naive_bounds", "metric_composition",
             "refinement", "affine_shift"]
    start = time.perf_counter()
    results = [run_suite(s, 1000, seed=0) for s in names]
    sec = time.perf_counter() - start
    ok = all(r.passed and r.checked >= 1000 for r in results) and sec < 300
    detail = ", ".join(f"{r.suite}={r.violations}/{r.checked}" for r in results)
    report(4, ok, f"violations {detail}; {sec:.1f}s")


def test_c05_edge_exponent(experiment):
    r = experiment("onepoint")
    slope = r.statistic["slope"]
    ok = abs(slope + 1 / 6) <= 0.08 and r.config["n_list"] == (64, 256, 1024) \
        and r.config["replicates"] >= 2000
    report(5, ok, f"std slope {slope:.4f} (target -1/6 +- 0.08)")


def test_c06_self_consistency(experiment):
    r = experiment("onepoint")
    ks = r.statistic["ks_largest_pair"]
    ok = ks <= 0.08 and r.statistic["ks_pair"] == [256, 1024]
    report(6, ok, f"KS(n=256, n=1024) = {ks:.4f} (max 0.08)")


def test_c07_stationarity(experiment):
    r = experiment("stationarity")
    ks = r.statistic["ks"]
    ok = ks <= 0.06 and r.config["n"] == 256 and r.config["replicates"] >= 2000
    report(7, ok, f"KS = {ks:.4f} (max 0.06), c_eff = {r.statistic['c_effective']:.4f}")


def test_c08_two_point_modulus(experiment):
    r = experiment("two_point_modulus")
    med = np.array(r.statistic["median_ratio"])
    spread = med.max() / med.min()
    ok = spread <= 2.0 and r.config["n"] == 256 and r.config["replicates"] >= 2000
    report(8, ok, f"median ratios {np.round(med, 4).tolist()}, spread x{spread:.3f} (max 2)")


def test_c09_transversal(experiment):
    r = experiment("transversal")
    slope = r.statistic["slope"]
    ok = 0.5 <= slope <= 0.85 and r.config["lengths"] == (0.25, 0.5, 1.0)
    report(9, ok, f"slope {slope:.4f} (range [0.5, 0.85], target 2/3)")


def test_c10_disjointness(experiment):
    r = experiment("disjoint_prob")
    slope = r.statistic["slope"]
    ok = slope is not None and slope >= 1.0 and r.config["replicates"] >= 4000
    report(10, ok, f"P = {r.statistic['probability']}, slope {slope} (min 1.0)")


def test_c11_argmax_location(experiment):
    r = experiment("argmax_location")
    q = r.statistic["quantile_abs_offset"]
    ratio = q[-1] / q[0]
    ok = ratio <= 1.5 and r.config["n_list"] == (64, 256)
    report(11, ok, f"95% quantiles {np.round(q, 4).tolist()}, ratio {ratio:.3f} (max 1.5)")


def test_c12_envelope_crossing(experiment):
    r = experiment("envelope_crossing")
    fr = r.statistic["crossing_fraction"]
    monotone = all(u >= v for u, v in zip(fr, fr[1:]))
    ok = monotone and fr[-1] <= 0.05 and r.statistic["rescale_identity_worst"] <= 1.0 \
        and r.config["identity_draws"] >= 1000 and r.config["replicates"] >= 2000
    report(12, ok, f"b = {r.statistic['b']}, crossing fractions {fr}, identity error "
                   f"{r.statistic['rescale_identity_worst']:.2e} tol units")


def test_c13_passage_concentration(experiment):
    r = experiment("passage_concentration")
    fr = r.statistic["exceed_fraction"]
    monotone = all(u >= v for u, v in zip(fr, fr[1:]))
    ok = monotone and fr[-1] <= 0.05 and r.config["k"] == 2 and r.config["n"] == 256
    report(13, ok, f"exceedance at a = 2,4,6,8: {fr}")


def test_c14_flip_symmetry(experiment):
    r = experiment("flip_symmetry")
    ks = r.statistic["ks"]
    report(14, ks <= 0.06 and r.config["replicates"] >= 2000, f"KS = {ks:.4f} (max 0.06)")


def test_c15_determinism():
    same = []
    for name in EXPERIMENTS:
        a = run_experiment(name, QUICK_OVERRIDES[name]).to_csv()
        b = run_experiment(name, QUICK_OVERRIDES[name]).to_csv()
        same.append((name, a == b))
    bad = [n for n, ok in same if not ok]
    report(15, not bad, f"{len(same)} experiments re-run on reduced configs; "
                        f"differing: {bad or 'none'}")
