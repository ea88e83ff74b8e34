"""Monte Carlo runners for the edge-scaling checks.

Every runner takes a dataclass config and returns an ``ExperimentResult``:
one CSV row per (replicate, observable) plus a small JSON summary holding the
statistic, the threshold it is judged against and the verdict. Replicate r at
size n draws from its own Philox stream keyed by (seed, experiment, n, r), so
outputs depend only on the config and never on the thread count.

Rescaled coordinates: a spatial offset x at time t means time t + 2 x n^{-1/3};
the Brownian lines have diffusion parameter 1.
"""
from __future__ import annotations

import json
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import kernels
from .errors import DomainError, UsageError
from .lpp import optimizer_extract
from .melon import melon_sort
from .paths import EndpointPair
from .plcore import Grid, tol_abs
from .sampler import (RngState, brownian_values, dyson_top, gue_top, landscape_sample,
                      sample_bm_ensemble, sheet_profile, sheet_sample)
from .stats import ecdf_quantile, envelope_N, ks_distance, loglog_slope

MAX_LINES = 4096
MAX_KNOTS = 8192
MAX_KNOTS_PAIR = 1024
MAX_REPLICATES = 1 << 20


# ---------------------------------------------------------------- plumbing

@dataclass
class ExperimentResult:
    experiment: str
    config: dict
    rows: list = field(repr=False)
    statistic: dict
    threshold: dict
    passed: bool | None

    def to_csv(self) -> str:
        lines = ["replicate,n,k,observable,value"]
        lines += [f"{r},{n},{k},{obs},{'%.17g' % v}" for r, n, k, obs, v in self.rows]
        return "\n".join(lines) + "\n"

    def summary(self) -> dict:
        return {"experiment": self.experiment, "config": self.config,
                "statistic": self.statistic, "threshold": self.threshold,
                "pass": self.passed}

    def summary_json(self) -> str:
        return json.dumps(self.summary(), indent=2, sort_keys=True)

    def write(self, out_dir) -> tuple[Path, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        csv_path = out / f"{self.experiment}.csv"
        json_path = out / f"{self.experiment}.json"
        csv_path.write_text(self.to_csv())
        json_path.write_text(self.summary_json() + "\n")
        return csv_path, json_path


def stream_id(experiment: str, n: int, rep: int) -> int:
    return (zlib.crc32(experiment.encode()) << 32) | ((n % 4096) << 20) | rep


def replicate_gen(seed: int, experiment: str, n: int, rep: int) -> np.random.Generator:
    return RngState(seed, stream_id(experiment, n, rep)).generator()


def knots_per_unit(n: int, grid_factor: float) -> int:
    """Knots per unit time, about grid_factor * n^{2/3}, rounded up to a multiple of 8."""
    return int(8 * np.ceil(grid_factor * n ** (2 / 3) / 8))


def _check_common(cfg, n_values, knots=0, pair=False):
    if not 1 <= cfg.replicates <= MAX_REPLICATES:
        raise UsageError(f"replicates must lie in 1..{MAX_REPLICATES}")
    for n in n_values:
        if not 1 <= n <= MAX_LINES:
            raise UsageError(f"n={n} outside 1..{MAX_LINES}; try n <= 1024")
    cap = MAX_KNOTS_PAIR if pair else MAX_KNOTS
    if knots > cap:
        raise UsageError(f"{knots} knots per line exceeds the cap {cap}; "
                         f"try a smaller grid_factor or n")


def _run_replicates(fn, reps: int, threads: int = 1) -> list:
    if threads <= 1:
        return [fn(r) for r in range(reps)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(reps)))


def _flatten(chunks) -> list:
    return [row for chunk in chunks for row in chunk]


def _values(rows, observable, n=None) -> np.ndarray:
    return np.array([v for _, m, _, obs, v in rows
                     if obs == observable and (n is None or m == n)])


def _snap(value: float, unit: float) -> int:
    """Number of grid steps closest to value (in time units)."""
    return int(np.rint(value / unit))


# ---------------------------------------------------------------- one point

@dataclass
class OnepointConfig:
    """Top melon line at time 1. The exact route samples the GUE edge; the
    grid route runs the knot DP and carries the discretization bias."""
    n_list: tuple = (64, 256, 1024)
    replicates: int = 2000
    seed: int = 0
    route: str = "exact"
    grid_factor: float = 8.0
    slope_tol: float = 0.08
    ks_max: float = 0.08


def run_onepoint(cfg: OnepointConfig, threads: int = 1) -> ExperimentResult:
    name = "onepoint"
    if cfg.route not in ("exact", "grid"):
        raise UsageError("route must be 'exact' or 'grid'")
    if len(cfg.n_list) < 2:
        raise UsageError("need at least two values of n")
    knots = max(knots_per_unit(n, cfg.grid_factor) for n in cfg.n_list) if cfg.route == "grid" else 0
    _check_common(cfg, cfg.n_list, knots)
    chunks = []
    for n in cfg.n_list:
        J = knots_per_unit(n, cfg.grid_factor)
        times = np.arange(J + 1) / J

        def one(r, n=n, J=J, times=times):
            gen = replicate_gen(cfg.seed, name, n, r)
            if cfg.route == "exact":
                top = gue_top(n, 1, gen)[0]
            else:
                rows = brownian_values(gen, n, times)[::-1]
                top = kernels.one_path_forward(np.ascontiguousarray(rows), 0)[J]
            return [(r, n, 1, "W1_minus_2sqrt_n", float(top - 2 * np.sqrt(n)))]

        chunks += _run_replicates(one, cfg.replicates, threads)
    rows = _flatten(chunks)
    ns = np.array(cfg.n_list, float)
    stds = np.array([_values(rows, "W1_minus_2sqrt_n", n).std(ddof=1) for n in cfg.n_list])
    fit = loglog_slope(ns, stds)
    n_a, n_b = sorted(cfg.n_list)[-2:]
    ks = ks_distance(n_a ** (1 / 6) * _values(rows, "W1_minus_2sqrt_n", n_a),
                     n_b ** (1 / 6) * _values(rows, "W1_minus_2sqrt_n", n_b))
    lo, hi = -1 / 6 - cfg.slope_tol, -1 / 6 + cfg.slope_tol
    means = [float(n ** (1 / 6) * _values(rows, "W1_minus_2sqrt_n", n).mean()) for n in cfg.n_list]
    stat = {"std": stds.tolist(), "slope": fit.slope, "slope_stderr": fit.stderr,
            "ks_largest_pair": ks, "ks_pair": [n_a, n_b], "rescaled_mean": means}
    thr = {"slope": [lo, hi], "ks_max": cfg.ks_max}
    ok = bool(lo <= fit.slope <= hi and ks <= cfg.ks_max)
    return ExperimentResult(name, asdict(cfg), rows, stat, thr, ok)


# ---------------------------------------------------------------- sheet checks

@dataclass
class StationarityConfig:
    """R^n(0, 0) against R^n(c, c) from the same environments."""
    n: int = 256
    c: float = 0.5
    replicates: int = 2000
    seed: int = 0
    grid_factor: float = 8.0
    ks_max: float = 0.06


def run_stationarity(cfg: StationarityConfig, threads: int = 1) -> ExperimentResult:
    name = "stationarity"
    n = cfg.n
    J = knots_per_unit(n, cfg.grid_factor)
    _check_common(cfg, [n], J)
    a = 2 * n ** (-1 / 3)
    q = _snap(a * cfg.c, 1 / J)
    if q < 0:
        raise DomainError("c must be nonnegative")
    c_eff = q / J / a
    grid = Grid.uniform(0.0, 1 / J, J + q)

    def one(r):
        B = sample_bm_ensemble(n, grid, replicate_gen(cfg.seed, name, n, r))
        base = sheet_sample(B, n, [0.0], [0.0]).stationary_value
        shifted = sheet_sample(B, n, [c_eff], [c_eff]).stationary_value if q else base
        return [(r, n, 1, "R_0_0", base), (r, n, 1, "R_c_c", shifted)]

    rows = _flatten(_run_replicates(one, cfg.replicates, threads))
    ks = ks_distance(_values(rows, "R_0_0"), _values(rows, "R_c_c"))
    stat = {"ks": ks, "c_effective": c_eff, "knots_per_unit": J}
    return ExperimentResult(name, asdict(cfg), rows, stat, {"ks_max": cfg.ks_max},
                            bool(ks <= cfg.ks_max))


@dataclass
class TwoPointConfig:
    """|R^n(0, y) - R^n(0, 0)| / sqrt(y) for several y, one forward pass each."""
    n: int = 256
    ys: tuple = (0.1, 0.2, 0.4)
    replicates: int = 2000
    seed: int = 0
    grid_factor: float = 8.0
    max_ratio: float = 2.0


def run_two_point_modulus(cfg: TwoPointConfig, threads: int = 1) -> ExperimentResult:
    name = "two_point_modulus"
    n = cfg.n
    J = knots_per_unit(n, cfg.grid_factor)
    _check_common(cfg, [n], J)
    if min(cfg.ys) <= 0:
        raise DomainError("gaps must be positive")
    a = 2 * n ** (-1 / 3)
    steps = [_snap(a * y, 1 / J) for y in cfg.ys]
    if min(steps) < 1:
        raise UsageError("a gap is below the grid resolution; raise grid_factor")
    grid = Grid.uniform(0.0, 1 / J, J + max(steps))
    targets = [0.0] + [s / J / a for s in steps]

    def one(r):
        B = sample_bm_ensemble(n, grid, replicate_gen(cfg.seed, name, n, r))
        prof = sheet_profile(B, n, 0.0, targets)
        out = [(r, n, 1, "R_0_0", prof[0].stationary_value)]
        for s in prof[1:]:
            out.append((r, n, 1, f"R_0_{s.ys[0]:.6f}", s.stationary_value))
        return out

    rows = _flatten(_run_replicates(one, cfg.replicates, threads))
    base = _values(rows, "R_0_0")
    medians = []
    for y in targets[1:]:
        diff = np.abs(_values(rows, f"R_0_{y:.6f}") - base) / np.sqrt(y)
        medians.append(float(np.median(diff)))
    ratio = max(medians) / min(medians) if min(medians) > 0 else float("inf")
    stat = {"gaps": targets[1:], "median_ratio": medians, "spread": ratio}
    return ExperimentResult(name, asdict(cfg), rows, stat, {"max_spread": cfg.max_ratio},
                            bool(ratio <= cfg.max_ratio))


# ---------------------------------------------------------------- geodesics

def _landscape_rows(gen, n_lines: int, J: int, span: float = 1.0) -> np.ndarray:
    """Lines 0, -1, ..., -(n_lines - 1) on [0, span], in visiting order."""
    return brownian_values(gen, n_lines, np.arange(int(round(span * J)) + 1) / J)


@dataclass
class TransversalConfig:
    """Midpoint displacement of the geodesic from (0, 0) to (0, l)."""
    n: int = 256
    lengths: tuple = (0.25, 0.5, 1.0)
    replicates: int = 1000
    seed: int = 0
    grid_factor: float = 8.0
    slope_range: tuple = (0.5, 0.85)


def run_transversal(cfg: TransversalConfig, threads: int = 1) -> ExperimentResult:
    name = "transversal"
    n = cfg.n
    J = knots_per_unit(n, cfg.grid_factor)
    _check_common(cfg, [n], J)
    for ell in cfg.lengths:
        if not 0 < ell <= 1 or abs(ell * n / 2 - round(ell * n / 2)) > 1e-9 \
                or abs(ell * J - round(ell * J)) > 1e-9:
            raise UsageError(f"length {ell} must lie in (0, 1] with l n / 2 and l J integers")
    scale = n ** (1 / 3) / 2

    def one(r):
        rows = _landscape_rows(replicate_gen(cfg.seed, name, n, r), n + 1, J)
        out = []
        for ell in cfg.lengths:
            L, K = int(round(ell * n)), int(round(ell * J))
            sub = rows[:L + 1, :K + 1]
            (z,), _ = kernels.split_argmax(sub, L // 2, (0,), (K,))
            out.append((r, n, 1, f"midpoint_l={ell:g}", (z / J - ell / 2) * scale))
        return out

    rows = _flatten(_run_replicates(one, cfg.replicates, threads))
    med = [float(np.median(np.abs(_values(rows, f"midpoint_l={ell:g}")))) for ell in cfg.lengths]
    fit = loglog_slope(cfg.lengths, med)
    lo, hi = cfg.slope_range
    stat = {"median_abs_midpoint": med, "slope": fit.slope, "slope_stderr": fit.stderr}
    return ExperimentResult(name, asdict(cfg), rows, stat, {"slope": [lo, hi]},
                            bool(lo <= fit.slope <= hi))


@dataclass
class DisjointConfig:
    """Gap at mid-time between the two paths of the common-endpoint
    2-optimizer from ((0, 0), 0) to ((0, 0), 1)."""
    n: int = 256
    eps: tuple = (0.05, 0.1, 0.2, 0.4)
    replicates: int = 4000
    seed: int = 0
    grid_factor: float = 8.0
    min_slope: float = 1.0


def run_disjoint_prob(cfg: DisjointConfig, threads: int = 1) -> ExperimentResult:
    name = "disjoint_prob"
    n = cfg.n
    J = knots_per_unit(n, cfg.grid_factor)
    _check_common(cfg, [n], J, pair=True)
    if n % 2:
        raise UsageError("n must be even")
    scale = n ** (1 / 3) / 2

    def one(r):
        rows = _landscape_rows(replicate_gen(cfg.seed, name, n, r), n + 1, J)
        (z1, z2), _ = kernels.split_argmax(rows, n // 2, (0, 0), (J, J))
        return [(r, n, 2, "midtime_gap", (z2 - z1) / J * scale)]

    rows = _flatten(_run_replicates(one, cfg.replicates, threads))
    gaps = _values(rows, "midtime_gap")
    probs = [float(np.mean(gaps < e)) for e in cfg.eps]
    used = [(e, p) for e, p in zip(cfg.eps, probs) if p > 0]
    stat = {"probability": probs, "eps_used": [e for e, _ in used]}
    if len(used) >= 3:
        fit = loglog_slope(*zip(*used))
        stat.update(slope=fit.slope, slope_stderr=fit.stderr)
        ok = bool(fit.slope >= cfg.min_slope)
    else:
        stat["slope"] = None
        ok = False
    return ExperimentResult(name, asdict(cfg), rows, stat, {"min_slope": cfg.min_slope}, ok)


@dataclass
class ArgmaxConfig:
    """Location z* of the best crossing from line q + 1 to q, with p + q = n
    and t = p / n, for the point-to-point problem from x to y."""
    n_list: tuple = (64, 256)
    t: float = 0.5
    x: float = 0.0
    y: float = 0.0
    replicates: int = 1000
    seed: int = 0
    grid_factor: float = 8.0
    quantile: float = 0.95
    max_ratio: float = 1.5


def run_argmax_location(cfg: ArgmaxConfig, threads: int = 1) -> ExperimentResult:
    name = "argmax_location"
    knots = max(knots_per_unit(n, cfg.grid_factor) for n in cfg.n_list)
    _check_common(cfg, cfg.n_list, 2 * knots)
    chunks = []
    for n in cfg.n_list:
        J = knots_per_unit(n, cfg.grid_factor)
        p = int(round(cfg.t * n))
        if not 1 <= p <= n - 1:
            raise UsageError("t n must round to 1..n-1")
        t = p / n
        a = 2 * n ** (-1 / 3)
        xi, yi = _snap(a * cfg.x, 1 / J), J + _snap(a * cfg.y, 1 / J)
        lo = min(0, xi)
        if not xi <= yi:
            raise DomainError("start must not come after the end")
        times = np.arange(lo, max(yi, J) + 1) / J
        x_eff, y_eff = xi / J / a, (yi - J) / J / a
        centre = t * y_eff + (1 - t) * x_eff

        def one(r, n=n, J=J, p=p, t=t, a=a, times=times, xi=xi - lo, yi=yi - lo, centre=centre):
            rows = brownian_values(replicate_gen(cfg.seed, name, n, r), n, times)[::-1]
            # rows 0..p-1 are lines n..q+1
            (z,), _ = kernels.split_argmax(np.ascontiguousarray(rows), p - 1, (xi,), (yi,))
            zs = (times[z] - t) / a
            return [(r, n, 1, "argmax_offset", zs - centre)]

        chunks += _run_replicates(one, cfg.replicates, threads)
    rows = _flatten(chunks)
    qs = [ecdf_quantile(np.abs(_values(rows, "argmax_offset", n)), cfg.quantile)
          for n in cfg.n_list]
    ratio = qs[-1] / qs[0] if qs[0] > 0 else float("inf")
    stat = {"quantile_abs_offset": qs, "ratio_last_first": ratio}
    return ExperimentResult(name, asdict(cfg), rows, stat, {"max_ratio": cfg.max_ratio},
                            bool(ratio <= cfg.max_ratio))


# ---------------------------------------------------------------- exact-law tails

@dataclass
class EnvelopeConfig:
    """Does the top melon line ever cross the envelope N on a log-spaced set
    of times? b is calibrated as the smallest candidate whose crossing
    fraction at a = calibration_a is within the tolerance."""
    n: int = 256
    times: tuple = tuple(float(2.0 ** (j / 2)) for j in range(-4, 5))
    w: float = 1.0
    a_list: tuple = (2.0, 4.0, 6.0)
    b_candidates: tuple = (0.5, 1.0, 2.0, 4.0)
    calibration_a: float = 6.0
    max_fraction: float = 0.05
    replicates: int = 2000
    seed: int = 0
    identity_draws: int = 1000


def envelope_rescale_errors(draws: int, seed: int) -> np.ndarray:
    """|N_{b, alpha w}(n, alpha x, a) - sqrt(alpha) N_{b, w}(n, x, a)| / tol_abs for random parameters."""
    gen = RngState(seed, stream_id("envelope_identity", 0, 0)).generator()
    out = np.empty(draws)
    for i in range(draws):
        n = int(gen.integers(1, 4097))
        alpha, x, w = np.exp(gen.uniform(-4, 4, 3))
        a, b = gen.uniform(0.01, 10, 2)
        lhs = envelope_N(n, alpha * x, alpha * w, a, b)
        rhs = np.sqrt(alpha) * envelope_N(n, x, w, a, b)
        out[i] = abs(lhs - rhs) / tol_abs(lhs, rhs)
    return out


def run_envelope_crossing(cfg: EnvelopeConfig, threads: int = 1) -> ExperimentResult:
    name = "envelope_crossing"
    n = cfg.n
    _check_common(cfg, [n])
    if n > 1024:
        raise UsageError("Dyson sampling is capped at n = 1024")
    times = np.asarray(cfg.times, float)
    if np.any(times <= 0) or np.any(np.diff(times) <= 0):
        raise DomainError("times must be positive and increasing")

    def one(r):
        top = dyson_top(n, times, 1, replicate_gen(cfg.seed, name, n, r))[:, 0]
        return [(r, n, 1, f"W1_x={x:.6g}", float(v)) for x, v in zip(times, top)]

    rows = _flatten(_run_replicates(one, cfg.replicates, threads))
    W = np.stack([_values(rows, f"W1_x={x:.6g}") for x in times], axis=1)

    def fraction(a, b):
        return float(np.mean(np.any(W > envelope_N(n, times, cfg.w, a, b), axis=1)))

    b = next((b for b in cfg.b_candidates
              if fraction(cfg.calibration_a, b) <= cfg.max_fraction), cfg.b_candidates[-1])
    fr = [fraction(a, b) for a in cfg.a_list]
    errs = envelope_rescale_errors(cfg.identity_draws, cfg.seed)
    monotone = all(u >= v for u, v in zip(fr, fr[1:]))
    stat = {"b": b, "crossing_fraction": fr, "monotone": monotone,
            "rescale_identity_worst": float(errs.max(initial=0.0))}
    thr = {"max_fraction_at_last_a": cfg.max_fraction, "rescale_identity": "within tol_abs"}
    ok = bool(monotone and fr[-1] <= cfg.max_fraction and np.all(errs <= 1.0))
    return ExperimentResult(name, asdict(cfg), rows, stat, thr, ok)


@dataclass
class ConcentrationConfig:
    """n^{1/6} |B^n[x -> y] - sum 2 sqrt(n (1 + 2 n^{-1/3} (y_i - x_i)))| for
    the k-point problem with all x_i = 0 and all y_i = y, sampled exactly as
    the sum of the top k melon lines at time 1 + 2 n^{-1/3} y."""
    n: int = 256
    k: int = 2
    y: float = 0.0
    a_list: tuple = (2.0, 4.0, 6.0, 8.0)
    replicates: int = 2000
    seed: int = 0
    max_fraction: float = 0.05


def run_passage_concentration(cfg: ConcentrationConfig, threads: int = 1) -> ExperimentResult:
    name = "passage_concentration"
    n, k = cfg.n, cfg.k
    _check_common(cfg, [n])
    if not 1 <= k <= n:
        raise UsageError("need 1 <= k <= n")
    tau = 1 + 2 * n ** (-1 / 3) * cfg.y
    if tau <= 0:
        raise DomainError("end time must be positive")
    centre = k * 2 * np.sqrt(n * tau)

    def one(r):
        top = gue_top(n, k, replicate_gen(cfg.seed, name, n, r), t=tau)
        return [(r, n, k, "rescaled_deviation", float(n ** (1 / 6) * (top.sum() - centre)))]

    rows = _flatten(_run_replicates(one, cfg.replicates, threads))
    dev = np.abs(_values(rows, "rescaled_deviation"))
    fr = [float(np.mean(dev > a)) for a in cfg.a_list]
    monotone = all(u >= v for u, v in zip(fr, fr[1:]))
    stat = {"exceed_fraction": fr, "monotone": monotone}
    return ExperimentResult(name, asdict(cfg), rows, stat,
                            {"max_fraction_at_last_a": cfg.max_fraction},
                            bool(monotone and fr[-1] <= cfg.max_fraction))


# ---------------------------------------------------------------- symmetry

@dataclass
class FlipConfig:
    """L_n(0, 0; 0, 1) against L_n(0, -1; 0, 0) on a two-sided environment."""
    n: int = 256
    replicates: int = 2000
    seed: int = 0
    grid_factor: float = 8.0
    ks_max: float = 0.06


def run_flip_symmetry(cfg: FlipConfig, threads: int = 1) -> ExperimentResult:
    name = "flip_symmetry"
    n = cfg.n
    J = knots_per_unit(n, cfg.grid_factor)
    _check_common(cfg, [n], 2 * J)
    grid = Grid.uniform(-1.0, 1 / J, 2 * J)

    def one(r):
        B = sample_bm_ensemble(2 * n + 1, grid, replicate_gen(cfg.seed, name, n, r), first_line=-n)
        fwd = landscape_sample(B, n, [0.0], 0.0, [0.0], 1.0)
        back = landscape_sample(B, n, [0.0], -1.0, [0.0], 0.0)
        return [(r, n, 1, "L_0_0_to_0_1", fwd), (r, n, 1, "L_0_m1_to_0_0", back)]

    rows = _flatten(_run_replicates(one, cfg.replicates, threads))
    ks = ks_distance(_values(rows, "L_0_0_to_0_1"), _values(rows, "L_0_m1_to_0_0"))
    return ExperimentResult(name, asdict(cfg), rows, {"ks": ks}, {"ks_max": cfg.ks_max},
                            bool(ks <= cfg.ks_max))


# ---------------------------------------------------------------- jump times

@dataclass
class JumpTimeConfig:
    """Jump time from line m + 1 to m of each path of the rightmost optimizer
    across the melon, in rescaled units. Measured only: no threshold. The
    exact melon gains knots fast with n (about 36000 at n = 64), so sizes
    stay small."""
    n_list: tuple = (8, 16, 32)
    xs: tuple = (0.5,)
    ys: tuple = (0.0,)
    m: int = 1
    replicates: int = 100
    seed: int = 0
    grid_factor: float = 4.0


def run_jump_time_tightness(cfg: JumpTimeConfig, threads: int = 1) -> ExperimentResult:
    name = "jump_time_tightness"
    knots = max(knots_per_unit(n, cfg.grid_factor) for n in cfg.n_list)
    _check_common(cfg, cfg.n_list, 2 * knots)
    k = len(cfg.xs)
    if len(cfg.ys) != k or min(cfg.xs) <= 0:
        raise DomainError("need k positive start offsets and k end offsets")
    chunks = []
    for n in cfg.n_list:
        if not 1 <= cfg.m < n:
            raise UsageError("need 1 <= m < n")
        J = knots_per_unit(n, cfg.grid_factor)
        a = 2 * n ** (-1 / 3)
        xi = [_snap(a * x, 1 / J) for x in cfg.xs]
        yi = [J + _snap(a * y, 1 / J) for y in cfg.ys]
        if min(yi) < max(xi) or min(xi) < 0:
            raise DomainError("endpoints out of order on this grid")
        grid = Grid.uniform(0.0, 1 / J, max(yi))
        pair = EndpointPair(grid.times[xi], n, grid.times[yi], 1)

        def one(r, n=n, a=a, grid=grid, pair=pair):
            f = sample_bm_ensemble(n, grid, replicate_gen(cfg.seed, name, n, r))
            opt = optimizer_extract(melon_sort(f, 0.0).lines, pair, "rightmost").tuple
            return [(r, n, k, f"Z_i={i + 1}_m={cfg.m}", float((p.jump(cfg.m + 1) - 1) / a))
                    for i, p in enumerate(opt.paths)]

        chunks += _run_replicates(one, cfg.replicates, threads)
    rows = _flatten(chunks)
    stat = {}
    for i in range(k):
        obs = f"Z_i={i + 1}_m={cfg.m}"
        stat[obs] = {str(n): {"median": float(np.median(_values(rows, obs, n))),
                              "iqr": float(np.subtract(*np.percentile(_values(rows, obs, n), [75, 25])))}
                     for n in cfg.n_list}
    return ExperimentResult(name, asdict(cfg), rows, stat, {}, None)


# ---------------------------------------------------------------- registry

EXPERIMENTS = {
    "onepoint": (OnepointConfig, run_onepoint),
    "stationarity": (StationarityConfig, run_stationarity),
    "two_point_modulus": (TwoPointConfig, run_two_point_modulus),
    "transversal": (TransversalConfig, run_transversal),
    "disjoint_prob": (DisjointConfig, run_disjoint_prob),
    "argmax_location": (ArgmaxConfig, run_argmax_location),
    "envelope_crossing": (EnvelopeConfig, run_envelope_crossing),
    "passage_concentration": (ConcentrationConfig, run_passage_concentration),
    "flip_symmetry": (FlipConfig, run_flip_symmetry),
    "jump_time_tightness": (JumpTimeConfig, run_jump_time_tightness),
}


# reduced sizes for smoke runs and determinism checks (seconds, not minutes)
QUICK_OVERRIDES = {
    "onepoint": {"n_list": (16, 64), "replicates": 50},
    "stationarity": {"n": 32, "replicates": 50},
    "two_point_modulus": {"n": 32, "replicates": 50},
    "transversal": {"n": 64, "replicates": 50},
    "disjoint_prob": {"n": 32, "replicates": 50},
    "argmax_location": {"n_list": (16, 64), "replicates": 50},
    "envelope_crossing": {"n": 32, "replicates": 50, "identity_draws": 100},
    "passage_concentration": {"n": 32, "replicates": 50},
    "flip_symmetry": {"n": 32, "replicates": 50},
    "jump_time_tightness": {"n_list": (16, 32), "replicates": 20},
}


def make_config(name: str, overrides: dict | None = None):
    if name not in EXPERIMENTS:
        raise UsageError(f"unknown experiment {name!r}; choose from {sorted(EXPERIMENTS)}")
    cls = EXPERIMENTS[name][0]
    known = {f.name for f in fields(cls)}
    overrides = dict(overrides or {})
    bad = set(overrides) - known
    if bad:
        raise UsageError(f"unknown config keys for {name}: {sorted(bad)}")
    cfg = cls(**{k: tuple(v) if isinstance(v, list) else v for k, v in overrides.items()})
    return cfg


def run_experiment(name: str, overrides: dict | None = None, threads: int = 1) -> ExperimentResult:
    cfg = make_config(name, overrides)
    return EXPERIMENTS[name][1](cfg, threads)
