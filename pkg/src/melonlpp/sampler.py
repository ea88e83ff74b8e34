"""Random environments and the edge rescalings.

Brownian lines use diffusion parameter 1. Randomness comes from numpy's
counter-based Philox generator keyed by (seed, stream), one stream per
replicate, so every sample is reproducible on its own.

Besides the knot-grid engine, two exact samplers are provided for the melon
at fixed times: the melon of n Brownian lines at time t has the law of the
GUE spectrum scaled by sqrt(t) (sampled from a tridiagonal matrix model), and
its top lines at several times follow Dyson Brownian motion (sampled as a
Hermitian matrix Brownian motion).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh, eigvalsh_tridiagonal

from .errors import DomainError
from .lpp import lpp_multi, passage_to_all
from .melon import MelonEnsemble, melon_sort
from .paths import EndpointPair
from .plcore import Ensemble, Grid, pl_affine_image, pl_affine_reparam


@dataclass(frozen=True)
class RngState:
    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        key = np.array([self.seed % 2**64, self.stream % 2**64], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def child(self, stream: int) -> "RngState":
        return RngState(self.seed, stream)


def _gen(rng) -> np.random.Generator:
    return rng.generator() if isinstance(rng, RngState) else rng


def brownian_values(gen: np.random.Generator, n_lines: int, times: np.ndarray) -> np.ndarray:
    """Independent two-sided Brownian motions at the given knots, zero at the
    knot nearest time 0."""
    K = times.size
    anchor = int(np.argmin(np.abs(times)))
    steps = gen.standard_normal((n_lines, K - 1)) * np.sqrt(np.diff(times))
    out = np.zeros((n_lines, K))
    out[:, anchor + 1:] = np.cumsum(steps[:, anchor:], axis=1)
    if anchor > 0:
        out[:, :anchor] = -np.cumsum(steps[:, :anchor][:, ::-1], axis=1)[:, ::-1]
    return out


def sample_bm_ensemble(n_lines: int, grid: Grid, rng, first_line: int = 1) -> Ensemble:
    return Ensemble(grid, brownian_values(_gen(rng), n_lines, grid.times), first_line)


def brownian_melon(n_lines: int, grid: Grid, rng) -> MelonEnsemble:
    if grid.t0 != 0.0:
        raise DomainError("Brownian melons are opened at 0; the grid must start there")
    return melon_sort(sample_bm_ensemble(n_lines, grid, rng), 0.0)


def rescale_airy(W: MelonEnsemble, n_param: int, k_lines: int, y_grid: Grid) -> Ensemble:
    """n^{1/6} (W_i(1 + 2y n^{-1/3}) - 2 sqrt(n) - 2y n^{1/6}) for the top k lines."""
    n = float(n_param)
    lines = []
    for i in range(1, k_lines + 1):
        g = pl_affine_reparam(W.line(i), n ** (1 / 6), 2 * n ** (-1 / 3), 1.0,
                              -2 * n ** (2 / 3), y_grid)
        lines.append(g.values - 2 * n ** (1 / 3) * y_grid.times)
    return Ensemble(y_grid, np.stack(lines), 1)


def airy_image(W: MelonEnsemble, n_param: int) -> Ensemble:
    """The same rescaling applied to every line without resampling: the knots
    are mapped to y = (t - 1) n^{1/3} / 2, so the result is exact."""
    n = float(n_param)
    beta = 2 * n ** (-1 / 3)
    out = [pl_affine_image(f, n ** (1 / 6), beta, 1.0, -2 * n ** (2 / 3), -2 * n ** (1 / 3))
           for f in W.lines.lines]
    return Ensemble(out[0].grid, np.stack([g.values for g in out]), 1)


@dataclass(frozen=True)
class SheetSample:
    n: int
    k: int
    xs: tuple
    ys: tuple
    value: float
    stationary_value: float


def _sheet_centering(n: float, xs, ys) -> float:
    k = len(xs)
    return 2 * k * np.sqrt(n) + n ** (1 / 6) * 2 * float(np.sum(np.subtract(ys, xs)))


def sheet_sample(B: Ensemble, n_param: int, xs, ys) -> SheetSample:
    """Rescaled passage value from (2 n^{-1/3} x, n) to (1 + 2 n^{-1/3} y, 1)."""
    n = int(n_param)
    if B.first_line != 1 or B.last_line != n:
        raise DomainError(f"need lines 1..{n}")
    xs, ys = np.asarray(xs, float), np.asarray(ys, float)
    a = 2 * n ** (-1 / 3)
    start = B.grid.times[[B.grid.index(a * x) for x in xs]]
    end = B.grid.times[[B.grid.index(1 + a * y) for y in ys]]
    raw = lpp_multi(B, EndpointPair(start, n, end, 1))
    # use the knot-snapped endpoints in the centering
    xe, ye = start / a, (end - 1) / a
    value = n ** (1 / 6) * (raw - _sheet_centering(n, xe, ye))
    return SheetSample(n, xs.size, tuple(xe), tuple(ye), float(value),
                       float(value + np.sum((xe - ye) ** 2)))


def sheet_profile(B: Ensemble, n_param: int, x: float, ys) -> list[SheetSample]:
    """One-path sheet values S^n(x, y) for several y from a single forward pass."""
    n = int(n_param)
    if B.first_line != 1 or B.last_line != n:
        raise DomainError(f"need lines 1..{n}")
    a = 2 * n ** (-1 / 3)
    start = B.grid.times[B.grid.index(a * x)]
    V = passage_to_all(B, [start], n, 1)
    xe = start / a
    out = []
    for y in np.atleast_1d(ys):
        j = B.grid.index(1 + a * y)
        if j < B.grid.index(start):
            raise DomainError("need 1 + 2 n^{-1/3} y >= 2 n^{-1/3} x")
        ye = (B.grid.times[j] - 1) / a
        value = n ** (1 / 6) * (V[j] - _sheet_centering(n, [xe], [ye]))
        out.append(SheetSample(n, 1, (xe,), (ye,), float(value), float(value + (xe - ye) ** 2)))
    return out


def sheet_value_from_melon(W: MelonEnsemble, n_param: int, xs, ys) -> float:
    """Same value through the rescaled melon: B^n[(x - n^{1/3}/2, n) -> (y, 1)] - k n^{2/3}."""
    n = int(n_param)
    A = airy_image(W, n)
    xs, ys = np.asarray(xs, float), np.asarray(ys, float)
    start = A.grid.times[[A.grid.index(x - n ** (1 / 3) / 2) for x in xs]]
    end = A.grid.times[[A.grid.index(y) for y in ys]]
    return lpp_multi(A, EndpointPair(start, n, end, 1)) - xs.size * n ** (2 / 3)


def landscape_point(x: float, s: float, n_param: int) -> tuple[float, int]:
    """(x, s)_n = (s + 2x n^{-1/3}, -floor(s n))."""
    n = float(n_param)
    return s + 2 * x * n ** (-1 / 3), -int(np.floor(s * n))


def landscape_sample(B: Ensemble, n_param: int, xs, s: float, ys, t: float) -> float:
    """n^{1/6}(B[(x,s)_n -> (y,t)_n] - 2k(t-s) sqrt(n) - n^{1/6} sum 2(y_i - x_i))."""
    if not s < t:
        raise DomainError("need s < t")
    n = float(n_param)
    xs, ys = np.asarray(xs, float), np.asarray(ys, float)
    starts = [landscape_point(x, s, n_param) for x in xs]
    ends = [landscape_point(y, t, n_param) for y in ys]
    top, bottom = starts[0][1], ends[0][1]
    if not (B.has_line(top) and B.has_line(bottom)):
        raise DomainError("line range outside the sampled window")
    st = B.grid.times[[B.grid.index(p[0]) for p in starts]]
    en = B.grid.times[[B.grid.index(p[0]) for p in ends]]
    raw = lpp_multi(B, EndpointPair(st, top, en, bottom))
    k = xs.size
    return float(n ** (1 / 6) * (raw - 2 * k * (t - s) * np.sqrt(n)
                                 - n ** (1 / 6) * 2 * float(np.sum(ys - xs))))


# ---------------------------------------------------------------- exact laws

def gue_top(n: int, k: int, gen: np.random.Generator, t: float = 1.0) -> np.ndarray:
    """Top k points of the Brownian n-melon at time t, in decreasing order.

    Uses the tridiagonal beta = 2 Hermite model: diagonal N(0, 1), off
    diagonal chi_{2j} / sqrt(2) for j = n-1, ..., 1.
    """
    d = gen.standard_normal(n)
    e = np.sqrt(gen.chisquare(2.0 * np.arange(n - 1, 0, -1))) / np.sqrt(2.0) if n > 1 else np.empty(0)
    if n == 1:
        return np.sqrt(t) * d[:1]
    lam = eigvalsh_tridiagonal(d, e, select="i", select_range=(n - k, n - 1))
    return np.sqrt(t) * lam[::-1]


def dyson_top(n: int, times, k: int, gen: np.random.Generator) -> np.ndarray:
    """Top k points of the Brownian n-melon at increasing times (rows).

    Hermitian matrix Brownian motion: diagonal entries standard Brownian
    motions, off-diagonal real and imaginary parts with variance t/2.
    """
    times = np.asarray(times, float)
    if np.any(np.diff(times) <= 0) or times[0] <= 0:
        raise DomainError("times must be positive and increasing")
    H = np.zeros((n, n), dtype=complex)
    out = np.empty((times.size, k))
    prev = 0.0
    for a, t in enumerate(times):
        X = gen.standard_normal((n, n))
        Y = gen.standard_normal((n, n))
        A = (X + 1j * Y) / np.sqrt(2.0)
        H += np.sqrt(t - prev) * (A + A.conj().T) / np.sqrt(2.0)
        prev = t
        out[a] = eigh(H, eigvals_only=True, subset_by_index=[n - k, n - 1])[::-1]
    return out
