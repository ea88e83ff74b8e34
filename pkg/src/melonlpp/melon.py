"""Melons: the ordered ensemble of successive multi-path passage increments.

For lines f_1..f_n opened at time t, line k of the melon at time s is
f[(t,n)^k -> (s,1)^k] - f[(t,n)^{k-1} -> (s,1)^{k-1}]. ``melon_direct``
computes exactly that (at the knots). ``melon_sort`` gets the same object
from n(n-1)/2 two-line operations; each two-line operation has kinks where
g - f crosses its running maximum, and those are inserted as knots so the
result is exact between knots too.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, UsageError
from .lpp import (Report, _Frontier, constrained_optimizer, inputs_digest, lpp_multi,
                  optimizer_extract)
from .paths import EndpointPair, interlaced
from .plcore import (Ensemble, Grid, PLFunction, _header_fields, dumps_ensemble,
                     loads_ensemble, running_max_values, tol_abs)


@dataclass(frozen=True, eq=False)
class MelonEnsemble:
    opening_time: float
    lines: Ensemble

    @property
    def n_lines(self) -> int:
        return self.lines.n_lines

    def line(self, i: int) -> PLFunction:
        return self.lines.line(i)

    def at(self, s) -> np.ndarray:
        """All melon lines evaluated at time(s) s, shape (n,) or (n, len(s))."""
        self.lines.grid.check_domain(s)
        return np.stack([np.interp(s, self.lines.grid.times, row) for row in self.lines.values])

    def invariant_errors(self) -> tuple[float, float]:
        """(max |W_i(opening)|, max ordering violation W_{i+1} - W_i) at knots."""
        j = self.lines.grid.index(self.opening_time)
        v = self.lines.values
        zero = float(np.abs(v[:, j]).max())
        order = float(np.max(v[1:] - v[:-1], initial=0.0))
        return zero, order

    def is_melon(self, scale: float | None = None) -> bool:
        zero, order = self.invariant_errors()
        tol = tol_abs(scale if scale is not None else np.abs(self.lines.values).max())
        return zero <= tol and order <= tol


def _opened(f: Ensemble, t: float) -> tuple[np.ndarray, np.ndarray]:
    j = f.grid.index(t)
    times = f.grid.times[j:].copy()
    V = f.values[:, j:] - f.values[:, j:j + 1]
    return times, V


def _pair_step(times: np.ndarray, V: np.ndarray, i: int):
    """Two-line melon on rows i, i+1 of an opened ensemble (in place when no
    knots are added)."""
    f, g = V[i], V[i + 1]
    new_t, h = running_max_values(times, g - f)
    if new_t is not times:
        # new_t refines times, so every new knot sits inside one old interval
        hi = np.clip(np.searchsorted(times, new_t, side="left"), 1, len(times) - 1)
        lo = hi - 1
        w = (new_t - times[lo]) / (times[hi] - times[lo])
        # old knots get weight exactly 0 or 1, so their values are unchanged
        V = V[:, lo] * (1 - w) + V[:, hi] * w
        times = new_t
        f, g = V[i], V[i + 1]
    w1 = f + h
    w2 = g - h
    V[i], V[i + 1] = w1, w2
    return times, V


def pair_melon(f: PLFunction, g: PLFunction, t: float):
    """W1(s) = max_{t<=r<=s} [g(r) - g(t) + f(s) - f(r)], W2 = f + g - W1 (opened at t)."""
    if f.grid != g.grid:
        raise DomainError("pair_melon needs a shared grid")
    ens = Ensemble(f.grid, np.stack([f.values, g.values]))
    times, V = _opened(ens, t)
    times, V = _pair_step(times, V.copy(), 0)
    grid = Grid(times)
    return PLFunction(grid, V[0]), PLFunction(grid, V[1])


def melon_sort(f: Ensemble, t: float) -> MelonEnsemble:
    """Melon by the triangular network of two-line operations.

    Pass p = 1..n-1 applies the two-line operation to lines (i, i+1) for
    i = n-1 down to p. Lines must be indexed 1..n.
    """
    if f.first_line != 1:
        raise DomainError("melons need lines indexed from 1")
    times, V = _opened(f, t)
    V = V.copy()
    n = f.n_lines
    for p in range(1, n):
        for i in range(n - 1, p - 1, -1):
            times, V = _pair_step(times, V, i - 1)
    kept = len(times) == len(f.grid) - f.grid.index(t)
    grid = Grid(times, f.grid.dt if kept and f.grid.is_uniform else None)
    return MelonEnsemble(float(t), Ensemble(grid, V, 1))


def repeated_passage_profiles(f: Ensemble, t: float) -> np.ndarray:
    """P[k-1, j] = f[(t,n)^k -> (s_j,1)^k] for every knot s_j >= t."""
    if f.first_line != 1:
        raise DomainError("melons need lines indexed from 1")
    j0 = f.grid.index(t)
    rows = f.rows(f.last_line, 1)[:, j0:]
    K = rows.shape[1]
    n = f.n_lines
    out = np.empty((n, K))
    for k in range(1, n + 1):
        V, _ = _Frontier(rows, k).run(np.zeros(k, dtype=np.intp))
        diag = V[(np.arange(K),) * k]
        if not np.all(np.isfinite(diag)):
            raise DomainError("repeated endpoints infeasible")
        out[k - 1] = diag
    return out


def melon_direct(f: Ensemble, t: float) -> MelonEnsemble:
    """Melon from its definition, at the knots of f (on [t, end])."""
    P = repeated_passage_profiles(f, t)
    V = np.diff(np.vstack([np.zeros((1, P.shape[1])), P]), axis=0)
    j0 = f.grid.index(t)
    g = f.grid
    grid = Grid(g.times[j0:], g.dt) if g.is_uniform else Grid(g.times[j0:])
    return MelonEnsemble(float(t), Ensemble(grid, V, 1))


def check_melon_identity(f: Ensemble, pair: EndpointPair, t: float,
                         melon: MelonEnsemble | None = None) -> Report:
    """f[p -> q] against the same passage value across the melon opened at t."""
    if pair.m != 1 or pair.n != f.last_line or f.first_line != 1:
        raise UsageError("pair must run from the bottom line n to line 1")
    if t > pair.xs[0]:
        raise UsageError("opening time must not exceed x_1")
    W = melon if melon is not None else melon_sort(f, t)
    lhs = lpp_multi(f, pair)
    rhs = lpp_multi(W.lines, pair)
    rep = Report("melon_identity", inputs_digest(f, pair))
    rep.values = {"ensemble": lhs, "melon": rhs, "t": float(t)}
    rep.slack = -abs(lhs - rhs)
    rep.passed = abs(lhs - rhs) <= tol_abs(lhs, rhs)
    return rep


def high_paths_optimizer(W: MelonEnsemble, pair: EndpointPair, side: str = "rightmost"):
    """Optimizer whose first j paths hug lines 1..j on (opening, y_1).

    j counts the leading start points equal to the opening time. Its value is
    checked against the unconstrained passage value.
    """
    if not W.is_melon():
        raise UsageError("input is not ordered and opened")
    if pair.m != 1 or pair.n != W.n_lines:
        raise UsageError("pair must run from line n to line 1")
    t0 = W.opening_time
    j = int(np.sum(np.cumprod(pair.xs == t0)))
    if j == 0:
        return optimizer_extract(W.lines, pair, side)
    grid = W.lines.grid
    L = pair.n - pair.m + 1
    K = len(grid)
    lo = np.zeros((L, pair.k), dtype=np.intp)
    hi = np.full((L, pair.k), K - 1, dtype=np.intp)
    i0, iy = grid.index(t0), grid.index(pair.ys[0])
    for r in range(j):
        line = r + 1
        for level in range(L):
            here = pair.n - level
            if here > line:
                lo[level, r] = hi[level, r] = i0
            elif here == line:
                lo[level, r] = iy
    opt = constrained_optimizer(W.lines, pair, lo, hi, side)
    free = lpp_multi(W.lines, pair)
    if abs(opt.value - free) > tol_abs(free):
        raise AssertionError(f"high-paths optimizer value {opt.value} != passage value {free}")
    return opt


def tuples_disjoint(a, b) -> bool:
    """Whether (a, b) concatenated is a disjoint tuple (a's last path below b's first)."""
    return interlaced(a.paths[-1], b.paths[0])


def dumps_melon(W: MelonEnsemble) -> str:
    return f"MELON t={'%.17g' % W.opening_time}\n" + dumps_ensemble(W.lines)


def loads_melon(text: str) -> MelonEnsemble:
    first, _, rest = text.lstrip().partition("\n")
    h = _header_fields(first, "MELON")
    return MelonEnsemble(float(h["t"]), loads_ensemble(rest))
