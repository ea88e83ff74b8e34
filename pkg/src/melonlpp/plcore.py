"""Piecewise-linear functions on shared knot grids.

Every continuous function in the package is stored by its values at a sorted
set of knot times and interpolated linearly in between. Most grids are
uniform (``Grid.uniform``); operations whose output has kinks strictly inside
a knot interval (the running maximum, and everything built from it) insert
those kinks as extra knots, so results stay exact piecewise-linear functions.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError

TOL = 1e-9


def tol_abs(*operands: float) -> float:
    """Absolute tolerance 1e-9 * (1 + largest magnitude among operands)."""
    mag = max((abs(float(v)) for v in operands), default=0.0)
    return TOL * (1.0 + mag)


def _readonly(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Grid:
    """Sorted knot times. ``dt`` is set only for uniform grids."""

    times: np.ndarray
    dt: float | None = None

    def __post_init__(self):
        t = _readonly(self.times)
        if t.ndim != 1 or t.size < 1:
            raise DomainError("grid needs at least one knot")
        if not np.all(np.isfinite(t)):
            raise DomainError("grid knots must be finite")
        if np.any(np.diff(t) <= 0):
            raise DomainError("grid knots must be strictly increasing")
        object.__setattr__(self, "times", t)

    @classmethod
    def uniform(cls, t0: float, dt: float, m: int) -> "Grid":
        if not dt > 0:
            raise DomainError("dt must be positive")
        if m < 0:
            raise DomainError("m must be nonnegative")
        return cls(float(t0) + float(dt) * np.arange(m + 1), float(dt))

    @property
    def t0(self) -> float:
        return float(self.times[0])

    @property
    def end(self) -> float:
        return float(self.times[-1])

    @property
    def m(self) -> int:
        return self.times.size - 1

    @property
    def is_uniform(self) -> bool:
        return self.dt is not None

    def __len__(self):
        return self.times.size

    def __eq__(self, other):
        if not isinstance(other, Grid):
            return NotImplemented
        return np.array_equal(self.times, other.times)

    __hash__ = None

    def knot(self, j: int) -> float:
        return float(self.times[j])

    def index(self, t: float, snap: bool = True) -> int:
        """Index of the knot at time t.

        Exact matches always succeed; with ``snap`` a knot within
        1e-9*(1+|t|) is accepted too, for times produced by arithmetic.
        """
        t = float(t)
        j = int(np.searchsorted(self.times, t))
        for c in (j - 1, j):
            if 0 <= c < self.times.size:
                if self.times[c] == t or (snap and abs(self.times[c] - t) <= tol_abs(t)):
                    return c
        raise DomainError(f"time {t!r} is not a grid knot")

    def check_domain(self, t) -> None:
        t = np.asarray(t, dtype=float)
        lo, hi = self.t0, self.end
        if np.any(t < lo - tol_abs(lo)) or np.any(t > hi + tol_abs(hi)):
            raise DomainError(f"time outside grid domain [{lo}, {hi}]")

    def refine(self, extra: Iterable[float]) -> "Grid":
        extra = np.asarray(list(extra) if not isinstance(extra, np.ndarray) else extra, float)
        if extra.size == 0:
            return self
        self.check_domain(extra)
        t = np.union1d(self.times, np.clip(extra, self.t0, self.end))
        if t.size == self.times.size:
            return self
        return Grid(t)

    def halved(self) -> "Grid":
        """Grid with every interval split at its midpoint."""
        if self.is_uniform:
            return Grid.uniform(self.t0, self.dt / 2, 2 * self.m)
        mid = 0.5 * (self.times[:-1] + self.times[1:])
        return Grid(np.sort(np.concatenate([self.times, mid])))

    def restrict(self, lo: float, hi: float) -> "Grid":
        i, j = self.index(lo), self.index(hi)
        if self.is_uniform:
            return Grid(self.times[i:j + 1], self.dt)
        return Grid(self.times[i:j + 1])


@dataclass(frozen=True, eq=False)
class PLFunction:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = _readonly(self.values)
        if v.shape != self.grid.times.shape:
            raise DomainError("values must have one entry per knot")
        if not np.all(np.isfinite(v)):
            raise DomainError("values must be finite")
        object.__setattr__(self, "values", v)

    def __call__(self, t):
        return pl_eval(self, t)

    def resample(self, grid: Grid) -> "PLFunction":
        return PLFunction(grid, pl_eval(self, grid.times))

    def __add__(self, other):
        if isinstance(other, PLFunction):
            if other.grid != self.grid:
                raise DomainError("functions live on different grids")
            return PLFunction(self.grid, self.values + other.values)
        return PLFunction(self.grid, self.values + float(other))

    def __sub__(self, other):
        if isinstance(other, PLFunction):
            return self + PLFunction(other.grid, -other.values)
        return self + (-float(other))


def pl_eval(f: PLFunction, t):
    """Linear interpolation; bit-exact at knots."""
    f.grid.check_domain(t)
    out = np.interp(t, f.grid.times, f.values)
    return float(out) if np.ndim(out) == 0 else out


def running_max_values(times: np.ndarray, values: np.ndarray):
    """Running maximum of the PL function (times, values), exactly.

    Returns refined (times, values): whenever the function climbs back above
    its previous maximum strictly inside an interval, the crossing time is
    inserted as a knot.
    """
    g = np.maximum.accumulate(values)
    v0, v1 = values[:-1], values[1:]
    prev = g[:-1]
    hit = (v0 < prev) & (v1 > prev)
    if not hit.any():
        return times, g
    j = np.nonzero(hit)[0]
    frac = (prev[j] - v0[j]) / (v1[j] - v0[j])
    c = times[j] + frac * (times[j + 1] - times[j])
    # crossings closer to a knot than this change values by < 1e-12 * slope
    gap = 1e-12 * (1.0 + np.abs(c))
    ok = (c > times[j] + gap) & (c < times[j + 1] - gap)
    j, c = j[ok], c[ok]
    new_t = np.insert(times, j + 1, c)
    new_v = np.insert(g, j + 1, prev[j])
    return new_t, new_v


def pl_running_max(f: PLFunction) -> PLFunction:
    """g(t) = max_{s <= t} f(s), on f's grid plus any interior crossing points."""
    t, v = running_max_values(f.grid.times, f.values)
    if t is f.grid.times:
        return PLFunction(f.grid, v)
    return PLFunction(Grid(t), v)


def pl_affine_reparam(f: PLFunction, alpha: float, beta: float, gamma: float,
                      delta: float, out_grid: Grid) -> PLFunction:
    """Sample g(u) = alpha*f(beta*u + gamma) + delta at the knots of out_grid.

    Exact when beta*u + gamma hits knots of f; otherwise a resampling.
    """
    arg = beta * out_grid.times + gamma
    f.grid.check_domain(arg)
    arg = np.clip(arg, f.grid.t0, f.grid.end)
    return PLFunction(out_grid, alpha * np.interp(arg, f.grid.times, f.values) + delta)


def pl_affine_image(f: PLFunction, alpha: float, beta: float, gamma: float,
                    delta: float, slope: float = 0.0) -> PLFunction:
    """Exact g(u) = alpha*f(beta*u + gamma) + delta + slope*u with beta > 0.

    The knots are carried over (u_j = (t_j - gamma)/beta), so no
    interpolation error is introduced.
    """
    if not beta > 0:
        raise DomainError("beta must be positive")
    u = (f.grid.times - gamma) / beta
    return PLFunction(Grid(u), alpha * f.values + delta + slope * u)


class Ensemble:
    """Lines f_first, f_{first+1}, ... sharing one grid.

    Values are held as a (lines, knots) array; row r is line first_line + r.
    """

    def __init__(self, grid: Grid, values, first_line: int = 1):
        v = _readonly(np.atleast_2d(values))
        if v.shape[1] != len(grid):
            raise DomainError("each line needs one value per knot")
        if not np.all(np.isfinite(v)):
            raise DomainError("values must be finite")
        self.grid = grid
        self.values = v
        self.first_line = int(first_line)

    @classmethod
    def from_lines(cls, lines: Sequence[PLFunction], first_line: int = 1) -> "Ensemble":
        grid = lines[0].grid
        for f in lines[1:]:
            if f.grid != grid:
                raise DomainError("all lines must share one grid")
        return cls(grid, np.stack([f.values for f in lines]), first_line)

    @classmethod
    def from_functions(cls, funcs, grid: Grid, first_line: int = 1) -> "Ensemble":
        """Build from python callables evaluated at the knots."""
        return cls(grid, np.stack([np.asarray(fn(grid.times), float)
                                   * np.ones(len(grid)) for fn in funcs]), first_line)

    @property
    def n_lines(self) -> int:
        return self.values.shape[0]

    @property
    def last_line(self) -> int:
        return self.first_line + self.n_lines - 1

    @property
    def lines(self) -> list[PLFunction]:
        return [PLFunction(self.grid, row) for row in self.values]

    def has_line(self, i: int) -> bool:
        return self.first_line <= i <= self.last_line

    def line(self, i: int) -> PLFunction:
        if not self.has_line(i):
            raise DomainError(f"line {i} not in ensemble")
        return PLFunction(self.grid, self.values[i - self.first_line])

    def rows(self, top: int, bottom: int) -> np.ndarray:
        """Values of lines top, top-1, ..., bottom (top >= bottom), in that order."""
        if not (self.has_line(top) and self.has_line(bottom)) or bottom > top:
            raise DomainError(f"lines {bottom}..{top} not all present")
        lo, hi = bottom - self.first_line, top - self.first_line
        return self.values[lo:hi + 1][::-1]

    def resample(self, grid: Grid) -> "Ensemble":
        self.grid.check_domain(grid.times)
        vals = np.stack([np.interp(grid.times, self.grid.times, row) for row in self.values])
        return Ensemble(grid, vals, self.first_line)

    def refined(self, extra) -> "Ensemble":
        return self.resample(self.grid.refine(extra))

    def halved(self) -> "Ensemble":
        return self.resample(self.grid.halved())

    def __add__(self, other):
        if isinstance(other, Ensemble):
            if other.grid != self.grid or other.first_line != self.first_line:
                raise DomainError("ensembles are not aligned")
            return Ensemble(self.grid, self.values + other.values, self.first_line)
        return Ensemble(self.grid, self.values + other, self.first_line)

    def __repr__(self):
        return (f"Ensemble(lines {self.first_line}..{self.last_line}, "
                f"{len(self.grid)} knots on [{self.grid.t0}, {self.grid.end}])")


def _fmt(x: float) -> str:
    return "%.17g" % x


def dumps_ensemble(ens: Ensemble) -> str:
    g = ens.grid
    dt = _fmt(g.dt) if g.is_uniform else "nan"
    out = [f"ENSEMBLE n={ens.n_lines} first={ens.first_line} t0={_fmt(g.t0)} dt={dt} m={g.m}"]
    if not g.is_uniform:
        out.append("KNOTS " + " ".join(_fmt(v) for v in g.times))
    for row in ens.values:
        out.append(" ".join(_fmt(v) for v in row))
    return "\n".join(out) + "\n"


def _header_fields(line: str, tag: str) -> dict:
    parts = line.split()
    if not parts or parts[0] != tag:
        raise DomainError(f"expected '{tag}' header, got {line[:40]!r}")
    fields = {}
    for tok in parts[1:]:
        key, _, val = tok.partition("=")
        fields[key] = val
    return fields


def loads_ensemble(text: str) -> Ensemble:
    rows = [ln for ln in text.splitlines() if ln.strip()]
    if not rows:
        raise DomainError("empty ensemble file")
    h = _header_fields(rows[0], "ENSEMBLE")
    try:
        n, first, m = int(h["n"]), int(h["first"]), int(h["m"])
        t0, dt = float(h["t0"]), float(h["dt"])
    except (KeyError, ValueError) as exc:
        raise DomainError(f"bad ensemble header: {rows[0]!r}") from exc
    body = rows[1:]
    if body and body[0].startswith("KNOTS"):
        grid = Grid(np.array(body[0].split()[1:], dtype=float))
        body = body[1:]
    else:
        grid = Grid.uniform(t0, dt, m)
    if len(grid) != m + 1 or len(body) != n:
        raise DomainError("ensemble body does not match header")
    vals = np.array([r.split() for r in body], dtype=float)
    return Ensemble(grid, vals, first)
