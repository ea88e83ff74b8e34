"""Staircase paths across ensemble lines and tuples of disjoint paths.

A path from (x, n) to (y, m) starts on line n at time x, moves down one line
at a time and ends on line m at time y. It is stored by its jump times
(t_n, ..., t_{m+1}), t_j being the first time the path is below line j.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .plcore import Ensemble


@dataclass(frozen=True, eq=False)
class StaircasePath:
    x: float
    n: int
    y: float
    m: int
    jumps: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __post_init__(self):
        j = np.array(self.jumps, dtype=float).reshape(-1)
        j.setflags(write=False)
        object.__setattr__(self, "jumps", j)
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        if self.m > self.n:
            raise DomainError("end line above start line")
        if j.size != self.n - self.m:
            raise DomainError(f"expected {self.n - self.m} jump times, got {j.size}")
        if np.any(np.diff(self.extended()) < 0):
            raise DomainError("jump times must satisfy x <= t_n <= ... <= t_{m+1} <= y")

    def extended(self) -> np.ndarray:
        """(t_{n+1}=x, t_n, ..., t_{m+1}, t_m=y)."""
        return np.concatenate([[self.x], self.jumps, [self.y]])

    def jump(self, j: int) -> float:
        """Jump time off line j, with t_{n+1} = x and t_m = y."""
        if not self.m <= j <= self.n + 1:
            raise DomainError(f"line {j} outside {self.m}..{self.n + 1}")
        return float(self.extended()[self.n + 1 - j])

    def line_at(self, t: float) -> int:
        """Cadlag line index at time t in [x, y]."""
        if not self.x <= t <= self.y:
            raise DomainError("time outside path domain")
        return self.m + int(np.count_nonzero(self.jumps > t))

    def occupancy(self, j: int):
        """Closed time interval the zigzag graph spends on line j, or None."""
        if not self.m <= j <= self.n:
            return None
        return self.jump(j + 1), self.jump(j)

    def zigzag(self) -> "ZigzagGraph":
        return ZigzagGraph.of(self)

    def __eq__(self, other):
        if not isinstance(other, StaircasePath):
            return NotImplemented
        return (self.x, self.n, self.y, self.m) == (other.x, other.n, other.y, other.m) \
            and np.array_equal(self.jumps, other.jumps)

    __hash__ = None

    def __repr__(self):
        return f"StaircasePath(({self.x}, {self.n}) -> ({self.y}, {self.m}), jumps={list(self.jumps)})"


@dataclass(frozen=True)
class ZigzagGraph:
    """Horizontal pieces (line, t_start, t_end) and vertical pieces (time, top, bottom)."""

    horizontal: tuple
    vertical: tuple

    @classmethod
    def of(cls, p: StaircasePath) -> "ZigzagGraph":
        ext = p.extended()
        hor = tuple((p.n - r, float(ext[r]), float(ext[r + 1])) for r in range(p.n - p.m + 1))
        ver = tuple((float(ext[r + 1]), p.n - r, p.n - r - 1) for r in range(p.n - p.m))
        return cls(hor, ver)

    def vertices(self) -> np.ndarray:
        """Polyline vertices (time, line) in path order."""
        pts = []
        for r, (line, a, b) in enumerate(self.horizontal):
            pts.append((a, line))
            pts.append((b, line))
        return np.array(pts, dtype=float)


def path_leq(p: StaircasePath, q: StaircasePath) -> bool:
    """p <= q: endpoint ordering plus p(t) <= q(t) on the common domain."""
    if not (p.x <= q.x and p.y <= q.y):
        return False
    lo, hi = max(p.x, q.x), min(p.y, q.y)
    if lo > hi:
        return True
    pts = np.concatenate([[lo], p.jumps, q.jumps])
    pts = np.unique(pts[(pts >= lo) & (pts <= hi)])
    return all(p.line_at(t) <= q.line_at(t) for t in pts)


def interlaced(p: StaircasePath, q: StaircasePath) -> bool:
    """Interlacing rule t^p_j <= t^q_{j+1} for j = m..n (same lines)."""
    if (p.n, p.m) != (q.n, q.m):
        raise DomainError("interlacing rule needs common start and end lines")
    return bool(np.all(p.extended()[1:] <= q.extended()[:-1]))


def zigzag_intersection(p: StaircasePath, q: StaircasePath):
    """Geometric intersection of two zigzag graphs.

    Returns (finite, points); points lists the (time, line) intersection
    points when finite.
    """
    pts = set()
    for j in range(max(p.m, q.m), min(p.n, q.n) + 1):
        a0, a1 = p.occupancy(j)
        b0, b1 = q.occupancy(j)
        lo, hi = max(a0, b0), min(a1, b1)
        if lo < hi:
            return False, []
        if lo == hi:
            pts.add((lo, j))
    return True, sorted(pts)


def essentially_disjoint(p: StaircasePath, q: StaircasePath) -> bool:
    if (p.n, p.m) == (q.n, q.m):
        return interlaced(p, q) or interlaced(q, p)
    if not (path_leq(p, q) or path_leq(q, p)):
        return False
    return zigzag_intersection(p, q)[0]


@dataclass(frozen=True, eq=False)
class EndpointPair:
    xs: np.ndarray
    n: int
    ys: np.ndarray
    m: int

    def __post_init__(self):
        xs = np.array(self.xs, dtype=float).reshape(-1)
        ys = np.array(self.ys, dtype=float).reshape(-1)
        xs.setflags(write=False)
        ys.setflags(write=False)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)
        if xs.size == 0 or xs.size != ys.size:
            raise DomainError("start and end vectors need equal positive length")
        if self.m > self.n:
            raise DomainError("end line above start line")
        if np.any(np.diff(xs) < 0) or np.any(np.diff(ys) < 0):
            raise DomainError("endpoint vectors must be nondecreasing")
        if np.any(xs > ys):
            raise DomainError("need x_i <= y_i")

    @classmethod
    def single(cls, x: float, n: int, y: float, m: int) -> "EndpointPair":
        return cls([x], n, [y], m)

    @property
    def k(self) -> int:
        return self.xs.size

    def repeated(self, i: int, copies: int) -> "EndpointPair":
        """(x_i, n)^copies -> (y_i, m)^copies, i counted from 0."""
        return EndpointPair([self.xs[i]] * copies, self.n, [self.ys[i]] * copies, self.m)

    def component(self, i: int) -> "EndpointPair":
        return self.repeated(i, 1)

    def with_ends(self, xs=None, ys=None) -> "EndpointPair":
        return EndpointPair(self.xs if xs is None else xs, self.n,
                            self.ys if ys is None else ys, self.m)

    def __eq__(self, other):
        if not isinstance(other, EndpointPair):
            return NotImplemented
        return (self.n, self.m) == (other.n, other.m) and np.array_equal(self.xs, other.xs) \
            and np.array_equal(self.ys, other.ys)

    __hash__ = None

    def __repr__(self):
        return f"EndpointPair({self.xs.tolist()}@{self.n} -> {self.ys.tolist()}@{self.m})"


@dataclass(frozen=True, eq=False)
class DisjointKTuple:
    paths: tuple

    def __post_init__(self):
        paths = tuple(self.paths)
        object.__setattr__(self, "paths", paths)
        if not paths:
            raise DomainError("empty tuple")
        n, m = paths[0].n, paths[0].m
        if any((p.n, p.m) != (n, m) for p in paths):
            raise DomainError("all paths need common start and end lines")
        for a, b in zip(paths, paths[1:]):
            if not interlaced(a, b):
                raise DomainError("consecutive paths are not ordered and essentially disjoint")

    @property
    def k(self) -> int:
        return len(self.paths)

    def __len__(self):
        return len(self.paths)

    def __getitem__(self, i):
        return self.paths[i]

    def jump_matrix(self) -> np.ndarray:
        """(k, n-m) array of jump times."""
        return np.stack([p.jumps for p in self.paths])

    @property
    def pair(self) -> EndpointPair:
        p0 = self.paths[0]
        return EndpointPair([p.x for p in self.paths], p0.n, [p.y for p in self.paths], p0.m)


def path_length(f: Ensemble, p: StaircasePath) -> float:
    """Sum over lines i = m..n of f_i(t_i) - f_i(t_{i+1})."""
    rows = f.rows(p.n, p.m)
    ext = p.extended()
    f.grid.check_domain(ext)
    total = 0.0
    for r, row in enumerate(rows):
        a, b = np.interp([ext[r], ext[r + 1]], f.grid.times, row)
        total += b - a
    return float(total)


def tuple_length(f: Ensemble, tup: DisjointKTuple) -> float:
    return float(sum(path_length(f, p) for p in tup.paths))


def zigzag_matrix(n_param: int) -> np.ndarray:
    """Linear map sending (time, line) to (spatial, rescaled time) coordinates."""
    n = float(n_param)
    return np.array([[n ** (1 / 3) / 2, n ** (-2 / 3) / 2], [0.0, -1.0 / n]])


def rescale_points(points, n_param: int) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    return pts @ zigzag_matrix(n_param).T


def rescale_zigzag(p: StaircasePath, n_param: int) -> np.ndarray:
    return rescale_points(p.zigzag().vertices(), n_param)


def dumps_tuple(tup: DisjointKTuple) -> str:
    rows = ["path_index,start_time,start_line,end_time,end_line,jumps..."]
    for i, p in enumerate(tup.paths, start=1):
        cells = [str(i), "%.17g" % p.x, str(p.n), "%.17g" % p.y, str(p.m)]
        cells += ["%.17g" % t for t in p.jumps]
        rows.append(",".join(cells))
    return "\n".join(rows) + "\n"
