"""Last passage values and disjoint optimizers across piecewise-linear lines.

For piecewise-linear lines the summed length of a disjoint k-tuple is linear
on each cell of the polytope of ordered jump times cut out by the knots, so
an optimum is attained with every jump time at a knot. The dynamic programs
below therefore search knot indices only, and are exact.

The multi-path program runs over the k jump times off one line at a time
(the "frontier"). Going from line i+1 to line i, path r may move from a'_r to
a_r when a'_r <= a_r, and interlacing asks a_{r-1} <= a'_r. Both constraints
are handled one coordinate at a time with running maxima.
"""
from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, InfeasibleError, UsageError
from .paths import (DisjointKTuple, EndpointPair, StaircasePath, path_leq, path_length,
                    tuple_length)
from .plcore import Ensemble, tol_abs

NEG = -np.inf
MAX_K = 4
MAX_STATES = 40_000_000

# test hook: perturbs lpp_multi so the verifier suites can be checked to fail
_FAULT = {"offset": 0.0}


def _knot_indices(f: Ensemble, times) -> np.ndarray:
    return np.array([f.grid.index(t) for t in np.atleast_1d(times)], dtype=np.intp)


def _check_pair(f: Ensemble, pair: EndpointPair):
    if pair.k > MAX_K:
        raise UsageError(f"k={pair.k} exceeds the cap {MAX_K}")
    rows = f.rows(pair.n, pair.m)
    return rows, _knot_indices(f, pair.xs), _knot_indices(f, pair.ys)


def _axis_index(k: int, r: int, size: int) -> np.ndarray:
    shape = [1] * k
    shape[r] = size
    return np.arange(size).reshape(shape)


class _Frontier:
    """Frontier dynamic program over the rows of one endpoint problem.

    ``rows`` are the lines in the order the paths visit them (start line
    first). ``lo``/``hi`` optionally bound the knot index of each path's jump
    off every row, shape (len(rows), k).
    """

    def __init__(self, rows: np.ndarray, k: int, lo=None, hi=None):
        self.rows = np.asarray(rows, dtype=float)
        self.k = k
        self.K = self.rows.shape[1]
        if self.K ** k * (len(self.rows) + 1) > MAX_STATES:
            raise UsageError("state space too large; reduce k or the number of knots")
        self.idx = [_axis_index(k, r, self.K) for r in range(k)]
        self.order_masks = [self.idx[r] >= self.idx[r - 1] for r in range(1, k)]
        self.lo, self.hi = lo, hi

    def _sum(self, f: np.ndarray) -> np.ndarray:
        out = f[self.idx[0]]
        for r in range(1, self.k):
            out = out + f[self.idx[r]]
        return out

    def _transition(self, U: np.ndarray) -> np.ndarray:
        H = np.maximum.accumulate(U, axis=0)
        for r in range(1, self.k):
            H = np.where(self.order_masks[r - 1], H, NEG)
            H = np.maximum.accumulate(H, axis=r)
        return H

    def _bound_mask(self, level: int, yi):
        ok = None
        for r in range(self.k):
            c = self.idx[r] <= yi[r] if yi is not None else None
            if self.lo is not None:
                b = (self.idx[r] >= self.lo[level, r]) & (self.idx[r] <= self.hi[level, r])
                c = b if c is None else (c & b)
            if c is not None:
                ok = c if ok is None else (ok & c)
        return ok

    def run(self, xi, yi=None, keep: bool = False):
        """Values after the last row, indexed by the final jump-time state."""
        V = np.full((self.K,) * self.k, NEG)
        V[tuple(xi)] = 0.0
        levels = [V] if keep else None
        for level, f in enumerate(self.rows):
            S = self._sum(f)
            V = self._transition(V - S) + S
            ok = self._bound_mask(level, yi)
            if ok is not None:
                V = np.where(ok, V, NEG)
            if keep:
                levels.append(V)
        return V, levels

    def backtrack(self, levels, yi, side: str) -> np.ndarray:
        """Jump-time index matrix (k, rows-1) of the rightmost/leftmost optimizer."""
        L = len(self.rows)
        a = tuple(int(v) for v in yi)
        jumps = np.empty((self.k, L - 1), dtype=np.intp)
        for level in range(L - 1, 0, -1):
            prev = levels[level]
            f = self.rows[level]
            sl = [slice(0, a[0] + 1)] + [slice(a[r - 1], a[r] + 1) for r in range(1, self.k)]
            box = prev[tuple(sl)] - self._sum(f)[tuple(sl)]
            best = box.max()
            if not np.isfinite(best):
                raise InfeasibleError("no admissible predecessor during backtracking")
            cand = np.argwhere(box >= best - tol_abs(best))
            cand = cand + np.array([s.start for s in sl])
            if side == "rightmost":
                keys = tuple(cand[:, r] for r in range(self.k))
                pick = cand[np.lexsort(keys)[-1]]
            else:
                keys = tuple(cand[:, r] for r in range(self.k - 1, -1, -1))
                pick = cand[np.lexsort(keys)[0]]
            a = tuple(int(v) for v in pick)
            jumps[:, level - 1] = a
        return jumps


def lpp_single(f: Ensemble, x: float, n: int, y: float, m: int) -> float:
    """Last passage value of one path from (x, n) to (y, m)."""
    if x > y or m > n:
        raise DomainError("need x <= y and m <= n")
    rows = f.rows(n, m)
    xi, yi = f.grid.index(x), f.grid.index(y)
    L = np.full(rows.shape[1], NEG)
    L[xi] = 0.0
    for row in rows:
        L = row + np.maximum.accumulate(L - row)
    return float(L[yi])


def lpp_multi(f: Ensemble, pair: EndpointPair) -> float:
    """Maximal total length of a disjoint k-tuple from pair.xs to pair.ys."""
    rows, xi, yi = _check_pair(f, pair)
    V, _ = _Frontier(rows, pair.k).run(xi, yi)
    v = V[tuple(yi)]
    if not np.isfinite(v):
        raise InfeasibleError(f"no disjoint {pair.k}-tuple for {pair}")
    return float(v) + _FAULT["offset"]


@dataclass
class DisjointOptimizer:
    tuple: DisjointKTuple
    value: float
    side: str


def _tuple_from_indices(f: Ensemble, pair: EndpointPair, jumps: np.ndarray) -> DisjointKTuple:
    t = f.grid.times
    paths = [StaircasePath(pair.xs[r], pair.n, pair.ys[r], pair.m, t[jumps[r]])
             for r in range(pair.k)]
    return DisjointKTuple(paths)


def _extract(f: Ensemble, pair: EndpointPair, side: str, lo=None, hi=None) -> DisjointOptimizer:
    if side not in ("rightmost", "leftmost"):
        raise UsageError("side must be 'rightmost' or 'leftmost'")
    rows, xi, yi = _check_pair(f, pair)
    dp = _Frontier(rows, pair.k, lo, hi)
    V, levels = dp.run(xi, yi, keep=True)
    v = V[tuple(yi)]
    if not np.isfinite(v):
        raise InfeasibleError(f"no disjoint {pair.k}-tuple for {pair}")
    tup = _tuple_from_indices(f, pair, dp.backtrack(levels, yi, side))
    length = tuple_length(f, tup)
    if abs(length - v) > 1e3 * tol_abs(v, length):
        raise AssertionError(f"extracted tuple length {length} differs from value {v}")
    return DisjointOptimizer(tup, float(v), side)


def optimizer_extract(f: Ensemble, pair: EndpointPair, side: str = "rightmost") -> DisjointOptimizer:
    return _extract(f, pair, side)


def constrained_optimizer(f: Ensemble, pair: EndpointPair, lo, hi,
                          side: str = "rightmost") -> DisjointOptimizer:
    """Optimizer among tuples whose jump off row l of path r has knot index
    in [lo[l, r], hi[l, r]] (rows counted from the start line)."""
    return _extract(f, pair, side, np.asarray(lo), np.asarray(hi))


def _reverse_rows(rows: np.ndarray) -> np.ndarray:
    """Lines for the time- and line-reversed problem g_j(u) = -f_{-j}(-u)."""
    return -rows[::-1, ::-1]


def passage_to_all(f: Ensemble, xs, n: int, m: int) -> np.ndarray:
    """f[(xs, n) -> (z, m)] for every ordered knot vector z (array over z)."""
    rows = f.rows(n, m)
    xi = _knot_indices(f, xs)
    V, _ = _Frontier(rows, len(xi)).run(xi)
    return V


def passage_from_all(f: Ensemble, n: int, ys, m: int) -> np.ndarray:
    """f[(z, n) -> (ys, m)] for every ordered knot vector z, via reversal."""
    rows = _reverse_rows(f.rows(n, m))
    K = rows.shape[1]
    yi = _knot_indices(f, ys)
    k = len(yi)
    start = (K - 1 - yi)[::-1]
    V, _ = _Frontier(rows, k).run(start)
    # reversed state (z'_1..z'_k) corresponds to z_r = K-1-z'_{k+1-r}
    V = V[(slice(None, None, -1),) * k]
    return np.transpose(V, axes=tuple(range(k - 1, -1, -1)))


def _lex_argmax(A: np.ndarray, side: str = "rightmost"):
    best = A.max()
    if not np.isfinite(best):
        raise InfeasibleError("no admissible split")
    cand = np.argwhere(A >= best - tol_abs(best))
    k = cand.shape[1]
    if side == "rightmost":
        pick = cand[np.lexsort(tuple(cand[:, r] for r in range(k)))[-1]]
    else:
        pick = cand[np.lexsort(tuple(cand[:, r] for r in range(k - 1, -1, -1)))[0]]
    return tuple(int(v) for v in pick), float(best)


def metric_composition_argmax(f: Ensemble, pair: EndpointPair, level: int):
    """Split the problem at the jump from line `level` to `level - 1`.

    Returns (z, value) where z is the rightmost maximizer of
    f[p -> (z, level)] + f[(z, level - 1) -> q].
    """
    if not pair.m + 1 <= level <= pair.n:
        raise DomainError(f"level must lie in {pair.m + 1}..{pair.n}")
    _check_pair(f, pair)
    A = passage_to_all(f, pair.xs, pair.n, level)
    B = passage_from_all(f, level - 1, pair.ys, pair.m)
    idx, best = _lex_argmax(A + B)
    return f.grid.times[list(idx)].copy(), best


# ---------------------------------------------------------------- oracle

def _path_sequences(xi: int, yi: int, J: int) -> np.ndarray:
    """All nondecreasing jump index sequences (x, t_n..t_{m+1}, y)."""
    seqs = list(itertools.combinations_with_replacement(range(xi, yi + 1), J))
    body = np.array(seqs, dtype=np.intp).reshape(len(seqs), J)
    S = body.shape[0]
    return np.hstack([np.full((S, 1), xi), body, np.full((S, 1), yi)])


def _sequence_lengths(rows: np.ndarray, E: np.ndarray) -> np.ndarray:
    total = np.zeros(E.shape[0])
    for p, row in enumerate(rows):
        total += row[E[:, p + 1]] - row[E[:, p]]
    return total


def _oracle_setup(f: Ensemble, pair: EndpointPair):
    if pair.k > 3 or pair.n - pair.m > 4 or f.grid.m > 12:
        raise UsageError("brute force is capped at k <= 3, n - m <= 4, M <= 12")
    rows = f.rows(pair.n, pair.m)
    xi, yi = _knot_indices(f, pair.xs), _knot_indices(f, pair.ys)
    J = pair.n - pair.m
    E = [_path_sequences(int(xi[r]), int(yi[r]), J) for r in range(pair.k)]
    lengths = [_sequence_lengths(rows, e) for e in E]
    compat = [np.all(E[r][:, None, 1:] <= E[r + 1][None, :, :-1], axis=-1)
              for r in range(pair.k - 1)]
    return E, lengths, compat


def lpp_multi_bruteforce(f: Ensemble, pair: EndpointPair) -> float:
    """Exhaustive search over all interlacing jump-time assignments on knots.

    Interlacing only couples consecutive paths, so the maximum over the
    product of per-path sequence sets is taken by eliminating one path at a
    time along the chain.
    """
    E, lengths, compat = _oracle_setup(f, pair)
    best = lengths[0]
    for r in range(1, pair.k):
        reach = np.where(compat[r - 1], best[:, None], NEG).max(axis=0)
        best = reach + lengths[r]
    v = best.max()
    if not np.isfinite(v):
        raise InfeasibleError(f"no disjoint {pair.k}-tuple for {pair}")
    return float(v)


def bruteforce_optimizers(f: Ensemble, pair: EndpointPair, limit: int = 2_000_000):
    """(value, list of optimal jump-index matrices) by full enumeration."""
    E, lengths, compat = _oracle_setup(f, pair)
    if np.prod([len(e) for e in E], dtype=float) > limit:
        raise UsageError("instance too large for full enumeration")
    total = lengths[0]
    valid = np.ones(len(E[0]), dtype=bool)
    for r in range(1, pair.k):
        total = total[..., None] + lengths[r].reshape((1,) * r + (-1,))
        c = compat[r - 1].reshape((1,) * (r - 1) + compat[r - 1].shape)
        valid = valid[..., None] & c
    total = np.where(valid, total, NEG)
    v = total.max()
    if not np.isfinite(v):
        raise InfeasibleError(f"no disjoint {pair.k}-tuple for {pair}")
    hits = np.argwhere(total >= v - tol_abs(v))
    opts = [np.stack([E[r][h[r], 1:-1] for r in range(pair.k)]) for h in hits]
    return float(v), opts


# ------------------------------------------------------------- verifiers

@dataclass
class Report:
    lemma: str
    inputs_digest: str
    values: dict = field(default_factory=dict)
    slack: float | None = None
    passed: bool | None = None
    note: str = ""

    def to_dict(self) -> dict:
        return {"lemma": self.lemma, "inputs_digest": self.inputs_digest,
                "values": self.values, "slack": self.slack, "pass": self.passed,
                "note": self.note}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @property
    def violated(self) -> bool:
        return self.passed is False


def inputs_digest(f: Ensemble, *pairs) -> str:
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(f.grid.times).tobytes())
    h.update(np.ascontiguousarray(f.values).tobytes())
    h.update(str(f.first_line).encode())
    for p in pairs:
        h.update(repr(p).encode())
    return h.hexdigest()[:16]


def _try_value(f, pair):
    try:
        return lpp_multi(f, pair)
    except InfeasibleError:
        return None


def verify_quadrangle(f: Ensemble, pairA: EndpointPair, pairB: EndpointPair) -> Report:
    """f[p->q] + f[p'->q'] <= f[p^l->q^l] + f[p^r->q^r]."""
    if pairA.k != pairB.k or (pairA.n, pairA.m) != (pairB.n, pairB.m):
        raise UsageError("pairs need equal size and common lines")
    rep = Report("quadrangle", inputs_digest(f, pairA, pairB))
    left = EndpointPair(np.minimum(pairA.xs, pairB.xs), pairA.n, np.minimum(pairA.ys, pairB.ys), pairA.m)
    right = EndpointPair(np.maximum(pairA.xs, pairB.xs), pairA.n, np.maximum(pairA.ys, pairB.ys), pairA.m)
    vals = {"pq": _try_value(f, pairA), "pq_prime": _try_value(f, pairB),
            "left": _try_value(f, left), "right": _try_value(f, right)}
    rep.values = vals
    if any(v is None for v in vals.values()):
        rep.note = "skipped: infeasible pair"
        return rep
    lhs, rhs = vals["pq"] + vals["pq_prime"], vals["left"] + vals["right"]
    rep.slack = rhs - lhs
    rep.passed = bool(rep.slack >= -tol_abs(lhs, rhs))
    return rep


def verify_quadrangle_split(f: Ensemble, pair: EndpointPair, ys_new, ell: int) -> Report:
    """The two split-coordinate quadrangle inequalities.

    ``ys_new`` >= pair.ys coordinatewise and agrees with pair.ys either on the
    last k - ell coordinates or on the first ell coordinates.
    """
    k = pair.k
    if not 1 <= ell < k:
        raise UsageError("need 1 <= ell < k")
    ys_new = np.asarray(ys_new, dtype=float)
    if np.any(ys_new < pair.ys):
        raise UsageError("need q <= q'")
    pq = pair
    pq2 = pair.with_ends(ys=ys_new)
    rep = Report("quadrangle_split", inputs_digest(f, pq, pq2))
    if np.array_equal(pair.ys[ell:], ys_new[ell:]):
        part = slice(0, ell)
        sign = 1.0
    elif np.array_equal(pair.ys[:ell], ys_new[:ell]):
        part = slice(ell, k)
        sign = -1.0
    else:
        raise UsageError("q and q' must agree on one side of ell")
    sub = EndpointPair(pair.xs[part], pair.n, pair.ys[part], pair.m)
    sub2 = EndpointPair(pair.xs[part], pair.n, ys_new[part], pair.m)
    vals = {"pq": _try_value(f, pq), "pq_prime": _try_value(f, pq2),
            "sub_q": _try_value(f, sub), "sub_q_prime": _try_value(f, sub2)}
    rep.values = vals
    if any(v is None for v in vals.values()):
        rep.note = "skipped: infeasible pair"
        return rep
    # first case: f[p->q] + f[pL->q'L] >= f[p->q'] + f[pL->qL]; second reversed
    a = vals["pq"] + vals["sub_q_prime"]
    b = vals["pq_prime"] + vals["sub_q"]
    rep.slack = sign * (a - b)
    rep.passed = bool(rep.slack >= -tol_abs(a, b))
    rep.note = "agree on right block" if sign > 0 else "agree on left block"
    return rep


def shift_ordered(pairA: EndpointPair, pairB: EndpointPair, shift: int) -> bool:
    """pairA <=_shift pairB with +-inf padding outside 1..k."""
    if (pairA.n, pairA.m) != (pairB.n, pairB.m):
        return False
    k, k2 = pairA.k, pairB.k

    def pad(v, j, size):
        if j < 1:
            return -np.inf
        if j > size:
            return np.inf
        return v[j - 1]

    for i in range(min(1 - shift, 1), max(k - shift, k2) + 1):
        if not (1 <= i + shift <= k or 1 <= i <= k2):
            continue
        for va, vb in ((pairA.xs, pairB.xs), (pairA.ys, pairB.ys)):
            if not pad(va, i + shift, k) <= pad(vb, i, k2):
                return False
    return True


def verify_monotonicity(f: Ensemble, pairA: EndpointPair, pairB: EndpointPair,
                        shift: int = 0) -> Report:
    """If pairA <=_shift pairB then path i+shift of A's optimizer lies below
    path i of B's, for rightmost and for leftmost optimizers."""
    rep = Report("monotonicity", inputs_digest(f, pairA, pairB))
    rep.values = {"shift": shift}
    if not shift_ordered(pairA, pairB, shift):
        rep.note = "not applicable: pairs not ordered"
        return rep
    if _try_value(f, pairA) is None or _try_value(f, pairB) is None:
        rep.note = "skipped: infeasible pair"
        return rep
    bad = 0
    for side in ("rightmost", "leftmost"):
        pa = optimizer_extract(f, pairA, side).tuple
        pb = optimizer_extract(f, pairB, side).tuple
        for i in range(1, pairB.k + 1):
            j = i + shift
            if 1 <= j <= pairA.k and not path_leq(pa[j - 1], pb[i - 1]):
                bad += 1
        rep.values[side] = {"a": pa.jump_matrix().tolist(), "b": pb.jump_matrix().tolist()}
    rep.values["violations"] = bad
    rep.slack = float(-bad)
    rep.passed = bad == 0
    return rep


def omega(f: Ensemble, a: float, b: float, lo_line: int, hi_line: int) -> float:
    """Largest oscillation of lines lo_line..hi_line over the time window [a, b]."""
    i, j = f.grid.index(a), f.grid.index(b)
    lo_line = max(lo_line, f.first_line)
    hi_line = min(hi_line, f.last_line)
    if lo_line > hi_line:
        return 0.0
    block = f.rows(hi_line, lo_line)[:, i:j + 1]
    return float((block.max(axis=1) - block.min(axis=1)).max())


def verify_naive_bounds(f: Ensemble, pair: EndpointPair, perturb=None) -> Report:
    """Outer bounds, the one-path-below bound and the perturbation bounds.

    ``perturb`` is a list of (i, y_new) single-coordinate moves (i from 0);
    by default every coordinate is pushed to the largest admissible knot.
    The perturbation bounds use the rightmost optimizer of the moved pair
    (they hold for any optimizer; the leftmost one is checked too).
    """
    rep = Report("naive_bounds", inputs_digest(f, pair))
    k = pair.k
    total = _try_value(f, pair)
    if total is None:
        rep.note = "skipped: infeasible pair"
        return rep
    checks = []

    def record(name, lhs, rhs):
        checks.append({"check": name, "lhs": lhs, "rhs": rhs,
                       "ok": bool(lhs <= rhs + tol_abs(lhs, rhs))})

    singles = [lpp_multi(f, pair.component(i)) for i in range(k)]
    record("upper", total, float(sum(singles)))
    if k >= 2:
        lower, skipped = 0.0, False
        for i in range(k):
            full, less = _try_value(f, pair.repeated(i, k)), _try_value(f, pair.repeated(i, k - 1))
            if full is None or less is None:
                skipped = True
                break
            lower += full - less
            opt = optimizer_extract(f, pair.repeated(i, k)).tuple
            for p in opt.paths:
                record(f"one_path_below[{i}]", full - less, path_length(f, p))
        if not skipped:
            record("lower", lower, total)
    if perturb is None:
        perturb = []
        for i in range(k):
            cap = pair.ys[i + 1] if i + 1 < k else f.grid.end
            if cap > pair.ys[i]:
                perturb.append((i, cap))
    for i, y_new in perturb:
        ys2 = pair.ys.copy()
        ys2[i] = y_new
        moved = pair.with_ends(ys=ys2)
        v2 = _try_value(f, moved)
        if v2 is None:
            continue
        yi, yn = pair.ys[i], y_new
        for side in ("rightmost", "leftmost"):
            pi2 = optimizer_extract(f, moved, side).tuple[i]
            top = pi2.line_at(yi)
            bound = abs(top + 1 - pair.m) * omega(f, yi, yn, pair.m, top)
            record(f"increase[{i},{side}]", v2 - total, bound)
        bound2 = (2 * (k - 1 - i) + 1) * omega(f, yi, yn, pair.m, pair.m + k - 1 - i)
        record(f"decrease[{i}]", total - v2, bound2)
    rep.values = {"value": total, "checks": checks}
    rep.slack = float(min(c["rhs"] - c["lhs"] for c in checks))
    rep.passed = all(c["ok"] for c in checks)
    return rep


def verify_metric_composition(f: Ensemble, pair: EndpointPair) -> Report:
    rep = Report("metric_composition", inputs_digest(f, pair))
    total = _try_value(f, pair)
    if total is None or pair.n == pair.m:
        rep.note = "skipped: infeasible pair or single line"
        return rep
    worst = 0.0
    per = {}
    for level in range(pair.m + 1, pair.n + 1):
        z, v = metric_composition_argmax(f, pair, level)
        per[level] = {"z": z.tolist(), "value": v}
        worst = max(worst, abs(v - total))
    rep.values = {"value": total, "levels": per}
    rep.slack = -worst
    rep.passed = worst <= tol_abs(total)
    return rep


def verify_refinement(f: Ensemble, pair: EndpointPair) -> Report:
    rep = Report("grid_refinement", inputs_digest(f, pair))
    a = _try_value(f, pair)
    b = _try_value(f.halved(), pair)
    rep.values = {"coarse": a, "fine": b}
    if a is None or b is None:
        rep.passed = (a is None) == (b is None)
        rep.note = "infeasible"
        return rep
    rep.slack = -abs(a - b)
    rep.passed = abs(a - b) <= tol_abs(a, b)
    return rep


def verify_affine_shift(f: Ensemble, pair: EndpointPair, slope: float, const: float) -> Report:
    """Adding slope*t + const to every line shifts values by slope*sum(y - x)."""
    rep = Report("affine_shift", inputs_digest(f, pair))
    g = f + (slope * f.grid.times + const)[None, :]
    a, b = _try_value(f, pair), _try_value(g, pair)
    rep.values = {"base": a, "shifted": b}
    if a is None or b is None:
        rep.passed = (a is None) == (b is None)
        return rep
    expected = a + slope * float(np.sum(pair.ys - pair.xs))
    rep.slack = -abs(b - expected)
    rep.passed = abs(b - expected) <= tol_abs(a, b, expected)
    return rep
