"""Compiled passage-value profiles for one and two paths.

These are the Monte Carlo workhorses: plain arrays in, plain arrays out.
``rows`` holds the lines in visiting order (start line first), one column
per knot. Forward profiles give the value to every end knot on the last row;
backward profiles give the value from every start knot on the first row.
"""
import numpy as np
from numba import njit

NEG = -np.inf


@njit(cache=True, nogil=True)
def one_path_forward(rows, x):
    L, K = rows.shape
    V = np.full(K, NEG)
    V[x] = 0.0
    for l in range(L):
        run = NEG
        for j in range(K):
            u = V[j] - rows[l, j]
            if u > run:
                run = u
            V[j] = run + rows[l, j]
    return V


@njit(cache=True, nogil=True)
def two_path_forward(rows, x0, x1):
    """V[a, b]: best pair of disjoint paths from (x0, x1) on the first row
    that jump off the last row at knots a <= b."""
    L, K = rows.shape
    V = np.full((K, K), NEG)
    V[x0, x1] = 0.0
    P = np.full((K, K), NEG)
    for l in range(L):
        f = rows[l]
        # P[a, c] = max over a' <= a of V[a', c] - f[a'] - f[c], for a <= c
        for c in range(K):
            run = NEG
            fc = f[c]
            for a in range(c + 1):
                u = V[a, c] - f[a] - fc
                if u > run:
                    run = u
                P[a, c] = run
        # V[a, b] = f[a] + f[b] + max over a <= c <= b of P[a, c]
        for a in range(K):
            run = NEG
            for b in range(a, K):
                if P[a, b] > run:
                    run = P[a, b]
                V[a, b] = run + f[a] + f[b]
    return V


def reversed_rows(rows):
    """Lines of the time- and line-reversed problem, g(u) = -f(-u)."""
    return np.ascontiguousarray(-rows[::-1, ::-1])


def one_path_backward(rows, y):
    K = rows.shape[1]
    return one_path_forward(reversed_rows(rows), K - 1 - y)[::-1]


def two_path_backward(rows, y0, y1):
    """B[a, b]: best pair from jump-on knots (a, b) on the first row to
    (y0, y1) on the last row."""
    K = rows.shape[1]
    V = two_path_forward(reversed_rows(rows), K - 1 - y1, K - 1 - y0)
    return V[::-1, ::-1].T


def rightmost_argmax(A, tol=1e-9):
    """Lexicographically largest index (last axis first) within tol of the max."""
    best = A.max()
    cand = np.argwhere(A >= best - tol * (1.0 + abs(best)))
    keys = tuple(cand[:, r] for r in range(cand.shape[1]))
    return tuple(int(v) for v in cand[np.lexsort(keys)[-1]]), float(best)


def split_argmax(rows, level, starts, ends):
    """Rightmost jump knots off row ``level`` of the optimizer from ``starts``
    on row 0 to ``ends`` on the last row (one or two paths), and the value."""
    top, bottom = rows[:level + 1], rows[level + 1:]
    if len(starts) == 1:
        A = one_path_forward(np.ascontiguousarray(top), starts[0])
        B = one_path_backward(np.ascontiguousarray(bottom), ends[0])
    else:
        A = two_path_forward(np.ascontiguousarray(top), starts[0], starts[1])
        B = two_path_backward(np.ascontiguousarray(bottom), ends[0], ends[1])
    return rightmost_argmax(A + B)
