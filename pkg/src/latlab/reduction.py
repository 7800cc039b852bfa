"""Lagrange-Gauss (dim 2) and greedy (dim 3) basis reduction on plain lists.

The routines only use + - * / and comparisons, so the same code runs on
Python floats and on mpmath numbers; ``floor`` must map a number to an int.
"""

import math


def dot(u, v):
    s = u[0] * v[0]
    for a, b in zip(u[1:], v[1:]):
        s = s + a * b
    return s


def sub(u, c, v):
    """u - c v"""
    return [a - c * b for a, b in zip(u, v)]


def gauss_pair(u, v, floor=math.floor, max_iter=100_000):
    """Lagrange-Gauss reduce the pair (u, v); returns (u, v) with |u| <= |v|."""
    if dot(u, u) > dot(v, v):
        u, v = v, u
    for _ in range(max_iter):
        mu = floor(dot(u, v) / dot(u, u) + 0.5)
        if mu:
            v = sub(v, mu, u)
        if dot(v, v) >= dot(u, u):
            return u, v
        u, v = v, u
    raise RuntimeError("Gauss reduction did not terminate")


def _closest_in_plane(c0, c1, target, floor):
    """Closest point of the lattice spanned by reduced (c0, c1) to target's projection."""
    g00, g01, g11 = dot(c0, c0), dot(c0, c1), dot(c1, c1)
    r0, r1 = dot(c0, target), dot(c1, target)
    det = g00 * g11 - g01 * g01
    x0 = (g11 * r0 - g01 * r1) / det
    x1 = (g00 * r1 - g01 * r0) / det
    f0, f1 = floor(x0), floor(x1)
    best, best_d = None, None
    for a in range(f0 - 1, f0 + 3):
        for b in range(f1 - 1, f1 + 3):
            w = [a * p + b * q for p, q in zip(c0, c1)]
            diff = sub(target, 1, w)
            d = dot(diff, diff)
            if best_d is None or d < best_d:
                best, best_d = w, d
    return best


def greedy_reduce(cols, floor=math.floor, max_iter=100_000):
    """Greedy reduction (Semaev; Nguyen-Stehle) of a list of 2 or 3 columns.

    For these dimensions the output is Minkowski reduced, so ``cols[0]`` is a
    shortest nonzero vector.
    """
    cols = [list(c) for c in cols]
    d = len(cols)
    if d == 2:
        return list(gauss_pair(cols[0], cols[1], floor))
    if d != 3:
        raise ValueError("greedy reduction is implemented for dim 2 and 3")
    cols.sort(key=lambda c: dot(c, c))
    k = 1
    for _ in range(max_iter):
        if k >= d:
            return cols
        if k == 1:
            mu = floor(dot(cols[0], cols[1]) / dot(cols[0], cols[0]) + 0.5)
            c = [mu * x for x in cols[0]]
        else:
            cols[0], cols[1] = gauss_pair(cols[0], cols[1], floor)
            c = _closest_in_plane(cols[0], cols[1], cols[k], floor)
        bk = sub(cols[k], 1, c)
        nk = dot(bk, bk)
        if nk < dot(cols[k - 1], cols[k - 1]):
            del cols[k]
            j = 0
            while j < k and dot(cols[j], cols[j]) <= nk:
                j += 1
            cols.insert(j, bk)
            k = max(j, 1)
        else:
            cols[k] = bk
            k += 1
    raise RuntimeError("greedy reduction did not terminate")
