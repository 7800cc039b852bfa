"""Independent brute-force oracles used by the tests.

They share nothing with the package beyond numpy: plain double loops over
integer coefficient boxes and textbook samplers.
"""

import math
from fractions import Fraction

import numpy as np


def coefficient_box(B, radius):
    """Bound on |n_i| for lattice points within ``radius`` of the origin."""
    inv = np.linalg.inv(np.asarray(B, dtype=float))
    return [int(math.ceil(radius * np.linalg.norm(row))) + 1 for row in inv]


def naive_count(B, a, b, t, X):
    """Points n1 b1 + n2 b2 with |x - X1| <= t a and |y - X2| <= t b."""
    B = np.asarray(B, dtype=float)
    X = np.asarray(X, dtype=float)
    lo = X - np.array([t * a, t * b])
    hi = X + np.array([t * a, t * b])
    reach = float(np.linalg.norm(np.abs(X) + np.array([t * a, t * b])))
    N1, N2 = coefficient_box(B, reach)
    n1, n2 = np.meshgrid(np.arange(-N1, N1 + 1), np.arange(-N2, N2 + 1), indexing="ij")
    n1 = n1.astype(float)
    n2 = n2.astype(float)
    x = n1 * B[0, 0] + n2 * B[0, 1]
    y = n1 * B[1, 0] + n2 * B[1, 1]
    inside = (lo[0] <= x) & (x <= hi[0]) & (lo[1] <= y) & (y <= hi[1])
    return int(inside.sum())


def brute_vectors(B, t):
    """(coords, int coords) of all nonzero lattice vectors with norm <= t."""
    B = np.asarray(B, dtype=float)
    d = B.shape[0]
    bounds = coefficient_box(B, t)
    grids = np.meshgrid(*[np.arange(-n, n + 1) for n in bounds], indexing="ij")
    C = np.stack([g.ravel() for g in grids], axis=1)
    C = C[np.any(C != 0, axis=1)]
    V = C @ B.T
    keep = np.linalg.norm(V, axis=1) <= t * (1 + 1e-12)
    return V[keep], C[keep]


def brute_shortest(B, radius=None):
    B = np.asarray(B, dtype=float)
    if radius is None:
        radius = float(np.min(np.linalg.norm(B, axis=0)))
    V, _ = brute_vectors(B, radius)
    return float(np.min(np.linalg.norm(V, axis=1)))


def rejection_haar_shortest(n, seed):
    """Shortest-vector norms of n Haar-random unimodular planar lattices.

    Independent sampler: propose (x, y) with x ~ U[-1/2, 1/2] and y with
    density proportional to y^-2 on [sqrt(3)/2, inf); accept when
    x^2 + y^2 >= 1.  The accepted point is in the reduced fundamental domain,
    where the shortest vector of the lattice has norm 1/sqrt(y).
    """
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        m = 2 * (n - len(out)) + 16
        x = rng.uniform(-0.5, 0.5, m)
        y = (math.sqrt(3.0) / 2.0) / (1.0 - rng.random(m))
        ok = x * x + y * y >= 1.0
        out.extend((1.0 / np.sqrt(y[ok])).tolist())
    return np.array(out[:n])


def naive_sawtooth(t, x):
    """4 (#{integers in [x - t, x + t]} - 2t) by explicit listing.

    The endpoints are formed in exact rational arithmetic from the given
    doubles, so nothing is lost to rounding x + t.
    """
    ft, fx = Fraction(t), Fraction(x)
    lo, hi = fx - ft, fx + ft
    ints = [k for k in range(math.floor(lo) - 1, math.ceil(hi) + 2) if lo <= k <= hi]
    return 4.0 * (len(ints) - 2.0 * t)
