"""Lattice point counting in dilated, translated rectangles.

Exact counts, the Fourier-side sums V, S and G, orbit statistics under the
diagonal group, the exact Z^2 sawtooth law, and quadrature oracles.
"""

from .counting import RectWindow, count_error, count_points, second_moment_over_X
from .errors import LatlabError
from .lattice import LatticeBasis, construct_lattice, dual_lattice, enumerate_vectors, shortest_vector_norm
from .spectral import TruncationSpec, big_v, fourier_series_s, g_terms

__version__ = "0.1.0"

__all__ = [
    "LatticeBasis",
    "LatlabError",
    "RectWindow",
    "TruncationSpec",
    "big_v",
    "construct_lattice",
    "count_error",
    "count_points",
    "dual_lattice",
    "enumerate_vectors",
    "fourier_series_s",
    "g_terms",
    "second_moment_over_X",
    "shortest_vector_norm",
]
