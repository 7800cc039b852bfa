import math

import numpy as np
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from latlab import lattice as lt
from latlab import zsquare as zs
from latlab.counting import RectWindow, count_points

from naive import brute_shortest, naive_count, naive_sawtooth

entry = st.floats(-3, 3, allow_nan=False, allow_infinity=False)
basis = st.tuples(entry, entry, entry, entry).map(lambda v: np.array(v).reshape(2, 2))
FAST = settings(max_examples=60, deadline=None)


def well_conditioned(B):
    d = abs(np.linalg.det(B))
    return d > 0.3 and np.linalg.cond(B) < 50


@FAST
@given(basis, st.floats(0.3, 2.0), st.floats(0.3, 2.0), st.floats(0.5, 12.0), st.floats(-5, 5), st.floats(-5, 5))
def test_count_matches_naive(B, a, b, t, x1, x2):
    assume(well_conditioned(B))
    L = lt.from_basis(B)
    assert count_points(L, RectWindow(a, b), t, (x1, x2)) == naive_count(B, a, b, t, (x1, x2))


@FAST
@given(basis)
def test_dual_involution(B):
    assume(well_conditioned(B))
    L = lt.from_basis(B)
    D = lt.dual_lattice(L)
    assert abs(L.covol * D.covol - 1) <= 1e-12
    assert lt.same_lattice(lt.dual_lattice(D), L)


@FAST
@given(basis)
def test_reduction_finds_shortest(B):
    assume(well_conditioned(B))
    assert math.isclose(lt.shortest_vector_norm(lt.from_basis(B)), brute_shortest(B), rel_tol=1e-9)


@settings(max_examples=300, deadline=None)
@given(st.floats(0, 1e6), st.floats(-1e3, 1e3))
def test_sawtooth_matches_listing(t, x):
    d = zs.delta_sawtooth(t, x)
    assert -4.0 <= d <= 4.0
    if t < 1e3:
        assert d == naive_sawtooth(t, x)


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-3, 1e5), st.floats(-10, 10))
def test_envelope(t, x):
    diff = zs.r_over_t_exact(t, x) - zs.delta_sawtooth(t, x)
    # the bound is attained when both endpoints are integers, where 4 + 1/t
    # itself rounds; allow that rounding
    assert 0.0 <= diff <= 1.0 / t + 4 * math.ulp(4.0 + 1.0 / t)


@FAST
@given(st.floats(0, 0.5), st.lists(st.floats(-5, 5), min_size=2, max_size=20))
def test_beta_cdf_monotone(y, zs_):
    z = np.sort(np.array(zs_))
    F = zs.beta_cdf(z, y)
    assert np.all(np.diff(F) >= -1e-15)
    assert np.all((F >= 0) & (F <= 1))
