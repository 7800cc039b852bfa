import math

import numpy as np
import pytest

from latlab import lattice as lt
from latlab.errors import BallTooLarge, DegenerateBasis, EmptyBall, EqualRoots, SpecError

from naive import brute_shortest, brute_vectors, rejection_haar_shortest

SQ2 = math.sqrt(2.0)
QUAD = "quad:sqrt:2,-sqrt:2"


def test_zsquare_basis():
    L = lt.construct_lattice("zsquare")
    assert np.array_equal(L.basis, np.eye(2))
    assert L.covol == 1.0


def test_quad_covol_and_columns():
    L = lt.construct_lattice(QUAD)
    assert L.covol == pytest.approx(2 * SQ2, rel=1e-12)
    assert np.allclose(L.basis[:, 0], [1, 1])
    assert np.allclose(L.basis[:, 1], [SQ2, -SQ2])


def test_quad_unimodular_shortest():
    L = lt.construct_lattice(QUAD + "!unimodular")
    assert abs(L.covol - 1) <= 1e-12
    assert lt.shortest_vector_norm(L) == pytest.approx(0.840896, abs=1e-6)
    assert lt.shortest_vector_norm(L) == pytest.approx(brute_shortest(L.basis, 2.0), rel=1e-12)


def test_spec_grammar_variants():
    assert lt.construct_lattice("quad:1.5,-0.5").covol == pytest.approx(2.0)
    assert lt.construct_lattice("basis:2,0,0,3").covol == pytest.approx(6.0)
    assert lt.construct_lattice("basis:2,0,0,3!unimodular").covol == pytest.approx(1.0, abs=1e-12)
    assert lt.construct_lattice("basis:1,0,0,0,1,0,0,0,2").dim == 3
    assert lt.construct_lattice("haar:3").covol == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("bad", ["cube", "quad:1", "basis:1,2,3", "haar:x", "zsquare:1", "quad:sqrt:x,1"])
def test_spec_grammar_rejects(bad):
    with pytest.raises(SpecError):
        lt.construct_lattice(bad)


def test_degenerate_and_equal_roots():
    with pytest.raises(DegenerateBasis):
        lt.construct_lattice("basis:1,2,2,4")
    with pytest.raises(EqualRoots):
        lt.quad(SQ2, SQ2)


def test_dual_examples():
    Z = lt.zsquare()
    assert lt.same_lattice(lt.dual_lattice(Z), Z)
    L = lt.construct_lattice(QUAD)
    D = lt.dual_lattice(L)
    assert D.covol == pytest.approx(1 / (2 * SQ2), rel=1e-12)
    assert lt.same_lattice(lt.dual_lattice(D), L)
    assert np.allclose(D.basis.T @ L.basis, np.eye(2), atol=1e-14)


def test_dual_integer_pairings():
    L = lt.construct_lattice("basis:1.3,0.2,-0.7,2.1")
    D = lt.dual_lattice(L)
    V, _ = brute_vectors(L.basis, 4.0)
    W, _ = brute_vectors(D.basis, 4.0)
    G = V @ W.T
    assert np.max(np.abs(G - np.rint(G))) < 1e-9


def test_dual_3d():
    L = lt.construct_lattice("basis:1,0.2,0,0.3,1.5,0.1,0,0.4,0.9")
    D = lt.dual_lattice(L)
    assert L.covol * D.covol == pytest.approx(1.0, abs=1e-12)
    assert lt.same_lattice(lt.dual_lattice(D), L)


def test_paper_dual_formula_matches_up_to_swap():
    L = lt.construct_lattice(QUAD)
    W = lt.quad_dual_formula("sqrt:2", "-sqrt:2")
    assert lt.same_lattice(lt.swap_map(W), lt.dual_lattice(L))


def test_reduce_examples():
    assert lt.shortest_vector_norm(lt.zsquare()) == 1.0
    assert lt.shortest_vector_norm(lt.construct_lattice(QUAD)) == pytest.approx(SQ2, rel=1e-12)
    R = lt.reduce_basis(lt.construct_lattice(QUAD))
    assert np.allclose(np.abs(R.basis[:, 0]), [1, 1])


def test_reduce_det5_basis_against_brute_force():
    # (5,0),(4,1) has determinant 5: an index-5 sublattice of Z^2, whose
    # shortest vector is (5,0) - (4,1) = (1,-1)
    B = np.array([[5.0, 4.0], [0.0, 1.0]])
    L = lt.from_basis(B)
    assert L.covol == pytest.approx(5.0)
    assert lt.shortest_vector_norm(L) == pytest.approx(brute_shortest(B, 10.0))
    assert lt.shortest_vector_norm(L) == pytest.approx(SQ2)


def test_reduce_unimodular_skewed_basis():
    # (5,1),(4,1): determinant 1, generates Z^2
    L = lt.from_basis(np.array([[5.0, 4.0], [1.0, 1.0]]))
    assert lt.same_lattice(L, lt.zsquare())
    assert lt.shortest_vector_norm(L) == pytest.approx(1.0)


def test_reduce_postconditions_random():
    rng = np.random.default_rng(7)
    for _ in range(100):
        B = rng.normal(size=(2, 2)) * rng.uniform(0.2, 5.0)
        if abs(np.linalg.det(B)) < 1e-3:
            continue
        R = lt.reduce_basis(lt.from_basis(B))
        b1, b2 = R.basis[:, 0], R.basis[:, 1]
        assert np.linalg.norm(b1) <= np.linalg.norm(b2) * (1 + 1e-12)
        assert abs(b1 @ b2) <= 0.5 * (b1 @ b1) * (1 + 1e-9)
        assert lt.same_lattice(R, lt.from_basis(B))
        assert R.reduced_shortest == pytest.approx(brute_shortest(B), rel=1e-9)


def test_reduce_3d_matches_ball_search():
    rng = np.random.default_rng(11)
    for _ in range(30):
        B = rng.normal(size=(3, 3))
        if abs(np.linalg.det(B)) < 0.05:
            continue
        assert lt.shortest_vector_norm(lt.from_basis(B)) == pytest.approx(brute_shortest(B), rel=1e-9)


def test_enumerate_examples():
    Z = lt.zsquare()
    vs = lt.enumerate_vectors(Z, 1.5)
    assert sorted(map(tuple, vs.coords.astype(int).tolist())) == sorted(
        [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)]
    )
    ps = lt.enumerate_vectors(Z, 1.5, "prime_positive")
    assert sorted(map(tuple, ps.coords.astype(int).tolist())) == [(1, -1), (1, 0), (1, 1)]
    q = lt.enumerate_vectors(lt.construct_lattice(QUAD), 3.0, "prime_positive")
    assert sorted(np.rint(q.num).astype(int).tolist()) == [-2, -1, -1, 1]


def test_enumerate_matches_brute_force():
    rng = np.random.default_rng(3)
    for _ in range(20):
        B = rng.normal(size=(2, 2))
        if abs(np.linalg.det(B)) < 0.2:
            continue
        t = rng.uniform(1, 8)
        vs = lt.enumerate_vectors(lt.from_basis(B), t)
        V, C = brute_vectors(B, t)
        assert len(vs) == len(V)
        assert np.all(vs.norm <= t)
        assert sorted(map(tuple, vs.int_coords.tolist())) == sorted(map(tuple, C.tolist()))


def test_enumerate_symmetry_and_j2():
    L = lt.construct_lattice("basis:1.1,0.3,-0.4,0.9")
    vs = lt.enumerate_vectors(L, 6.0)
    S = set(map(tuple, vs.int_coords.tolist()))
    assert all((-a, -b) in S for a, b in S)
    ps = lt.enumerate_vectors(L, 6.0, "prime_positive")
    primes = vs[vs.is_prime & (vs.coords[:, 0] != 0)]
    assert len(ps) * 2 == len(primes)
    assert np.all(ps.coords[:, 0] > 0)
    for n, m in ps.int_coords.tolist():
        assert math.gcd(abs(n), abs(m)) == 1


def test_enumerate_cap():
    with pytest.raises(BallTooLarge):
        lt.enumerate_vectors(lt.zsquare(), 1000.0, cap=1000)


def test_quad_admissibility_witness():
    vs = lt.enumerate_vectors(lt.construct_lattice(QUAD), 200.0)
    assert np.all(np.abs(vs.num) >= 1 - 1e-9)


def test_num_of_lattice_examples():
    assert lt.num_of_lattice(lt.zsquare(), 2.0) == 0.0
    assert lt.num_of_lattice(lt.construct_lattice(QUAD), 10.0) == pytest.approx(1.0, rel=1e-12)
    assert lt.num_of_lattice(lt.construct_lattice(QUAD + "!unimodular"), 10.0) == pytest.approx(1 / (2 * SQ2), rel=1e-12)
    with pytest.raises(EmptyBall):
        lt.num_of_lattice(lt.zsquare(), 0.5)


def test_haar_sampler_unimodular_and_hermite():
    for seed in range(300):
        L = lt.sample_haar_lattice_2d(seed)
        assert abs(L.covol - 1) <= 1e-12
        assert lt.shortest_vector_norm(L) <= lt.HERMITE_2D + 1e-12
    a = lt.sample_haar_lattice_2d(5).basis
    assert np.array_equal(a, lt.sample_haar_lattice_2d(5).basis)


def test_haar_sampler_against_rejection_oracle():
    n = 10_000
    p_ours = np.mean([lt.shortest_vector_norm(lt.sample_haar_lattice_2d(s)) < 0.5 for s in range(n)])
    p_ref = np.mean(rejection_haar_shortest(n, seed=99) < 0.5)
    se = math.sqrt(p_ref * (1 - p_ref) / n * 2)
    assert abs(p_ours - p_ref) <= 3 * se
    # closed form under dx dy / y^2: P(y > 4) = (1/4) / (pi/3)
    assert abs(p_ref - 3 / (4 * math.pi)) <= 3 * math.sqrt(p_ref * (1 - p_ref) / n)


def test_prime_triple_linearity():
    for k in range(2, 30):
        vecs, pairs = lt.prime_triple(SQ2, -SQ2, k)
        v1, v2, v3 = map(np.asarray, vecs)
        assert np.allclose(-v1 + 2 * v2, v3, atol=1e-12 * (1 + k))
        assert all(math.gcd(abs(a), abs(b)) == 1 for a, b in pairs)


def test_parse_real():
    assert lt.parse_real("sqrt:2") == pytest.approx(SQ2)
    assert lt.parse_real("-sqrt:3") == pytest.approx(-math.sqrt(3))
    assert lt.parse_real("0.25") == 0.25
