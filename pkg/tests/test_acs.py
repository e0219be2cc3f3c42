import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from diagglt import DiagonalSequence, ExtractionError, ShapeError, SizeError, Symbol
from diagglt.acs import (acs_decomposition_recovery, d_acs_estimate, diagonal_extraction,
                         p_value, singular_values, split_at_minimizer, split_vanishing_check)
from diagglt.jacobi import eigh_jacobi, svd_jacobi

X = Symbol.from_callable(lambda x: x, descriptor="x", continuous=True)


def p_subset_oracle(d):
    """min over subsets S of |S|/n + max_{i not in S} |d_i| (diagonal matrices only)."""
    a = np.abs(np.asarray(d))
    n = a.size
    best = np.inf
    for mask in range(2**n):
        inside = [(mask >> i) & 1 for i in range(n)]
        rest = [a[i] for i in range(n) if not inside[i]]
        best = min(best, sum(inside) / n + (max(rest) if rest else 0.0))
    return best


def p_eckart_young(A):
    """min_k k/n + ||A - A_k|| with A_k the best rank-k approximation (LAPACK SVD)."""
    s = np.linalg.svd(A, compute_uv=False)
    n = A.shape[0]
    return min(k / n + (s[k] if k < n else 0.0) for k in range(n + 1))


def rand_matrix(rng, n, complex_=False):
    A = rng.standard_normal((n, n))
    if complex_:
        A = A + 1j * rng.standard_normal((n, n))
    return A


@pytest.mark.parametrize("complex_", [False, True])
def test_svd_jacobi_matches_lapack(complex_):
    rng = np.random.default_rng(0)
    for n in (1, 2, 3, 7, 20, 41):
        A = rand_matrix(rng, n, complex_)
        s, W, V = svd_jacobi(A, vectors=True)
        assert np.allclose(s, np.linalg.svd(A, compute_uv=False), rtol=1e-11, atol=1e-11)
        assert np.allclose(A @ V, W, atol=1e-10)
        assert np.allclose(V.conj().T @ V, np.eye(n), atol=1e-10)


def test_svd_jacobi_rank_deficient():
    rng = np.random.default_rng(1)
    u, v = rng.standard_normal((12, 2)), rng.standard_normal((2, 12))
    s = svd_jacobi(u @ v)
    assert np.allclose(s[2:], 0, atol=1e-12)
    assert np.allclose(s[:2], np.linalg.svd(u @ v, compute_uv=False)[:2], rtol=1e-12)


@pytest.mark.parametrize("complex_", [False, True])
def test_eigh_jacobi_matches_lapack(complex_):
    rng = np.random.default_rng(2)
    for n in (1, 2, 5, 30):
        A = rand_matrix(rng, n, complex_)
        H = A + A.conj().T
        assert np.allclose(np.sort(eigh_jacobi(H)), np.linalg.eigvalsh(H), atol=1e-11)


def test_eigh_rejects_non_hermitian():
    with pytest.raises(ValueError):
        eigh_jacobi(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_exact_p_values():
    for n in range(1, 65):
        assert p_value(np.zeros(n)) == 0.0
        assert p_value(np.eye(n)) == 1.0
    assert p_value(np.diag([1.0, 0, 0, 0])) == 0.25
    assert p_value(np.array([1.0, 0, 0, 0])) == 0.25


def test_p_value_dense_route_against_lapack_and_unitary_invariance():
    rng = np.random.default_rng(4)
    for n in (3, 8, 25):
        A = rand_matrix(rng, n, complex_=True) / n
        assert p_value(A) == pytest.approx(p_eckart_young(A), abs=1e-12)
        d = rng.standard_normal(n)
        Q, _ = np.linalg.qr(rand_matrix(rng, n, True))
        assert p_value(Q @ np.diag(d) @ Q.conj().T) == pytest.approx(p_value(d), abs=1e-12)


def test_p_value_subset_oracle_small():
    rng = np.random.default_rng(5)
    for _ in range(30):
        d = rng.standard_normal(rng.integers(1, 8)) * rng.choice([0.1, 1, 3])
        assert abs(p_value(d) - p_subset_oracle(d)) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 12).flatmap(lambda n: st.tuples(
    st.lists(st.floats(-3, 3), min_size=n, max_size=n),
    st.lists(st.floats(-3, 3), min_size=n, max_size=n))))
def test_p_subadditive_on_diagonals(ab):
    a, b = (np.array(v) for v in ab)
    assert p_value(a + b) <= p_value(a) + p_value(b) + 1e-12


def test_p_subadditive_on_dense():
    rng = np.random.default_rng(6)
    for n in (2, 5, 9):
        A, B = rand_matrix(rng, n) / 3, rand_matrix(rng, n, True) / 3
        assert p_value(A + B) <= p_value(A) + p_value(B) + 1e-12


@pytest.mark.parametrize("dense", [False, True])
def test_split_invariants(dense):
    rng = np.random.default_rng(7)
    for n in (1, 4, 10):
        A = rand_matrix(rng, n, True) / 2 if dense else np.diag(rng.standard_normal(n))
        sp = split_at_minimizer(A)
        assert np.allclose(sp.rank_part + sp.norm_part, A, atol=1e-12)
        assert np.linalg.matrix_rank(sp.rank_part, tol=1e-9) == sp.rank == sp.split_index - 1
        nrm = np.linalg.norm(sp.norm_part, 2) if n else 0.0
        assert nrm == pytest.approx(sp.norm, abs=1e-12)
        assert sp.p_value == pytest.approx(sp.rank / n + sp.norm, abs=1e-15)
        assert sp.p_value == pytest.approx(p_value(A), abs=1e-15)


def test_split_tie_goes_to_smallest_index():
    # objective (i-1)/n + sigma_i: for sigma = (0.5, 0.25) with n = 4 both 0.5 and 0.5
    sp = split_at_minimizer(np.diag([0.5, 0.25, 0.0, 0.0]))
    assert sp.split_index == 1 and sp.rank == 0


def test_shape_errors():
    with pytest.raises(ShapeError):
        p_value(np.ones((2, 3)))
    with pytest.raises(SizeError):
        singular_values(np.ones((5, 5)), dense_cap=4)


def test_shift_law_and_rank_one():
    A = DiagonalSequence.sampled(X)
    for m in range(2, 11):
        B = A + 1.0 / m
        r = d_acs_estimate(A, B)
        assert all(abs(p - 1 / m) <= 1e-9 for p in r.p_values)
    spike = DiagonalSequence(lambda n: np.eye(1, n).ravel() * 100.0, "e1*100")
    r = d_acs_estimate(A + spike, A)
    assert r.tail_estimate <= 1 / 64 + 1e-15
    assert r.p_values[-1] == pytest.approx(1 / 4096)


def test_dense_sequences_in_d_acs():
    rng = np.random.default_rng(8)

    def rank_one(n):
        u = rng.standard_normal(n)
        return np.outer(u, u) * 10

    r = d_acs_estimate(lambda n: np.diag(np.linspace(0, 1, n)) + rank_one(n),
                       lambda n: np.diag(np.linspace(0, 1, n)), (8, 16, 32), 2)
    assert r.p_values == pytest.approx((1 / 8, 1 / 16, 1 / 32), abs=1e-12)


def test_decomposition_recovery():
    A = DiagonalSequence.sampled(X)
    rep = acs_decomposition_recovery(A, lambda m: A + 1.0 / m, range(1, 9))
    assert rep.omega == pytest.approx(tuple(1 / m for m in range(1, 9)))
    assert rep.c == (0.0,) * 8
    assert rep.omega_non_increasing and rep.c_non_increasing
    assert rep.to_csv().splitlines()[1] == "m,omega,c"


def test_split_vanishing():
    assert split_vanishing_check(DiagonalSequence.harmonic()).verdict
    assert not split_vanishing_check(DiagonalSequence.identity()).verdict


def test_extraction_analytic_oracle():
    fam = lambda m: DiagonalSequence.sampled(X + 1.0 / m)
    res = diagonal_extraction(fam, (16, 32, 64, 128, 256), k_max=3, m_max=1100,
                              distance_oracle=lambda s, t: abs(1 / s - 1 / t))
    assert res.levels == (4, 8, 16)
    ms = [m for _, m in res.rows()]
    assert ms == sorted(ms) and res.reaches_top
    assert res.verification_decreasing


def test_extraction_with_measured_distances():
    fam = lambda m: DiagonalSequence.sampled(X + 1.0 / m)
    res = diagonal_extraction(fam, (16, 32, 64, 128), k_max=2, m_max=300)
    assert res.levels == (4, 8)
    assert res.reaches_top and res.verification_decreasing


def test_extraction_with_noise():
    # column m perturbed by a fixed-seed noise of size 1/(4 m): still Cauchy
    def fam(m):
        rng = np.random.default_rng(m)
        noise = rng.uniform(-1, 1, 4096)
        return DiagonalSequence(lambda n: X.sample(n) + 1.0 / m + noise[:n] / (4 * m), f"col{m}")

    res = diagonal_extraction(fam, (16, 32, 64, 128), k_max=2, m_max=200)
    ms = [m for _, m in res.rows()]
    assert ms == sorted(ms) and res.reaches_top


def test_extraction_error_on_non_cauchy_family():
    fam = lambda m: DiagonalSequence.constant(float(m))
    with pytest.raises(ExtractionError) as e:
        diagonal_extraction(fam, (8, 16, 32), k_max=2, m_max=20)
    assert e.value.level == 1
