import numpy as np
import pytest

from diagglt import (ConstructionError, DiagonalSequence, PreconditionError, RealnessError,
                     Symbol)
from diagglt.distribution import verify_symbol
from diagglt.glt_theorem import (build_approximant_schedule, construct_glt_permutation,
                                 is_permutation, mollify, permutation_matrix,
                                 rearrangement_transfer_check, sort_descending_permutation,
                                 sorted_converse_check)
from diagglt.piecewise import piecewise_convergence_check
from diagglt.sequences import interpolant
from diagglt.symbols import midpoints

SIN = Symbol.from_callable(lambda x: np.sin(np.pi * x), descriptor="sin(pi*x)", continuous=True)
COS_HALF = Symbol.from_callable(lambda y: np.cos(np.pi * y / 2), descriptor="cos(pi*y/2)")
JUMPY = Symbol.from_callable(lambda x: np.where(x < 0.5, 1.0, -1.0) * np.sin(1 / (x + 0.1)),
                             descriptor="jumpy")


def test_sort_permutation_is_stable_and_real_only():
    d = np.array([1.0, 3.0, 1.0, 2.0])
    q = sort_descending_permutation(d)
    assert q.tolist() == [1, 3, 0, 2]
    assert sort_descending_permutation(np.array([1 + 0j, 2 + 0j])).tolist() == [1, 0]
    with pytest.raises(RealnessError, match="order of the real line"):
        sort_descending_permutation(np.array([1j, 2.0]))


def test_permutation_matrix_convention():
    d = np.array([5.0, 6.0, 7.0])
    perm = np.array([2, 0, 1])
    P = permutation_matrix(perm)
    assert np.array_equal(np.diag(P @ np.diag(d) @ P.T), d[perm])
    assert is_permutation(perm) and not is_permutation(np.array([0, 0, 1]))


def test_mollify_keeps_affine_functions_inside():
    xs = midpoints(2**12)
    v = 3 * xs - 1
    sm = mollify(v, 8)
    inner = (xs > 0.2) & (xs < 0.8)
    assert np.allclose(sm[inner], v[inner], atol=1e-12)
    assert np.allclose(mollify(np.full(100, 2.0), 3), 2.0)


def test_continuous_symbol_needs_no_smoothing():
    s = build_approximant_schedule(SIN, k_max=4)
    assert all(d == 0.0 for d in s.approximation_distances.values())
    assert s.approximant(8) is SIN
    assert s.levels == (1, 2, 4, 8) and s.reaches_top


def test_discontinuous_symbol_schedule_regression():
    s = build_approximant_schedule(JUMPY)
    assert s.levels == (1, 8, 16, 32, 64, 128, 256)
    bps = [b for b in s.breakpoints if b is not None]
    assert bps == sorted(set(bps)) and s.reaches_top
    ms = [s.m_of(n) for n in s.sizes]
    assert ms == sorted(ms)
    for m in s.levels[1:]:
        assert s.approximant(m).continuous


def test_approximants_stall_raises():
    with pytest.raises(ConstructionError) as e:
        build_approximant_schedule(JUMPY, ladder=(1, 2), k_max=7)
    assert e.value.level is not None and e.value.level < 7


def test_transfer_to_rearrangement():
    r = rearrangement_transfer_check(DiagonalSequence.sampled(SIN), SIN)
    assert r.precondition.verdict and r.verdict
    # the same holds for the closed form cos(pi y / 2)
    assert verify_symbol(DiagonalSequence.sampled(SIN), COS_HALF).verdict
    bad = rearrangement_transfer_check(DiagonalSequence.identity(), SIN)
    assert not bad.verdict and "precondition" in bad.verdict.reason


def test_sorted_converse():
    dec = Symbol.from_callable(lambda x: 1 - x**2, descriptor="1-x^2")
    seq = DiagonalSequence.sampled(dec)
    rep = sorted_converse_check(seq, dec)
    assert rep.eigen.verdict and rep.piecewise.verdict and rep.holds
    with pytest.raises(PreconditionError):
        sorted_converse_check(DiagonalSequence.sampled(SIN), SIN)
    with pytest.raises(PreconditionError):
        sorted_converse_check(DiagonalSequence.shuffled(dec, 1), dec)


def test_theorem_demo_sin():
    r = construct_glt_permutation(DiagonalSequence.shuffled(SIN, 7), SIN)
    assert r.verdict
    assert r.permuted_check.tail_value <= 0.02
    assert r.sorted_check.tail_value <= 0.02
    n = r.plan.sizes[-1]
    d = DiagonalSequence.shuffled(SIN, 7)(n)
    assert is_permutation(r.plan.P[n], n)
    # the permuted diagonal is a rearrangement of the input, so eigen reports are unchanged
    assert np.array_equal(np.sort(r.permuted(n)), np.sort(d))
    a = verify_symbol(DiagonalSequence.shuffled(SIN, 7), SIN)
    b = verify_symbol(r.permuted, SIN)
    assert a.discrepancies == b.discrepancies
    lines = r.plan.to_csv(64).splitlines()
    assert lines[1] == "i,P(i)" and len(lines) == 66


def test_theorem_demo_discontinuous_symbol():
    r = construct_glt_permutation(DiagonalSequence.shuffled(JUMPY, 3), JUMPY)
    assert r.verdict
    dists = r.permuted_check.distances
    assert dists[-1] < dists[0]


def test_theorem_demo_precondition_and_realness():
    with pytest.raises(PreconditionError) as e:
        construct_glt_permutation(DiagonalSequence.identity(), SIN, schedule=(64, 128, 256))
    assert e.value.report is not None and not e.value.report.verdict
    cplx = DiagonalSequence(lambda n: np.full(n, 1j), "i")
    with pytest.raises(RealnessError):
        construct_glt_permutation(cplx, SIN, schedule=(64,))


STEP = Symbol.from_callable(lambda x: np.where(x < 0.3, 2.0, 1.0), descriptor="2 on [0,0.3), 1 after")
ONE_MINUS_X = Symbol.from_callable(lambda x: 1 - x, descriptor="1-x", continuous=True)
X = Symbol.from_callable(lambda x: x, descriptor="x", continuous=True)


def test_transfer_of_identity_to_reflection():
    r = rearrangement_transfer_check(DiagonalSequence.sampled(X), X)
    assert r.verdict and r.rearranged.tail_value <= 0.02
    shuffled = rearrangement_transfer_check(DiagonalSequence.shuffled(SIN, 7), SIN)
    assert shuffled.verdict


def test_transfer_of_decreasing_symbol_changes_nothing():
    g = Symbol.from_grid(ONE_MINUS_X.sample(2**12))
    r = rearrangement_transfer_check(DiagonalSequence.sampled(ONE_MINUS_X), g, m=2**12)
    assert r.rearranged.discrepancies == r.precondition.discrepancies


def test_sorted_sin_samples_converge_to_cos_half():
    seq = DiagonalSequence.sampled(SIN).sorted_descending()
    rep = sorted_converse_check(seq, COS_HALF)
    assert rep.eigen.verdict and rep.piecewise.verdict and rep.piecewise.tail_value <= 0.02
    sorted_shuffle = DiagonalSequence.shuffled(ONE_MINUS_X, 4).sorted_descending()
    assert sorted_converse_check(sorted_shuffle, ONE_MINUS_X).holds


def test_step_symbol_approximants():
    s = build_approximant_schedule(STEP)
    for m, d in s.approximation_distances.items():
        assert d <= 1.0 / m + 2.0 / 2**16
    r = piecewise_convergence_check(s.sampled_sequence(), STEP)
    assert r.verdict and r.tail_value <= 0.02


def test_capped_oscillation_regression():
    f = Symbol.from_callable(lambda x: np.sin(1 / np.maximum(x, 0.01)), descriptor="sin(1/x) capped")
    s = build_approximant_schedule(f)
    # slow growth: the last two levels are certified but not reached by n = 4096
    assert s.levels == (1, 4, 32, 128, 512, 2048, 8192)
    assert s.breakpoints == (64, 65, 66, 256, 1024, None, None)
    assert not s.reaches_top and s.m_of(4096) == 512


def test_constant_symbol_demo():
    c = Symbol.constant(0.5)
    r = construct_glt_permutation(DiagonalSequence.constant(0.5), c)
    assert r.verdict
    assert all(d <= 1 / n for n, d in zip(r.plan.sizes, r.permuted_check.distances))


def test_already_sorted_input_gives_identity():
    r = construct_glt_permutation(DiagonalSequence.sampled(ONE_MINUS_X), ONE_MINUS_X)
    assert r.verdict
    for n in r.plan.sizes:
        assert np.array_equal(r.plan.P[n], np.arange(n))


def test_sorting_is_idempotent_and_sorted_interpolants_decrease():
    r = construct_glt_permutation(DiagonalSequence.shuffled(SIN, 7), SIN)
    for n in r.plan.sizes:
        assert interpolant(r.sorted_sequence(n)).is_non_increasing()
    again = construct_glt_permutation(r.sorted_sequence, COS_HALF)
    for n in again.plan.sizes:
        assert np.array_equal(again.plan.Q[n], np.arange(n))
