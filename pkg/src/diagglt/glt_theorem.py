"""Reordering a real diagonal sequence into a diagonal GLT sequence.

Given diagonals ``D_n ~_lambda f`` (real ``f``), the pipeline builds
permutations ``P_n = S_n^T Q_n``: ``Q_n`` sorts ``D_n`` descending, ``S_n``
sorts the reference diagonal ``D'_n = D_n(f_{m(n)})`` descending, and ``P_n``
places the ``r``-th largest entry of ``D_n`` where ``D'_n`` has its ``r``-th
largest entry.  The result converges piecewise to ``f`` itself.

Permutations are stored as index arrays with the convention
``permuted = d[perm]``, i.e. ``(P D P^T)_{jj} = d[perm[j]]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from diagglt import config
from diagglt.distribution import (DiscrepancyReport, ZeroTestReport, verify_symbol,
                                  zero_distribution_test)
from diagglt.errors import ConstructionError, PreconditionError, RealnessError
from diagglt.piecewise import PiecewiseReport, piecewise_convergence_check, piecewise_distance
from diagglt.reports import Verdict, csv_text
from diagglt.sequences import DiagonalSequence, diag_sampling, diagonal_of
from diagglt.symbols import (Symbol, as_symbol, decreasing_rearrangement, default_family,
                             ky_fan_from_deviations, midpoints)

_COMPLEX_MSG = ("complex-valued diagonals are not supported: the permutation "
                "construction relies on the order of the real line")


def _real(d, what="diagonal"):
    d = np.asarray(d)
    if np.iscomplexobj(d):
        if np.any(d.imag != 0):
            raise RealnessError(f"{what}: {_COMPLEX_MSG}")
        d = d.real
    return d.astype(float, copy=False)


def sort_descending_permutation(d) -> np.ndarray:
    """Index array ``q`` with ``d[q]`` non-increasing; ties keep their original order."""
    return np.argsort(-_real(d), kind="stable")


def permutation_matrix(perm) -> np.ndarray:
    """``P`` with ``(P D P^T)_{jj} = d[perm[j]]``."""
    perm = np.asarray(perm)
    P = np.zeros((perm.size, perm.size))
    P[np.arange(perm.size), perm] = 1.0
    return P


def is_permutation(perm, n=None) -> bool:
    perm = np.asarray(perm)
    n = perm.size if n is None else n
    return perm.size == n and np.array_equal(np.sort(perm), np.arange(n))


# ---------------------------------------------------------------------------
# decreasing rearrangement as a symbol of the same sequence
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TransferReport:
    precondition: DiscrepancyReport
    rearranged: DiscrepancyReport

    @property
    def verdict(self) -> Verdict:
        v = self.rearranged.verdict
        if not self.precondition.verdict:
            return Verdict(False, "precondition violated: sequence does not verify f",
                           v.threshold, v.tail_window)
        return v

    def to_dict(self):
        return {"report": "rearrangement_transfer", "precondition": self.precondition.to_dict(),
                "rearranged": self.rearranged.to_dict(), **self.verdict.to_dict()}


def rearrangement_transfer_check(seq, f, family=None, schedule=config.DEFAULT_SCHEDULE,
                                 m=config.DEFAULT_RESOLUTION,
                                 tail_window=config.DEFAULT_TAIL_WINDOW,
                                 resolution=config.DEFAULT_RESOLUTION) -> TransferReport:
    """``seq ~_lambda f`` should carry over to the decreasing rearrangement of ``f``.

    Both verifications use the same test family, built from ``f`` by default.
    """
    f = as_symbol(f)
    f.require_real("rearrangement_transfer_check")
    if family is None:
        family = default_family(f, "eigen", resolution)
    kw = dict(schedule=schedule, tail_window=tail_window, resolution=resolution)
    pre = verify_symbol(seq, f, family, **kw)
    g = decreasing_rearrangement(f, m)
    return TransferReport(pre, verify_symbol(seq, g, family, **kw))


@dataclass(frozen=True, eq=False)
class ConverseReport:
    eigen: DiscrepancyReport
    piecewise: PiecewiseReport

    @property
    def holds(self) -> bool:
        """``eigen PASS => piecewise PASS`` on this instance."""
        return (not self.eigen.verdict) or bool(self.piecewise.verdict)

    def to_dict(self):
        return {"report": "sorted_converse", "eigen": self.eigen.verdict.label,
                "piecewise": self.piecewise.verdict.label, "holds": self.holds,
                "eigen_report": self.eigen.to_dict(), "piecewise_report": self.piecewise.to_dict()}


def sorted_converse_check(seq, f, family=None, schedule=config.DEFAULT_SCHEDULE,
                          tail_window=config.DEFAULT_TAIL_WINDOW,
                          resolution=config.DEFAULT_RESOLUTION) -> ConverseReport:
    """For non-increasing diagonals and non-increasing ``f``: ``~_lambda f`` gives ``⇀ f``.

    The interpolant's first cell, which rises from the pinned value 0, is not
    part of the monotonicity requirement.
    """
    f = as_symbol(f)
    f.require_real("sorted_converse_check")
    fv = f.values if f.kind == "grid" else f(midpoints(resolution))
    if np.any(np.diff(fv) > 1e-12 * max(1.0, np.abs(fv).max())):
        raise PreconditionError(f"symbol {f.descriptor!r} is not non-increasing")
    sizes = tuple(int(n) for n in schedule)
    bad = [n for n in sizes if np.any(np.diff(_real(diagonal_of(seq, n))) > 0)]
    if bad:
        raise PreconditionError(f"diagonals not non-increasing at sizes {bad}")
    eigen = verify_symbol(seq, f, family, sizes, tail_window=tail_window, resolution=resolution)
    pw = piecewise_convergence_check(seq, f, sizes, tail_window=tail_window,
                                     resolution=resolution)
    return ConverseReport(eigen, pw)


# ---------------------------------------------------------------------------
# continuous approximants and the crescent map m(n)
# ---------------------------------------------------------------------------

def _box(v, r):
    if r <= 0:
        return v
    p = np.pad(v, r, mode="symmetric")
    c = np.concatenate(([0.0], np.cumsum(p)))
    return (c[2 * r + 1:] - c[:-2 * r - 1]) / (2 * r + 1)


def mollify(values, m: int) -> np.ndarray:
    """Triangular-kernel smoothing of midpoint samples at scale ``1/m`` (mirror-padded ends)."""
    R = values.size
    r = int(round(R / (4.0 * m)))
    if np.iscomplexobj(values):
        return _box(_box(values.real, r), r) + 1j * _box(_box(values.imag, r), r)
    return _box(_box(values, r), r)


def _interp_closure(xs, ys, descriptor):
    if np.iscomplexobj(ys):
        re, im = ys.real.copy(), ys.imag.copy()
        func = lambda x: np.interp(x, xs, re) + 1j * np.interp(x, xs, im)
        return Symbol.from_callable(func, real=False, descriptor=descriptor, continuous=True)
    ys = ys.copy()
    return Symbol.from_callable(lambda x: np.interp(x, xs, ys), real=True,
                                descriptor=descriptor, continuous=True)


@dataclass(frozen=True, eq=False)
class ApproximantSchedule:
    """Continuous approximants ``f_m`` and the step map ``m(n)``.

    ``m(n) = M_k`` for ``N_k <= n < N_{k+1}`` and ``m(n) = 1`` before ``N_1``;
    ``breakpoints[k-1] is None`` means level ``k`` is not reached in the schedule.
    """

    symbol: Symbol
    levels: tuple
    breakpoints: tuple
    ladder: tuple
    approximation_distances: dict
    sizes: tuple
    approximant: Callable = field(repr=False)

    def m_of(self, n: int) -> int:
        m = 1
        for M, N in zip(self.levels, self.breakpoints):
            if N is not None and n >= N:
                m = M
            else:
                break
        return m

    @property
    def reaches_top(self) -> bool:
        return self.m_of(self.sizes[-1]) == self.levels[-1]

    def reference(self, n: int) -> np.ndarray:
        """``D'_n = D_n(f_{m(n)})``."""
        return diag_sampling(self.approximant(self.m_of(n)), n)

    def sampled_sequence(self) -> DiagonalSequence:
        return DiagonalSequence(self.reference, f"diag:{self.symbol.descriptor}_m(n)")

    def to_dict(self):
        return {"symbol": self.symbol.descriptor, "levels": list(self.levels),
                "breakpoints": list(self.breakpoints), "ladder": list(self.ladder),
                "approximation_distances": {str(m): d for m, d in
                                            self.approximation_distances.items()},
                "m_of_n": [{"n": n, "m": self.m_of(n)} for n in self.sizes]}


def build_approximant_schedule(f, schedule=config.DEFAULT_SCHEDULE, k_max=7, ladder=None,
                               tail_window=config.DEFAULT_TAIL_WINDOW,
                               resolution=config.DEFAULT_RESOLUTION) -> ApproximantSchedule:
    """Continuous approximants of ``f`` and an interleaved crescent map ``m(n)``.

    ``f_m`` is ``f`` itself when ``f`` is flagged continuous, otherwise the
    triangular mollification of ``f`` at scale ``1/m``, linearly interpolated
    between midpoint samples.  Indices ``m`` run over ``ladder`` (powers of
    two up to ``resolution/8`` by default).

    ``M_k`` is the first ladder index above ``M_{k-1}`` from which
    ``d_M(f_m, f) <= 2^-k`` for the rest of the ladder.  ``N~_m`` is the first
    scheduled size from which ``d_M(interpolant(D_n(f_m)), f_m) <= 2^-k``
    persists to the end of the schedule; ``N_1 = max_{m <= M_1} N~_m`` and
    ``N_k = max(max_{M_k <= m <= M_{k+1}} N~_m, N_{k-1} + 1)``.
    """
    f = as_symbol(f)
    sizes = tuple(int(n) for n in schedule)
    w = max(1, min(int(tail_window), len(sizes)))
    if ladder is None:
        top = max(1, resolution // 8)
        ladder = tuple(2**j for j in range(int(np.log2(top)) + 1))
    ladder = tuple(sorted(set(int(m) for m in ladder)))

    xs = midpoints(resolution)
    base = f(xs)
    approx_cache: dict = {}

    def approximant(m):
        if f.continuous:
            return f
        if m not in approx_cache:
            approx_cache[m] = mollify(base, m)
        return _interp_closure(xs, approx_cache[m], f"{f.descriptor}~{m}")

    dist = {}
    for m in ladder:
        if f.continuous:
            dist[m] = 0.0
        else:
            approximant(m)
            dist[m] = ky_fan_from_deviations(np.abs(approx_cache[m] - base))
    tail_sup = {m: max(dist[t] for t in ladder if t >= m) for m in ladder}

    levels = []
    for k in range(1, k_max + 1):
        floor_ = levels[-1] if levels else 0
        cand = [m for m in ladder if m > floor_ and tail_sup[m] <= 2.0 ** -k]
        if not cand:
            reached = k - 1
            raise ConstructionError(
                f"approximants of {f.descriptor!r} stall: d_M(f_m, f) never reaches 2^-{k} "
                f"on the ladder (last level reached: {reached})", level=reached)
        levels.append(cand[0])

    interp_cache: dict = {}

    def interp_dist(m, n):
        if (m, n) not in interp_cache:
            g = approximant(m)
            interp_cache[(m, n)] = piecewise_distance(diag_sampling(g, n), g, resolution)
        return interp_cache[(m, n)]

    def n_tilde(m, k):
        ok = [interp_dist(m, n) <= 2.0 ** -k for n in sizes]
        j = len(ok)
        while j > 0 and ok[j - 1]:
            j -= 1
        return sizes[j] if len(ok) - j >= w else None

    breakpoints = []
    prev = None
    for idx, k in enumerate(range(1, k_max + 1)):
        if idx == 0:
            block = [m for m in ladder if m <= levels[0]]
        else:
            hi = levels[idx + 1] if idx + 1 < len(levels) else levels[idx]
            block = [m for m in ladder if levels[idx] <= m <= hi]
        if idx > 0 and prev is None:
            breakpoints.append(None)
            continue
        nts = [n_tilde(m, k) for m in block]
        if any(t is None for t in nts):
            breakpoints.append(None)
            prev = None
            continue
        N = max(nts) if prev is None else max(max(nts), prev + 1)
        breakpoints.append(N)
        prev = N

    return ApproximantSchedule(f, tuple(levels), tuple(breakpoints), ladder,
                               {m: dist[m] for m in ladder}, sizes, approximant)


# ---------------------------------------------------------------------------
# the permutation pipeline
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PermutationPlan:
    """Per-size ``Q_n``, ``S_n`` and ``P_n = S_n^T Q_n`` as index arrays."""

    sizes: tuple
    Q: dict
    S: dict
    P: dict
    reference: str

    def apply(self, d, n=None):
        d = np.asarray(d)
        return d[self.P[n if n is not None else d.size]]

    def to_csv(self, n: int) -> str:
        perm = self.P[n]
        return csv_text(["i", "P(i)"], zip(range(1, n + 1), perm + 1),
                        {"report": "permutation", "n": n, "reference": self.reference,
                         "convention": "(P D P^T)_ii = d_P(i)"})


@dataclass(frozen=True, eq=False)
class GLTConstruction:
    plan: PermutationPlan
    precondition: DiscrepancyReport
    approximants: ApproximantSchedule
    sorted_check: PiecewiseReport
    difference_check: ZeroTestReport
    permuted_check: PiecewiseReport
    permuted: DiagonalSequence
    sorted_sequence: DiagonalSequence

    @property
    def sub_verdicts(self) -> dict:
        return {"sorted_vs_rearrangement": self.sorted_check.verdict,
                "difference_zero_distributed": self.difference_check.verdict,
                "permuted_vs_symbol": self.permuted_check.verdict}

    @property
    def verdict(self) -> Verdict:
        vs = self.sub_verdicts
        ok = all(v.passed for v in vs.values())
        bad = [k for k, v in vs.items() if not v]
        v = self.permuted_check.verdict
        return Verdict(ok, "all three sub-checks pass" if ok else "failed: " + ", ".join(bad),
                       v.threshold, v.tail_window)

    def to_dict(self):
        return {"report": "theorem_demo",
                "sub_verdicts": {k: v.to_dict() for k, v in self.sub_verdicts.items()},
                "tail_values": {"sorted_vs_rearrangement": self.sorted_check.tail_value,
                                "permuted_vs_symbol": self.permuted_check.tail_value},
                "label": self.permuted_check.label,
                "precondition": self.precondition.to_dict(),
                "approximants": self.approximants.to_dict(),
                "sorted_check": self.sorted_check.to_dict(),
                "difference_check": self.difference_check.to_dict(),
                "permuted_check": self.permuted_check.to_dict(),
                **self.verdict.to_dict()}


def construct_glt_permutation(seq, f, family=None, schedule=config.DEFAULT_SCHEDULE,
                              k_max=7, ladder=None,
                              eps_grid=config.DEFAULT_EPSILONS,
                              tail_window=config.DEFAULT_TAIL_WINDOW,
                              resolution=config.DEFAULT_RESOLUTION) -> GLTConstruction:
    """Build ``P_n`` with ``{P_n D_n P_n^T} ⇀ f`` and run the three sub-checks.

    (a) the ``Q``-sorted sequence converges piecewise to the decreasing
    rearrangement of ``f``; (b) ``S_n D'_n S_n^T - Q_n D_n Q_n^T`` is
    zero-distributed; (c) the permuted sequence converges piecewise to ``f``.

    Raises :class:`PreconditionError` when ``seq`` does not verify ``f``.
    """
    f = as_symbol(f)
    f.require_real("construct_glt_permutation")
    sizes = tuple(int(n) for n in schedule)
    diags = {n: _real(diagonal_of(seq, n), f"{getattr(seq, 'descriptor', 'seq')} at n={n}")
             for n in sizes}
    table_seq = DiagonalSequence.from_table(diags, getattr(seq, "descriptor", "seq"))
    pre = verify_symbol(table_seq, f, family, sizes, tail_window=tail_window,
                        resolution=resolution)
    if not pre.verdict:
        raise PreconditionError(f"sequence does not verify symbol {f.descriptor!r}: "
                                f"{pre.verdict.reason}", report=pre)
    approx = build_approximant_schedule(f, sizes, k_max, ladder, tail_window, resolution)

    Q, S, P, sorted_d, sorted_ref, permuted = {}, {}, {}, {}, {}, {}
    for n in sizes:
        d = diags[n]
        ref = _real(approx.reference(n), "reference diagonal")
        q = sort_descending_permutation(d)
        s = sort_descending_permutation(ref)
        p = np.empty(n, dtype=np.int64)
        p[s] = q
        Q[n], S[n], P[n] = q, s, p
        sorted_d[n], sorted_ref[n], permuted[n] = d[q], ref[s], d[p]

    plan = PermutationPlan(sizes, Q, S, P, f"diag:{f.descriptor}_m(n)")
    sorted_seq = DiagonalSequence.from_table(sorted_d, "Q D Q^T")
    diff_seq = DiagonalSequence.from_table({n: sorted_ref[n] - sorted_d[n] for n in sizes},
                                           "S D' S^T - Q D Q^T")
    perm_seq = DiagonalSequence.from_table(permuted, "P D P^T")
    g = decreasing_rearrangement(f, resolution)
    kw = dict(tail_window=tail_window, resolution=resolution)
    return GLTConstruction(
        plan, pre, approx,
        piecewise_convergence_check(sorted_seq, g, sizes, **kw),
        zero_distribution_test(diff_seq, eps_grid, sizes, tail_window=tail_window),
        piecewise_convergence_check(perm_seq, f, sizes, **kw),
        perm_seq, sorted_seq,
    )
