"""Empirical spectral / singular-value distributions and symbol verification.

A symbol ``k`` is checked against a sequence by comparing, for every test
function ``F`` of a finite family, the empirical mean ``(1/n) sum F(lambda_i)``
with ``integral F(k(x)) dx``.  Means are correctly rounded (``math.fsum``),
so every report is exactly invariant under permutations of a diagonal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from diagglt import config
from diagglt.acs import d_acs_estimate, singular_values
from diagglt.errors import ShapeError, SizeError
from diagglt.jacobi import eigh_jacobi
from diagglt.reports import Verdict, csv_text, tail_verdict
from diagglt.symbols import (Symbol, TestFamily, as_symbol, default_family, exact_mean,
                             ky_fan_distance, symbol_means)


@dataclass(frozen=True, eq=False)
class SpectralSample:
    values: np.ndarray
    mode: str = "eigen"

    def __post_init__(self):
        if self.mode not in ("eigen", "singular"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "singular" and np.any(np.asarray(self.values) < 0):
            raise ValueError("singular values must be non-negative")

    @property
    def n(self) -> int:
        return len(self.values)


def spectral_sample(A, mode="eigen", dense_cap=config.DENSE_CAP) -> SpectralSample:
    """Eigenvalues (diagonal or Hermitian dense input) or singular values of ``A``."""
    A = np.asarray(A)
    if mode == "singular":
        return SpectralSample(singular_values(A, dense_cap), "singular")
    if A.ndim == 1:
        return SpectralSample(A.copy(), "eigen")
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {A.shape}")
    if not np.count_nonzero(A - np.diag(np.diag(A))):
        return SpectralSample(np.diag(A).copy(), "eigen")
    if A.shape[0] > dense_cap:
        raise SizeError(f"dense size {A.shape[0]} exceeds cap {dense_cap}")
    try:
        return SpectralSample(eigh_jacobi(A), "eigen")
    except ValueError:
        raise ShapeError("eigen mode on dense input is limited to Hermitian matrices") from None


def empirical_mean(F: Callable, s: SpectralSample):
    """``(1/n) sum_i F(lambda_i)`` (or over singular values)."""
    return exact_mean(F(np.asarray(s.values)))


def _desc(x):
    return getattr(x, "descriptor", repr(x))


@dataclass(frozen=True, eq=False)
class DiscrepancyReport:
    """``sup_F |empirical mean - symbol mean|`` per size."""

    sizes: tuple
    discrepancies: tuple
    family: str
    mode: str
    verdict: Verdict
    sequence: str = ""
    symbol: str = ""
    resolution: int = config.DEFAULT_RESOLUTION

    @property
    def tail_value(self) -> float:
        return float(self.discrepancies[-1])

    @property
    def non_increasing_tail(self) -> bool:
        t = self.discrepancies[-self.verdict.tail_window:]
        return bool(np.all(np.diff(t) <= 0))

    def header(self) -> dict:
        return {"report": "verify", "sequence": self.sequence, "symbol": self.symbol,
                "mode": self.mode, "family": self.family, "resolution": self.resolution,
                "schedule": list(self.sizes), "tail_value": self.tail_value,
                "non_increasing_tail": self.non_increasing_tail, **self.verdict.to_dict()}

    def to_csv(self, header_extra=None) -> str:
        return csv_text(["n", "discrepancy"], zip(self.sizes, self.discrepancies),
                        {**self.header(), **(header_extra or {})})

    def to_dict(self) -> dict:
        return {**self.header(),
                "rows": [{"n": n, "discrepancy": d} for n, d in zip(self.sizes, self.discrepancies)]}


def _schedule(schedule, tail_window):
    sizes = tuple(int(n) for n in schedule)
    if not sizes:
        raise ValueError("schedule must be non-empty")
    return sizes, max(1, min(int(tail_window), len(sizes)))


def verify_symbol(seq, k, family: TestFamily | None = None, schedule=config.DEFAULT_SCHEDULE,
                  mode="eigen", threshold=config.DISCREPANCY_THRESHOLD,
                  tail_window=config.DEFAULT_TAIL_WINDOW,
                  resolution=config.DEFAULT_RESOLUTION,
                  dense_cap=config.DENSE_CAP) -> DiscrepancyReport:
    """Finite-size check of ``seq ~_lambda k`` (``mode='eigen'``) or ``seq ~_sigma k``.

    In singular mode the symbol side integrates ``F(|k(x)|)`` and the family
    must live on the real line.
    """
    k = as_symbol(k)
    sizes, w = _schedule(schedule, tail_window)
    if family is None:
        family = default_family(k, mode, resolution)
    if mode == "singular" and any(complex(F.center).imag != 0 for F in family):
        raise ValueError("singular mode needs a real test-function family")
    target = k.abs() if mode == "singular" else k
    sym = np.array(symbol_means(family, target, resolution))
    disc = []
    for n in sizes:
        s = spectral_sample(seq(n), mode, dense_cap)
        emp = np.array([empirical_mean(F, s) for F in family])
        disc.append(float(np.max(np.abs(emp - sym))))
    verdict = tail_verdict(sizes, disc, threshold, w)
    return DiscrepancyReport(sizes, tuple(disc), family.descriptor, mode, verdict,
                             _desc(seq), k.descriptor, resolution)


@dataclass(frozen=True, eq=False)
class ZeroTestReport:
    """Fractions ``#{i : sigma_i(A_n) > eps}/n`` per size and epsilon."""

    sizes: tuple
    epsilons: tuple
    fractions: np.ndarray  # shape (len(sizes), len(epsilons))
    per_epsilon: tuple
    sequence: str = ""

    @property
    def verdict(self) -> Verdict:
        ok = all(v.passed for v in self.per_epsilon)
        bad = [f"eps={e:g}: {v.reason}" for e, v in zip(self.epsilons, self.per_epsilon) if not v]
        first = self.per_epsilon[0]
        return Verdict(ok, "all epsilons vanish" if ok else "; ".join(bad),
                       first.threshold, first.tail_window)

    def fraction(self, n, eps) -> float:
        return float(self.fractions[self.sizes.index(n), self.epsilons.index(eps)])

    def rows(self):
        return [(n, e, self.fractions[i, j]) for i, n in enumerate(self.sizes)
                for j, e in enumerate(self.epsilons)]

    def header(self) -> dict:
        return {"report": "zero_test", "sequence": self.sequence, "schedule": list(self.sizes),
                "epsilons": list(self.epsilons),
                "per_epsilon": {repr(e): v.label for e, v in zip(self.epsilons, self.per_epsilon)},
                **self.verdict.to_dict()}

    def to_csv(self, header_extra=None) -> str:
        return csv_text(["n", "epsilon", "fraction"], self.rows(),
                        {**self.header(), **(header_extra or {})})

    def to_dict(self) -> dict:
        return {**self.header(), "rows": [{"n": n, "epsilon": e, "fraction": f}
                                          for n, e, f in self.rows()]}


def zero_distribution_test(seq, eps_grid=config.DEFAULT_EPSILONS,
                           schedule=config.DEFAULT_SCHEDULE,
                           threshold=config.ZERO_FRACTION_THRESHOLD,
                           tail_window=config.DEFAULT_TAIL_WINDOW,
                           dense_cap=config.DENSE_CAP) -> ZeroTestReport:
    """Is ``seq`` zero-distributed?  Every epsilon's count fraction must vanish along the tail."""
    eps = tuple(float(e) for e in eps_grid)
    if not eps or min(eps) <= 0:
        raise ValueError("epsilon grid must contain positive values")
    sizes, w = _schedule(schedule, tail_window)
    frac = np.empty((len(sizes), len(eps)))
    for i, n in enumerate(sizes):
        s = np.sort(singular_values(seq(n), dense_cap))
        frac[i] = (s.size - np.searchsorted(s, eps, side="right")) / s.size
    verdicts = tuple(tail_verdict(sizes, frac[:, j], threshold, w) for j in range(len(eps)))
    return ZeroTestReport(sizes, eps, frac, verdicts, _desc(seq))


def lambda_zero_check(seq, schedule=config.DEFAULT_SCHEDULE, **kw) -> DiscrepancyReport:
    """Eigen-mode verification against ``k = 0``."""
    return verify_symbol(seq, Symbol.constant(0.0), schedule=schedule, **kw)


# ---------------------------------------------------------------------------
# property checks for sums and a.c.s. limits of diagonal sequences
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ZeroSumReport:
    base: DiscrepancyReport
    perturbation: ZeroTestReport
    report: DiscrepancyReport
    widening: float
    widening_epsilon: float

    @property
    def failed_preconditions(self) -> list:
        out = []
        if not self.base.verdict:
            out.append("base sequence does not verify its symbol")
        if not self.perturbation.verdict:
            out.append("perturbation is not zero-distributed")
        return out

    @property
    def verdict(self) -> Verdict:
        v = self.report.verdict
        if self.failed_preconditions:
            return Verdict(False, "precondition violated: " + "; ".join(self.failed_preconditions),
                           v.threshold, v.tail_window)
        return v

    def to_dict(self) -> dict:
        return {"report": "zero_sum", "widening": self.widening,
                "widening_epsilon": self.widening_epsilon,
                "failed_preconditions": self.failed_preconditions,
                "base": self.base.to_dict(), "perturbation": self.perturbation.to_dict(),
                "sum": self.report.to_dict(), **self.verdict.to_dict()}


def zero_sum_property_check(D, f, Z, family: TestFamily | None = None,
                            schedule=config.DEFAULT_SCHEDULE,
                            threshold=config.DISCREPANCY_THRESHOLD,
                            eps_grid=config.DEFAULT_EPSILONS,
                            tail_window=config.DEFAULT_TAIL_WINDOW,
                            resolution=config.DEFAULT_RESOLUTION) -> ZeroSumReport:
    """``D ~_lambda f`` and ``Z ~_sigma 0`` should give ``D + Z ~_lambda f``.

    The sum's pass threshold is widened by the finite-size bound
    ``min_eps [2 #{|z_i| > eps}/n + omega_F(eps)]`` at the largest size.
    """
    f = as_symbol(f)
    if family is None:
        family = default_family(f, "eigen", resolution)
    kw = dict(schedule=schedule, tail_window=tail_window, resolution=resolution)
    base = verify_symbol(D, f, family, threshold=threshold, **kw)
    zt = zero_distribution_test(Z, eps_grid, schedule, tail_window=tail_window)
    n_last = zt.sizes[-1]
    cands = [(2 * zt.fraction(n_last, e) + family.modulus(e), e) for e in zt.epsilons]
    widening, w_eps = min(cands)
    total = verify_symbol(D + Z, f, family, threshold=threshold + widening, **kw)
    return ZeroSumReport(base, zt, total, widening, w_eps)


@dataclass(frozen=True, eq=False)
class CommutationReport:
    ms: tuple
    member_reports: tuple
    acs_distances: tuple
    symbol_distances: tuple
    acs_verdict: Verdict
    measure_verdict: Verdict
    conclusion: DiscrepancyReport

    @property
    def hypotheses(self) -> dict:
        return {"members_verify": all(r.verdict.passed for r in self.member_reports),
                "acs_convergence": self.acs_verdict.passed,
                "measure_convergence": self.measure_verdict.passed}

    @property
    def hypotheses_hold(self) -> bool:
        return all(self.hypotheses.values())

    @property
    def verdict(self) -> Verdict:
        v = self.conclusion.verdict
        if not self.hypotheses_hold:
            bad = [k for k, ok in self.hypotheses.items() if not ok]
            return Verdict(False, "hypothesis violated: " + ", ".join(bad), v.threshold, v.tail_window)
        return v

    def to_dict(self) -> dict:
        return {"report": "acs_limit_commutation", "ms": list(self.ms),
                "acs_distances": list(self.acs_distances),
                "symbol_distances": list(self.symbol_distances),
                "hypotheses": self.hypotheses, "conclusion": self.conclusion.to_dict(),
                **self.verdict.to_dict()}


def acs_limit_commutation_check(D, family: Callable, a, ms: Sequence[int] = (1, 2, 4, 8, 16, 32, 64),
                                test_family: TestFamily | None = None,
                                schedule=config.DEFAULT_SCHEDULE,
                                threshold=config.DISCREPANCY_THRESHOLD,
                                tail_window=config.DEFAULT_TAIL_WINDOW,
                                resolution=config.DEFAULT_RESOLUTION) -> CommutationReport:
    """Closure of ``~_lambda`` under a.c.s. limits plus convergence in measure of the symbols.

    ``family(m)`` returns ``(D_m, a_m)``: the approximating diagonal sequence
    and its symbol.  Only the finitely many ``ms`` are examined; both the
    a.c.s. distances and the Ky Fan distances must vanish along ``ms``
    (same tail rule as for sizes).
    """
    a = as_symbol(a)
    if test_family is None:
        test_family = default_family(a, "eigen", resolution)
    kw = dict(schedule=schedule, threshold=threshold, tail_window=tail_window,
              resolution=resolution)
    members, dacs, dm = [], [], []
    for m in ms:
        Dm, am = family(m)
        am = as_symbol(am)
        members.append(verify_symbol(Dm, am, **kw))
        dacs.append(d_acs_estimate(D, Dm, schedule, tail_window).tail_estimate)
        dm.append(ky_fan_distance(am, a, resolution))
    mw = min(tail_window, len(ms))
    conclusion = verify_symbol(D, a, test_family, **kw)
    return CommutationReport(tuple(ms), tuple(members), tuple(dacs), tuple(dm),
                             tail_verdict(ms, dacs, threshold, mw),
                             tail_verdict(ms, dm, threshold, mw), conclusion)
