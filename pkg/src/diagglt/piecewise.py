"""Piecewise convergence of diagonal sequences.

``D ⇀ k`` means the piecewise-linear interpolants of the diagonals (pinned to
0 at x = 0) converge in measure to ``k``.  For diagonal sequences this is the
same as having GLT symbol ``k(x)⊗1``, so a PASS here is labelled that way.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from diagglt import config
from diagglt.distribution import (DiscrepancyReport, ZeroTestReport, lambda_zero_check,
                                  verify_symbol, zero_distribution_test)
from diagglt.reports import Verdict, csv_text, tail_verdict
from diagglt.sequences import diagonal_of, interpolant
from diagglt.symbols import Symbol, as_symbol, ky_fan_distance


@dataclass(frozen=True, eq=False)
class PiecewiseReport:
    sizes: tuple
    distances: tuple
    verdict: Verdict
    sequence: str = ""
    symbol: str = ""
    resolution: int = config.DEFAULT_RESOLUTION

    @property
    def tail_value(self) -> float:
        return float(self.distances[-1])

    @property
    def label(self) -> str:
        if self.verdict:
            return f"GLT symbol {self.symbol}⊗1"
        return "no piecewise convergence"

    def header(self) -> dict:
        return {"report": "piecewise", "sequence": self.sequence, "symbol": self.symbol,
                "resolution": self.resolution, "schedule": list(self.sizes),
                "tail_value": self.tail_value, "label": self.label, **self.verdict.to_dict()}

    def to_csv(self, header_extra=None) -> str:
        return csv_text(["n", "d_M"], zip(self.sizes, self.distances),
                        {**self.header(), **(header_extra or {})})

    def to_dict(self) -> dict:
        return {**self.header(),
                "rows": [{"n": n, "d_M": d} for n, d in zip(self.sizes, self.distances)]}


def piecewise_distance(d, k, resolution=config.DEFAULT_RESOLUTION) -> float:
    """Ky Fan distance between the interpolant of diagonal ``d`` and ``k``."""
    return ky_fan_distance(interpolant(d), as_symbol(k), resolution)


def piecewise_convergence_check(seq, k, schedule=config.DEFAULT_SCHEDULE,
                                threshold=config.PIECEWISE_THRESHOLD,
                                tail_window=config.DEFAULT_TAIL_WINDOW,
                                resolution=config.DEFAULT_RESOLUTION) -> PiecewiseReport:
    """Table of ``d_M(interpolant(d^(n)), k)`` with a vanishing-tail verdict."""
    k = as_symbol(k)
    sizes = tuple(int(n) for n in schedule)
    if not sizes:
        raise ValueError("schedule must be non-empty")
    w = max(1, min(int(tail_window), len(sizes)))
    dist = tuple(piecewise_distance(diagonal_of(seq, n), k, resolution) for n in sizes)
    return PiecewiseReport(sizes, dist, tail_verdict(sizes, dist, threshold, w),
                           getattr(seq, "descriptor", repr(seq)), k.descriptor, resolution)


@dataclass(frozen=True, eq=False)
class ZeroEquivalenceReport:
    """The three equivalent zero conditions on one diagonal sequence."""

    piecewise: PiecewiseReport
    zero_test: ZeroTestReport
    eigen: DiscrepancyReport

    @property
    def verdicts(self) -> dict:
        return {"piecewise": self.piecewise.verdict.passed,
                "zero_distributed": self.zero_test.verdict.passed,
                "lambda_zero": self.eigen.verdict.passed}

    @property
    def agree(self) -> bool:
        return len(set(self.verdicts.values())) == 1

    def to_dict(self) -> dict:
        return {"report": "zero_equivalence", "verdicts": {k: ("PASS" if v else "FAIL")
                                                           for k, v in self.verdicts.items()},
                "agree": self.agree, "piecewise": self.piecewise.to_dict(),
                "zero_test": self.zero_test.to_dict(), "eigen": self.eigen.to_dict()}


def zerotratti_equivalence_suite(seq, schedule=config.DEFAULT_SCHEDULE,
                                 tail_window=config.DEFAULT_TAIL_WINDOW,
                                 eps_grid=config.DEFAULT_EPSILONS,
                                 resolution=config.DEFAULT_RESOLUTION) -> ZeroEquivalenceReport:
    """Runs ``D ⇀ 0``, the zero-distribution test and ``D ~_lambda 0`` side by side."""
    zero = Symbol.constant(0.0)
    return ZeroEquivalenceReport(
        piecewise_convergence_check(seq, zero, schedule, tail_window=tail_window,
                                    resolution=resolution),
        zero_distribution_test(seq, eps_grid, schedule, tail_window=tail_window),
        lambda_zero_check(seq, schedule, tail_window=tail_window, resolution=resolution),
    )


@dataclass(frozen=True, eq=False)
class ImplicationReport:
    piecewise: PiecewiseReport
    eigen: DiscrepancyReport

    @property
    def implication_holds(self) -> bool:
        """``piecewise PASS => eigen PASS`` on this instance."""
        return (not self.piecewise.verdict) or bool(self.eigen.verdict)

    def to_dict(self) -> dict:
        return {"report": "piecewise_implies_lambda",
                "piecewise": self.piecewise.verdict.label, "eigen": self.eigen.verdict.label,
                "implication_holds": self.implication_holds}


def piecewise_implies_lambda_check(seq, k, family=None, schedule=config.DEFAULT_SCHEDULE,
                                   tail_window=config.DEFAULT_TAIL_WINDOW,
                                   resolution=config.DEFAULT_RESOLUTION) -> ImplicationReport:
    k = as_symbol(k)
    return ImplicationReport(
        piecewise_convergence_check(seq, k, schedule, tail_window=tail_window,
                                    resolution=resolution),
        verify_symbol(seq, k, family, schedule, tail_window=tail_window, resolution=resolution),
    )
