"""The a.c.s. pseudometric: singular values, ``p(A)``, minimising splits, d_acs.

Matrices are either 2-D arrays or 1-D arrays standing for diagonal matrices.
Diagonal inputs (1-D, or 2-D with no off-diagonal entries) take an exact
fast path with no size cap.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from diagglt import config
from diagglt.errors import ExtractionError, ShapeError, SizeError
from diagglt.jacobi import svd_jacobi
from diagglt.reports import Verdict, csv_text, tail_verdict


def _as_square(A):
    A = np.asarray(A)
    if A.ndim == 1:
        return A
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {A.shape}")
    return A


def _is_diagonal(A) -> bool:
    return A.ndim == 1 or not np.count_nonzero(A - np.diag(np.diag(A)))


def _desc_order(a):
    """Stable descending order (ties keep original index order)."""
    return np.argsort(-np.asarray(a), kind="stable")


def singular_values(A, dense_cap=config.DENSE_CAP) -> np.ndarray:
    """``sigma_1 >= ... >= sigma_n >= 0``; exact sorted ``|d_i|`` for diagonal input."""
    A = _as_square(A)
    if _is_diagonal(A):
        d = np.abs(A if A.ndim == 1 else np.diag(A))
        return d[_desc_order(d)]
    if A.shape[0] > dense_cap:
        raise SizeError(f"dense size {A.shape[0]} exceeds cap {dense_cap}")
    return svd_jacobi(A)


def _objective(sigma) -> np.ndarray:
    """``(i-1)/n + sigma_i`` for ``i = 1..n+1`` with ``sigma_{n+1} = 0``."""
    n = sigma.size
    return np.arange(n + 1) / n + np.append(sigma, 0.0)


def _minimiser(sigma) -> int:
    """0-based index ``i* - 1`` of the minimum; near-ties go to the smallest ``i``."""
    vals = _objective(sigma)
    best = vals.min()
    return int(np.flatnonzero(vals <= best + 4 * np.finfo(float).eps * max(1.0, best))[0])


def p_value(A, dense_cap=config.DENSE_CAP) -> float:
    """``p(A) = min_i (i-1)/n + sigma_i(A)``."""
    sigma = singular_values(A, dense_cap)
    if sigma.size == 0:
        raise ShapeError("p(A) needs a non-empty matrix")
    return float(_objective(sigma)[_minimiser(sigma)])


@dataclass(frozen=True, eq=False)
class SplitDecomposition:
    """``A = rank_part + norm_part`` at the minimising index ``split_index`` (1-based ``i*``)."""

    rank_part: np.ndarray
    norm_part: np.ndarray
    split_index: int
    p_value: float
    singular_values: np.ndarray

    @property
    def n(self) -> int:
        return self.singular_values.size

    @property
    def rank(self) -> int:
        return self.split_index - 1

    @property
    def norm(self) -> float:
        s = self.singular_values
        return float(s[self.split_index - 1]) if self.split_index <= s.size else 0.0


def split_at_minimizer(A, dense_cap=config.DENSE_CAP) -> SplitDecomposition:
    """Low-rank plus small-norm split realising ``p(A)``.

    Diagonal input gives diagonal parts: the ``i* - 1`` largest entries in
    modulus go to the rank part.  Dense input uses ``A V = W`` from the
    one-sided Jacobi SVD: ``R = W[:, :k] V[:, :k]^H``, ``N = A - R``.
    """
    A = _as_square(A)
    if A.size == 0:
        raise ShapeError("split needs a non-empty matrix")
    if _is_diagonal(A):
        d = A if A.ndim == 1 else np.diag(A)
        order = _desc_order(np.abs(d))
        sigma = np.abs(d)[order]
        k = _minimiser(sigma)
        R = np.zeros_like(d)
        R[order[:k]] = d[order[:k]]
        N = d - R
        if A.ndim == 2:
            R, N = np.diag(R), np.diag(N)
    else:
        if A.shape[0] > dense_cap:
            raise SizeError(f"dense size {A.shape[0]} exceeds cap {dense_cap}")
        sigma, W, V = svd_jacobi(A, vectors=True)
        k = _minimiser(sigma)
        R = W[:, :k] @ V[:, :k].conj().T
        if not np.iscomplexobj(A):
            R = R.real
        N = A - R
    p = float(_objective(sigma)[k])
    return SplitDecomposition(R, N, k + 1, p, sigma)


def difference(a, b):
    """``a - b`` where either side may be a diagonal vector or a matrix."""
    a, b = np.asarray(a), np.asarray(b)
    if a.ndim != b.ndim:
        a = np.diag(a) if a.ndim == 1 else a
        b = np.diag(b) if b.ndim == 1 else b
    if a.shape != b.shape:
        raise ShapeError(f"size mismatch: {a.shape} vs {b.shape}")
    return a - b


# ---------------------------------------------------------------------------
# sequences
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class AcsReport:
    """``p(A_n - B_n)`` over a schedule and the tail-max stand-in for the limsup."""

    sizes: tuple
    p_values: tuple
    tail_window: int
    descriptor: str = ""

    @property
    def tail_estimate(self) -> float:
        return float(max(self.p_values[-self.tail_window:]))

    def header(self) -> dict:
        return {"report": "d_acs", "pair": self.descriptor, "schedule": list(self.sizes),
                "tail_window": self.tail_window, "tail_estimate": self.tail_estimate}

    def to_csv(self, header_extra=None) -> str:
        h = {**self.header(), **(header_extra or {})}
        return csv_text(["n", "p"], zip(self.sizes, self.p_values), h)

    def to_dict(self) -> dict:
        return {**self.header(), "rows": [{"n": n, "p": p} for n, p in zip(self.sizes, self.p_values)]}


def _desc(x):
    return getattr(x, "descriptor", repr(x))


def _check_schedule(schedule, tail_window):
    sizes = tuple(int(n) for n in schedule)
    if not sizes:
        raise ValueError("schedule must be non-empty")
    if tail_window < 1:
        raise ValueError("tail_window must be at least 1")
    return sizes, min(int(tail_window), len(sizes))


def d_acs_estimate(A, B, schedule=config.DEFAULT_SCHEDULE,
                   tail_window=config.DEFAULT_TAIL_WINDOW,
                   dense_cap=config.DENSE_CAP) -> AcsReport:
    """Table of ``p(A_n - B_n)``; the tail estimate is the max over the last ``tail_window`` sizes."""
    sizes, w = _check_schedule(schedule, tail_window)
    ps = tuple(p_value(difference(A(n), B(n)), dense_cap) for n in sizes)
    return AcsReport(sizes, ps, w, f"{_desc(A)} vs {_desc(B)}")


@dataclass(frozen=True, eq=False)
class RecoveryReport:
    """Per-``m`` tail maxima of ``||N_{n,m}||`` (omega) and ``rank(R_{n,m})/n`` (c)."""

    ms: tuple
    omega: tuple
    c: tuple
    sizes: tuple
    tail_window: int

    @property
    def omega_non_increasing(self) -> bool:
        return bool(np.all(np.diff(self.omega) <= 1e-12))

    @property
    def c_non_increasing(self) -> bool:
        return bool(np.all(np.diff(self.c) <= 1e-12))

    def to_csv(self) -> str:
        h = {"report": "acs_recovery", "schedule": list(self.sizes), "tail_window": self.tail_window}
        return csv_text(["m", "omega", "c"], zip(self.ms, self.omega, self.c), h)


def acs_decomposition_recovery(A, family: Callable, ms: Sequence[int],
                               schedule=config.DEFAULT_SCHEDULE,
                               tail_window=config.DEFAULT_TAIL_WINDOW,
                               dense_cap=config.DENSE_CAP) -> RecoveryReport:
    """Recover the ``omega(m)``, ``c(m)`` tables of ``A_n = B_{n,m} + N_{n,m} + R_{n,m}``.

    ``family(m)`` returns the sequence ``{B_{n,m}}_n``.
    """
    sizes, w = _check_schedule(schedule, tail_window)
    omega, c = [], []
    for m in ms:
        B = family(m)
        splits = [split_at_minimizer(difference(A(n), B(n)), dense_cap) for n in sizes[-w:]]
        omega.append(max(s.norm for s in splits))
        c.append(max(s.rank / s.n for s in splits))
    return RecoveryReport(tuple(ms), tuple(omega), tuple(c), sizes, w)


@dataclass(frozen=True, eq=False)
class SplitVanishingReport:
    """``rank(R_n)/n`` and ``||N_n||`` of the minimising split along a schedule."""

    sizes: tuple
    rank_fraction: tuple
    norm: tuple
    rank_verdict: Verdict
    norm_verdict: Verdict

    @property
    def verdict(self) -> Verdict:
        ok = self.rank_verdict.passed and self.norm_verdict.passed
        return Verdict(ok, f"rank: {self.rank_verdict.reason}; norm: {self.norm_verdict.reason}",
                       self.rank_verdict.threshold, self.rank_verdict.tail_window)


def split_vanishing_check(seq, schedule=config.DEFAULT_SCHEDULE,
                          tail_window=config.DEFAULT_TAIL_WINDOW,
                          threshold=config.ZERO_FRACTION_THRESHOLD,
                          dense_cap=config.DENSE_CAP) -> SplitVanishingReport:
    """Checks ``rank(R_n) = o(n)`` and ``||N_n|| = o(1)`` on the minimising splits."""
    sizes, w = _check_schedule(schedule, tail_window)
    splits = [split_at_minimizer(seq(n), dense_cap) for n in sizes]
    rf = tuple(s.rank / s.n for s in splits)
    nm = tuple(s.norm for s in splits)
    return SplitVanishingReport(sizes, rf, nm, tail_verdict(sizes, rf, threshold, w),
                                tail_verdict(sizes, nm, threshold, w))


# ---------------------------------------------------------------------------
# diagonal extraction from a Cauchy family
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ExtractionResult:
    """Step map ``m(n) = M_k`` for ``N_k <= n < N_{k+1}`` (``1`` before ``N_1``).

    ``breakpoints[k-1]`` is ``N_k`` or ``None`` when that level is never
    reached inside the schedule.
    """

    levels: tuple
    breakpoints: tuple
    sizes: tuple
    family: Callable
    verification_columns: tuple = ()
    verification_distances: tuple = ()
    tail_window: int = config.DEFAULT_TAIL_WINDOW

    def m_of(self, n: int) -> int:
        m = 1
        for M, N in zip(self.levels, self.breakpoints):
            if N is not None and n >= N:
                m = M
            else:
                break
        return m

    @property
    def top_level(self) -> int:
        return self.levels[-1]

    @property
    def reaches_top(self) -> bool:
        return self.m_of(self.sizes[-1]) == self.top_level

    @property
    def verification_decreasing(self) -> bool:
        return bool(np.all(np.diff(self.verification_distances) <= 1e-12))

    def extracted(self):
        """The diagonal sequence ``n -> B_{n, m(n)}``."""
        fam = self.family
        return _FamilyDiagonal(fam, self.m_of)

    def rows(self):
        return [(n, self.m_of(n)) for n in self.sizes]

    def to_csv(self, header_extra=None) -> str:
        h = {"report": "extraction", "levels": list(self.levels),
             "breakpoints": list(self.breakpoints), "schedule": list(self.sizes),
             "tail_window": self.tail_window, **(header_extra or {})}
        return csv_text(["n", "m_of_n"], self.rows(), h)

    def verification_csv(self) -> str:
        return csv_text(["m", "d_acs"], zip(self.verification_columns, self.verification_distances),
                        {"report": "extraction_verification", "levels": list(self.levels)})

    def to_dict(self) -> dict:
        return {"levels": list(self.levels), "breakpoints": list(self.breakpoints),
                "schedule": list(self.sizes), "reaches_top": self.reaches_top,
                "m_of_n": [{"n": n, "m": m} for n, m in self.rows()],
                "verification": [{"m": m, "d_acs": d} for m, d in
                                 zip(self.verification_columns, self.verification_distances)],
                "verification_decreasing": self.verification_decreasing}


class _FamilyDiagonal:
    def __init__(self, family, m_of):
        self.family, self.m_of = family, m_of
        self.descriptor = "extracted"

    def __call__(self, n):
        return self.family(self.m_of(n))(n)


def _persistent_start(sizes, ok, tail_window):
    """First size from which ``ok`` holds through the end of the schedule, covering the tail."""
    j = len(ok)
    while j > 0 and ok[j - 1]:
        j -= 1
    if len(ok) - j < tail_window:
        return None
    return sizes[j]


def diagonal_extraction(family: Callable, schedule=config.DEFAULT_SCHEDULE, k_max=3,
                        m_max=1024, distance_oracle=None,
                        tail_window=config.DEFAULT_TAIL_WINDOW,
                        dense_cap=config.DENSE_CAP, max_full_pairs=600) -> ExtractionResult:
    """Extract ``{B_{n,m(n)}}`` from a d_acs-Cauchy family ``m -> {B_{n,m}}_n``.

    ``M_k`` is the first column ``m < m_max`` (strictly above ``M_{k-1}``) with
    ``2 * max_{m < t <= m_max} d(m, t) <= 2^-k``, a triangle-inequality bound
    on ``sup_{s,t >= m} d(s, t)``.  ``N_{s,t}`` is the first scheduled size
    from which ``p(B_{n,s} - B_{n,t}) <= 2^(1-k)`` holds through the end of the
    schedule (covering at least the tail window); ``N~_k`` is the max over the
    pairs of the block ``[M_k, M_{k+1}]`` and ``N_k = max(N~_k, N_{k-1} + 1)``.
    Large blocks only use the pairs touching a block end, which are the ones
    entering the subadditive chain bound.
    """
    sizes, w = _check_schedule(schedule, tail_window)
    columns: dict = {}

    def col(m):
        if m not in columns:
            columns[m] = family(m)
        return columns[m]

    cache: dict = {}

    def dist(s, t):
        key = (min(s, t), max(s, t))
        if key not in cache:
            if distance_oracle is not None:
                cache[key] = float(distance_oracle(*key))
            else:
                cache[key] = d_acs_estimate(col(key[0]), col(key[1]), sizes, w, dense_cap).tail_estimate
        return cache[key]

    cert_cache: dict = {}

    def certificate(m):
        if m not in cert_cache:
            cert_cache[m] = 2.0 * max(dist(m, t) for t in range(m + 1, m_max + 1))
        return cert_cache[m]

    def find_level(k, start):
        for m in range(start, m_max):
            if certificate(m) <= 2.0 ** -k:
                return m
        return None

    levels = []
    prev = 0
    for k in range(1, k_max + 1):
        M = find_level(k, prev + 1)
        if M is None:
            raise ExtractionError(f"family not certified Cauchy at level k={k}: no column "
                                  f"m < {m_max} has sup distance <= 2^-{k}", level=k)
        levels.append(M)
        prev = M
    upper_top = find_level(k_max + 1, prev + 1) or m_max

    p_cache: dict = {}

    def p_row(s, t):
        key = (min(s, t), max(s, t))
        if key not in p_cache:
            A, B = col(key[0]), col(key[1])
            p_cache[key] = [p_value(difference(A(n), B(n)), dense_cap) for n in sizes]
        return p_cache[key]

    def block_pairs(lo, hi):
        cols = range(lo, hi + 1)
        if len(cols) * (len(cols) - 1) // 2 <= max_full_pairs:
            return list(itertools.combinations(cols, 2))
        pairs = {(lo, t) for t in cols if t > lo} | {(s, hi) for s in cols if s < hi}
        return sorted(pairs)

    breakpoints = []
    prev_N = None
    for idx, k in enumerate(range(1, k_max + 1)):
        lo = levels[idx]
        hi = levels[idx + 1] if idx + 1 < len(levels) else upper_top
        bound = 2.0 ** (1 - k)
        n_tilde = sizes[0]
        for s, t in block_pairs(lo, hi):
            ok = [p <= bound for p in p_row(s, t)]
            start = _persistent_start(sizes, ok, w)
            if start is None:
                n_tilde = None
                break
            n_tilde = max(n_tilde, start)
        if n_tilde is None or (k > 1 and prev_N is None):
            breakpoints.append(None)
            prev_N = None
            continue
        N = n_tilde if prev_N is None else max(n_tilde, prev_N + 1)
        breakpoints.append(N)
        prev_N = N

    result = ExtractionResult(tuple(levels), tuple(breakpoints), sizes, col, tail_window=w)
    top = levels[-1]
    check_cols = tuple(range(1, top + 1)) if top <= 64 else tuple(sorted(
        {1, *levels, *(2**j for j in range(int(np.log2(top)) + 1))}))
    ext = result.extracted()
    dists = tuple(d_acs_estimate(ext, col(m), sizes, w, dense_cap).tail_estimate for m in check_cols)
    return ExtractionResult(tuple(levels), tuple(breakpoints), sizes, col,
                            check_cols, dists, w)
