"""Deterministic diagonal and dense matrix sequences, and diagonal interpolants."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from diagglt import config
from diagglt.errors import ShapeError, SizeError
from diagglt.symbols import Symbol, as_symbol, nodes


def _check_size(n, cap=None):
    if int(n) != n or n < 1:
        raise SizeError(f"matrix size must be a positive integer, got {n!r}")
    if cap is not None and n > cap:
        raise SizeError(f"size {n} exceeds the configured cap {cap}")


def geometric_schedule(first: int, last: int) -> tuple:
    """Doubling sizes ``first, 2*first, ...`` up to and including ``last``."""
    if first < 1 or last < first:
        raise ValueError(f"bad schedule bounds {first}..{last}")
    out = []
    n = first
    while n <= last:
        out.append(n)
        n *= 2
    return tuple(out)


def fisher_yates(n: int, seed: int) -> np.ndarray:
    """Seeded uniform permutation of ``range(n)``.

    Draws raw 64-bit words from ``numpy.random.PCG64(seed)`` (whose raw stream
    is version-stable) and runs a descending Fisher-Yates pass with the
    multiply-shift map ``j = (r * (i + 1)) >> 64``.
    """
    perm = list(range(n))
    if n < 2:
        return np.array(perm, dtype=np.int64)
    raw = np.random.PCG64(int(seed)).random_raw(n - 1)
    for step, i in enumerate(range(n - 1, 0, -1)):
        j = (int(raw[step]) * (i + 1)) >> 64
        perm[i], perm[j] = perm[j], perm[i]
    return np.array(perm, dtype=np.int64)


def diag_sampling(a, n: int) -> np.ndarray:
    """Diagonal of ``D_n(a)``: entries ``a(i/n)``, ``i = 1..n``."""
    _check_size(n)
    return as_symbol(a)(nodes(n))


def shuffled_sampling(a, n: int, seed: int) -> np.ndarray:
    """``diag_sampling(a, n)`` in a seeded random order."""
    d = diag_sampling(a, n)
    return d[fisher_yates(n, seed)]


@dataclass(frozen=True, eq=False)
class DiagonalSequence:
    """Map ``n -> d^(n)`` (length-``n`` diagonal), pure in ``(descriptor, seed, n)``."""

    generator: Callable[[int], np.ndarray]
    descriptor: str = ""
    seed: int | None = None
    cap: int | None = config.DIAGONAL_CAP

    def __call__(self, n: int) -> np.ndarray:
        _check_size(n, self.cap)
        d = np.asarray(self.generator(n))
        if d.shape != (n,):
            raise ShapeError(f"{self.descriptor}: generator returned shape {d.shape} for n={n}")
        return d

    # constructors -----------------------------------------------------
    @classmethod
    def sampled(cls, a, **kw):
        a = as_symbol(a)
        return cls(lambda n: diag_sampling(a, n), f"diag:{a.descriptor}", **kw)

    @classmethod
    def shuffled(cls, a, seed: int, **kw):
        a = as_symbol(a)
        return cls(lambda n: shuffled_sampling(a, n, seed),
                   f"shuffle:{a.descriptor}", seed=seed, **kw)

    @classmethod
    def harmonic(cls, **kw):
        return cls(lambda n: 1.0 / np.arange(1, n + 1), "diag:1/i", **kw)

    @classmethod
    def constant(cls, c, **kw):
        return cls(lambda n: np.full(n, c), f"const:{c!r}", **kw)

    @classmethod
    def identity(cls, **kw):
        return cls(lambda n: np.ones(n), "identity", **kw)

    @classmethod
    def from_table(cls, table: dict, descriptor="table", **kw):
        """Explicit diagonals per size, e.g. read from a file."""
        def gen(n):
            try:
                return np.asarray(table[n])
            except KeyError:
                raise SizeError(f"{descriptor}: no diagonal stored for n={n}") from None
        return cls(gen, descriptor, **kw)

    # algebra ----------------------------------------------------------
    def _combine(self, other, op, sym):
        if isinstance(other, DiagonalSequence):
            gen = lambda n: op(self(n), other(n))
            desc = f"({self.descriptor}){sym}({other.descriptor})"
        else:
            gen = lambda n: op(self(n), other)
            desc = f"({self.descriptor}){sym}{other!r}"
        return DiagonalSequence(gen, desc, cap=self.cap)

    def __add__(self, other):
        return self._combine(other, np.add, "+")

    def __sub__(self, other):
        return self._combine(other, np.subtract, "-")

    def __mul__(self, c):
        return self._combine(c, np.multiply, "*")

    __rmul__ = __mul__

    def permuted(self, perm: Callable[[int], np.ndarray], label="permuted"):
        """Sequence ``n -> d^(n)[perm(n)]``."""
        return DiagonalSequence(lambda n: self(n)[perm(n)],
                                f"{label}({self.descriptor})", cap=self.cap)

    def sorted_descending(self):
        return self.permuted(lambda n: np.argsort(-self(n), kind="stable"), "sorted")

    def __repr__(self):
        s = f", seed={self.seed}" if self.seed is not None else ""
        return f"DiagonalSequence({self.descriptor!r}{s})"


@dataclass(frozen=True, eq=False)
class MatrixSequence:
    """Map ``n -> A_n`` (square ``n x n``)."""

    generator: Callable[[int], np.ndarray]
    descriptor: str = ""
    cap: int | None = config.DENSE_CAP

    def __call__(self, n: int) -> np.ndarray:
        _check_size(n, self.cap)
        A = np.asarray(self.generator(n))
        if A.shape != (n, n):
            raise ShapeError(f"{self.descriptor}: generator returned shape {A.shape} for n={n}")
        return A

    @classmethod
    def from_diagonal(cls, d: DiagonalSequence, cap=config.DENSE_CAP):
        return cls(lambda n: np.diag(d(n)), f"dense({d.descriptor})", cap=cap)

    def _combine(self, other, op, sym):
        def gen(n):
            B = other(n)
            B = np.diag(B) if np.ndim(B) == 1 else B
            return op(self(n), B)
        return MatrixSequence(gen, f"({self.descriptor}){sym}({other.descriptor})", cap=self.cap)

    def __add__(self, other):
        return self._combine(other, np.add, "+")

    def __sub__(self, other):
        return self._combine(other, np.subtract, "-")

    def __repr__(self):
        return f"MatrixSequence({self.descriptor!r})"


@dataclass(frozen=True, eq=False)
class Interpolant:
    """Piecewise-linear function through ``(0, 0)`` and ``(i/n, v_i)``."""

    values: np.ndarray

    @property
    def n(self) -> int:
        return self.values.size

    grid_size = n

    @property
    def knots(self) -> np.ndarray:
        return np.arange(self.n + 1) / self.n

    @property
    def node_values(self) -> np.ndarray:
        """``v_0 = 0, v_1, ..., v_n``."""
        return np.concatenate(([0], self.values))

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        v = self.node_values
        if np.iscomplexobj(v):
            return np.interp(x, self.knots, v.real) + 1j * np.interp(x, self.knots, v.imag)
        return np.interp(x, self.knots, v)

    def __add__(self, other):
        if not isinstance(other, Interpolant) or other.n != self.n:
            raise ShapeError("interpolants must have the same number of nodes")
        return Interpolant(self.values + other.values)

    def is_non_increasing(self, exempt_first_cell=True) -> bool:
        """Monotonicity of the interpolant; the rising first cell from ``v_0 = 0`` may be exempted."""
        v = self.values if exempt_first_cell else self.node_values
        return bool(np.all(np.diff(v) <= 0))


def interpolant(d) -> Interpolant:
    d = np.asarray(d)
    if d.ndim != 1 or d.size == 0:
        raise ShapeError("interpolant needs a non-empty diagonal vector")
    return Interpolant(d.copy())


def diagonal_of(seq, n: int) -> np.ndarray:
    """Diagonal at size ``n`` of a diagonal sequence (or of a diagonal dense matrix)."""
    x = seq(n)
    if np.ndim(x) == 2:
        if np.count_nonzero(x - np.diag(np.diag(x))):
            raise ShapeError(f"{seq!r} is not diagonal at n={n}")
        return np.diag(x).copy()
    return x
