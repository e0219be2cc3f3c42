"""Symbols on [0, 1] and the measure-theoretic operations on them.

A :class:`Symbol` is either a closure (any vectorised callable) or a grid
symbol storing ``m`` values at the nodes ``i/m``.  A grid symbol is the step
function that takes value ``v_i`` on ``((i-1)/m, i/m]`` (and ``v_1`` at 0), so
its distribution function and rearrangement are exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from diagglt import config
from diagglt.errors import RealnessError


def exact_mean(values) -> complex | float:
    """Correctly rounded mean; independent of the order of ``values``."""
    v = np.asarray(values).ravel()
    if v.size == 0:
        raise ValueError("mean of an empty sample")
    if np.iscomplexobj(v):
        return complex(math.fsum(v.real), math.fsum(v.imag)) / v.size
    return math.fsum(v) / v.size


def nodes(m: int) -> np.ndarray:
    """The grid nodes ``i/m`` for ``i = 1..m``."""
    return np.arange(1, m + 1) / m


def midpoints(m: int) -> np.ndarray:
    return (np.arange(m) + 0.5) / m


@dataclass(frozen=True, eq=False)
class Symbol:
    """A measurable function ``[0, 1] -> C``.

    Use :meth:`from_callable` or :meth:`from_grid` rather than the constructor.
    ``continuous`` is a hint (set by the expression parser when the formula
    has no jumps); it only lets approximant construction skip mollification.
    """

    kind: str
    func: Callable | None = None
    values: np.ndarray | None = None
    real: bool = True
    descriptor: str = ""
    continuous: bool = False

    @classmethod
    def from_callable(cls, func, real=True, descriptor="", continuous=False):
        return cls("closure", func=func, real=bool(real),
                   descriptor=descriptor or getattr(func, "__name__", "f"),
                   continuous=continuous)

    @classmethod
    def from_grid(cls, values, descriptor=""):
        v = np.array(values)
        if v.ndim != 1 or v.size == 0:
            raise ValueError("grid symbol needs a non-empty 1-D array of values")
        real = not np.iscomplexobj(v) or bool(np.all(v.imag == 0))
        v = v.real.astype(float) if real else v.astype(complex)
        v.setflags(write=False)
        return cls("grid", values=v, real=real,
                   descriptor=descriptor or f"grid[{v.size}]")

    @classmethod
    def constant(cls, c):
        c = complex(c)
        real = c.imag == 0
        value = c.real if real else c
        return cls.from_callable(lambda x: np.full(np.shape(x), value),
                                 real=real, descriptor=repr(value), continuous=True)

    @property
    def grid_size(self) -> int | None:
        return None if self.values is None else self.values.size

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == "grid":
            m = self.values.size
            idx = np.clip(np.ceil(x * m - 1e-9).astype(np.int64), 1, m)
            return self.values[idx - 1]
        out = np.asarray(self.func(x))
        out = np.broadcast_to(out, x.shape).copy() if out.shape != x.shape else out
        if self.real:
            if np.iscomplexobj(out):
                if np.any(out.imag != 0):
                    raise RealnessError(f"symbol {self.descriptor!r} flagged real "
                                        "returned complex values")
                out = out.real
            return out.astype(float, copy=False)
        return out.astype(complex, copy=False)

    def sample(self, m: int) -> np.ndarray:
        """Values at the nodes ``i/m``."""
        return self(nodes(m))

    def require_real(self, what="operation"):
        if not self.real:
            raise RealnessError(f"{what} requires a real-valued symbol, "
                                f"got complex {self.descriptor!r}")

    # arithmetic, used by linearity checks and sequence sums
    def _combine(self, other, op, sym):
        if not isinstance(other, Symbol):
            other = Symbol.constant(other)
        desc = f"({self.descriptor}){sym}({other.descriptor})"
        if (self.kind == other.kind == "grid"
                and self.grid_size == other.grid_size):
            return Symbol.from_grid(op(self.values, other.values), descriptor=desc)
        return Symbol.from_callable(lambda x: op(self(x), other(x)),
                                    real=self.real and other.real, descriptor=desc,
                                    continuous=self.continuous and other.continuous)

    def __add__(self, other):
        return self._combine(other, np.add, "+")

    def __sub__(self, other):
        return self._combine(other, np.subtract, "-")

    def __mul__(self, other):
        return self._combine(other, np.multiply, "*")

    __radd__ = __add__
    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def abs(self) -> "Symbol":
        if self.kind == "grid":
            return Symbol.from_grid(np.abs(self.values), descriptor=f"|{self.descriptor}|")
        return Symbol.from_callable(lambda x: np.abs(self(x)), real=True,
                                    descriptor=f"|{self.descriptor}|",
                                    continuous=self.continuous)

    def __repr__(self):
        extra = f", m={self.grid_size}" if self.kind == "grid" else ""
        return f"Symbol({self.descriptor!r}, kind={self.kind}{extra}, real={self.real})"


def as_symbol(obj) -> Symbol:
    if isinstance(obj, Symbol):
        return obj
    if callable(obj):
        return Symbol.from_callable(obj)
    return Symbol.constant(obj)


# ---------------------------------------------------------------------------
# test functions
# ---------------------------------------------------------------------------

def _trapezoid(t, h, plateau):
    return np.clip((h + plateau - np.abs(t)) / h, 0.0, 1.0)


@dataclass(frozen=True)
class TestFunction:
    """Hat (``plateau == 0``) or flat-topped hat centred at ``center``.

    Value 1 on ``|t| <= plateau``, falls linearly to 0 at ``|t| = plateau + h``.
    On complex arguments it is the product of the real-part and imaginary-part
    profiles.  Lipschitz constant ``1/h`` per axis.
    """

    __test__ = False  # keep pytest from collecting it

    center: complex
    h: float
    plateau: float = 0.0

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("test function half-width must be positive")

    def __call__(self, z) -> np.ndarray:
        z = np.asarray(z)
        c = complex(self.center)
        out = _trapezoid(z.real - c.real, self.h, self.plateau)
        if np.iscomplexobj(z) or c.imag != 0:
            out = out * _trapezoid(np.imag(z) - c.imag, self.h, self.plateau)
        return out

    def modulus(self, eps: float) -> float:
        """Modulus of continuity ``omega_F(eps)``."""
        scale = math.sqrt(2.0) if complex(self.center).imag != 0 else 1.0
        return min(1.0, scale * eps / self.h)

    def label(self) -> str:
        c = complex(self.center)
        cs = f"{c.real:g}" if c.imag == 0 else f"{c.real:g}{c.imag:+g}j"
        kind = "hat" if self.plateau == 0 else f"plateau{self.plateau:g}"
        return f"{kind}({cs},{self.h:g})"


@dataclass(frozen=True)
class TestFamily:
    """Finite family of test functions used to probe a distribution."""

    __test__ = False

    members: tuple
    descriptor: str = ""

    def __iter__(self):
        return iter(self.members)

    def __len__(self):
        return len(self.members)

    def modulus(self, eps: float) -> float:
        return max(F.modulus(eps) for F in self.members)

    @property
    def min_width(self) -> float:
        return min(F.h for F in self.members)


def _center_grid(lo, hi, step):
    k0 = math.floor(lo / step + 1e-9) - 1
    k1 = math.ceil(hi / step - 1e-9) + 1
    return [round(k * step, 12) for k in range(k0, k1 + 1)]


def hat_family(lo, hi, step=config.HAT_STEP, h=config.HAT_WIDTH,
               imag_range=None, probe=True) -> TestFamily:
    """Hats on a ``step`` grid covering ``[lo, hi]`` plus a flat-top probe.

    The probe equals 1 on ``[lo - h, hi + h]``; it catches mass that escapes
    the range altogether.  With ``imag_range`` the centres form a 2-D grid.
    """
    lo, hi = float(lo), float(hi)
    spans = [hi - lo] + ([imag_range[1] - imag_range[0]] if imag_range else [])
    count = max(spans) / step + 3
    if count > config.MAX_HATS_PER_AXIS:
        step = max(spans) / (config.MAX_HATS_PER_AXIS - 3)
        h = max(h, step)
    re_centers = _center_grid(lo, hi, step)
    members = []
    if imag_range is None:
        members = [TestFunction(c, h) for c in re_centers]
    else:
        ilo, ihi = map(float, imag_range)
        for ci in _center_grid(ilo, ihi, step):
            members.extend(TestFunction(complex(c, ci), h) for c in re_centers)
    desc = f"hats(step={step:g},h={h:g},range=[{lo:g},{hi:g}]"
    if imag_range is not None:
        desc += f"x[{imag_range[0]:g},{imag_range[1]:g}]i"
    desc += ")"
    if probe:
        if imag_range is None:
            members.append(TestFunction((lo + hi) / 2, h, plateau=(hi - lo) / 2 + h))
        else:
            # product profile needs one plateau per axis; use the wider one
            ilo, ihi = imag_range
            half = max(hi - lo, ihi - ilo) / 2 + h
            members.append(TestFunction(complex((lo + hi) / 2, (ilo + ihi) / 2), h, plateau=half))
        desc += "+probe"
    return TestFamily(tuple(members), desc)


def default_family(symbol: Symbol, mode="eigen", resolution=config.DEFAULT_RESOLUTION,
                   step=config.HAT_STEP, h=config.HAT_WIDTH) -> TestFamily:
    """Hat family covering the essential range of ``symbol`` (``|symbol|`` in singular mode)."""
    symbol = as_symbol(symbol)
    vals = symbol.values if symbol.kind == "grid" else symbol(midpoints(resolution))
    if mode == "singular":
        vals = np.abs(vals)
    vals = vals[np.isfinite(vals)]
    re = np.real(vals)
    if np.iscomplexobj(vals) and np.any(vals.imag != 0):
        return hat_family(re.min(), re.max(), step, h,
                          imag_range=(vals.imag.min(), vals.imag.max()))
    return hat_family(re.min(), re.max(), step, h)


# ---------------------------------------------------------------------------
# measure-theoretic operations
# ---------------------------------------------------------------------------

def _samples(f: Symbol, resolution: int) -> np.ndarray:
    """Equal-weight samples of ``f``: exact node values for grids, midpoints otherwise."""
    if f.kind == "grid":
        return f.values
    return f(midpoints(resolution))


def distribution_above(f, z, resolution=config.DEFAULT_RESOLUTION):
    """``mu{x in [0,1] : f(x) > z}``; ``z`` may be an array."""
    f = as_symbol(f)
    f.require_real("distribution_above")
    v = np.sort(_samples(f, resolution))
    zz = np.asarray(z, dtype=float)
    above = v.size - np.searchsorted(v, zz, side="right")
    out = above / v.size
    return float(out) if out.ndim == 0 else out


def decreasing_rearrangement(f, m=config.DEFAULT_RESOLUTION) -> Symbol:
    """Non-increasing grid symbol equimeasurable with ``f`` (sample at ``i/m``, sort)."""
    f = as_symbol(f)
    f.require_real("decreasing_rearrangement")
    v = f.sample(m)
    order = np.argsort(-v, kind="stable")
    return Symbol.from_grid(v[order], descriptor=f"rearranged({f.descriptor})")


def common_grid_size(objs: Iterable, resolution=config.DEFAULT_RESOLUTION) -> int:
    """Midpoint-grid size on which all ``objs`` are compared.

    Grid-like objects (symbols with ``grid_size``, interpolants with ``n``)
    force the size to be a multiple of the lcm of their grids so that every
    sample cell sits inside one cell of each object.
    """
    sizes = [s for s in (getattr(o, "grid_size", None) for o in objs) if s]
    if not sizes:
        return int(resolution)
    L = math.lcm(*sizes)
    if L > max(resolution, 2**22):
        return int(resolution)
    return L * max(1, math.ceil(resolution / L))


def ky_fan_from_deviations(dev) -> float:
    """``inf{eps : #{dev > eps}/M <= eps}`` for ``M`` equally weighted deviations."""
    e = np.sort(np.abs(np.asarray(dev, dtype=float)).ravel())[::-1]
    M = e.size
    e = np.nan_to_num(e, nan=np.inf)
    cand = np.maximum(np.append(e, 0.0), np.arange(M + 1) / M)
    return float(cand.min())


def ky_fan_distance(f, g, resolution=config.DEFAULT_RESOLUTION) -> float:
    """Ky Fan metric ``inf{eps > 0 : mu{|f - g| > eps} <= eps}`` (convergence in measure)."""
    f = f if callable(f) else Symbol.constant(f)
    g = g if callable(g) else Symbol.constant(g)
    M = common_grid_size((f, g), resolution)
    x = midpoints(M)
    return ky_fan_from_deviations(np.abs(np.asarray(f(x)) - np.asarray(g(x))))


def deviation_measure(f, g, eps, resolution=config.DEFAULT_RESOLUTION):
    """``mu{|f - g| > eps}`` for each ``eps``."""
    f = f if callable(f) else Symbol.constant(f)
    g = g if callable(g) else Symbol.constant(g)
    M = common_grid_size((f, g), resolution)
    x = midpoints(M)
    dev = np.sort(np.abs(np.asarray(f(x)) - np.asarray(g(x))))
    eps = np.asarray(eps, dtype=float)
    return (M - np.searchsorted(dev, eps, side="right")) / M


def symbol_mean(F, f, resolution=config.DEFAULT_RESOLUTION):
    """``integral_0^1 F(f(x)) dx``: node average for grids, composite midpoint otherwise."""
    f = as_symbol(f)
    return exact_mean(F(_samples(f, resolution)))


def symbol_means(family: Sequence, f, resolution=config.DEFAULT_RESOLUTION) -> list:
    f = as_symbol(f)
    s = _samples(f, resolution)
    return [exact_mean(F(s)) for F in family]


def is_non_increasing(values, atol=0.0) -> bool:
    v = np.asarray(values)
    return bool(np.all(np.diff(v) <= atol))
