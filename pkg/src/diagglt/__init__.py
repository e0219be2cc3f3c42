"""Finite-scale tools for spectral symbols of diagonal matrix sequences.

Covers the a.c.s. pseudometric, symbol verification against test functions,
piecewise convergence of diagonals, decreasing rearrangements and the
permutation that turns a real diagonal sequence into a diagonal GLT sequence.
"""

from diagglt.errors import (
    DiagGLTError,
    RealnessError,
    SizeError,
    ShapeError,
    ExtractionError,
    ConstructionError,
    PreconditionError,
)
from diagglt.symbols import (
    Symbol,
    TestFunction,
    TestFamily,
    distribution_above,
    decreasing_rearrangement,
    ky_fan_distance,
    symbol_mean,
)
from diagglt.sequences import (
    DiagonalSequence,
    MatrixSequence,
    Interpolant,
    diag_sampling,
    shuffled_sampling,
    interpolant,
)

__version__ = "0.1.0"

__all__ = [
    "DiagGLTError",
    "RealnessError",
    "SizeError",
    "ShapeError",
    "ExtractionError",
    "ConstructionError",
    "PreconditionError",
    "Symbol",
    "TestFunction",
    "TestFamily",
    "distribution_above",
    "decreasing_rearrangement",
    "ky_fan_distance",
    "symbol_mean",
    "DiagonalSequence",
    "MatrixSequence",
    "Interpolant",
    "diag_sampling",
    "shuffled_sampling",
    "interpolant",
]
