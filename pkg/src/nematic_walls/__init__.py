"""Numerical laboratory for an extreme-anisotropy nematic film energy.

Constructs and evaluates critical points of the eps-level elastic energy
and of its wall-energy limit on discs, annuli, and periodic rectangles:
closed-form and characteristics-based constructions, itemized energy
evaluation with cubic wall costs, an eps-level gradient-flow solver, and
the parameter sweep locating where two-dimensional cross-tie walls beat
one-dimensional ones.
"""

from .core import (EnergyBreakdown, Field2D, Grid2D, JumpSegment, Params,
                   make_grid, sample_analytic)

__all__ = [
    "EnergyBreakdown", "Field2D", "Grid2D", "JumpSegment", "Params",
    "make_grid", "sample_analytic",
]

__version__ = "0.1.0"
