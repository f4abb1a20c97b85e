"""Terrain-following coverage lane planning."""

from ._core import (
    Contour,
    Grid,
    Plan,
    TerracoverError,
    baseline_2d_plan,
    blend_roll,
    build_grid,
    coverage_report,
    lateral_deviation,
    min_tangential_spacing,
    plan_field,
    synth_terrain,
)

__all__ = [
    "Contour",
    "Grid",
    "Plan",
    "TerracoverError",
    "baseline_2d_plan",
    "blend_roll",
    "build_grid",
    "coverage_report",
    "lateral_deviation",
    "min_tangential_spacing",
    "plan_field",
    "synth_terrain",
]
