"""Stiff two-point BVP solver with swap/flip transformations."""

from ._core import (
    ConfigError,
    SolverError,
    map_state,
    normalize_transform,
    reference_table,
    solve,
    srn,
    transform_rhs,
    troesch_closed_form,
    unmap_state,
)

__all__ = [
    "ConfigError",
    "SolverError",
    "map_state",
    "normalize_transform",
    "reference_table",
    "solve",
    "srn",
    "transform_rhs",
    "troesch_closed_form",
    "unmap_state",
]
