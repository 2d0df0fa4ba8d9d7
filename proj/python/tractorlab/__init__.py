"""Numerical checks for projective tractor calculus on model geometries."""
import json

from ._core import (
    Geometry,
    PoleError,
    ValidationError,
    asymptotic_h,
    builtin_geometry,
    builtin_names,
    check_ids,
    load_geometry,
    scalar_curvature,
    verify_json,
)


def verify(geometry, checks=("all",), seed=1, points=8, boundary_points=5, timing=False):
    """Run the check suite and return the reports as a list of dicts."""
    return json.loads(verify_json(geometry, list(checks), seed, points, boundary_points, timing))


__all__ = [
    "Geometry",
    "PoleError",
    "ValidationError",
    "asymptotic_h",
    "builtin_geometry",
    "builtin_names",
    "check_ids",
    "load_geometry",
    "scalar_curvature",
    "verify",
    "verify_json",
]
