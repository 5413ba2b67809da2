"""Floquet multipliers, center bundles and center manifolds of periodic orbits."""

import json

from . import _core
from ._core import (
    NumericalError,
    UsageError,
    cylinder_graph,
    driven3d_resonances,
    example_ids,
    expand,
    family,
    family_residual,
    floquet,
    known_checks,
    list_systems,
    lp_fixed_point,
    torus_root,
)


def run_suite(system, checks, params=None, seed=0):
    """Run named checks and return the report as a dict."""
    return json.loads(_core._suite_json(system, params or {}, list(checks), seed))


def reproduce(example, seed=0):
    """Run the check bundle of a worked example, e.g. "example-5.1"."""
    return json.loads(_core._reproduce_json(example, seed))


__all__ = [
    "NumericalError",
    "UsageError",
    "cylinder_graph",
    "driven3d_resonances",
    "example_ids",
    "expand",
    "family",
    "family_residual",
    "floquet",
    "known_checks",
    "list_systems",
    "lp_fixed_point",
    "reproduce",
    "run_suite",
    "torus_root",
]
