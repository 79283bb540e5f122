"""Centered maximal operators on discrete measures, Besicovitch ball families
and strict kissing configurations in finite-dimensional lp spaces."""

__version__ = "0.1.0"

from kissmax.besicovitch import BallFamily, DepthReport, depth, greedy_select, open_closed_convert, validate_family
from kissmax.codes import (
    CodeSearchBudget,
    SphericalCode,
    asymptotic_bounds,
    canonical_code,
    code_search,
    code_to_family,
    normalize_family,
)
from kissmax.errors import InputError, PreconditionError
from kissmax.geometry import Ball, Kind, NormedSpace, angular_lower_bound, ball_contains, distance
from kissmax.maxop import RadiusWindow, SearchBudget, WeakTypeEstimate, maximal_value, weak_constant_search, weak_quotient
from kissmax.measure import DiscreteMeasure, ball_integral, ball_mass, l_norm
from kissmax.witnesses import (
    attainment_measure,
    extrapolation_constant,
    interpolation_bound,
    witness_weak11,
    witness_weakpp,
)

__all__ = [
    "Ball", "BallFamily", "CodeSearchBudget", "DepthReport", "DiscreteMeasure", "InputError", "Kind",
    "NormedSpace", "PreconditionError", "RadiusWindow", "SearchBudget", "SphericalCode", "WeakTypeEstimate",
    "angular_lower_bound", "asymptotic_bounds", "attainment_measure", "ball_contains", "ball_integral",
    "ball_mass", "canonical_code", "code_search", "code_to_family", "depth", "distance",
    "extrapolation_constant", "greedy_select", "interpolation_bound", "l_norm", "maximal_value",
    "normalize_family", "open_closed_convert", "validate_family", "weak_constant_search", "weak_quotient",
    "witness_weak11", "witness_weakpp",
]
