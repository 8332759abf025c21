"""Shadowing, horseshoes and periodic-orbit counts for expanding-contracting torus maps."""

from .census import build_census, degree_check, find_periodic_points, growth_rate, hyperbolic_entropy_estimate
from .cocycle import (
    chart_orbit,
    coordinate_change,
    lyapunov_exponents,
    lyapunov_inner_product,
    oseledec_splitting,
    pesin_block,
)
from .errors import ConfigError, HypShadowError, NumericalError
from .horseshoe import HorseshoeParams, construct_horseshoe
from .mapmodel import MapModel, builtin_map
from .shadow import PseudoOrbit, chart_pseudo_orbit, shadow_periodic, shadow_pseudo_orbit, shadowing_constants

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "HorseshoeParams",
    "HypShadowError",
    "MapModel",
    "NumericalError",
    "PseudoOrbit",
    "build_census",
    "builtin_map",
    "chart_orbit",
    "chart_pseudo_orbit",
    "construct_horseshoe",
    "coordinate_change",
    "degree_check",
    "find_periodic_points",
    "growth_rate",
    "hyperbolic_entropy_estimate",
    "lyapunov_exponents",
    "lyapunov_inner_product",
    "oseledec_splitting",
    "pesin_block",
    "shadow_periodic",
    "shadow_pseudo_orbit",
    "shadowing_constants",
]
