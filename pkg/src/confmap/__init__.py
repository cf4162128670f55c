"""Numerical conformal maps via lightning Laplace solvers and AAA compression."""

from .aaa import BarycentricRational, aaa_fit, bary_eval, cleanup, poles_residues_zeros
from .conformal import (
    ConformalMap,
    MapOptions,
    VerificationReport,
    conformal_map,
    map_annulus,
    map_disk,
    verify_map,
)
from .geometry import (
    GeometryError,
    Region,
    annulus,
    circular_polygon,
    disjoint_pair,
    parse_region,
    polygon,
    smooth,
)
from .lightning import LightningModel, corner_basis_model, place_poles, solve_dirichlet

__all__ = [
    "BarycentricRational", "ConformalMap", "GeometryError", "LightningModel", "MapOptions",
    "Region", "VerificationReport", "aaa_fit", "annulus", "bary_eval", "circular_polygon",
    "cleanup", "conformal_map", "corner_basis_model", "disjoint_pair", "map_annulus",
    "map_disk", "parse_region", "place_poles", "poles_residues_zeros", "polygon", "smooth",
    "solve_dirichlet", "verify_map",
]

__version__ = "0.1.0"
