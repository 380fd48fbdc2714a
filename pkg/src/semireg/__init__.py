"""Regularity hierarchy, escape rates and Green functions of polynomial maps of C^k."""
from .errors import *  # noqa: F401,F403
from .map_parser import format_map, load_map, parse_map
from .poly_core import (BlockStructure, GaussianRational, Polynomial, PolynomialMap,
                        ScaledPoint, block_structure, compose_monomial, eval_map,
                        eval_scaled, homogeneous_decomposition, jacobian,
                        jacobian_norm_at, normalize_map, top_part)

__version__ = "0.1.0"
