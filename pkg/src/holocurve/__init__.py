"""Numerical tools for holomorphic curves into complex projective space."""
from .config import DEFAULT_GRID, DEFAULT_QUAD, GridSpec, QuadratureConfig, RunConfig, SearchConfig, TOLERANCES
from .curves import Annulus, Curve, Disc, FunctionCurve, Rect, builtin_curve, point, spherical_derivative, sup_sphderiv_grid
from .projective import fs_distance, normalize, p_add, q_reflection

__version__ = "0.1.0"
