"""Continued fractions of algebraic power series over F_p."""

__version__ = "0.1.0"

from .gfpoly import Poly, format_poly, gcd, parse_poly
from .laurent import EquationSpec, Laurent, PrecisionExhausted, RootError, solve_root
from .cfrac import ContinuedFraction, convergents, expand, reconstruct
from .closedform import omega_build, w1_quotients, w2_quotients
from .diophantine import measure_estimate

__all__ = [
    "Poly",
    "format_poly",
    "gcd",
    "parse_poly",
    "EquationSpec",
    "Laurent",
    "PrecisionExhausted",
    "RootError",
    "solve_root",
    "ContinuedFraction",
    "convergents",
    "expand",
    "reconstruct",
    "omega_build",
    "w1_quotients",
    "w2_quotients",
    "measure_estimate",
]
