"""Compatible complex structures on the parabolic cohomology of
triangulated oriented surfaces with flat orthogonal coefficients."""

from . import compat, hodge, localsys, moduli, numlin, parastar, surface, twisted
from .numlin import Tolerance
from .parastar import ParabolicStarReport, parabolic_star

__all__ = [
    "compat",
    "hodge",
    "localsys",
    "moduli",
    "numlin",
    "parastar",
    "surface",
    "twisted",
    "Tolerance",
    "ParabolicStarReport",
    "parabolic_star",
]

__version__ = "0.1.0"
