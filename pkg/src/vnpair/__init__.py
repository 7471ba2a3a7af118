"""Numerical toolkit for pairing endomorphism semigroups of matrix algebras.

Finite-dimensional von Neumann algebras and their commutants, commuting
pairs of representations with interior tensor products, discrete product
systems with their dilations, unimodular two-cocycles on a grid, and the
pairing calculus that links an endomorphism of an algebra with one of its
commutant through a single unitary.
"""

from . import algebra, correspondence, endo, errors, multiplier, numkernel
from . import pairing, prodsys, scenes, selftest
from .numkernel import DEFAULT_TOL, Tolerance

__all__ = [
    "algebra", "correspondence", "endo", "errors", "multiplier", "numkernel",
    "pairing", "prodsys", "scenes", "selftest",
    "DEFAULT_TOL", "Tolerance",
]

__version__ = "0.1.0"
