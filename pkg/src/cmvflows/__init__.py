"""Floquet CMV matrices and the periodic defocusing Ablowitz-Ladik flows."""

from .laurent import LaurentMatrix, WeightFunction
from .cmv import VerblunskyVector, FloquetCMV, build_factors, coxeter_element, recognize_floquet
from .conserved import ConservedSet, invariants

__all__ = [
    "LaurentMatrix",
    "WeightFunction",
    "VerblunskyVector",
    "FloquetCMV",
    "build_factors",
    "coxeter_element",
    "recognize_floquet",
    "ConservedSet",
    "invariants",
]

__version__ = "0.1.0"
