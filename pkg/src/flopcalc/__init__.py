"""Exact computations for local models of split ordinary P^r flops."""

from .cohring import BaseRing, CohClass, build_base
from .flopmodel import CurveClass, FlopModel
from .ifunc import IFunction, TruncationWindow

__all__ = ["BaseRing", "CohClass", "CurveClass", "FlopModel", "IFunction",
           "TruncationWindow", "build_base"]
__version__ = "0.1.0"
