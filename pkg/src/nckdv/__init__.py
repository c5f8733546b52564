"""Symbolic and numeric verification of noncommutative KdV-type equations."""

from .ncpoly import NCPoly, EvolutionRule, Letter, jet, inv, const
from .grammar import parse

__version__ = "0.1.0"
