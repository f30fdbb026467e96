"""Exact lattice, q-series and lift calculus for 2-elementary K3 lattices, plus Siegel theta numerics."""

from .kernels import BACKEND
from .lattice import Lattice, classify_table, discriminant_form, invariants, parse_lattice
from .qseries import PuiseuxSeries

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Lattice",
    "PuiseuxSeries",
    "classify_table",
    "discriminant_form",
    "invariants",
    "parse_lattice",
]
