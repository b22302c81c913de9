"""Exact pair correlations and window covariograms of binary Pisot inflation tilings."""

from .qfield import QuadRing, QuadInt, FieldVal, SQRT2, GOLDEN

__version__ = "0.1.0"

__all__ = [
    "QuadRing",
    "QuadInt",
    "FieldVal",
    "SQRT2",
    "GOLDEN",
    "__version__",
]
