"""Exact computations with fundamental modules of quantum affine gl(M|N):
module construction, R-matrices and their denominators, and cyclicity."""
from .field import Poly, RatFun, Rational
from .repcore import AlgebraParams, FundSpec, fundamental_module
from .cyclicity import TensorConfig, is_highest_lweight, is_lowest_lweight, is_simple

__all__ = [
    "AlgebraParams",
    "FundSpec",
    "Poly",
    "RatFun",
    "Rational",
    "TensorConfig",
    "fundamental_module",
    "is_highest_lweight",
    "is_lowest_lweight",
    "is_simple",
]
__version__ = "0.1.0"
