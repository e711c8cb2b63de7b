"""Numerical laboratory for Marcinkiewicz-Zygmund constants of multilinear operators."""

__version__ = "0.1.0"

from .classify import KClassification, linear_k, multilinear_k
from .estimate import estimate_kn
from .multiop import ExponentTriple, MultilinearOperator, apply, extension_lhs, rhs_product, tensor_product
from .normsolver import NormBracket, operator_norm
from .stablelaw import StableLaw, moment_constant, stable_moment
from .tensorspace import INF, DiscreteMeasure, FunctionFamily, dual, lp_norm, mixed_norm

__all__ = [
    "INF",
    "DiscreteMeasure",
    "ExponentTriple",
    "FunctionFamily",
    "KClassification",
    "MultilinearOperator",
    "NormBracket",
    "StableLaw",
    "apply",
    "dual",
    "estimate_kn",
    "extension_lhs",
    "linear_k",
    "lp_norm",
    "mixed_norm",
    "moment_constant",
    "multilinear_k",
    "operator_norm",
    "rhs_product",
    "stable_moment",
    "tensor_product",
]
