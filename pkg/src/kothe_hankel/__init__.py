"""Hankel and Toeplitz operators between Köthe and power series spaces."""

from .certificate import Bounds, Certificate, Status
from .sequences import ExponentSequence, parse_family
from .spaces import (Enveloped, FiniteSupport, KotheMatrix, SymbolSequence, basis_element,
                     dual_membership, nuclearity, parse_space, seminorm, seminorm_sup, weight)
from .operators import (OperatorSpec, apply, cesaro_mean, fast_apply, hankel_column, shift,
                        toeplitz_column)
from .certify import certify_compactness, certify_continuity, check_condition, tameness_scan
from .presets import parse_element, parse_symbol

__version__ = "0.1.0"

__all__ = [
    "Bounds", "Certificate", "Status", "ExponentSequence", "parse_family", "Enveloped",
    "FiniteSupport", "KotheMatrix", "SymbolSequence", "basis_element", "dual_membership",
    "nuclearity", "parse_space", "seminorm", "seminorm_sup", "weight", "OperatorSpec", "apply",
    "cesaro_mean", "fast_apply", "hankel_column", "shift", "toeplitz_column",
    "certify_compactness", "certify_continuity", "check_condition", "tameness_scan",
    "parse_element", "parse_symbol",
]
