"""Subgroup zeta functions of the 3-dimensional almost Bieberbach groups."""

from .catalog import (
    functional_equation_check,
    get_family,
    global_coeffs,
    load_catalog,
    local_factor,
)
from .groupalg import NkElement
from .membership import GoodBasis, in_Bt, is_good_basis
from .ratfunc import PolyUX, RationalUX, l_factor, series_expand, substitute_inverse, zeta_factor
from .tables import CoeffTable, GlobalCoeffs

__all__ = [
    "CoeffTable",
    "GlobalCoeffs",
    "GoodBasis",
    "NkElement",
    "PolyUX",
    "RationalUX",
    "functional_equation_check",
    "get_family",
    "global_coeffs",
    "in_Bt",
    "is_good_basis",
    "l_factor",
    "load_catalog",
    "local_factor",
    "series_expand",
    "substitute_inverse",
    "zeta_factor",
]

__version__ = "0.1.0"
