"""Exact symbol representation, DSL parsing and formal symbol algebra."""
from .angular import AngularPoly, Poly, monomial_moment, sphere_area, sphere_moment
from .parser import GRAMMAR_EXCERPT, ParseError, format_symbol, parse_symbol
from .scalar import Scalar, get_precision, set_precision
from .symbols import (
    ClassicalSymbol,
    HomogeneousTerm,
    LogPolyhomSymbol,
    SymbolError,
    as_log_symbol,
    default_extension,
    format_log_symbol,
    series_log,
    symbol_product,
)

__all__ = [
    "AngularPoly", "Poly", "monomial_moment", "sphere_area", "sphere_moment",
    "GRAMMAR_EXCERPT", "ParseError", "format_symbol", "parse_symbol",
    "Scalar", "get_precision", "set_precision",
    "ClassicalSymbol", "HomogeneousTerm", "LogPolyhomSymbol", "SymbolError",
    "as_log_symbol", "default_extension", "format_log_symbol", "series_log", "symbol_product",
]
