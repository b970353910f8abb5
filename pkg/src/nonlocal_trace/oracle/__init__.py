"""Brute-force numeric cross-checks for the symbolic pipeline."""
from .fitting import FitReport, FitSlot, LadderFit, RaySampler, default_ladder, fit_expansion, sample_values
from .lattice import lattice_trace
from .quadrature import OracleError, OracleValue, ball_integral, fit_radius_constant, numeric_trace

__all__ = [
    "FitReport", "FitSlot", "LadderFit", "RaySampler", "default_ladder", "fit_expansion", "sample_values",
    "lattice_trace",
    "OracleError", "OracleValue", "ball_integral", "fit_radius_constant", "numeric_trace",
]
