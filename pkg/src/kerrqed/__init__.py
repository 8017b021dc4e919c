"""Atom coupled to two cavity modes with a Kerr coupler.

Submodules: :mod:`hilbert` (states), :mod:`model` (parameters and frame
changes), :mod:`propagator` (exact block evolution), :mod:`oracle`
(truncated-Fock diagonalization), :mod:`analysis` (observables and
detectors), :mod:`scenario` and :mod:`cli` (configs and artifacts).
"""
from . import analysis, hilbert, model, oracle, propagator
from .errors import (ConfigError, InvalidInputError, KerrQEDError, NumericFailureError,
                     ResourceCapError, SingularParametersError, TruncationOverflowError)

__version__ = "0.1.0"

__all__ = [
    "analysis", "hilbert", "model", "oracle", "propagator",
    "ConfigError", "InvalidInputError", "KerrQEDError", "NumericFailureError",
    "ResourceCapError", "SingularParametersError", "TruncationOverflowError",
]
