"""Pseudo-spectral complexified Picard iteration for Navier-Stokes on the torus,
with BMO/Besov norm layers, existence horizons, analyticity probes and
inequality regression suites."""

from .core import (
    ComplexPair,
    Grid,
    SpectralField,
    evaluate_complex_shift,
    make_grid,
    transform_forward,
    transform_inverse,
)

__all__ = [
    "ComplexPair",
    "Grid",
    "SpectralField",
    "evaluate_complex_shift",
    "make_grid",
    "transform_forward",
    "transform_inverse",
]

__version__ = "0.1.0"
