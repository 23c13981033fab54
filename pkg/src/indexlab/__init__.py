"""Numerical checks of index theorems for the inverse-square family of
Schroedinger operators H_{m,kappa} on the line: special functions, wave
operators, winding numbers, quantized traces and scenario reports."""

from . import cli, model, quantize, specfn, verify, winding
from .errors import *  # noqa: F401,F403

__version__ = "0.1.0"
