"""Closed curves of prescribed geodesic curvature on the hyperbolic plane.

Hyperboloid-model numerics for D_t g' = |g'| k(g) J g': the flow, closed-form
circle orbits, linearization and Floquet data, the finite-dimensional
reduction, shooting/continuation, and geometric audits.
"""
__version__ = "0.1.0"

from .errors import HypermagError, InputError, NumericalFailure  # noqa: F401
