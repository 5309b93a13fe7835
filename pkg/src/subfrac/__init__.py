"""Fractional powers of sub-Laplacians on step-2 Carnot groups.

Submodules: ``group`` (group law, lattices, horizontal fields), ``special``
(Bessel functions and the extension profile), ``heat`` (heat kernels),
``kernels`` (Riesz and Poisson kernels), ``spectral`` (discrete operator and
functional calculus), ``fractional`` (three routes to L^(alpha/2)),
``extension`` (the weighted lift and its trace), ``harnack`` (nonlocal
Dirichlet problems and Harnack quotients) and ``cli``.
"""
from .group import (GridFunction, GroupSpec, Lattice, dilate, euclidean, gauge, heisenberg1,
                    inverse, mult, product, semicheck)
from .special import FractionalParams, params_from_a, params_from_alpha, phi

__version__ = "0.1.0"

__all__ = [
    "GridFunction", "GroupSpec", "Lattice", "FractionalParams",
    "dilate", "euclidean", "gauge", "heisenberg1", "inverse", "mult", "product", "semicheck",
    "params_from_a", "params_from_alpha", "phi",
]
