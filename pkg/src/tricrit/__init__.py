"""Meromorphic functions with three critical values and the flat triangle
nets behind their growth bound.

Modules
-------
elliptic      equiharmonic lattice, ``wp`` and ``wp'``
triangle_map  the Schwarz-Christoffel triangle map and the flat metric ``rho0``
extremal_fn   ``I(z)`` and the functions ``f1``, ``f0``
nevanlinna    sheet counts ``A(t)``, pull-back measures, ``T(r)`` and fits
trinet        triangular nets, developing maps, holonomy and systoles
enumerate     exhaustive enumeration of small annular nets
cli           command line entry point
"""

from .errors import (
    BranchPointHit,
    CriticalValueProximity,
    EssentialSingularity,
    Inconclusive,
    Inconsistent,
    InvalidPath,
    MetricSingularity,
    NonConvergence,
    OutsideDomain,
    SamplingTooCoarse,
    TricritError,
    Unsupported,
)

__version__ = "0.1.0"

__all__ = [
    "BranchPointHit",
    "CriticalValueProximity",
    "EssentialSingularity",
    "Inconclusive",
    "Inconsistent",
    "InvalidPath",
    "MetricSingularity",
    "NonConvergence",
    "OutsideDomain",
    "SamplingTooCoarse",
    "TricritError",
    "Unsupported",
    "__version__",
]
