"""Fantappie, Laplace and Borel transforms on model domains in C^2, with quadrature oracles."""

from .geometry import DomainSpec, GeometryError
from .quadrature import QuadratureSpec, integrate_volume
from .report import VerificationReport
from .series import CoefficientSeries, DiagonalGenerator, Space, membership, norm2

__version__ = "0.1.0"

__all__ = [
    "CoefficientSeries",
    "DiagonalGenerator",
    "DomainSpec",
    "GeometryError",
    "QuadratureSpec",
    "Space",
    "VerificationReport",
    "integrate_volume",
    "membership",
    "norm2",
]
