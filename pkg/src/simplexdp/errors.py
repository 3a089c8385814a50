"""Exception and warning types.

Every error carries a short machine-readable ``code`` and an exit status so the
command-line front end can map failures to distinct process exit codes.
"""

from __future__ import annotations


class SimplexDPError(Exception):
    """Base class for all library errors."""

    code = "error"
    exit_status = 1


class DomainError(SimplexDPError, ValueError):
    """A numerical argument lies outside the domain of a function."""

    code = "domain"
    exit_status = 10


class ValidationError(SimplexDPError, ValueError):
    """Input data violates a structural requirement (labels, CSV layout, ...)."""

    code = "validation"
    exit_status = 11


class ShapeError(ValidationError):
    code = "shape"
    exit_status = 12


class MappingError(ValidationError):
    code = "mapping"
    exit_status = 13


class AdmissionError(SimplexDPError, ValueError):
    """A count vector is not inside the bordered simplex required by its config."""

    code = "admission"
    exit_status = 14


class AssumptionError(SimplexDPError, ValueError):
    """Mechanism parameters violate a standing assumption on eta, gamma or k."""

    code = "assumption"
    exit_status = 15


class CalibrationError(SimplexDPError):
    """A target privacy level cannot be reached by tuning k."""

    code = "calibration"
    exit_status = 16

    def __init__(self, message: str, nearest_epsilon: float | None = None):
        super().__init__(message)
        self.nearest_epsilon = nearest_epsilon


class StructureError(SimplexDPError):
    """A transition model is not irreducible / positive where it has to be."""

    code = "structure"
    exit_status = 17


class ConditioningError(SimplexDPError, ArithmeticError):
    code = "conditioning"
    exit_status = 18


class UnsupportedError(SimplexDPError, NotImplementedError):
    code = "unsupported"
    exit_status = 19


class ZeroCountWarning(UserWarning):
    """A category has no records, so no bordered simplex with eta > 0 contains the counts."""


class BoundarySampleWarning(UserWarning):
    """A Dirichlet draw underflowed to the simplex boundary and was nudged inward."""
