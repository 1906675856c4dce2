"""Exception hierarchy shared by the numerical core, the analyzers and the CLI."""

from typing import Any, Dict, Optional

import numpy as np


class EllipNLSError(Exception):
    """Base class; carries a details dict for machine-readable error records."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_record(self) -> Dict[str, Any]:
        return {
            "status": "error",
            "error": type(self).__name__,
            "message": self.message,
            "details": {k: _jsonable(v) for k, v in self.details.items()},
        }


class InvalidInputError(EllipNLSError, ValueError):
    """Non-finite, out-of-range or otherwise invalid arguments."""


class PoleProximityError(EllipNLSError):
    """Raw ℘ evaluation requested too close to a lattice point."""

    def __init__(self, z: complex, nearest: complex, distance: float):
        super().__init__(
            f"argument {z} lies within {distance:.3e} of lattice point {nearest}",
            {"z": z, "nearest_lattice_point": nearest, "distance": distance},
        )
        self.nearest = nearest


class NumericFailureError(EllipNLSError):
    """An iterative method failed to converge."""


class SingularityError(EllipNLSError):
    """A closed-form denominator vanished (a physicality constraint is violated)."""


class ConstraintViolationError(EllipNLSError):
    """A reality constraint such as R₂(f₀, z) ≥ 0 does not hold."""

    def __init__(self, inequality: str, value: float, **details):
        super().__init__(
            f"constraint violated: {inequality} (value {value:.6g})",
            {"inequality": inequality, "value": value, **details},
        )
        self.inequality = inequality
        self.value = value


class BranchTrackingError(EllipNLSError):
    """Phase unwrapping saw a jump larger than π between adjacent points."""


class ResolutionError(EllipNLSError):
    """A sampling grid is too coarse for the requested tolerance."""


class InstabilityError(EllipNLSError):
    """Split-step propagation blew up."""

    def __init__(self, z_onset: float, growth: float):
        super().__init__(
            f"field amplitude grew by {growth:.3e} at z={z_onset:.6g}",
            {"z_onset": z_onset, "growth": growth},
        )
        self.z_onset = z_onset


class InternalError(EllipNLSError):
    """A state that valid inputs cannot produce."""


def _jsonable(value: Any) -> Any:
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value
