"""
Exception hierarchy shared by the numerical modules, the CLI and the API
"""
from typing import Optional


class RadialEPError(Exception):
    """Base class for all toolkit errors"""


class DomainError(RadialEPError, ValueError):
    """Argument outside the mathematical domain of an operation"""


class DegenerateOrbitError(DomainError):
    """Orbit collapsed onto the potential minimum"""


class SingularityError(DomainError):
    """Evaluation at a point where a denominator vanishes"""


class PreconditionError(DomainError):
    """Operation called on data outside its precondition"""


class QuadratureError(RadialEPError, RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance"""

    def __init__(self, message: str, estimate: float = float('nan'), abserr: float = float('nan')):
        super().__init__(message)
        self.estimate = estimate
        self.abserr = abserr


class IntegratorError(RadialEPError, RuntimeError):
    """ODE integration failed before reaching the requested time"""

    def __init__(self, message: str, t: Optional[float] = None, context: Optional[dict] = None):
        super().__init__(message)
        self.t = t
        self.context = context or {}


class InconsistentDataError(RadialEPError, ValueError):
    """Initial data violates the consistency conditions"""


class ConstructionError(InconsistentDataError):
    """A fixture generator could not build the requested data"""

    def __init__(self, message: str, radius: Optional[float] = None):
        super().__init__(message)
        self.radius = radius


class ProfileFormatError(InconsistentDataError):
    """Malformed profile file"""

    def __init__(self, message: str, line: Optional[int] = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class NumericalConsistencyError(RadialEPError, RuntimeError):
    """Two independent numerical paths disagree"""
