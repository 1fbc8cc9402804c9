"""
Radial Newtonian kernel, effective potential and scaling helpers

N(r) is the fundamental solution of -Laplacian in R^d restricted to radial
functions; the effective potential of a characteristic carrying enclosed
mass m is V(r) = m*N(r) + r**2/2.
"""
import logging
import numbers
from abc import ABC, abstractmethod
from dataclasses import dataclass
from functools import cached_property
from typing import Union

import numpy as np
from scipy.special import gamma

from src.errors import DomainError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class PotentialSpec:
    """Dimension and enclosed mass of one characteristic"""
    d: int
    m: float = 1.0

    def __post_init__(self):
        if isinstance(self.d, bool) or not isinstance(self.d, numbers.Integral):
            raise DomainError(f"Dimension must be an integer, got {self.d!r}")
        if self.d < 2:
            raise DomainError(f"Dimension must be at least 2, got {self.d}")
        if not np.isfinite(self.m) or self.m <= 0:
            raise DomainError(f"Mass must be positive and finite, got {self.m}")
        object.__setattr__(self, 'd', int(self.d))
        object.__setattr__(self, 'm', float(self.m))


def _check_radius(r: ArrayLike) -> np.ndarray:
    arr = np.asarray(r, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError(f"Radius must be positive, got {r}")
    return arr


def _scalar_or_array(value: np.ndarray, like: ArrayLike):
    return float(value) if np.ndim(like) == 0 else value


def surface_area(d: int) -> float:
    """Area of the unit sphere S^{d-1}, 2*pi^(d/2)/Gamma(d/2)"""
    return float(2.0 * np.pi ** (d / 2.0) / gamma(d / 2.0))


def newtonian_constant(d: int) -> float:
    """c_d = 1/|S^{d-1}| (for d = 2 this is the 1/(2*pi) of the log kernel)"""
    return 1.0 / surface_area(d)


def _newtonian_raw(z, d: int):
    """Kernel formula without domain checks; accepts complex input"""
    c = newtonian_constant(d)
    if d == 2:
        return -c * np.log(z)
    return c * z ** (2 - d)


def newtonian(r: ArrayLike, spec: PotentialSpec) -> ArrayLike:
    """Newtonian kernel N(r)"""
    arr = _check_radius(r)
    return _scalar_or_array(_newtonian_raw(arr, spec.d), r)


def newtonian_d1(r: ArrayLike, spec: PotentialSpec) -> ArrayLike:
    """First radial derivative of N"""
    arr = _check_radius(r)
    d = spec.d
    c = newtonian_constant(d)
    if d == 2:
        out = -c / arr
    else:
        out = -c * (d - 2) * arr ** (1 - d)
    return _scalar_or_array(out, r)


def newtonian_d2(r: ArrayLike, spec: PotentialSpec) -> ArrayLike:
    """Second radial derivative of N"""
    arr = _check_radius(r)
    d = spec.d
    c = newtonian_constant(d)
    if d == 2:
        out = c / arr ** 2
    else:
        out = c * (d - 2) * (d - 1) * arr ** (-d)
    return _scalar_or_array(out, r)


def equilibrium_radius(spec: PotentialSpec) -> float:
    """Unique zero of V'(r) = m*N'(r) + r"""
    d, m = spec.d, spec.m
    c = newtonian_constant(d)
    if d == 2:
        return float(np.sqrt(c * m))
    return float((c * (d - 2) * m) ** (1.0 / d))


class RadialPotential(ABC):
    """One-dimensional confining potential on (0, inf) with a single minimum"""

    d: int

    @abstractmethod
    def _raw(self, z):
        """Potential formula without domain checks; must accept complex input"""

    @abstractmethod
    def _raw_d1(self, r: np.ndarray) -> np.ndarray:
        ...

    @abstractmethod
    def _raw_d2(self, r: np.ndarray) -> np.ndarray:
        ...

    @property
    @abstractmethod
    def r_star(self) -> float:
        """Location of the minimum"""

    def value(self, r: ArrayLike) -> ArrayLike:
        arr = _check_radius(r)
        return _scalar_or_array(self._raw(arr), r)

    def d1(self, r: ArrayLike) -> ArrayLike:
        arr = _check_radius(r)
        return _scalar_or_array(self._raw_d1(arr), r)

    def d2(self, r: ArrayLike) -> ArrayLike:
        arr = _check_radius(r)
        return _scalar_or_array(self._raw_d2(arr), r)

    def shifted(self, r: ArrayLike) -> ArrayLike:
        """V(r) - e_min by direct subtraction"""
        return self.value(r) - self.e_min

    @cached_property
    def e_min(self) -> float:
        return float(np.real(self._raw(self.r_star)))

    @cached_property
    def curvature(self) -> float:
        """V''(r*)"""
        return float(self._raw_d2(np.asarray(self.r_star, dtype=float)))

    @property
    def tau(self) -> float:
        """Small-oscillation period 2*pi/sqrt(V''(r*))"""
        return float(2.0 * np.pi / np.sqrt(self.curvature))


class EffectivePotential(RadialPotential):
    """V(r) = m*N(r) + r**2/2"""

    def __init__(self, spec: PotentialSpec):
        self.spec = spec
        self.d = spec.d
        self.m = spec.m

    def __repr__(self) -> str:
        return f"EffectivePotential(d={self.d}, m={self.m:.17g})"

    def _raw(self, z):
        return self.m * _newtonian_raw(z, self.d) + 0.5 * z * z

    def _raw_d1(self, r):
        c = newtonian_constant(self.d)
        if self.d == 2:
            return -self.m * c / r + r
        return -self.m * c * (self.d - 2) * r ** (1 - self.d) + r

    def _raw_d2(self, r):
        c = newtonian_constant(self.d)
        if self.d == 2:
            return self.m * c / r ** 2 + 1.0
        return self.m * c * (self.d - 2) * (self.d - 1) * r ** (-self.d) + 1.0

    @cached_property
    def r_star(self) -> float:
        return equilibrium_radius(self.spec)


class NormalizedPotential(RadialPotential):
    """
    V_d(x) = (x^(2-d) - 1)/(d - 2) + (x^2 - 1)/2, with -ln(x) for d = 2

    Minimum at x = 1 with V_d(1) = 0 and V_d''(1) = d. For d >= 3 it is the
    unit-mass effective potential after rescaling r = r* x and subtracting
    e_min, with energies divided by r*^2.
    """

    def __init__(self, d: int):
        self.spec = PotentialSpec(d=d, m=1.0)
        self.d = self.spec.d

    def __repr__(self) -> str:
        return f"NormalizedPotential(d={self.d})"

    def _raw(self, z):
        if self.d == 2:
            first = -np.log(z)
        else:
            first = (z ** (2 - self.d) - 1.0) / (self.d - 2)
        return first + 0.5 * (z * z - 1.0)

    def _raw_d1(self, r):
        return -r ** (1 - self.d) + r

    def _raw_d2(self, r):
        return (self.d - 1) * r ** (-self.d) + 1.0

    @property
    def r_star(self) -> float:
        return 1.0

    @cached_property
    def e_min(self) -> float:
        return 0.0


def e_min(spec: PotentialSpec) -> float:
    """Minimum value of the effective potential"""
    return EffectivePotential(spec).e_min


def c_min(d: int) -> float:
    """Minimum of N(r) + r^2/2, i.e. e_min at unit mass"""
    return e_min(PotentialSpec(d=d, m=1.0))


def tau_d(d: int) -> float:
    """
    Harmonic period 2*pi/sqrt(V''(r*)) of the unit-mass potential

    V''(r*) = d for every mass, so tau_d = 2*pi/sqrt(d).
    """
    return EffectivePotential(PotentialSpec(d=d, m=1.0)).tau


def normalize_energy(E: float, spec: PotentialSpec, tol: float = 1e-12) -> float:
    """
    Map an energy at mass m to the equivalent energy at unit mass

    d >= 3: E_hat = m^(-2/d) * E
    d = 2:  E_hat = E/m + ln(m)/(4*pi)

    Periods are unchanged by the map: T(E; m) = T(E_hat; 1).
    """
    floor = e_min(spec)
    if not np.isfinite(E) or E < floor - tol * max(1.0, abs(floor)):
        raise DomainError(f"Energy {E} lies below e_min = {floor} for {spec}")
    if spec.d == 2:
        return float(E / spec.m + np.log(spec.m) / (4.0 * np.pi))
    return float(spec.m ** (-2.0 / spec.d) * E)
