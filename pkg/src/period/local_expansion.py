"""
Taylor jet of a shifted potential about its minimum

The coefficients come from the Cauchy integral formula evaluated with an
FFT on a circle around r*. Inside a small neighbourhood of r* they replace
the direct formulas, which lose all significant digits there.
"""
import logging
from math import factorial
from typing import Optional

import numpy as np
from numpy.polynomial import Polynomial

from src.errors import NumericalConsistencyError
from src.potential.radial_potential import NormalizedPotential, RadialPotential

logger = logging.getLogger(__name__)


class LocalExpansion:
    """Power series of V(x) - e_min in delta = x - r*"""

    def __init__(self, pot: RadialPotential, order: int = 24, samples: int = 64,
                 radius_fraction: float = 0.5, series_radius: float = 0.05):
        if samples <= order:
            raise ValueError(f"Need more samples ({samples}) than series order ({order})")
        if not 0 < series_radius < radius_fraction < 1:
            raise ValueError("Expected 0 < series_radius < radius_fraction < 1")

        self.center = float(pot.r_star)
        self.order = order
        self.series_radius = series_radius * self.center

        rho = radius_fraction * self.center
        nodes = self.center + rho * np.exp(2j * np.pi * np.arange(samples) / samples)
        values = pot._raw(nodes) - pot.e_min
        scaled = np.fft.fft(values) / samples
        coefficients = np.real(scaled[:order + 1]) / rho ** np.arange(order + 1)
        # V(r*) = e_min and V'(r*) = 0 hold exactly
        coefficients[0] = 0.0
        coefficients[1] = 0.0
        self.coefficients = coefficients

        self._value = Polynomial(coefficients)
        self._d1 = self._value.deriv(1)
        self._d2 = self._value.deriv(2)

        # (V')^2 - 2(V - e_min)V'' starts at delta^3
        numerator = self._d1 * self._d1 - 2.0 * self._value * self._d2
        self._h_numerator = Polynomial(numerator.coef[3:])
        self._h_denominator = Polynomial(self._d1.coef[1:])

    def contains(self, x: float) -> bool:
        return abs(x - self.center) <= self.series_radius

    def derivative(self, k: int) -> float:
        """k-th derivative of V at r*"""
        if k > self.order:
            raise ValueError(f"Derivative order {k} exceeds series order {self.order}")
        return float(factorial(k) * self.coefficients[k])

    def shifted(self, x: float) -> float:
        return float(self._value(x - self.center))

    def d1(self, x: float) -> float:
        return float(self._d1(x - self.center))

    def h(self, x: float) -> float:
        """H(x) with the removable pole at r* cancelled"""
        delta = x - self.center
        return float(self._h_numerator(delta) / self._h_denominator(delta) ** 3)

    def c_v(self) -> float:
        """-(1/4) V'' V'''' + (5/12) (V''')^2 at the minimum"""
        v2, v3, v4 = self.derivative(2), self.derivative(3), self.derivative(4)
        return -0.25 * v2 * v4 + 5.0 / 12.0 * v3 * v3


def c_v_closed_form(d: int) -> float:
    """(1/6) d^2 (d - 1)(d - 4) for the normalized potential V_d"""
    return d * d * (d - 1) * (d - 4) / 6.0


def c_v(d: int, rtol: float = 1e-6, expansion: Optional[LocalExpansion] = None) -> float:
    """
    Isochronicity coefficient of V_d from numerical derivatives

    The numerical value is verified against the closed form. Its sign is
    the sign of T'(E) near the minimum.

    Raises:
        NumericalConsistencyError: If the two values disagree by more
            than ``rtol`` relative.
    """
    expansion = expansion or LocalExpansion(NormalizedPotential(d))
    numeric = expansion.c_v()
    closed = c_v_closed_form(d)
    if abs(numeric - closed) > rtol * max(1.0, abs(closed)):
        raise NumericalConsistencyError(
            f"c_V mismatch for d={d}: numeric {numeric:.12g} vs closed form {closed:.12g}"
        )
    return numeric
