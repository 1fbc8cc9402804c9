"""
Period function of the radial effective potential

T(E) = 2 * integral over [x1, x2] of dx / sqrt(2 (E - V(x)))

The integral is evaluated after the substitution x = x1 + (x2 - x1) sin^2(theta),
which removes both inverse square-root endpoint singularities. T'(E) is
computed from the H-function representation, which avoids differentiating
the period integral numerically.
"""
import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Tuple

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from src.errors import DegenerateOrbitError, DomainError, QuadratureError, SingularityError
from src.period.local_expansion import LocalExpansion
from src.potential.radial_potential import EffectivePotential, PotentialSpec, RadialPotential
from src.utils.csv_io import write_table

logger = logging.getLogger(__name__)

EPS = np.finfo(float).eps


@dataclass(frozen=True)
class TurningPoints:
    """Roots x1 < r* < x2 of V(x) = E"""
    x1: float
    x2: float
    E: float


@dataclass
class PeriodTable:
    """Sampled period function with the potential and tolerance it was computed for"""
    E: np.ndarray
    T: np.ndarray
    d: int
    m: float
    rtol: float
    label: str = ''

    def to_csv(self, path: str) -> str:
        """E, T and constant d, m, rtol columns"""
        n = self.E.size
        return write_table(path, ['E', 'T', 'd', 'm', 'rtol'],
                           [self.E, self.T, np.full(n, self.d), np.full(n, self.m), np.full(n, self.rtol)])


@dataclass
class ConstancyReport:
    """Deviation of T(E) from the harmonic period over an energy grid"""
    d: int
    tau: float
    sup_deviation: float
    E_grid: np.ndarray = field(repr=False)
    periods: np.ndarray = field(repr=False)


class PeriodAnalyzer:
    """Turning points, period, H-function and period derivative of a potential"""

    def __init__(self, config: Optional[Dict] = None):
        config = config or {}
        self.quad_rtol = config.get('quad_rtol', 1e-10)
        self.quad_limit = config.get('quad_limit', 200)
        self.root_rtol = config.get('root_rtol', 1e-12)
        self.bracket_factor = config.get('bracket_factor', 2.0)
        self.max_bracket_steps = config.get('max_bracket_steps', 1100)
        self.degenerate_tol = config.get('degenerate_tol', 1e-9)
        self.series_radius = config.get('series_radius', 0.05)
        self.series_order = config.get('series_order', 24)
        self.derivative_rtol = config.get('derivative_rtol', 1e-10)
        self.singular_tol = config.get('singular_tol', 1e-14)
        self.max_workers = config.get('max_workers', 4)
        self.expansion_cache_size = config.get('expansion_cache_size', 1024)

        grid_config = config.get('constancy_grid', {})
        self.grid_samples = grid_config.get('samples', 200)
        self.grid_offset_min = grid_config.get('offset_min', 1e-4)
        self.grid_offset_max = grid_config.get('offset_max', 1e2)

        self._expansions: Dict[int, Tuple[RadialPotential, LocalExpansion]] = {}
        self._lock = threading.Lock()

    # ------------------------------------------------------------------
    # Shifted potential with series evaluation near the minimum
    # ------------------------------------------------------------------

    def expansion(self, pot: RadialPotential) -> LocalExpansion:
        """Cached Taylor jet of ``pot`` about its minimum"""
        key = id(pot)
        with self._lock:
            cached = self._expansions.get(key)
            if cached is None or cached[0] is not pot:
                if len(self._expansions) >= self.expansion_cache_size:
                    self._expansions.clear()
                cached = (pot, LocalExpansion(pot, order=self.series_order,
                                              series_radius=self.series_radius))
                self._expansions[key] = cached
        return cached[1]

    def _near_minimum(self, x: float, pot: RadialPotential) -> bool:
        return abs(x - pot.r_star) <= self.series_radius * pot.r_star

    def _shifted(self, x: float, pot: RadialPotential) -> float:
        if self._near_minimum(x, pot):
            return self.expansion(pot).shifted(x)
        return float(pot.value(x)) - pot.e_min

    def _check_energy(self, E: float, pot: RadialPotential) -> float:
        if not np.isfinite(E):
            raise DomainError(f"Energy must be finite, got {E}")
        excess = E - pot.e_min
        if excess < -self.degenerate_tol * max(1.0, abs(pot.e_min)):
            raise DomainError(f"Energy {E} lies below e_min = {pot.e_min} for {pot}")
        return excess

    # ------------------------------------------------------------------
    # Turning points
    # ------------------------------------------------------------------

    def _solve_level(self, level: float, pot: RadialPotential) -> Tuple[float, float]:
        """Roots of V(x) - e_min = level on either side of r*"""
        r_star = pot.r_star
        factor = self.bracket_factor

        def excess(x: float) -> float:
            return self._shifted(x, pot) - level

        inner_hi, inner_lo = r_star, r_star / factor
        steps = 0
        while excess(inner_lo) <= 0:
            inner_hi, inner_lo = inner_lo, inner_lo / factor
            steps += 1
            if steps > self.max_bracket_steps or inner_lo == 0.0:
                raise DomainError(f"Could not bracket the inner turning point at level {level}")

        outer_lo, outer_hi = r_star, r_star * factor
        steps = 0
        while excess(outer_hi) <= 0:
            outer_lo, outer_hi = outer_hi, outer_hi * factor
            steps += 1
            if steps > self.max_bracket_steps or not np.isfinite(outer_hi):
                raise DomainError(f"Could not bracket the outer turning point at level {level}")

        tiny = np.finfo(float).tiny
        x1 = brentq(excess, inner_lo, inner_hi, xtol=tiny, rtol=self.root_rtol)
        x2 = brentq(excess, outer_lo, outer_hi, xtol=tiny, rtol=self.root_rtol)
        return float(x1), float(x2)

    def turning_points(self, E: float, pot: RadialPotential) -> TurningPoints:
        """
        Roots x1 < r* < x2 of V(x) = E

        Raises:
            DegenerateOrbitError: If E does not exceed e_min.
        """
        if not np.isfinite(E):
            raise DomainError(f"Energy must be finite, got {E}")
        level = E - pot.e_min
        if level <= 0:
            raise DegenerateOrbitError(f"Energy {E} does not exceed e_min = {pot.e_min}")
        x1, x2 = self._solve_level(level, pot)
        return TurningPoints(x1=x1, x2=x2, E=float(E))

    # ------------------------------------------------------------------
    # Period
    # ------------------------------------------------------------------

    def _integrate(self, func: Callable[[float], float], epsrel: float, epsabs: float,
                   what: str) -> float:
        result = quad(func, 0.0, 0.5 * np.pi, epsabs=epsabs, epsrel=epsrel,
                      limit=self.quad_limit, full_output=1)
        value, abserr = float(result[0]), float(result[1])
        if len(result) > 3:
            # Accept roundoff warnings when the error estimate is still within budget
            budget = 100.0 * max(epsabs, epsrel * abs(value))
            if not np.isfinite(value) or abserr > budget:
                raise QuadratureError(f"{what}: {result[3]}", estimate=value, abserr=abserr)
            logger.debug(f"{what}: accepted quadrature warning, abserr={abserr:.3g}")
        return value

    def period(self, E: float, pot: RadialPotential) -> float:
        """
        Period of the orbit with energy E in the potential ``pot``

        Returns the harmonic period tau when E - e_min is within the
        degeneracy tolerance.
        """
        level = self._check_energy(E, pot)
        if level <= self.degenerate_tol:
            return pot.tau

        x1, x2 = self._solve_level(level, pot)
        length = x2 - x1
        # Residuals at the roots, spread linearly so the gap vanishes exactly at both ends
        res1 = level - self._shifted(x1, pot)
        res2 = level - self._shifted(x2, pot)
        slope1 = abs(float(pot.d1(x1)))
        slope2 = abs(float(pot.d1(x2)))
        floor = 256.0 * EPS * max(level, abs(pot.e_min), 1.0)

        def integrand(theta: float) -> float:
            s, c = np.sin(theta), np.cos(theta)
            x = x1 + length * s * s
            gap = (level - self._shifted(x, pot)
                   - res1 * (x2 - x) / length - res2 * (x - x1) / length)
            if gap <= floor:
                if x - x1 <= x2 - x:
                    gap = slope1 * (x - x1)
                    if gap <= 0:
                        return np.sqrt(2.0 * length / slope1)
                else:
                    gap = slope2 * (x2 - x)
                    if gap <= 0:
                        return np.sqrt(2.0 * length / slope2)
            return 2.0 * length * s * c / np.sqrt(2.0 * gap)

        half = self._integrate(integrand, self.quad_rtol, 0.0, f"period at E={E}")
        return 2.0 * half

    # ------------------------------------------------------------------
    # H-function and period derivative
    # ------------------------------------------------------------------

    def _h(self, x: float, pot: RadialPotential) -> float:
        if self._near_minimum(x, pot):
            return self.expansion(pot).h(x)
        v1 = float(pot.d1(x))
        v2 = float(pot.d2(x))
        shifted = float(pot.value(x)) - pot.e_min
        return (v1 * v1 - 2.0 * shifted * v2) / v1 ** 3

    def h_function(self, x: float, pot: RadialPotential) -> float:
        """
        H(x) = ((V')^2 - 2 (V - e_min) V'') / (V')^3

        Raises:
            SingularityError: Where |V'(x)| is below the singularity
                tolerance (only at r*).
        """
        if abs(float(pot.d1(x))) < self.singular_tol:
            raise SingularityError(f"V'({x}) vanishes; H is undefined at the minimum")
        return self._h(x, pot)

    def period_derivative_limit(self, pot: RadialPotential) -> float:
        """lim T'(E) as E -> e_min, pi * c_V / V''(r*)^(7/2)"""
        return float(np.pi * self.expansion(pot).c_v() / pot.curvature ** 3.5)

    def period_derivative(self, E: float, pot: RadialPotential) -> float:
        """
        T'(E) from the H-function representation

        With E_s = E - e_min and y = E_s sin^2(phi):
            T'(E) = 1/(sqrt(2) E_s^{3/2}) * integral over [0, pi/2] of
                    2 E_s sin(phi) (H(x2(y)) - H(x1(y))) dphi
        """
        level = self._check_energy(E, pot)
        if level <= self.degenerate_tol:
            return self.period_derivative_limit(pot)

        def integrand(phi: float) -> float:
            s = np.sin(phi)
            y = level * s * s
            if y <= 0:
                return 0.0
            x1, x2 = self._solve_level(y, pot)
            return 2.0 * level * s * (self._h(x2, pot) - self._h(x1, pot))

        epsabs = self.derivative_rtol * level
        value = self._integrate(integrand, self.derivative_rtol, epsabs, f"period derivative at E={E}")
        return value / (np.sqrt(2.0) * level ** 1.5)

    # ------------------------------------------------------------------
    # Tables
    # ------------------------------------------------------------------

    def period_table(self, E_grid, pot: RadialPotential, label: str = '') -> PeriodTable:
        """Periods on a strictly increasing energy grid, computed in parallel"""
        grid = np.asarray(E_grid, dtype=float).ravel()
        if grid.size == 0:
            raise DomainError("Energy grid is empty")
        if not np.all(np.isfinite(grid)):
            raise DomainError("Energy grid contains non-finite values")
        if grid.size > 1 and np.any(np.diff(grid) <= 0):
            raise DomainError("Energy grid must be strictly increasing")
        self._check_energy(float(grid[0]), pot)

        with ThreadPoolExecutor(max_workers=self.max_workers) as executor:
            periods = list(executor.map(lambda E: self.period(E, pot), grid))

        logger.info(f"Computed {grid.size} periods for {pot}")
        spec = getattr(pot, 'spec', None)
        m = spec.m if spec is not None else float('nan')
        return PeriodTable(E=grid, T=np.asarray(periods), d=pot.d, m=m, rtol=self.quad_rtol, label=label)

    def offset_grid(self, pot: RadialPotential, offset_min: Optional[float] = None,
                    offset_max: Optional[float] = None, samples: Optional[int] = None) -> np.ndarray:
        """Log-spaced energies e_min + offset"""
        offset_min = self.grid_offset_min if offset_min is None else offset_min
        offset_max = self.grid_offset_max if offset_max is None else offset_max
        samples = self.grid_samples if samples is None else samples
        if not 0 < offset_min < offset_max:
            raise DomainError(f"Need 0 < offset_min < offset_max, got {offset_min}, {offset_max}")
        if samples < 2:
            raise DomainError(f"Need at least two samples, got {samples}")
        return pot.e_min + np.geomspace(offset_min, offset_max, samples)

    def constancy_report(self, d: int, m: float = 1.0) -> ConstancyReport:
        """sup over the default grid of |T(E) - tau_d|"""
        pot = EffectivePotential(PotentialSpec(d=d, m=m))
        table = self.period_table(self.offset_grid(pot), pot)
        deviation = float(np.max(np.abs(table.T - pot.tau)))
        logger.info(f"d={d}: sup |T - tau| = {deviation:.3e}")
        return ConstancyReport(d=d, tau=pot.tau, sup_deviation=deviation,
                               E_grid=table.E, periods=table.T)
