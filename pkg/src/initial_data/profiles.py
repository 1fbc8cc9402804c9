"""
Tabulated radial profiles
"""
import logging

import numpy as np
from scipy.interpolate import CubicHermiteSpline, CubicSpline

from src.errors import DomainError, InconsistentDataError

logger = logging.getLogger(__name__)


class RadialProfile:
    """
    Radial function sampled on a strictly increasing grid in (0, R0]

    Interpolation is a not-a-knot C^2 cubic spline by default, or cubic
    Hermite when exact node slopes are supplied. Evaluation is restricted
    to the node range.
    """

    def __init__(self, grid, values, slopes=None):
        grid = np.array(grid, dtype=float).ravel()
        values = np.array(values, dtype=float).ravel()
        if grid.size < 2:
            raise DomainError("A radial profile needs at least two nodes")
        if values.shape != grid.shape:
            raise DomainError(f"Grid has {grid.size} nodes but {values.size} values were given")
        if not (np.all(np.isfinite(grid)) and np.all(np.isfinite(values))):
            raise DomainError("Profile contains non-finite entries")
        if grid[0] <= 0:
            raise DomainError(f"Grid must lie in (0, R0], first node is {grid[0]}")
        if np.any(np.diff(grid) <= 0):
            raise DomainError("Grid must be strictly increasing")

        if slopes is not None:
            slopes = np.array(slopes, dtype=float).ravel()
            if slopes.shape != grid.shape or not np.all(np.isfinite(slopes)):
                raise DomainError("Slopes must be finite and match the grid")
            self._interp = CubicHermiteSpline(grid, values, slopes)
        else:
            self._interp = CubicSpline(grid, values)

        grid.setflags(write=False)
        values.setflags(write=False)
        self.grid = grid
        self.values = values
        self.exact_slopes = slopes is not None

    def __len__(self) -> int:
        return self.grid.size

    def __repr__(self) -> str:
        return f"RadialProfile(n={self.grid.size}, r=[{self.grid[0]:.3g}, {self.grid[-1]:.3g}])"

    @property
    def R0(self) -> float:
        return float(self.grid[-1])

    def _check(self, r) -> np.ndarray:
        arr = np.asarray(r, dtype=float)
        lo, hi = self.grid[0], self.grid[-1]
        slack = 1e-12 * hi
        if np.any(arr < lo - slack) or np.any(arr > hi + slack):
            raise DomainError(f"Radius outside profile range [{lo}, {hi}]")
        return np.clip(arr, lo, hi)

    def __call__(self, r):
        out = self._interp(self._check(r))
        return float(out) if np.ndim(r) == 0 else out

    def derivative(self, r):
        out = self._interp.derivative()(self._check(r))
        return float(out) if np.ndim(r) == 0 else out

    def node_slopes(self) -> np.ndarray:
        return self._interp.derivative()(self.grid)

    def antiderivative(self):
        """Piecewise polynomial F with F' equal to the interpolant, F(grid[0]) = 0"""
        return self._interp.antiderivative()


def derive_mass(P0: RadialProfile, d: int, exact=None, rtol: float = 1e-3) -> RadialProfile:
    """
    Enclosed mass m0(r) = integral of P0 over [0, r]

    Below the first node P0 is continued by the power law P0 ~ r^(d-1)
    required by regularity, contributing r_0 * P0(r_0) / d. Above it the
    interpolant of P0 is integrated exactly.

    When the enclosed mass is known in closed form it can be passed as
    `exact` (values at the nodes). It is used as given after a check that
    it agrees with the integral of P0 to `rtol`.

    Raises:
        InconsistentDataError: On negative P0, a non-positive total mass,
            or exact masses that do not integrate P0.
    """
    if np.any(P0.values < 0):
        bad = P0.grid[np.argmax(P0.values < 0)]
        raise InconsistentDataError(f"P0 is negative at r = {bad}")

    r0 = P0.grid[0]
    core = r0 * P0.values[0] / d
    mass = core + P0.antiderivative()(P0.grid)
    if mass[-1] <= 0:
        raise InconsistentDataError("Total mass must be positive")

    if exact is not None:
        exact = np.array(exact, dtype=float).ravel()
        if exact.shape != mass.shape or not np.all(np.isfinite(exact)):
            raise InconsistentDataError("Exact enclosed mass must be finite and match the grid")
        gap = np.abs(exact - mass) / np.maximum(np.abs(mass), np.finfo(float).tiny)
        if np.max(gap) > rtol:
            bad = P0.grid[np.argmax(gap)]
            raise InconsistentDataError(f"Exact enclosed mass does not integrate P0 near r = {bad:.6g}")
        logger.debug(f"Exact enclosed mass supplied; quadrature gap {np.max(gap):.2e}")
        mass = exact

    # m0' = P0, so the node slopes are the density values themselves
    return RadialProfile(P0.grid, mass, slopes=P0.values)
