"""
Symplectic integrator (velocity Verlet) for single characteristics

Fixed-step counterpart of CharacteristicIntegrator.integrate_orbit.
"""
import logging
from typing import Optional

import numpy as np

from src.dynamics.characteristics import CharacteristicIntegrator, CharacteristicState, Trajectory
from src.errors import DomainError, IntegratorError

logger = logging.getLogger(__name__)


class LeapfrogIntegrator:
    """Velocity Verlet for r'' = -m N'(r) - r"""

    def __init__(self, d: int, dt: float = 1e-3):
        if dt <= 0:
            raise DomainError(f"Step size must be positive, got {dt}")
        self.forces = CharacteristicIntegrator(d)
        self.d = self.forces.d
        self.dt = dt

    def integrate(self, state0: CharacteristicState, t_end: float, dt: Optional[float] = None,
                  stride: int = 1) -> Trajectory:
        """
        Advance state0 to t_end, storing every ``stride``-th step

        The last step is shortened so that the trajectory ends at t_end.
        """
        dt = self.dt if dt is None else dt
        span = t_end - state0.t
        if span <= 0:
            raise DomainError("Leapfrog integration runs forward in time only")
        steps = int(np.ceil(span / dt))
        h = span / steps

        m = state0.m
        r, u = state0.r, state0.u
        a = self.forces.acceleration(r, m)
        times, rs, us = [state0.t], [r], [u]
        for k in range(1, steps + 1):
            u_half = u + 0.5 * h * a
            r = r + h * u_half
            if r <= 0:
                raise IntegratorError("Leapfrog step crossed the origin; reduce dt", t=state0.t + k * h)
            a = self.forces.acceleration(r, m)
            u = u_half + 0.5 * h * a
            if k % stride == 0 or k == steps:
                times.append(state0.t + k * h)
                rs.append(r)
                us.append(u)

        r_arr, u_arr = np.array(rs), np.array(us)
        drift = self.forces.energy_drift(r_arr, u_arr, m)
        logger.debug(f"Leapfrog: {steps} steps, relative energy error {drift:.3e}")
        return Trajectory(d=self.d, m=m, t=np.array(times), r=r_arr, u=u_arr, energy_drift=drift)
