"""
Lagrangian bulk solver

Evolves a finite set of label characteristics from initial data and
reconstructs the Eulerian fields from them. Breakdown is reported when
labels cross (loss of monotonicity of the flow map) or when the density of
some label blows up.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from src.dynamics.characteristics import CharacteristicIntegrator
from src.errors import DomainError, InconsistentDataError
from src.initial_data.initial_data import InitialData, c0_profile, common_period
from src.potential.radial_potential import surface_area, tau_d
from src.utils.csv_io import write_table

logger = logging.getLogger(__name__)

STATUS_GLOBAL = 'global'
STATUS_CROSSING = 'classical_breakdown'
STATUS_BLOWUP = 'blowup'


@dataclass
class FieldSample:
    """Eulerian fields at one time on a set of radii"""
    t: float
    r: np.ndarray
    P: np.ndarray
    u: np.ndarray
    rho: np.ndarray
    outside: np.ndarray


@dataclass
class MonitorSeries:
    """sup r^(1-d) P + sup |u_r| over the labels, per stored time"""
    t: np.ndarray
    values: np.ndarray

    def to_csv(self, path: str) -> str:
        return write_table(path, ['t', 'monitor'], [self.t, self.values])


@dataclass
class BulkSolution:
    """Label trajectories on the stored time grid; arrays are (times, labels)"""
    d: int
    t: np.ndarray
    labels: np.ndarray
    positions: np.ndarray
    velocity: np.ndarray
    density: np.ndarray
    gradient: np.ndarray
    m0: np.ndarray
    status: str = STATUS_GLOBAL
    breakdown_time: Optional[float] = None
    config: Dict = field(default_factory=dict, repr=False)

    @property
    def boundary(self) -> np.ndarray:
        """Support edge R(t), the trajectory of the outermost label"""
        return self.positions[:, -1]

    def write_boundary(self, path: str) -> str:
        return write_table(path, ['t', 'R'], [self.t, self.boundary])

    def write_snapshots(self, path: str) -> str:
        """Long-format table t,r,rho,u,P over all stored times and labels"""
        n_t, n_l = self.positions.shape
        t = np.repeat(self.t, n_l)
        r = self.positions.ravel()
        P = self.density.ravel()
        rho = P / (surface_area(self.d) * r ** (self.d - 1))
        return write_table(path, ['t', 'r', 'rho', 'u', 'P'], [t, r, rho, self.velocity.ravel(), P])


class BulkSolver:
    """Evolves label characteristics and reconstructs the fields"""

    def __init__(self, config: Optional[Dict] = None, dynamics_config: Optional[Dict] = None):
        config = config or {}
        self.config = config
        self.dynamics_config = dict(dynamics_config or {})
        self.label_count = config.get('label_count', 256)
        self.steps_per_period = config.get('steps_per_period', 100)
        self.periods = config.get('periods', 10)
        self.rtol = config.get('rtol', self.dynamics_config.get('rtol', 1e-10))
        self.tol_C0 = config.get('tol_C0', 1e-6)

    def _integrator(self, d: int) -> CharacteristicIntegrator:
        return CharacteristicIntegrator(d, self.dynamics_config)

    def select_labels(self, data: InitialData, label_count: Optional[int] = None) -> np.ndarray:
        """Log-spaced labels between the first node and R0 (all nodes if fewer)"""
        count = self.label_count if label_count is None else label_count
        if count < 2:
            raise DomainError(f"Need at least two labels, got {count}")
        if count >= len(data.grid):
            return data.grid.copy()
        return np.geomspace(data.grid[0], data.R0, count)

    def default_time_grid(self, data: InitialData, t_end: Optional[float] = None) -> np.ndarray:
        """
        Uniform grid with steps_per_period samples per time unit

        The unit is the common period T0 when c0 is constant and tau_d
        otherwise, so multiples of T0 are stored exactly.
        """
        C0 = c0_profile(data).values
        spread = np.max(np.abs(C0 - np.mean(C0))) / max(abs(np.mean(C0)), 1e-300)
        unit = common_period(data) if spread <= self.tol_C0 else tau_d(data.d)
        horizon = self.periods * unit if t_end is None else t_end
        if horizon <= 0:
            raise DomainError(f"Final time must be positive, got {horizon}")
        steps = max(int(np.ceil(horizon / unit * self.steps_per_period)), 1)
        return np.linspace(0.0, horizon, steps + 1)

    def evolve(self, data: InitialData, t_grid=None, label_count: Optional[int] = None,
               t_end: Optional[float] = None) -> BulkSolution:
        """
        Integrate all labels on t_grid

        Returns a solution truncated at the first label crossing (status
        'classical_breakdown') or at density blow-up (status 'blowup').
        """
        issues = data.consistency_issues()
        if issues:
            raise InconsistentDataError('; '.join(issues))

        labels = self.select_labels(data, label_count)
        grid = self.default_time_grid(data, t_end) if t_grid is None else np.asarray(t_grid, dtype=float)
        if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0):
            raise DomainError("Time grid must be strictly increasing with at least two entries")

        integrator = self._integrator(data.d)
        m = data.m0(labels)
        fam = integrator.solve_pw_family(labels, data.u0(labels), data.P0(labels), data.u0.derivative(labels),
                                         m, (grid[0], grid[-1]), tol=self.rtol, t_eval=grid)
        r, u, P, w = (fam.y[k].T for k in range(4))
        sol = BulkSolution(d=data.d, t=fam.t, labels=labels, positions=r, velocity=u, density=P,
                           gradient=w, m0=m, config={'rtol': self.rtol})
        if fam.status == 'blowup':
            sol.status = STATUS_BLOWUP
            sol.breakdown_time = fam.blowup_time

        ordered = np.all(np.diff(r, axis=1) > 0, axis=1)
        if not ordered[0]:
            raise InconsistentDataError("Labels are not ordered at the initial time")
        if not np.all(ordered):
            k = int(np.argmin(ordered))
            crossing = self._refine_crossing(sol, integrator, k)
            self._truncate(sol, k)
            sol.status = STATUS_CROSSING
            sol.breakdown_time = crossing
            logger.warning(f"Labels cross at t = {crossing:.9g}; classical solution breaks down")
        elif sol.status == STATUS_BLOWUP:
            logger.warning(f"Density blows up at t = {sol.breakdown_time:.9g}")
        else:
            logger.info(f"Bulk run finished: {labels.size} labels up to t = {sol.t[-1]:.6g}")
        return sol

    def _state_at(self, sol: BulkSolution, k: int):
        return sol.positions[k], sol.velocity[k], sol.density[k], sol.gradient[k]

    def _refine_crossing(self, sol: BulkSolution, integrator: CharacteristicIntegrator, k: int) -> float:
        r, u, P, w = self._state_at(sol, k - 1)
        t_lo, t_hi = sol.t[k - 1], sol.t[k]
        local = integrator.solve_pw_family(r, u, P, w, sol.m0, (t_lo, t_hi), tol=self.rtol, dense=True)
        n = sol.labels.size

        def min_gap(t):
            return float(np.min(np.diff(local.dense(t)[:n])))

        end = min(t_hi, float(local.t[-1]))
        if min_gap(end) > 0:
            logger.warning("Crossing could not be bracketed on the refined interval; using the stored time")
            return float(t_hi)
        return float(brentq(min_gap, t_lo, end, xtol=1e-13, rtol=1e-12))

    @staticmethod
    def _truncate(sol: BulkSolution, k: int) -> None:
        sol.t = sol.t[:k]
        sol.positions = sol.positions[:k]
        sol.velocity = sol.velocity[:k]
        sol.density = sol.density[:k]
        sol.gradient = sol.gradient[:k]

    def _labels_at(self, sol: BulkSolution, t: float):
        """Label states at time t; stored times are reused, others re-integrated"""
        if t < sol.t[0] or t > sol.t[-1]:
            raise DomainError(f"t = {t} outside the stored range [{sol.t[0]}, {sol.t[-1]}]")
        k = int(np.searchsorted(sol.t, t, side='right') - 1)
        if np.isclose(sol.t[k], t, rtol=0.0, atol=1e-12 * max(1.0, abs(t))):
            return self._state_at(sol, k)
        integrator = self._integrator(sol.d)
        r, u, P, w = self._state_at(sol, k)
        local = integrator.solve_pw_family(r, u, P, w, sol.m0, (sol.t[k], t), tol=self.rtol, t_eval=[t])
        return tuple(local.y[c][:, -1] for c in range(4))

    def fields(self, sol: BulkSolution, t: float, r) -> FieldSample:
        """
        P, u and rho = P / (|S^{d-1}| r^{d-1}) at radii r and time t

        Between labels the fields are interpolated monotonically in the
        current positions; below the innermost label P ~ r^(d-1) and u ~ r;
        outside the support all fields vanish.
        """
        radii = np.atleast_1d(np.asarray(r, dtype=float))
        if np.any(radii <= 0):
            raise DomainError("Radii must be positive")
        pos, vel, dens, _ = self._labels_at(sol, t)
        if np.any(np.diff(pos) <= 0):
            raise DomainError(f"Flow map is not monotone at t = {t}; fields are not single-valued")

        P = np.zeros_like(radii)
        u = np.zeros_like(radii)
        outside = radii > pos[-1]
        core = radii < pos[0]
        bulk = ~outside & ~core

        if np.any(bulk):
            P[bulk] = PchipInterpolator(pos, dens)(radii[bulk])
            u[bulk] = PchipInterpolator(pos, vel)(radii[bulk])
        if np.any(core):
            ratio = radii[core] / pos[0]
            P[core] = dens[0] * ratio ** (sol.d - 1)
            u[core] = vel[0] * ratio

        rho = P / (surface_area(sol.d) * radii ** (sol.d - 1))
        return FieldSample(t=float(t), r=radii, P=P, u=u, rho=rho, outside=outside)

    def enclosed_mass(self, sol: BulkSolution, k: int) -> float:
        """Integral of P over [0, R(t_k)] from the interpolated field"""
        pos, dens = sol.positions[k], sol.density[k]
        core = pos[0] * dens[0] / sol.d
        return float(core + PchipInterpolator(pos, dens).integrate(pos[0], pos[-1]))

    def continuation_monitor(self, sol: BulkSolution) -> MonitorSeries:
        """sup_j Phi_j^(1-d) P_j + sup_j |w_j| at every stored time"""
        values = (np.max(sol.positions ** (1 - sol.d) * sol.density, axis=1)
                  + np.max(np.abs(sol.gradient), axis=1))
        return MonitorSeries(t=sol.t.copy(), values=values)
