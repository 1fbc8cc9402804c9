"""
Characteristic dynamics of the radial pressureless Euler-Poisson system

Along a characteristic r(t) carrying enclosed mass m:
    r' = u,  u' = -m N'(r) - r
and the density and velocity gradient evolve by
    P' = -P w,  w' = -w^2 - m N''(r) - N'(r) P - 1.
All labels share the same right-hand sides, so every solver here accepts a
family of characteristics stacked into one state vector.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from src.errors import DegenerateOrbitError, DomainError, InconsistentDataError, IntegratorError
from src.potential.radial_potential import EffectivePotential, PotentialSpec, newtonian_constant
from src.utils.csv_io import write_table

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CharacteristicState:
    """Position, velocity, density and velocity gradient of one characteristic"""
    r: float
    u: float
    m: float
    P: float = 0.0
    w: float = 0.0
    t: float = 0.0

    def __post_init__(self):
        values = (self.r, self.u, self.m, self.P, self.w, self.t)
        if not all(np.isfinite(values)):
            raise DomainError(f"Characteristic state must be finite: {self}")
        if self.r <= 0:
            raise DomainError(f"Characteristic radius must be positive, got {self.r}")
        if self.m <= 0:
            raise DomainError(f"Enclosed mass must be positive, got {self.m}")
        if self.P < 0:
            raise DomainError(f"Density must be non-negative, got {self.P}")

    @classmethod
    def from_data(cls, data, r: float) -> 'CharacteristicState':
        """State of the characteristic starting at radius r of initial data"""
        return cls(r=float(r), u=float(data.u0(r)), m=float(data.m0(r)),
                   P=float(data.P0(r)), w=float(data.u0.derivative(r)))


@dataclass
class Trajectory:
    """Sampled solution of one characteristic"""
    d: int
    m: float
    t: np.ndarray
    r: np.ndarray
    u: np.ndarray
    P: Optional[np.ndarray] = None
    w: Optional[np.ndarray] = None
    energy_drift: float = 0.0
    blowup_time: Optional[float] = None
    dense: Optional[object] = field(default=None, repr=False)

    @property
    def mode(self) -> str:
        return 'orbit' if self.P is None else 'pw'

    def __call__(self, t):
        """Dense-output state at time(s) t; rows r, u (and P, w)"""
        if self.dense is None:
            raise IntegratorError("Trajectory was computed without dense output")
        return self.dense(t)

    def final_state(self) -> CharacteristicState:
        P = 0.0 if self.P is None else float(self.P[-1])
        w = 0.0 if self.w is None else float(self.w[-1])
        return CharacteristicState(r=float(self.r[-1]), u=float(self.u[-1]), m=self.m,
                                   P=P, w=w, t=float(self.t[-1]))

    def to_csv(self, path: str) -> str:
        nan = np.full_like(self.t, np.nan)
        P = nan if self.P is None else self.P
        w = nan if self.w is None else self.w
        return write_table(path, ['t', 'r', 'u', 'P', 'w'], [self.t, self.r, self.u, P, w])


@dataclass
class ClosedFormSeries:
    """f(t) = theta u(t) + kappa r(t) and the density/gradient it predicts"""
    t: np.ndarray
    f: np.ndarray
    fprime: np.ndarray
    P: np.ndarray
    w: np.ndarray


@dataclass
class FamilySolution:
    """Raw solution of a stacked family of characteristics"""
    t: np.ndarray
    y: np.ndarray            # shape (components, labels, times)
    status: str              # 'completed' or 'blowup'
    blowup_time: Optional[float] = None
    dense: Optional[object] = field(default=None, repr=False)
    extras: Dict = field(default_factory=dict)


class CharacteristicIntegrator:
    """Adaptive integration of characteristics in dimension d"""

    def __init__(self, d: int, config: Optional[Dict] = None):
        config = config or {}
        self.spec = PotentialSpec(d=d)
        self.d = self.spec.d
        self._c = newtonian_constant(self.d)
        self.method = config.get('method', 'DOP853')
        self.rtol = config.get('rtol', 1e-10)
        self.atol_fraction = config.get('atol_fraction', 1e-3)
        self.blowup_threshold = config.get('blowup_threshold', 1e12)
        self.drift_tol = config.get('drift_tol', 1e-8)
        self.r_floor_fraction = config.get('r_floor_fraction', 1e-10)
        self.period_rtol = config.get('period_rtol', 1e-12)
        self.max_periods = config.get('max_periods', 10)
        self.crossing_samples_per_tau = config.get('crossing_samples_per_tau', 200)
        self.tau = EffectivePotential(PotentialSpec(d=self.d, m=1.0)).tau

    # ------------------------------------------------------------------
    # Right-hand sides (no domain checks; trial stages may leave r > 0)
    # ------------------------------------------------------------------

    def _n1(self, r):
        if self.d == 2:
            return -self._c / r
        return -self._c * (self.d - 2) * r ** (1 - self.d)

    def _n2(self, r):
        if self.d == 2:
            return self._c / (r * r)
        return self._c * (self.d - 2) * (self.d - 1) * r ** (-self.d)

    def acceleration(self, r, m):
        """u' = -m N'(r) - r"""
        return -m * self._n1(r) - r

    def _orbit_rhs(self, m):
        def rhs(t, y):
            r, u = y.reshape(2, -1)
            return np.concatenate([u, self.acceleration(r, m)])
        return rhs

    def _pw_rhs(self, m):
        def rhs(t, y):
            r, u, P, w = y.reshape(4, -1)
            dP = -P * w
            dw = -w * w - m * self._n2(r) - self._n1(r) * P - 1.0
            return np.concatenate([u, self.acceleration(r, m), dP, dw])
        return rhs

    def _r_floor_event(self, floor: np.ndarray):
        n = floor.size

        def event(t, y):
            return float(np.min(y[:n] - floor))
        event.terminal = True
        event.direction = -1
        return event

    def _blowup_event(self, n: int):
        threshold = self.blowup_threshold

        def event(t, y):
            P = y[2 * n:3 * n]
            w = y[3 * n:4 * n]
            return threshold - max(float(np.max(np.abs(P))), float(np.max(np.abs(w))))
        event.terminal = True
        event.direction = -1
        return event

    def _scales(self, r0: np.ndarray, m: np.ndarray) -> np.ndarray:
        """Length scale of each label: its radius or its equilibrium radius"""
        if self.d == 2:
            r_star = np.sqrt(self._c * m)
        else:
            r_star = (self._c * (self.d - 2) * m) ** (1.0 / self.d)
        return np.maximum(r0, r_star)

    def _energy(self, r, u, m):
        pot = EffectivePotential(PotentialSpec(d=self.d, m=m))
        return 0.5 * u * u + pot.value(r), pot.e_min

    # ------------------------------------------------------------------
    # Families
    # ------------------------------------------------------------------

    def solve_orbit_family(self, r0, u0, m, t_span, tol: Optional[float] = None,
                           t_eval=None, dense: bool = True, events=None) -> FamilySolution:
        """Integrate (r, u) for a stack of characteristics with masses m"""
        r0, u0, m = (np.atleast_1d(np.asarray(a, dtype=float)) for a in (r0, u0, m))
        tol = self.rtol if tol is None else tol
        scale = self._scales(r0, m)
        atol = tol * self.atol_fraction * np.concatenate([scale, scale])
        all_events = [self._r_floor_event(self.r_floor_fraction * scale)] + list(events or [])

        sol = solve_ivp(self._orbit_rhs(m), t_span, np.concatenate([r0, u0]), method=self.method,
                        rtol=tol, atol=atol, t_eval=t_eval, dense_output=dense, events=all_events)
        if sol.status == -1:
            raise IntegratorError(f"Orbit integration failed: {sol.message}",
                                  t=float(sol.t[-1]) if sol.t.size else None)
        if sol.t_events[0].size:
            raise IntegratorError("Characteristic reached the origin", t=float(sol.t_events[0][0]))

        y = sol.y.reshape(2, r0.size, -1)
        return FamilySolution(t=sol.t, y=y, status='completed', dense=sol.sol,
                              extras={'t_events': sol.t_events[1:], 'y_events': sol.y_events[1:]})

    def solve_pw_family(self, r0, u0, P0, w0, m, t_span, tol: Optional[float] = None,
                        t_eval=None, dense: bool = False) -> FamilySolution:
        """
        Integrate (r, u, P, w) for a stack of characteristics

        Stops at the first time any |P| or |w| reaches the blow-up
        threshold; the state at that time is appended to the output.
        """
        r0, u0, P0, w0, m = (np.atleast_1d(np.asarray(a, dtype=float)) for a in (r0, u0, P0, w0, m))
        n = r0.size
        tol = self.rtol if tol is None else tol
        scale = self._scales(r0, m)
        frac = tol * self.atol_fraction
        atol = frac * np.concatenate([scale, scale, np.maximum(P0, 1e-300),
                                      np.maximum(np.abs(w0), 1.0)])
        events = [self._r_floor_event(self.r_floor_fraction * scale), self._blowup_event(n)]

        sol = solve_ivp(self._pw_rhs(m), t_span, np.concatenate([r0, u0, P0, w0]), method=self.method,
                        rtol=tol, atol=atol, t_eval=t_eval, dense_output=dense, events=events)
        if sol.status == -1:
            raise IntegratorError(f"Density/gradient integration failed before blow-up detection: {sol.message}",
                                  t=float(sol.t[-1]) if sol.t.size else None)
        if sol.t_events[0].size:
            raise IntegratorError("Characteristic reached the origin", t=float(sol.t_events[0][0]))

        t, y = sol.t, sol.y
        if sol.t_events[1].size:
            t_blow = float(sol.t_events[1][0])
            if t.size == 0 or t[-1] != t_blow:
                t = np.append(t, t_blow)
                y = np.column_stack([y, sol.y_events[1][0]])
            logger.info(f"Blow-up threshold {self.blowup_threshold:.1e} reached at t = {t_blow:.12g}")
            return FamilySolution(t=t, y=y.reshape(4, n, -1), status='blowup', blowup_time=t_blow, dense=sol.sol)
        return FamilySolution(t=t, y=y.reshape(4, n, -1), status='completed', dense=sol.sol)

    # ------------------------------------------------------------------
    # Single characteristics
    # ------------------------------------------------------------------

    def energy_drift(self, r, u, m) -> float:
        """max |E - E0| relative to the orbit depth E0 - e_min"""
        E, floor = self._energy(r, u, m)
        depth = max(E[0] - floor, 1e-12 * max(1.0, abs(E[0])))
        return float(np.max(np.abs(E - E[0])) / depth)

    def integrate_orbit(self, state0: CharacteristicState, t_end: float, tol: Optional[float] = None,
                        t_eval=None) -> Trajectory:
        """
        Integrate (r, u) from state0.t to t_end (backwards when t_end < state0.t)

        The relative energy drift (E - E0)/(E0 - e_min) is monitored on the
        solver's steps and logged when it exceeds the drift budget.
        """
        fam = self.solve_orbit_family(state0.r, state0.u, state0.m, (state0.t, t_end), tol=tol)
        drift = self.energy_drift(fam.y[0, 0], fam.y[1, 0], state0.m)
        if drift > self.drift_tol:
            logger.warning(f"Energy drift {drift:.3e} exceeds budget {self.drift_tol:.1e} (m={state0.m:.6g})")

        if t_eval is not None:
            t = np.asarray(t_eval, dtype=float)
            y = fam.dense(t).reshape(2, -1)
            r, u = y[0], y[1]
        else:
            t, r, u = fam.t, fam.y[0, 0], fam.y[1, 0]
        return Trajectory(d=self.d, m=state0.m, t=t, r=r, u=u, energy_drift=drift, dense=fam.dense)

    def integrate_pw(self, state0: CharacteristicState, t_end: float, tol: Optional[float] = None,
                     t_eval=None) -> Trajectory:
        """Integrate (r, u, P, w) from state0 with blow-up detection"""
        fam = self.solve_pw_family(state0.r, state0.u, state0.P, state0.w, state0.m,
                                   (state0.t, t_end), tol=tol, t_eval=t_eval, dense=True)
        r, u, P, w = (fam.y[k, 0] for k in range(4))
        drift = self.energy_drift(r, u, state0.m)
        return Trajectory(d=self.d, m=state0.m, t=fam.t, r=r, u=u, P=P, w=w, energy_drift=drift,
                          blowup_time=fam.blowup_time, dense=fam.dense)

    def f_closed_form(self, traj: Trajectory, theta: float, P0_over_dm: float,
                      check_tol: float = 1e-6) -> ClosedFormSeries:
        """
        f(t) = theta u(t) + (P0/(d m)) r(t) with P = P0/f and w = f'/f

        Raises:
            InconsistentDataError: If f(0) differs from 1 by more than
                ``check_tol``.
        """
        f = theta * traj.u + P0_over_dm * traj.r
        if abs(f[0] - 1.0) > check_tol:
            raise InconsistentDataError(f"f(0) = {f[0]:.12g} differs from 1; theta does not match the data")
        uprime = self.acceleration(traj.r, traj.m)
        fprime = theta * uprime + P0_over_dm * traj.u
        P0 = P0_over_dm * self.d * traj.m
        with np.errstate(divide='ignore', invalid='ignore'):
            P = P0 / f
            w = fprime / f
        return ClosedFormSeries(t=traj.t, f=f, fprime=fprime, P=P, w=w)

    def f_first_root(self, traj: Trajectory, theta: float, P0_over_dm: float) -> Optional[float]:
        """First time the closed-form f vanishes on the trajectory, if any"""
        f = theta * traj.u + P0_over_dm * traj.r
        sign_change = np.flatnonzero(f <= 0)
        if sign_change.size == 0:
            return None
        k = int(sign_change[0])
        if k == 0:
            return float(traj.t[0])

        def f_at(t):
            r, u = traj(t)[:2]
            return theta * u + P0_over_dm * r
        return float(brentq(f_at, traj.t[k - 1], traj.t[k], xtol=1e-14, rtol=1e-13))

    def measured_period(self, state0: CharacteristicState) -> float:
        """
        Period from two successive crossings of the section {u = 0, u decreasing}

        Raises:
            DegenerateOrbitError: When state0 sits at the equilibrium.
            IntegratorError: When no return happens within max_periods * tau_d.
        """
        pot = EffectivePotential(PotentialSpec(d=self.d, m=state0.m))
        E = 0.5 * state0.u ** 2 + float(pot.value(state0.r))
        if E - pot.e_min <= 1e-9 * max(1.0, abs(pot.e_min)):
            raise DegenerateOrbitError("Characteristic sits at the equilibrium; no return map")

        def section(t, y):
            return y[1]
        section.direction = -1

        fam = self.solve_orbit_family(state0.r, state0.u, state0.m,
                                      (state0.t, state0.t + self.max_periods * self.tau),
                                      tol=self.period_rtol, dense=False, events=[section])
        crossings = fam.extras['t_events'][0]
        if crossings.size < 2:
            raise IntegratorError(f"No return to the section within {self.max_periods} harmonic periods",
                                  t=state0.t + self.max_periods * self.tau)
        return float(crossings[1] - crossings[0])

    def first_crossing(self, stateA: CharacteristicState, stateB: CharacteristicState,
                       t_max: float) -> Optional[float]:
        """
        First time the two characteristics occupy the same radius

        The difference r_A - r_B is sampled on a grid of tau_d/200 and the
        first sign change is refined with Brent's method on the dense output.
        """
        if stateA.t != stateB.t:
            raise DomainError("Both characteristics must start at the same time")
        t0 = stateA.t
        if stateA.r == stateB.r:
            return t0

        fam = self.solve_orbit_family([stateA.r, stateB.r], [stateA.u, stateB.u], [stateA.m, stateB.m],
                                      (t0, t0 + t_max), dense=True)

        def gap(t):
            y = fam.dense(t)
            return y[0] - y[1]

        step = self.tau / self.crossing_samples_per_tau
        samples = np.append(np.arange(t0, t0 + t_max, step), t0 + t_max)
        diff = gap(samples)
        initial = np.sign(diff[0])
        changed = np.flatnonzero(np.sign(diff) != initial)
        if changed.size == 0:
            closest = float(np.min(np.abs(diff)))
            if closest < 1e-6 * max(stateA.r, stateB.r):
                logger.warning(f"No sign change found but the characteristics come within {closest:.3e}; "
                               f"crossing search is inconclusive")
            return None
        k = int(changed[0])
        if diff[k] == 0:
            return float(samples[k])
        return float(brentq(gap, samples[k - 1], samples[k], xtol=1e-14, rtol=1e-13))
