"""
Initial data of the radial problem and the quantities derived from it
"""
import logging
from dataclasses import dataclass, field
from typing import List

import numpy as np

from src.errors import InconsistentDataError, PreconditionError
from src.initial_data.profiles import RadialProfile, derive_mass
from src.period.period_analysis import PeriodAnalyzer
from src.potential.radial_potential import (
    EffectivePotential, PotentialSpec, c_min, newtonian, newtonian_d1
)
from src.utils.csv_io import read_profile_csv, write_profile_csv

logger = logging.getLogger(__name__)


class InitialData:
    """
    Radial mass density P0 and velocity u0 on a common grid, with derived m0

    m0 is the integral of P0 unless the closed-form enclosed mass is passed
    as m0_values, as the fixture generators do.
    """

    def __init__(self, P0: RadialProfile, u0: RadialProfile, d: int, m0_values=None):
        self.spec = PotentialSpec(d=d)
        self.d = self.spec.d
        if not np.array_equal(P0.grid, u0.grid):
            raise InconsistentDataError("P0 and u0 must share the same grid")
        self.P0 = P0
        self.u0 = u0
        self.m0 = derive_mass(P0, self.d, exact=m0_values)
        self.exact_mass = m0_values is not None

    def __repr__(self) -> str:
        return f"InitialData(d={self.d}, nodes={len(self.grid)}, R0={self.R0:.6g})"

    @classmethod
    def from_arrays(cls, r, P0, u0, d: int, P0_slopes=None, u0_slopes=None, m0=None) -> 'InitialData':
        return cls(RadialProfile(r, P0, P0_slopes), RadialProfile(r, u0, u0_slopes), d, m0_values=m0)

    @classmethod
    def from_csv(cls, path: str, d: int) -> 'InitialData':
        r, P0, u0 = read_profile_csv(path)
        logger.info(f"Loaded {r.size} profile nodes from {path}")
        return cls.from_arrays(r, P0, u0, d)

    def to_csv(self, path: str) -> str:
        return write_profile_csv(path, self.grid, self.P0.values, self.u0.values)

    @property
    def grid(self) -> np.ndarray:
        return self.P0.grid

    @property
    def R0(self) -> float:
        return self.P0.R0

    def with_velocity(self, u_values, u_slopes=None) -> 'InitialData':
        slopes = self.P0.node_slopes() if self.P0.exact_slopes else None
        m0 = self.m0.values if self.exact_mass else None
        return InitialData.from_arrays(self.grid, self.P0.values, u_values, self.d,
                                       P0_slopes=slopes, u0_slopes=u_slopes, m0=m0)

    def consistency_issues(self) -> List[str]:
        """Finite-grid proxies of the consistency conditions at the origin and m0 monotonicity"""
        issues = []
        r, P, u = self.grid, self.P0.values, self.u0.values
        if np.any(P < 0):
            issues.append(f"P0 is negative at r = {r[np.argmax(P < 0)]:.6g}")
        if P[0] <= 0:
            issues.append("P0 must be positive at the first node (r^(1-d) P0 -> positive limit)")

        slope_bound = float(np.max(np.abs(self.u0.node_slopes())))
        if abs(u[0]) > slope_bound * r[0] * (1.0 + 1e-6) + 1e-14:
            issues.append(
                f"|u0(r_0)| = {abs(u[0]):.3g} exceeds max|u0'| * r_0 = {slope_bound * r[0]:.3g}"
            )

        m = self.m0.values
        if np.any(m <= 0):
            issues.append("Enclosed mass m0 must be positive on (0, R0]")
        if np.any(np.diff(m) <= 0):
            bad = r[1:][np.argmax(np.diff(m) <= 0)]
            issues.append(f"m0 is not strictly increasing near r = {bad:.6g}; R0 must be the support edge")
        return issues

    def validate(self) -> None:
        issues = self.consistency_issues()
        if issues:
            raise InconsistentDataError('; '.join(issues))


def energy_profile(data: InitialData) -> RadialProfile:
    """E0(r) = u0^2/2 + m0 N(r) + r^2/2 at the nodes"""
    r = data.grid
    u, m, P = data.u0.values, data.m0.values, data.P0.values
    values = 0.5 * u * u + m * newtonian(r, data.spec) + 0.5 * r * r
    slopes = u * data.u0.node_slopes() + P * newtonian(r, data.spec) + m * newtonian_d1(r, data.spec) + r
    return RadialProfile(r, values, slopes)


def c0_profile(data: InitialData) -> RadialProfile:
    """
    Energy rescaled to unit mass along each characteristic

    d >= 3: c0 = m0^(-2/d) E0;  d = 2: c0 = E0/m0 + ln(m0)/(4 pi)

    Raises:
        InconsistentDataError: If m0 is not positive at some node.
    """
    m = data.m0.values
    if np.any(m <= 0):
        bad = data.grid[np.argmax(m <= 0)]
        raise InconsistentDataError(f"c0 needs m0 > 0, but m0 = {m[np.argmax(m <= 0)]:.3g} at r = {bad:.6g}")
    E0 = energy_profile(data).values
    if data.d == 2:
        values = E0 / m + np.log(m) / (4.0 * np.pi)
    else:
        values = m ** (-2.0 / data.d) * E0
    return RadialProfile(data.grid, values)


def continuation_constant(data: InitialData) -> float:
    """sup r^(1-d) P0 + sup |u0'| over the nodes"""
    r = data.grid
    return float(np.max(r ** (1 - data.d) * data.P0.values) + np.max(np.abs(data.u0.node_slopes())))


def common_period(data: InitialData, analyzer=None) -> float:
    """
    Period T(C0; 1) shared by all characteristics when c0 is constant

    Uses the mean of c0 over the nodes.
    """
    analyzer = analyzer or PeriodAnalyzer()
    C0 = float(np.mean(c0_profile(data).values))
    pot = EffectivePotential(PotentialSpec(d=data.d, m=1.0))
    return analyzer.period(max(C0, pot.e_min), pot)


@dataclass
class ThetaResult:
    """theta at the nodes together with the branch used at each node"""
    values: np.ndarray
    branch: np.ndarray
    max_mismatch: float = 0.0
    mismatched_nodes: List[float] = field(default_factory=list)


def compute_theta(data: InitialData, branch_eps: float = 1e-8, branch_rtol: float = 1e-6) -> ThetaResult:
    """
    Constant theta of f(t) = theta u(t) + P0 r(t) / (d m0) at every node

    First branch (|u0| > eps):
        theta = (1 - P0 r / (d m0)) / u0
    Second branch (|F| > eps, F = m0 N'(r) + r):
        theta = (P0 u0 / d - m0 u0') / (m0 F)
    Both branches agree for data of constant c0; the largest relative
    disagreement is reported.

    Raises:
        PreconditionError: At a node where both denominators vanish
            (stationary data).
    """
    d = data.d
    r = data.grid
    P, u, m = data.P0.values, data.u0.values, data.m0.values
    w = data.u0.node_slopes()
    F = m * newtonian_d1(r, data.spec) + r

    velocity_scale = float(np.max(np.abs(u)))
    eps = branch_eps * max(data.R0, velocity_scale)
    theta_floor = 1.0 / max(velocity_scale, eps)

    use_first = np.abs(u) > eps
    use_second = np.abs(F) > eps
    if np.any(~use_first & ~use_second):
        bad = r[np.argmax(~use_first & ~use_second)]
        raise PreconditionError(f"theta undefined at r = {bad:.6g}: u0 and the force balance both vanish")

    with np.errstate(divide='ignore', invalid='ignore'):
        first = (1.0 - P * r / (d * m)) / u
        second = (P * u / d - m * w) / (m * F)

    values = np.where(use_first, first, second)
    branch = np.where(use_first, 1, 2)

    both = use_first & use_second
    max_mismatch = 0.0
    mismatched: List[float] = []
    if np.any(both):
        scale = np.maximum(np.maximum(np.abs(first[both]), np.abs(second[both])), theta_floor)
        rel = np.abs(first[both] - second[both]) / scale
        max_mismatch = float(np.max(rel))
        mismatched = [float(x) for x in r[both][rel > branch_rtol]]
        if mismatched:
            logger.warning(
                f"theta branches disagree at {len(mismatched)} nodes (max relative {max_mismatch:.3e}); "
                f"first at r = {mismatched[0]:.6g}"
            )

    return ThetaResult(values=values, branch=branch, max_mismatch=max_mismatch, mismatched_nodes=mismatched)


def theta_profile(data: InitialData, branch_eps: float = 1e-8, branch_rtol: float = 1e-6) -> RadialProfile:
    """theta as a radial profile; see compute_theta"""
    C0 = c0_profile(data).values
    floor = c_min(data.d)
    if np.all(np.abs(C0 - floor) <= 1e-8 * max(1.0, abs(floor))) and np.all(data.u0.values == 0):
        raise PreconditionError("theta is undefined for stationary data")
    return RadialProfile(data.grid, compute_theta(data, branch_eps, branch_rtol).values)
