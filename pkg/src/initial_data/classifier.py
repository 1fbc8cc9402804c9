"""
Classification of initial data by the critical-threshold conditions

Condition 1: c0(r) is constant (all characteristics share one period).
In d = 4 every period is pi, so data with non-constant c0 is checked by
following f = P0 / P over one period instead.
Condition 2: f(t) = theta u(t) + P0 r(t) / (d m0) stays positive along
every characteristic, checked over the energy level set of each node.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from enum import Enum
from typing import Dict, List, Optional

import numpy as np
from pydantic import BaseModel, Field
from scipy.optimize import minimize_scalar

from src.dynamics.characteristics import CharacteristicIntegrator
from src.errors import DomainError, IntegratorError, PreconditionError
from src.initial_data.initial_data import (
    InitialData, c0_profile, compute_theta, continuation_constant, energy_profile
)
from src.period.period_analysis import PeriodAnalyzer
from src.potential.radial_potential import EffectivePotential, PotentialSpec, c_min, newtonian_d1

logger = logging.getLogger(__name__)

# every orbit of the effective potential has period pi in this dimension
ISOCHRONOUS_DIMENSION = 4


class Verdict(str, Enum):
    STATIONARY = "Stationary"
    GLOBAL_SMOOTH = "GlobalSmooth"
    FINITE_TIME_BLOWUP = "FiniteTimeBlowup"
    INCONSISTENT_WITH_GLOBAL = "InconsistentWithGlobal"
    MARGINAL = "Marginal"
    INCONSISTENT = "Inconsistent"


EXIT_STATUS = {
    Verdict.STATIONARY: 0,
    Verdict.GLOBAL_SMOOTH: 0,
    Verdict.FINITE_TIME_BLOWUP: 2,
    Verdict.INCONSISTENT_WITH_GLOBAL: 2,
    Verdict.MARGINAL: 2,
    Verdict.INCONSISTENT: 1,
}


class ConditionReport(BaseModel):
    verdict: Verdict = Field(..., description="Classification outcome")
    d: int = Field(..., description="Spatial dimension")
    C_min: float = Field(..., description="min over r of N(r) + r^2/2")
    C0_mean: Optional[float] = Field(None, description="Mean of c0 over the nodes")
    C0_max_deviation: Optional[float] = Field(None, description="max |c0 - mean| / |mean|")
    levelset_min_f: Optional[float] = Field(None, description="Smallest level-set minimum of f over the nodes")
    offending_radius: Optional[float] = Field(None, description="Node attaining levelset_min_f")
    T0: Optional[float] = Field(None, description="Common period T(C0; 1) when condition 1 holds, pi in d = 4")
    theta_branch_mismatch: Optional[float] = Field(None, description="Largest relative disagreement of the theta branches")
    continuation_constant: Optional[float] = Field(None, description="sup r^(1-d) P0 + sup |u0'|")
    node_count: int = Field(..., description="Number of grid nodes")
    messages: List[str] = Field(default_factory=list, description="Diagnostics")

    @property
    def exit_status(self) -> int:
        return EXIT_STATUS[self.verdict]


class ConditionChecker:
    """Runs the consistency, constancy and level-set checks on initial data"""

    def __init__(self, config: Optional[Dict] = None, analyzer: Optional[PeriodAnalyzer] = None,
                 dynamics_config: Optional[Dict] = None):
        config = config or {}
        self.tol_C0 = config.get('tol_C0', 1e-6)
        self.stationary_tol = config.get('stationary_tol', 1e-8)
        self.force_balance_tol = config.get('force_balance_tol', 1e-6)
        self.branch_eps = config.get('branch_eps', 1e-8)
        self.branch_rtol = config.get('branch_rtol', 1e-6)
        self.levelset_samples = config.get('levelset_samples', 401)
        self.golden_tol = config.get('golden_tol', 1e-10)
        self.marginal_band = config.get('marginal_band', 1e-9)
        self.max_workers = config.get('max_workers', 4)
        self.analyzer = analyzer or PeriodAnalyzer()
        self.dynamics_config = dict(dynamics_config or {})

    def _node_levelset_min(self, r: float, E: float, m: float, theta: float, kappa: float, d: int) -> float:
        pot = EffectivePotential(PotentialSpec(d=d, m=m))
        if E - pot.e_min <= self.analyzer.degenerate_tol * max(1.0, abs(pot.e_min)):
            # collapsed orbit: the characteristic sits at r
            return kappa * r
        tp = self.analyzer.turning_points(E, pot)
        x1, x2 = tp.x1, tp.x2
        abs_theta = abs(theta)

        def f_on_level(x: float) -> float:
            gap = max(E - float(pot.value(x)), 0.0)
            return -abs_theta * np.sqrt(2.0 * gap) + kappa * x

        phases = np.linspace(0.0, 0.5 * np.pi, self.levelset_samples)
        xs = x1 + (x2 - x1) * np.sin(phases) ** 2
        xs[0], xs[-1] = x1, x2
        gaps = np.maximum(E - pot.value(xs), 0.0)
        samples = -abs_theta * np.sqrt(2.0 * gaps) + kappa * xs
        best = int(np.argmin(samples))
        if best == 0 or best == xs.size - 1:
            return float(samples[best])

        bracket = (xs[best - 1], xs[best], xs[best + 1])
        try:
            result = minimize_scalar(f_on_level, bracket=bracket, method='golden',
                                     options={'xtol': self.golden_tol})
            return float(min(result.fun, samples[best]))
        except (ValueError, RuntimeError):
            return float(samples[best])

    def levelset_min_f(self, r: float, data: InitialData, theta: Optional[float] = None) -> float:
        """
        min over the orbit through node r of f = theta u + P0 x / (d m0)

        u ranges over +-sqrt(2 (E0 - V(x))) with x in [x1, x2]; the minimum
        takes the sign of u opposite to theta.
        """
        idx = np.flatnonzero(np.isclose(data.grid, r, rtol=1e-12, atol=0.0))
        if idx.size == 0:
            raise DomainError(f"r = {r} is not a grid node")
        i = int(idx[0])
        if theta is None:
            theta = float(compute_theta(data, self.branch_eps, self.branch_rtol).values[i])
        E = float(energy_profile(data).values[i])
        m = float(data.m0.values[i])
        kappa = float(data.P0.values[i] / (data.d * m))
        return self._node_levelset_min(float(data.grid[i]), E, m, theta, kappa, data.d)

    def _report(self, verdict: Verdict, data: InitialData, floor: float, messages: List[str], **fields) -> ConditionReport:
        report = ConditionReport(verdict=verdict, d=data.d, C_min=floor,
                                 node_count=len(data.grid), messages=messages, **fields)
        logger.info(f"Verdict for {data}: {verdict.value}")
        return report

    def classify(self, data: InitialData) -> ConditionReport:
        """
        Decide Stationary / GlobalSmooth / FiniteTimeBlowup /
        InconsistentWithGlobal / Marginal / Inconsistent
        """
        floor = c_min(data.d)
        issues = data.consistency_issues()
        if issues:
            return self._report(Verdict.INCONSISTENT, data, floor, issues)

        fields = {'continuation_constant': continuation_constant(data)}
        C0 = c0_profile(data).values
        C0_mean = float(np.mean(C0))
        deviation = float(np.max(np.abs(C0 - C0_mean)) / max(abs(C0_mean), 1e-300))
        fields.update(C0_mean=C0_mean, C0_max_deviation=deviation)

        if C0_mean < floor - self.stationary_tol * max(1.0, abs(floor)):
            return self._report(Verdict.INCONSISTENT, data, floor,
                                [f"Mean c0 = {C0_mean:.12g} lies below C_min = {floor:.12g}"], **fields)

        if deviation > self.tol_C0 and data.d == ISOCHRONOUS_DIMENSION:
            return self._classify_isochronous(data, floor, fields)

        if deviation > self.tol_C0:
            return self._report(Verdict.INCONSISTENT_WITH_GLOBAL, data, floor,
                                [f"c0 is not constant: relative deviation {deviation:.3e} > {self.tol_C0:.1e}"],
                                **fields)

        if abs(C0_mean - floor) <= self.stationary_tol * max(1.0, abs(floor)):
            return self._classify_stationary(data, floor, fields)

        fields['T0'] = self.analyzer.period(C0_mean, EffectivePotential(PotentialSpec(d=data.d, m=1.0)))
        try:
            theta = compute_theta(data, self.branch_eps, self.branch_rtol)
        except PreconditionError as e:
            return self._report(Verdict.INCONSISTENT, data, floor, [str(e)], **fields)
        fields['theta_branch_mismatch'] = theta.max_mismatch

        energies = energy_profile(data).values
        masses = data.m0.values
        kappas = data.P0.values / (data.d * masses)

        def node_min(i: int) -> float:
            return self._node_levelset_min(float(data.grid[i]), float(energies[i]), float(masses[i]),
                                           float(theta.values[i]), float(kappas[i]), data.d)

        with ThreadPoolExecutor(max_workers=self.max_workers) as executor:
            minima = np.array(list(executor.map(node_min, range(len(data.grid)))))

        worst = int(np.argmin(minima))
        fields.update(levelset_min_f=float(minima[worst]), offending_radius=float(data.grid[worst]))
        messages = []
        if theta.mismatched_nodes:
            messages.append(f"theta branches disagree at {len(theta.mismatched_nodes)} nodes")

        if minima[worst] > self.marginal_band:
            verdict = Verdict.GLOBAL_SMOOTH
        elif minima[worst] < -self.marginal_band:
            verdict = Verdict.FINITE_TIME_BLOWUP
            messages.append(f"f reaches {minima[worst]:.6g} on the orbit of r = {data.grid[worst]:.6g}")
        else:
            verdict = Verdict.MARGINAL
            messages.append(f"min f = {minima[worst]:.3e} lies inside the marginal band {self.marginal_band:.1e}")
        return self._report(verdict, data, floor, messages, **fields)

    def _classify_isochronous(self, data: InitialData, floor: float, fields: Dict) -> ConditionReport:
        """
        Direct check for d = 4, where every characteristic has period pi

        The (r, u, P, w) flow of every node returns to its initial state at
        t = pi whatever c0 is, so f = P0 / P is followed over one period.
        Blow-up of P means f reaches zero.
        """
        T = np.pi
        r = data.grid
        messages = [f"c0 is not constant (relative deviation {fields['C0_max_deviation']:.3e}); "
                    f"all periods equal pi in d = {ISOCHRONOUS_DIMENSION}, so f is followed over one period"]
        integrator = CharacteristicIntegrator(data.d, self.dynamics_config)
        try:
            fam = integrator.solve_pw_family(r, data.u0.values, data.P0.values, data.u0.node_slopes(),
                                             data.m0.values, (0.0, T),
                                             t_eval=np.linspace(0.0, T, self.levelset_samples))
        except IntegratorError as e:
            return self._report(Verdict.INCONSISTENT, data, floor, messages + [str(e)], **fields)
        fields['T0'] = T

        if fam.status == 'blowup':
            worst = int(np.argmax(fam.y[2][:, -1]))
            fields.update(levelset_min_f=0.0, offending_radius=float(r[worst]))
            messages.append(f"P blows up at t = {fam.blowup_time:.9g} on the characteristic of r = {r[worst]:.6g}")
            return self._report(Verdict.FINITE_TIME_BLOWUP, data, floor, messages, **fields)

        f = data.P0.values[:, None] / fam.y[2]
        worst = int(np.argmin(np.min(f, axis=1)))
        f_min = float(np.min(f[worst]))
        fields.update(levelset_min_f=f_min, offending_radius=float(r[worst]))
        if f_min > self.marginal_band:
            return self._report(Verdict.GLOBAL_SMOOTH, data, floor, messages, **fields)
        messages.append(f"min f = {f_min:.3e} lies inside the marginal band {self.marginal_band:.1e}")
        return self._report(Verdict.MARGINAL, data, floor, messages, **fields)

    def _classify_stationary(self, data: InitialData, floor: float, fields: Dict) -> ConditionReport:
        r = data.grid
        scale = max(data.R0, 1.0)
        messages = []
        if np.any(np.abs(data.u0.values) > self.force_balance_tol * scale):
            messages.append("c0 sits at C_min but u0 does not vanish")
        residual = np.abs(data.m0.values * newtonian_d1(r, data.spec) + r) / r
        if np.any(residual > self.force_balance_tol):
            messages.append(f"Force balance violated (max relative residual {np.max(residual):.3e})")
        if messages:
            return self._report(Verdict.INCONSISTENT, data, floor, messages, **fields)
        fields['T0'] = self.analyzer.period(floor, EffectivePotential(PotentialSpec(d=data.d, m=1.0)))
        return self._report(Verdict.STATIONARY, data, floor, [], **fields)


def classify(data: InitialData, tolerances: Optional[Dict] = None) -> ConditionReport:
    """Classify ``data`` with a checker built from ``tolerances``"""
    return ConditionChecker(tolerances).classify(data)
