"""
Implementations of the CLI subcommands

Each command takes the validated RunConfig plus the merged configuration
dictionary and returns a process exit status.
"""
import logging
import os
import sys
from typing import Dict

import numpy as np

from src.bulk.bulk_solver import BulkSolver
from src.cli.run_config import RunConfig, RunSummary
from src.dynamics.characteristics import CharacteristicIntegrator, CharacteristicState
from src.errors import InconsistentDataError, PreconditionError, ProfileFormatError, RadialEPError
from src.initial_data.classifier import ConditionChecker
from src.initial_data.generators import make_fixture
from src.initial_data.initial_data import InitialData, common_period, compute_theta
from src.period.local_expansion import c_v
from src.period.period_analysis import PeriodAnalyzer
from src.potential.radial_potential import (
    EffectivePotential, NormalizedPotential, PotentialSpec, equilibrium_radius, tau_d
)
from src.utils.csv_io import write_table

logger = logging.getLogger(__name__)


def _analyzer(run: RunConfig, config: Dict) -> PeriodAnalyzer:
    period_config = dict(config.get('period', {}))
    period_config['quad_rtol'] = run.tol
    return PeriodAnalyzer(period_config)


def _dynamics_config(run: RunConfig, config: Dict) -> Dict:
    dynamics = dict(config.get('dynamics', {}))
    dynamics['rtol'] = run.tol
    return dynamics


def _out(run: RunConfig, name: str) -> str:
    os.makedirs(run.out, exist_ok=True)
    return os.path.join(run.out, name)


def _write_json(path: str, payload: str) -> str:
    with open(path, 'w', newline='\n') as f:
        f.write(payload)
        f.write('\n')
    return path


def _fixture(run: RunConfig, config: Dict) -> InitialData:
    section = config.get('initial_data', {})
    return make_fixture(run.family, run.dim, c0_offset=run.c0_offset, R0=run.radius, n_nodes=run.nodes,
                        shape=run.shape, alpha=run.alpha, min_fraction=section.get('min_fraction', 1e-4),
                        blowup_margin=section.get('blowup_margin', 0.98))


def _load_data(run: RunConfig, config: Dict) -> InitialData:
    if run.input:
        return InitialData.from_csv(run.input, run.dim)
    return _fixture(run, config)


def _fail(message: str) -> int:
    logger.error(message)
    print(message, file=sys.stderr)
    return 1


def cmd_period_table(run: RunConfig, config: Dict) -> int:
    """Write period_table_d{d}.csv per dimension and a summary for dimension ranges"""
    analyzer = _analyzer(run, config)
    offsets = np.geomspace(run.emin_offset_min, run.emin_offset_max, run.samples)
    summary_columns = []
    for d in run.dimensions():
        if run.normalized:
            pot = NormalizedPotential(d)
        else:
            pot = EffectivePotential(PotentialSpec(d=d, m=run.mass))
        table = analyzer.period_table(pot.e_min + offsets, pot, label=f"d{d}")
        path = table.to_csv(_out(run, f"period_table_d{d}.csv"))
        summary_columns.append(table.T)
        print(f"d={d}: tau_d={pot.tau:.12g}  T in [{table.T.min():.12g}, {table.T.max():.12g}]  -> {path}")

    if run.all_dims is not None:
        # V_d has e_min = 0, so the shared offsets are absolute energies only there
        energy_column = 'E' if run.normalized else 'E_minus_emin'
        header = [energy_column] + [f"T_d{d}" for d in run.dimensions()]
        path = write_table(_out(run, 'figure1_summary.csv'), header, [offsets] + summary_columns)
        print(f"summary ({energy_column}) -> {path}")
    return 0


def cmd_expansion_check(run: RunConfig, config: Dict) -> int:
    """Compare T'(E) near the minimum with pi c_V / d^(7/2) on the normalized potential"""
    analyzer = _analyzer(run, config)
    E = run.expansion_offset
    h = 0.1 * E
    rows = {'d': [], 'E': [], 'Tprime_H': [], 'Tprime_FD': [], 'predicted': []}
    print(f"{'d':>3} {'T_prime(H)':>16} {'T_prime(FD)':>16} {'pi c_V/d^3.5':>16}")
    for d in run.dimensions():
        pot = NormalizedPotential(d)
        derivative = analyzer.period_derivative(E, pot)
        finite_difference = (analyzer.period(E + h, pot) - analyzer.period(E - h, pot)) / (2.0 * h)
        predicted = np.pi * c_v(d) / d ** 3.5
        for key, value in zip(rows, (d, E, derivative, finite_difference, predicted)):
            rows[key].append(value)
        print(f"{d:>3} {derivative:>16.9g} {finite_difference:>16.9g} {predicted:>16.9g}")

    write_table(_out(run, 'expansion_check.csv'), list(rows), [np.array(v, dtype=float) for v in rows.values()])
    return 0


def cmd_check(run: RunConfig, config: Dict) -> int:
    """Classify a profile file; exit 0 global/stationary, 2 blow-up or inconsistent-with-global, 1 invalid"""
    if not run.input:
        return _fail("check: --input CSV is required")
    try:
        data = InitialData.from_csv(run.input, run.dim)
    except ProfileFormatError as e:
        return _fail(f"check: malformed profile: {e}")
    except (InconsistentDataError, RadialEPError) as e:
        return _fail(f"check: invalid data: {e}")

    checker = ConditionChecker(config.get('classification', {}), _analyzer(run, config),
                               _dynamics_config(run, config))
    report = checker.classify(data)
    path = _write_json(_out(run, 'condition_report.json'), report.model_dump_json(indent=2))
    print(f"verdict: {report.verdict.value}  (report -> {path})")
    for message in report.messages:
        print(f"  {message}")
    return report.exit_status


def cmd_generate(run: RunConfig, config: Dict) -> int:
    """Write a fixture profile r,P0,u0"""
    data = _fixture(run, config)
    path = data.to_csv(_out(run, f"{run.family}_d{run.dim}.csv"))
    print(f"{run.family} data, d={run.dim}, {len(data.grid)} nodes -> {path}")
    return 0


def _simulate_crossing(run: RunConfig, config: Dict) -> RunSummary:
    integrator = CharacteristicIntegrator(run.dim, _dynamics_config(run, config))
    m_b = 1.2 * run.mass
    r_a = 0.8 * equilibrium_radius(PotentialSpec(d=run.dim, m=run.mass))
    r_b = 1.1 * equilibrium_radius(PotentialSpec(d=run.dim, m=m_b))
    state_a = CharacteristicState(r=r_a, u=0.0, m=run.mass)
    state_b = CharacteristicState(r=r_b, u=0.0, m=m_b)
    t_max = run.t_max or 50.0 * tau_d(run.dim)
    crossing = integrator.first_crossing(state_a, state_b, t_max)
    if crossing is None:
        print(f"crossing-demo: none within t_max = {t_max:.6g}")
    else:
        print(f"crossing-demo: first crossing at t = {crossing:.12g}")
    return RunSummary(mode='crossing-demo', d=run.dim, crossing_time=crossing,
                      status='crossed' if crossing is not None else 'none')


def _simulate_orbit(run: RunConfig, config: Dict) -> RunSummary:
    integrator = CharacteristicIntegrator(run.dim, _dynamics_config(run, config))
    analyzer = _analyzer(run, config)
    pot = EffectivePotential(PotentialSpec(d=run.dim, m=run.mass))
    E = pot.e_min + run.emin_offset
    x2 = analyzer.turning_points(E, pot).x2
    state = CharacteristicState(r=x2, u=0.0, m=run.mass)
    T_quad = analyzer.period(E, pot)
    t_end = run.t_end or 10.0 * T_quad

    traj = integrator.integrate_orbit(state, t_end, tol=run.tol)
    path = traj.to_csv(_out(run, f"trajectory_orbit_d{run.dim}.csv"))
    T_measured = integrator.measured_period(state)
    print(f"orbit d={run.dim}: measured period {T_measured:.12g}, quadrature {T_quad:.12g}")
    return RunSummary(mode='orbit', d=run.dim, measured_period=T_measured, quadrature_period=T_quad,
                      energy_drift=traj.energy_drift, files=[path])


def _simulate_pw(run: RunConfig, config: Dict) -> RunSummary:
    data = _load_data(run, config)
    integrator = CharacteristicIntegrator(run.dim, _dynamics_config(run, config))
    grid = data.grid
    r = run.label_radius if run.label_radius is not None else float(grid[len(grid) // 2])
    idx = int(np.argmin(np.abs(grid - r)))
    state = CharacteristicState.from_data(data, float(grid[idx]))
    t_end = run.t_end or common_period(data)

    traj = integrator.integrate_pw(state, t_end, tol=run.tol)
    files = [traj.to_csv(_out(run, f"trajectory_pw_d{run.dim}.csv"))]
    summary = RunSummary(mode='pw', d=run.dim, energy_drift=traj.energy_drift, blowup_time=traj.blowup_time,
                         status='blowup' if traj.blowup_time is not None else 'completed', files=files)
    try:
        theta = float(compute_theta(data).values[idx])
        kappa = state.P / (data.d * state.m)
        orbit = integrator.integrate_orbit(state, t_end, tol=run.tol)
        closed = integrator.f_closed_form(orbit, theta, kappa)
        summary.closed_form_min_f = float(np.min(closed.f))
    except (PreconditionError, InconsistentDataError) as e:
        logger.info(f"Closed form f not available for this node: {e}")
    print(f"pw d={run.dim}, r={state.r:.6g}: status {summary.status}")
    return summary


def _simulate_bulk(run: RunConfig, config: Dict) -> RunSummary:
    data = _load_data(run, config)
    solver = BulkSolver(config.get('bulk', {}), _dynamics_config(run, config))
    sol = solver.evolve(data, label_count=run.label_count, t_end=run.t_end)
    files = [
        sol.write_snapshots(_out(run, f"bulk_snapshots_d{run.dim}.csv")),
        sol.write_boundary(_out(run, f"bulk_boundary_d{run.dim}.csv")),
        solver.continuation_monitor(sol).to_csv(_out(run, f"bulk_monitor_d{run.dim}.csv")),
    ]
    print(f"bulk d={run.dim}: status {sol.status}, stored up to t = {sol.t[-1]:.6g}")
    return RunSummary(mode='bulk', d=run.dim, status=sol.status, breakdown_time=sol.breakdown_time,
                      boundary_final=float(sol.boundary[-1]), files=files)


def cmd_simulate(run: RunConfig, config: Dict) -> int:
    """Run an orbit, pw or bulk simulation, or the crossing demo"""
    if run.crossing_demo:
        summary = _simulate_crossing(run, config)
    elif run.mode == 'orbit':
        summary = _simulate_orbit(run, config)
    elif run.mode == 'pw':
        summary = _simulate_pw(run, config)
    else:
        summary = _simulate_bulk(run, config)
    _write_json(_out(run, 'run_summary.json'), summary.model_dump_json(indent=2))
    return 0


COMMAND_HANDLERS = {
    'period-table': cmd_period_table,
    'expansion-check': cmd_expansion_check,
    'check': cmd_check,
    'generate': cmd_generate,
    'simulate': cmd_simulate,
}
