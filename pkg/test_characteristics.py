"""
Tests for characteristic integration, closed-form f and crossings
"""
import numpy as np
import pytest

from src.dynamics.characteristics import CharacteristicIntegrator, CharacteristicState
from src.dynamics.symplectic import LeapfrogIntegrator
from src.errors import DegenerateOrbitError, DomainError, InconsistentDataError
from src.initial_data.classifier import ConditionChecker
from src.initial_data.initial_data import common_period, compute_theta
from src.potential.radial_potential import EffectivePotential, PotentialSpec, equilibrium_radius
from src.utils.csv_io import read_table


def start_on_orbit(analyzer, d, offset, m=1.0):
    pot = EffectivePotential(PotentialSpec(d=d, m=m))
    E = pot.e_min + offset
    return CharacteristicState(r=analyzer.turning_points(E, pot).x2, u=0.0, m=m), E, pot


def test_state_validation():
    with pytest.raises(DomainError):
        CharacteristicState(r=0.0, u=0.0, m=1.0)
    with pytest.raises(DomainError):
        CharacteristicState(r=1.0, u=0.0, m=-1.0)
    with pytest.raises(DomainError):
        CharacteristicState(r=1.0, u=np.nan, m=1.0)


def test_equilibrium_is_fixed():
    integrator = CharacteristicIntegrator(3)
    r_star = equilibrium_radius(PotentialSpec(d=3, m=2.0))
    assert integrator.acceleration(r_star, 2.0) == pytest.approx(0.0, abs=1e-14)
    traj = integrator.integrate_orbit(CharacteristicState(r=r_star, u=0.0, m=2.0), 10.0)
    np.testing.assert_allclose(traj.r, r_star, rtol=1e-12)


def test_measured_period_four_dimensions(analyzer):
    integrator = CharacteristicIntegrator(4)
    for offset in (0.05, 1.0, 5.0):
        state, _, _ = start_on_orbit(analyzer, 4, offset)
        assert integrator.measured_period(state) == pytest.approx(np.pi, abs=1e-8)


@pytest.mark.parametrize("d", [2, 3, 5])
def test_measured_period_matches_quadrature(analyzer, d):
    integrator = CharacteristicIntegrator(d)
    state, E, pot = start_on_orbit(analyzer, d, 0.5, m=1.7)
    assert integrator.measured_period(state) == pytest.approx(analyzer.period(E, pot), rel=1e-9)


def test_measured_period_at_equilibrium():
    integrator = CharacteristicIntegrator(3)
    r_star = equilibrium_radius(PotentialSpec(d=3))
    with pytest.raises(DegenerateOrbitError):
        integrator.measured_period(CharacteristicState(r=r_star, u=0.0, m=1.0))


def test_energy_drift_over_many_periods(analyzer):
    integrator = CharacteristicIntegrator(3)
    state, E, pot = start_on_orbit(analyzer, 3, 0.5)
    traj = integrator.integrate_orbit(state, 10 * analyzer.period(E, pot))
    assert traj.energy_drift < 1e-8


def test_backward_integration_returns(analyzer):
    integrator = CharacteristicIntegrator(3)
    state, _, _ = start_on_orbit(analyzer, 3, 0.3)
    forward = integrator.integrate_orbit(state, 5.0).final_state()
    back = integrator.integrate_orbit(forward, 0.0).final_state()
    assert back.t == 0.0
    assert back.r == pytest.approx(state.r, rel=1e-8)
    assert back.u == pytest.approx(state.u, abs=1e-8)


def test_trajectory_csv(analyzer, tmp_path):
    integrator = CharacteristicIntegrator(3)
    state, _, _ = start_on_orbit(analyzer, 3, 0.3)
    traj = integrator.integrate_orbit(state, 2.0, t_eval=np.linspace(0.0, 2.0, 11))
    assert traj.mode == 'orbit'
    path = traj.to_csv(str(tmp_path / 'orbit.csv'))
    with open(path) as f:
        assert f.readline().strip() == 't,r,u,P,w'
    columns = read_table(path)
    np.testing.assert_array_equal(columns['r'], traj.r)
    assert np.all(np.isnan(columns['P']))


def test_density_matches_closed_form(compliant_d3):
    data = compliant_d3
    integrator = CharacteristicIntegrator(3)
    T0 = common_period(data)
    idx = 70
    state = CharacteristicState.from_data(data, data.grid[idx])
    theta = float(compute_theta(data).values[idx])
    kappa = state.P / (3 * state.m)
    t_eval = np.linspace(0.0, T0, 201)

    pw = integrator.integrate_pw(state, T0, t_eval=t_eval)
    assert pw.mode == 'pw'
    assert pw.blowup_time is None
    closed = integrator.f_closed_form(integrator.integrate_orbit(state, T0, t_eval=t_eval), theta, kappa)
    assert np.all(closed.f > 0)
    np.testing.assert_allclose(pw.P, closed.P, rtol=1e-6)
    np.testing.assert_allclose(pw.w, closed.w, rtol=1e-6, atol=1e-6)
    assert integrator.f_first_root(integrator.integrate_orbit(state, T0), theta, kappa) is None


def test_closed_form_rejects_wrong_theta(compliant_d3):
    integrator = CharacteristicIntegrator(3)
    state = CharacteristicState.from_data(compliant_d3, compliant_d3.grid[70])
    traj = integrator.integrate_orbit(state, 1.0)
    with pytest.raises(InconsistentDataError):
        integrator.f_closed_form(traj, 5.0, state.P / (3 * state.m))


def test_blowup_time_matches_first_root_of_f(blowup_d3, analyzer):
    data = blowup_d3
    report = ConditionChecker(analyzer=analyzer).classify(data)
    idx = int(np.flatnonzero(data.grid == report.offending_radius)[0])
    state = CharacteristicState.from_data(data, data.grid[idx])
    theta = float(compute_theta(data).values[idx])
    kappa = state.P / (3 * state.m)
    integrator = CharacteristicIntegrator(3)
    horizon = 1.2 * report.T0

    root = integrator.f_first_root(integrator.integrate_orbit(state, horizon), theta, kappa)
    pw = integrator.integrate_pw(state, horizon)
    assert root is not None and root < report.T0
    assert pw.blowup_time == pytest.approx(root, abs=1e-6)


def test_levelset_minimum_matches_trajectory(compliant_d3, analyzer):
    data = compliant_d3
    checker = ConditionChecker(analyzer=analyzer)
    integrator = CharacteristicIntegrator(3)
    T0 = common_period(data)
    for idx in (40, 100):
        state = CharacteristicState.from_data(data, data.grid[idx])
        theta = float(compute_theta(data).values[idx])
        kappa = state.P / (3 * state.m)
        traj = integrator.integrate_orbit(state, T0, t_eval=np.linspace(0.0, T0, 8001))
        sampled = float(np.min(theta * traj.u + kappa * traj.r))
        assert checker.levelset_min_f(float(data.grid[idx]), data) == pytest.approx(sampled, abs=1e-6)


class TestFirstCrossing:

    def test_mismatched_pair_crosses(self):
        integrator = CharacteristicIntegrator(3)
        a = CharacteristicState(r=0.8 * equilibrium_radius(PotentialSpec(d=3, m=1.0)), u=0.0, m=1.0)
        b = CharacteristicState(r=1.1 * equilibrium_radius(PotentialSpec(d=3, m=1.2)), u=0.0, m=1.2)
        t = integrator.first_crossing(a, b, 50 * integrator.tau)
        assert t is not None and t > 0
        ra = integrator.integrate_orbit(a, t).final_state().r
        rb = integrator.integrate_orbit(b, t).final_state().r
        assert ra == pytest.approx(rb, rel=1e-7)

    def test_identical_start(self):
        integrator = CharacteristicIntegrator(3)
        a = CharacteristicState(r=0.5, u=0.1, m=1.0)
        assert integrator.first_crossing(a, CharacteristicState(r=0.5, u=-0.1, m=2.0), 1.0) == 0.0

    def test_no_crossing_within_horizon(self):
        integrator = CharacteristicIntegrator(3)
        a = CharacteristicState(r=0.4, u=0.0, m=1.0)
        b = CharacteristicState(r=0.6, u=0.0, m=1.0)
        assert integrator.first_crossing(a, b, 1e-3) is None

    def test_start_times_must_agree(self):
        integrator = CharacteristicIntegrator(3)
        with pytest.raises(DomainError):
            integrator.first_crossing(CharacteristicState(r=0.4, u=0.0, m=1.0),
                                      CharacteristicState(r=0.6, u=0.0, m=1.0, t=1.0), 1.0)


class TestLeapfrog:

    def test_bounded_energy_error_and_agreement(self, analyzer):
        state, E, pot = start_on_orbit(analyzer, 3, 0.05)
        t_end = 2 * analyzer.period(E, pot)
        leapfrog = LeapfrogIntegrator(3, dt=1e-3).integrate(state, t_end, stride=10)
        adaptive = CharacteristicIntegrator(3).integrate_orbit(state, t_end)
        assert leapfrog.energy_drift < 1e-4
        assert leapfrog.t[-1] == pytest.approx(t_end)
        assert leapfrog.r[-1] == pytest.approx(adaptive.r[-1], rel=1e-3)

    def test_rejects_backward_time(self):
        with pytest.raises(DomainError):
            LeapfrogIntegrator(3).integrate(CharacteristicState(r=0.5, u=0.0, m=1.0), -1.0)
