"""
Tests for radial profiles, derived quantities and fixture generators
"""
import numpy as np
import pytest

from src.errors import ConstructionError, DomainError, InconsistentDataError, PreconditionError, ProfileFormatError
from src.initial_data.generators import (
    blowup_shape, make_compliant, make_fixture, make_stationary, perturb_velocity, radial_grid
)
from src.initial_data.initial_data import (
    InitialData, c0_profile, common_period, compute_theta, continuation_constant, energy_profile, theta_profile
)
from src.initial_data.profiles import RadialProfile, derive_mass
from src.potential.radial_potential import EffectivePotential, PotentialSpec, c_min, newtonian_d1


class TestRadialProfile:

    def test_rejects_bad_grids(self):
        with pytest.raises(DomainError):
            RadialProfile([0.0, 1.0], [1.0, 2.0])
        with pytest.raises(DomainError):
            RadialProfile([0.5, 0.4], [1.0, 2.0])
        with pytest.raises(DomainError):
            RadialProfile([0.5], [1.0])
        with pytest.raises(DomainError):
            RadialProfile([0.5, 1.0], [1.0, np.inf])

    def test_evaluation_outside_range(self):
        profile = RadialProfile([0.1, 0.5, 1.0], [1.0, 2.0, 3.0])
        with pytest.raises(DomainError):
            profile(1.5)
        assert profile(1.0) == pytest.approx(3.0)

    def test_hermite_reproduces_cubic(self):
        r = np.linspace(0.1, 1.0, 7)
        profile = RadialProfile(r, r ** 3, 3 * r ** 2)
        x = np.array([0.13, 0.42, 0.77])
        np.testing.assert_allclose(profile(x), x ** 3, rtol=1e-13)
        np.testing.assert_allclose(profile.derivative(x), 3 * x ** 2, rtol=1e-12)

    def test_values_are_read_only(self):
        profile = RadialProfile([0.1, 1.0], [1.0, 2.0])
        with pytest.raises(ValueError):
            profile.values[0] = 5.0


class TestDeriveMass:

    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_power_law_with_exact_slopes(self, d):
        r = np.geomspace(1e-3, 1.0, 64)
        P0 = RadialProfile(r, d * r ** (d - 1), d * (d - 1) * r ** (d - 2))
        m0 = derive_mass(P0, d)
        np.testing.assert_allclose(m0.values, r ** d, rtol=1e-12)
        np.testing.assert_allclose(m0.node_slopes(), P0.values)

    def test_spline_density(self):
        d = 3
        r = np.geomspace(1e-4, 1.0, 512)
        P = r ** 2 * (3 + 5 * 0.05 * r ** 2)
        m0 = derive_mass(RadialProfile(r, P), d)
        exact = r ** 3 * (1 + 0.05 * r ** 2)
        np.testing.assert_allclose(m0.values, exact, rtol=1e-8)

    def test_exact_mass_is_kept(self):
        r = np.geomspace(1e-3, 1.0, 64)
        P0 = RadialProfile(r, 3 * r ** 2 * (1 + 5 * 0.1 * r ** 2 / 3))
        exact = r ** 3 * (1 + 0.1 * r ** 2)
        m0 = derive_mass(P0, 3, exact=exact)
        np.testing.assert_array_equal(m0.values, exact)
        np.testing.assert_array_equal(m0.node_slopes(), P0.values)

    def test_exact_mass_must_integrate_density(self):
        r = np.geomspace(1e-3, 1.0, 64)
        P0 = RadialProfile(r, 3 * r ** 2)
        with pytest.raises(InconsistentDataError):
            derive_mass(P0, 3, exact=2 * r ** 3)
        with pytest.raises(InconsistentDataError):
            derive_mass(P0, 3, exact=r[:10] ** 3)

    def test_rejects_negative_density(self):
        r = np.linspace(0.1, 1.0, 5)
        with pytest.raises(InconsistentDataError):
            derive_mass(RadialProfile(r, [1.0, 1.0, -0.5, 1.0, 1.0]), 3)


class TestInitialData:

    def test_csv_round_trip(self, tmp_path):
        data = make_fixture('compliant', 3)
        path = data.to_csv(str(tmp_path / 'data.csv'))
        loaded = InitialData.from_csv(path, 3)
        np.testing.assert_array_equal(loaded.grid, data.grid)
        np.testing.assert_array_equal(loaded.P0.values, data.P0.values)
        assert data.exact_mass and not loaded.exact_mass
        np.testing.assert_allclose(loaded.m0.values, data.m0.values, rtol=1e-8)
        C0 = c0_profile(loaded).values
        assert np.ptp(C0) / np.mean(C0) < 1e-7

    def test_malformed_csv_reports_line(self, tmp_path):
        path = tmp_path / 'bad.csv'
        path.write_text("r,P0,u0\n0.1,1.0,0.0\n0.2,abc,0.0\n")
        with pytest.raises(ProfileFormatError) as info:
            InitialData.from_csv(str(path), 3)
        assert info.value.line == 3
        assert str(info.value).startswith("line 3:")

    def test_wrong_header(self, tmp_path):
        path = tmp_path / 'bad.csv'
        path.write_text("r,rho,u\n0.1,1.0,0.0\n0.2,1.0,0.0\n")
        with pytest.raises(ProfileFormatError) as info:
            InitialData.from_csv(str(path), 3)
        assert info.value.line == 1

    def test_grids_must_match(self):
        P0 = RadialProfile([0.1, 1.0], [1.0, 2.0])
        u0 = RadialProfile([0.1, 0.9], [0.0, 0.0])
        with pytest.raises(InconsistentDataError):
            InitialData(P0, u0, 3)

    def test_zero_density_at_origin_is_inconsistent(self):
        r = np.linspace(0.1, 1.0, 10)
        data = InitialData.from_arrays(r, np.where(r < 0.15, 0.0, r ** 2), 0.1 * r, 3)
        assert data.consistency_issues()
        with pytest.raises(InconsistentDataError):
            data.validate()

    def test_velocity_not_vanishing_at_origin(self):
        r = np.linspace(0.1, 1.0, 10)
        data = InitialData.from_arrays(r, 3 * r ** 2, np.full_like(r, 5.0), 3)
        assert any('u0' in issue for issue in data.consistency_issues())

    def test_generated_data_is_consistent(self, compliant_d3, stationary_d3, blowup_d3):
        for data in (compliant_d3, stationary_d3, blowup_d3):
            assert data.consistency_issues() == []


class TestDerivedProfiles:

    def test_compliant_c0_is_constant(self, compliant_d3):
        C0 = c0_profile(compliant_d3).values
        np.testing.assert_allclose(C0, c_min(3) + 0.5, rtol=1e-7)

    @pytest.mark.parametrize("d", [2, 4, 6])
    def test_compliant_c0_other_dimensions(self, d):
        data = make_compliant(d, c_min(d) + 0.3, B=0.05)
        np.testing.assert_allclose(c0_profile(data).values, c_min(d) + 0.3, rtol=1e-7)

    def test_stationary_c0_is_c_min(self, stationary_d3):
        np.testing.assert_allclose(c0_profile(stationary_d3).values, c_min(3), rtol=1e-12)
        balance = stationary_d3.m0.values * newtonian_d1(stationary_d3.grid, stationary_d3.spec) + stationary_d3.grid
        np.testing.assert_allclose(balance / stationary_d3.grid, 0.0, atol=1e-12)

    def test_energy_slopes(self, compliant_d3):
        # E0 = C0 m0^(2/3) for compliant data in three dimensions
        energy = energy_profile(compliant_d3)
        assert energy.exact_slopes
        m, P = compliant_d3.m0.values, compliant_d3.P0.values
        expected = (c_min(3) + 0.5) * (2.0 / 3.0) * m ** (-1.0 / 3.0) * P
        np.testing.assert_allclose(energy.node_slopes(), expected, rtol=1e-6)

    def test_perturbed_c0_is_not_constant(self, perturbed_d3):
        C0 = c0_profile(perturbed_d3).values
        assert np.ptp(C0) / np.mean(C0) > 1e-3

    def test_common_period(self, compliant_d3, analyzer):
        pot = EffectivePotential(PotentialSpec(d=3, m=1.0))
        assert common_period(compliant_d3, analyzer) == pytest.approx(analyzer.period(c_min(3) + 0.5, pot), rel=1e-7)

    def test_continuation_constant_is_positive(self, compliant_d3):
        assert continuation_constant(compliant_d3) > 0

    def test_c0_needs_positive_mass(self):
        r = np.linspace(0.1, 1.0, 10)
        data = InitialData.from_arrays(r, np.where(r < 0.15, 0.0, r ** 2), 0.1 * r, 3)
        assert data.m0.values[0] == 0.0
        with pytest.raises(InconsistentDataError):
            c0_profile(data)
        with pytest.raises(InconsistentDataError):
            common_period(data)


class TestTheta:

    def test_first_branch_gives_unit_f(self, compliant_d3):
        theta = compute_theta(compliant_d3)
        data = compliant_d3
        f0 = theta.values * data.u0.values + data.P0.values * data.grid / (3 * data.m0.values)
        np.testing.assert_allclose(f0[theta.branch == 1], 1.0, rtol=1e-12)

    def test_branches_agree_for_constant_c0(self):
        assert compute_theta(make_fixture('compliant', 3)).max_mismatch < 1e-6

    @pytest.mark.parametrize("family", ['compliant', 'blowup'])
    @pytest.mark.parametrize("d", [2, 3, 5, 6])
    def test_branches_agree_in_all_dimensions(self, family, d):
        theta = compute_theta(make_fixture(family, d, n_nodes=256))
        assert theta.max_mismatch < 1e-6
        assert theta.mismatched_nodes == []

    def test_stationary_data_has_no_theta(self, stationary_d3):
        with pytest.raises(PreconditionError):
            theta_profile(stationary_d3)
        with pytest.raises(PreconditionError):
            compute_theta(stationary_d3)


class TestGenerators:

    def test_radial_grid(self):
        r = radial_grid(2.0, 10, 1e-3)
        assert r[0] == pytest.approx(2e-3)
        assert r[-1] == 2.0
        with pytest.raises(ConstructionError):
            radial_grid(-1.0)

    def test_compliant_rejects_c0_below_minimum(self):
        with pytest.raises(ConstructionError):
            make_compliant(3, c_min(3) - 0.01)

    def test_compliant_rejects_negative_density(self):
        with pytest.raises(ConstructionError) as info:
            make_compliant(3, c_min(3) + 0.5, B=-2.0)
        assert info.value.radius is not None

    def test_compliant_rejects_negative_radicand(self):
        with pytest.raises(ConstructionError) as info:
            make_compliant(3, c_min(3) + 1e-3, A=10.0)
        assert 0 < info.value.radius <= 1.0

    def test_stationary_family(self):
        data = make_stationary(4, R0=2.0, n_nodes=32)
        assert np.all(data.u0.values == 0)
        assert data.R0 == 2.0

    def test_perturb_velocity_keeps_density(self, compliant_d3):
        perturbed = perturb_velocity(compliant_d3, alpha=0.5)
        np.testing.assert_array_equal(perturbed.P0.values, compliant_d3.P0.values)
        np.testing.assert_array_equal(perturbed.m0.values, compliant_d3.m0.values)
        np.testing.assert_allclose(perturbed.u0.values, compliant_d3.u0.values * (1 + 0.5 * compliant_d3.grid))

    def test_blowup_shape_keeps_density_positive(self):
        B = blowup_shape(3)
        assert -3 / 5 < B < 0
        data = make_fixture('blowup', 3, n_nodes=32)
        assert np.all(data.P0.values > 0)

    def test_unknown_family(self):
        with pytest.raises(ConstructionError):
            make_fixture('spiral', 3)
