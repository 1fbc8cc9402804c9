"""
Tests for the initial-data classification
"""
import numpy as np
import pytest

from src.errors import DomainError
from src.initial_data.classifier import ConditionChecker, ConditionReport, Verdict, classify
from src.initial_data.generators import make_fixture, perturb_velocity
from src.initial_data.initial_data import InitialData, common_period
from src.potential.radial_potential import c_min, tau_d


@pytest.fixture(scope="module")
def checker(analyzer):
    return ConditionChecker(analyzer=analyzer)


def test_compliant_data_is_global(checker, compliant_d3):
    report = checker.classify(compliant_d3)
    assert report.verdict == Verdict.GLOBAL_SMOOTH
    assert report.exit_status == 0
    assert report.levelset_min_f > 0
    assert report.C0_mean == pytest.approx(c_min(3) + 0.5, rel=1e-7)
    assert report.C0_max_deviation < 1e-6
    assert report.T0 == pytest.approx(common_period(compliant_d3), rel=1e-9)
    assert report.node_count == 128


def test_blowup_family(checker, blowup_d3):
    report = checker.classify(blowup_d3)
    assert report.verdict == Verdict.FINITE_TIME_BLOWUP
    assert report.exit_status == 2
    assert report.levelset_min_f < 0
    assert report.offending_radius in set(blowup_d3.grid)


def test_non_constant_c0(checker, perturbed_d3):
    report = checker.classify(perturbed_d3)
    assert report.verdict == Verdict.INCONSISTENT_WITH_GLOBAL
    assert report.exit_status == 2
    assert report.C0_max_deviation > 1e-6
    assert report.levelset_min_f is None


def test_stationary(checker, stationary_d3):
    report = checker.classify(stationary_d3)
    assert report.verdict == Verdict.STATIONARY
    assert report.exit_status == 0
    assert report.T0 == pytest.approx(tau_d(3))


def test_structural_violation(checker):
    r = np.linspace(0.1, 1.0, 10)
    data = InitialData.from_arrays(r, np.where(r < 0.15, 0.0, r ** 2), 0.1 * r, 3)
    report = checker.classify(data)
    assert report.verdict == Verdict.INCONSISTENT
    assert report.exit_status == 1
    assert report.messages


def test_marginal_band(analyzer, compliant_d3):
    wide = ConditionChecker({'marginal_band': 1e3}, analyzer)
    report = wide.classify(compliant_d3)
    assert report.verdict == Verdict.MARGINAL
    assert report.exit_status == 2


def test_levelset_min_requires_grid_node(checker, compliant_d3):
    with pytest.raises(DomainError):
        checker.levelset_min_f(0.123456, compliant_d3)


def test_levelset_min_bounded_by_initial_value(checker, compliant_d3):
    # f(0) = 1 lies on the orbit, so the level-set minimum cannot exceed it
    for i in (5, 60, 127):
        assert checker.levelset_min_f(float(compliant_d3.grid[i]), compliant_d3) <= 1.0 + 1e-9


def test_module_level_classify(compliant_d3):
    report = classify(compliant_d3, {'tol_C0': 1e-6})
    assert report.verdict == Verdict.GLOBAL_SMOOTH


def test_report_json_fields(checker, blowup_d3):
    report = checker.classify(blowup_d3)
    payload = report.model_dump_json()
    restored = ConditionReport.model_validate_json(payload)
    assert restored.verdict == report.verdict
    assert '"verdict":"FiniteTimeBlowup"' in payload


@pytest.mark.parametrize("family,verdict", [
    ('stationary', Verdict.STATIONARY),
    ('compliant', Verdict.GLOBAL_SMOOTH),
    ('perturbed', Verdict.INCONSISTENT_WITH_GLOBAL),
    ('blowup', Verdict.FINITE_TIME_BLOWUP),
])
@pytest.mark.parametrize("d", [2, 3, 5, 6])
def test_generated_families_get_their_verdict(checker, d, family, verdict):
    data = make_fixture(family, d, n_nodes=128)
    report = checker.classify(data)
    assert report.verdict == verdict
    if family in ('compliant', 'blowup'):
        assert report.C0_max_deviation < 1e-10
        assert report.theta_branch_mismatch < 1e-6


class TestFourDimensions:

    def test_constant_c0_uses_level_sets(self, checker):
        report = checker.classify(make_fixture('compliant', 4, n_nodes=128))
        assert report.verdict == Verdict.GLOBAL_SMOOTH
        assert report.T0 == pytest.approx(np.pi, abs=1e-8)
        assert report.theta_branch_mismatch is not None

    def test_non_constant_c0_is_not_ruled_out(self, checker):
        data = make_fixture('perturbed', 4, n_nodes=128)
        report = checker.classify(data)
        assert report.C0_max_deviation > 1e-3
        assert report.verdict == Verdict.GLOBAL_SMOOTH
        assert report.exit_status == 0
        assert report.T0 == np.pi
        assert 0 < report.levelset_min_f <= 1.0
        assert report.offending_radius in set(data.grid)

    def test_non_constant_c0_can_blow_up(self, checker):
        data = perturb_velocity(make_fixture('blowup', 4, n_nodes=128), alpha=1e-3)
        report = checker.classify(data)
        assert report.C0_max_deviation > checker.tol_C0
        assert report.verdict == Verdict.FINITE_TIME_BLOWUP
        assert report.levelset_min_f == 0.0
        assert any('blows up' in message for message in report.messages)

    def test_followed_f_agrees_with_level_sets(self, checker):
        # a tiny perturbation keeps the level-set minimum of the unperturbed data
        base = make_fixture('compliant', 4, n_nodes=64)
        expected = checker.classify(base).levelset_min_f
        report = checker.classify(perturb_velocity(base, alpha=1e-5))
        assert report.C0_max_deviation > checker.tol_C0
        assert report.levelset_min_f == pytest.approx(expected, rel=1e-2)
