"""
Bergman Toolkit - Inequalities Tests
Commutator identities, shifted-norm bounds, shell inequalities and the constant estimate
"""

from fractions import Fraction
from math import log10, sqrt

import pytest

from bergman_toolkit.exceptions import DimensionMismatchError, InvalidCoordinateError
from bergman_toolkit.inequalities import (
    estimate_Cnm,
    failing,
    proof_constant_log10,
    sweep_lemma23,
    sweep_prop21,
    verify_identity23,
    verify_lemma23,
    verify_lemma31,
    verify_lemma32,
    verify_lemma36,
    verify_lemma41,
    verify_monte_carlo,
    verify_prop21,
    verify_prop22,
    verify_prop22prime,
    verify_prop24,
    verify_prop24_series,
    verify_slice_formula,
)
from bergman_toolkit.moments import Region
from bergman_toolkit.polycore import HoloPoly, MultiIndex, parse_polynomial


class TestCommutatorSeries:
    """Test cases for the commutator of T* with multiplication by a monomial"""

    def test_single_case(self):
        """[T*_{z1}, z1] 1 = 1/3 in two variables"""
        report = verify_prop21(MultiIndex((1, 0)), MultiIndex((0, 0)), 1)
        assert report.passed
        assert report.rhs["rational"] == "1/3"
        assert report.details["closed_form_matches"]
        assert report.details["series_sum_matches"]

    def test_sweep_passes(self):
        reports = sweep_prop21(2, 2, K=6)
        assert len(reports) == 6 * 6 * 2
        assert failing(reports) == []

    def test_remainder_within_tail(self):
        report = verify_prop21(MultiIndex((2, 1)), MultiIndex((1, 0)), 1, K=4)
        assert abs(report.details["remainder"]["float"]) <= report.details["tail_bound"]["float"]

    def test_bad_coordinate(self):
        with pytest.raises(InvalidCoordinateError):
            verify_prop21(MultiIndex((1, 0)), MultiIndex((0, 0)), 3)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            verify_prop21(MultiIndex((1,)), MultiIndex((0, 0)), 1)


class TestShiftedNorms:
    """Test cases for both bounds of the shifted-norm lemma"""

    def test_known_values(self):
        first, second = verify_lemma23(HoloPoly.coordinate(2, 1), 0, 1)
        assert first.lhs["rational"] == "1/12"
        assert first.rhs["rational"] == "1/4"
        assert second.lhs["rational"] == "1/432"
        assert second.rhs["rational"] == "1/3"
        assert first.passed and second.passed
        assert second.details["difference_formula_holds"]

    def test_equality_case(self):
        first, _ = verify_lemma23(HoloPoly.constant(2, 1), 0, 0)
        assert first.lhs == first.rhs
        assert first.passed

    def test_sweep_passes(self):
        assert failing(sweep_lemma23(2, 2, 2)) == []

    def test_float_polynomial(self):
        f = HoloPoly.monomial((1, 1), 0.5)
        reports = verify_lemma23(f, 1, 2)
        assert all(r.passed for r in reports)
        assert reports[0].scalar_kind == "float"

    @pytest.mark.parametrize("k,l", [(0, 2), (-1, 0), (0, -1)])
    def test_invalid_orders(self, k, l):
        with pytest.raises(ValueError):
            verify_lemma23(HoloPoly.coordinate(2, 1), k, l)

    def test_zero_polynomial(self):
        with pytest.raises(ValueError):
            verify_lemma23(HoloPoly.zero(2), 0, 0)


class TestShellInequalities:
    """Test cases for the derivative-on-shell inequalities and their normalized form"""

    @pytest.fixture
    def p(self):
        return parse_polynomial("z1 - 1/2", 1)

    def test_radial_family(self, p):
        report = verify_prop22prime(p, HoloPoly.constant(1, 1), k=1, l=1, which=1, cap=1e6)
        assert report.claim_id == "prop-2.2p-1"
        assert report.passed
        assert report.constant == pytest.approx(report.ratio_float ** 0.5)

    def test_tiny_cap_fails(self, p):
        assert not verify_prop22prime(p, HoloPoly.constant(1, 1), k=1, l=1, which=1, cap=1e-6).passed

    def test_tangential_family(self):
        p = parse_polynomial("z1*z2 + z1", 2)
        report = verify_prop22prime(p, HoloPoly.constant(2, 1), k=0, i=1, j=2, which=2, cap=1e6)
        assert report.claim_id == "prop-2.2p-2"
        assert report.scalar_kind == "exact"
        assert report.passed

    def test_partial_family(self, p):
        report = verify_prop22prime(p, HoloPoly.coordinate(1, 1), k=2, j=1, which=3, cap=1e6)
        assert report.passed

    def test_normalized_form(self, p):
        report = verify_prop22(p, HoloPoly.constant(1, 1), k=1, l=1, which=1, cap=1e6)
        assert report.claim_id == "prop-2.2-1"
        assert report.passed

    def test_l_above_k_rejected(self, p):
        with pytest.raises(ValueError):
            verify_prop22prime(p, HoloPoly.constant(1, 1), k=0, l=1, which=1)

    def test_unknown_family(self, p):
        with pytest.raises(ValueError):
            verify_prop22prime(p, HoloPoly.constant(1, 1), k=0, which=4)

    def test_vanishing_product(self, p):
        with pytest.raises(ValueError):
            verify_prop22prime(p, HoloPoly.zero(1), k=0)


class TestConstantEstimate:
    """Test cases for the empirical C(n, m)"""

    def test_estimate_is_max_of_trials(self):
        estimate, reports = estimate_Cnm(1, 2, trials=6, kmax=2, seed=3)
        assert len(reports) == 6
        assert estimate.constant == max(r.constant for r in reports)
        assert set(estimate.family_max) <= {"prop-2.2p-1", "prop-2.2p-3"}
        assert estimate.failures == sum(not r.passed for r in reports)

    def test_seeded(self):
        a, _ = estimate_Cnm(2, 1, trials=4, kmax=1, seed=11)
        b, _ = estimate_Cnm(2, 1, trials=4, kmax=1, seed=11)
        assert a.constant == b.constant
        assert a.argmax == b.argmax

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            estimate_Cnm(1, 1, trials=0, kmax=1)

    def test_proof_constants(self):
        sizes = proof_constant_log10(1, 1)
        assert sizes["N"] == pytest.approx(12 * log10(200))
        assert sizes["c"] == pytest.approx(-(1 + 3 * log10(200)))


class TestCommutatorBound:
    """Test cases for the per-k commutator bound and its series"""

    def test_known_value(self):
        """p = f = z1 in two variables, k = 0: the bracket is z1/2"""
        z1 = HoloPoly.coordinate(2, 1)
        report = verify_prop24(z1, z1, 0)
        assert report.details["lhs_sq"]["rational"] == "1/48"
        assert report.lhs_float == pytest.approx(sqrt(1 / 48))
        assert report.passed

    def test_series(self):
        p = parse_polynomial("z1*z2 + z2", 2)
        report = verify_prop24_series(p, HoloPoly.constant(2, 1), l=0, kmax=4)
        assert len(report.details["terms"]) == 5
        assert all(report.details["per_term_passed"])
        assert not report.details["geometric_regime"]
        assert report.passed

    def test_geometric_regime(self):
        p = HoloPoly.coordinate(2, 1)
        f = HoloPoly.monomial((2, 0))
        report = verify_prop24_series(p, f, l=2, kmax=3, constant=1.5)
        assert report.details["geometric_regime"]

    def test_order_check(self):
        with pytest.raises(ValueError):
            verify_prop24(HoloPoly.coordinate(2, 1), HoloPoly.coordinate(2, 1), 0, l=2)


class TestOneVariableLemmas:
    """Test cases for the shell comparison, point evaluation, radial powers and dilation"""

    @pytest.mark.parametrize("t", [0, 1, 3])
    def test_shell_comparison(self, t):
        report = verify_lemma31(parse_polynomial("1 + z1*z2 - z2^2", 2), t)
        assert report.passed
        assert report.scalar_kind == "exact"

    def test_shell_comparison_rejects_zero(self):
        with pytest.raises(ValueError):
            verify_lemma31(HoloPoly.zero(1), 0)

    def test_point_evaluation(self):
        p = parse_polynomial("z1^3 - 1/2*z1 + 1/4", 1)
        report = verify_lemma32(p, parse_polynomial("1 + z1", 1), l=1, r=0.4, nodes=256)
        assert report.passed
        assert report.details["quadrature_converged"]
        assert report.details["disk"]["passed"]

    def test_point_evaluation_equality(self):
        """p = z, f = 1, r = 1: both bounds are attained"""
        report = verify_lemma32(HoloPoly.coordinate(1, 1), HoloPoly.constant(1, 1), l=1, nodes=64)
        assert report.lhs_float == pytest.approx(1.0)
        assert report.rhs_float == pytest.approx(1.0)
        assert report.details["disk"]["average"] == pytest.approx(2 / 3)

    def test_point_evaluation_needs_one_variable(self):
        with pytest.raises(DimensionMismatchError):
            verify_lemma32(HoloPoly.coordinate(2, 1), HoloPoly.constant(2, 1), l=1)

    def test_point_evaluation_order_range(self):
        with pytest.raises(ValueError):
            verify_lemma32(HoloPoly.coordinate(1, 1), HoloPoly.constant(1, 1), l=2)

    @pytest.mark.parametrize("l", range(1, 13))
    def test_radial_power_table(self, l):
        assert verify_lemma36(l).passed

    def test_radial_power_table_values(self):
        assert verify_lemma36(3).details["coefficients"] == [1, 3, 1]

    def test_radial_power_order(self):
        with pytest.raises(ValueError):
            verify_lemma36(0)

    def test_dilation(self):
        p = parse_polynomial("z1 - z2", 2)
        report = verify_lemma41(p, parse_polynomial("1 + z1^2", 2), Fraction(3, 4))
        assert report.passed
        assert report.details["factor"] == 2 ** 4

    def test_dilation_radius(self):
        with pytest.raises(ValueError):
            verify_lemma41(HoloPoly.coordinate(1, 1), HoloPoly.constant(1, 1), 0.4)


class TestCrossChecks:
    """Test cases for the pointwise identity, slices and Monte Carlo"""

    def test_identity(self):
        report = verify_identity23(parse_polynomial("z1^2*z2 + 3*z2 - z1*z3", 3), 1, points=20, seed=1)
        assert report.passed
        assert report.details["symbolic_equal"]

    def test_identity_float_polynomial(self):
        p = HoloPoly(2, {(1, 1): 0.25, (0, 2): 1.5})
        assert verify_identity23(p, 2, points=10, seed=4).passed

    def test_identity_needs_points(self):
        with pytest.raises(ValueError):
            verify_identity23(HoloPoly.coordinate(2, 1), 1, points=0)

    @pytest.mark.parametrize("region", [Region.ball(), Region.shell(Fraction(1, 2))])
    def test_slice_formula(self, region):
        assert verify_slice_formula(MultiIndex((1, 2)), 1, region).passed

    def test_slice_formula_off_diagonal(self):
        report = verify_slice_formula(MultiIndex((1, 0)), 0, beta=MultiIndex((0, 1)))
        assert report.passed
        assert report.lhs_float == 0.0

    def test_monte_carlo(self):
        report = verify_monte_carlo(MultiIndex((1, 0)), 1, samples=20000, seed=7)
        assert report.passed
        assert report.seed == 7
