"""
Bergman Toolkit - Moments Tests
Exact ball and shell integrals, normalized norms, slices and Monte Carlo cross-checks
"""

from fractions import Fraction

import pytest

from bergman_toolkit.moments import (
    FULL_BALL,
    PiMultiple,
    Region,
    WeightSpec,
    ball_volume,
    holo_norm_sq,
    integrate,
    moment,
    monomial_norm_sq,
    monte_carlo_integral,
    slice_integral,
    sphere_moment,
    weight_constant,
    weighted_L2_sq,
)
from bergman_toolkit.polycore import HoloPoly, MixedPoly, MultiIndex, multiindex_enumerate, parse_polynomial

HALF_SHELL = Region.shell(Fraction(1, 2))


class TestPiMultiple:
    """Test cases for the rational-times-power-of-pi value type"""

    def test_addition_requires_same_power(self):
        a = PiMultiple(Fraction(1, 2), 2)
        assert a + a == PiMultiple(Fraction(1), 2)
        with pytest.raises(ValueError):
            a + PiMultiple(Fraction(1), 1)

    def test_zero_absorbs_power(self):
        assert PiMultiple.zero(3) + PiMultiple(Fraction(2), 1) == PiMultiple(Fraction(2), 1)

    def test_ratio_is_exact(self):
        ratio = PiMultiple(Fraction(1, 6), 2).ratio(PiMultiple(Fraction(1, 2), 2))
        assert ratio == Fraction(1, 3)

    def test_ratio_against_zero(self):
        with pytest.raises(ZeroDivisionError):
            PiMultiple(Fraction(1), 1).ratio(PiMultiple.zero(1))

    def test_json_rendering(self):
        rendered = PiMultiple(Fraction(3, 4), 1).to_json()
        assert rendered["rational"] == "3/4"
        assert rendered["pi_power"] == 1
        assert rendered["float"] == pytest.approx(0.75 * 3.141592653589793)


class TestClosedForms:
    """Test cases for moments and monomial norms"""

    def test_disk_area(self):
        assert moment(MultiIndex((0,)), MultiIndex((0,))) == PiMultiple(Fraction(1), 1)
        assert ball_volume(2) == PiMultiple(Fraction(1, 2), 2)

    def test_second_moment_of_ball(self):
        alpha = MultiIndex((1, 0))
        assert moment(alpha, alpha) == PiMultiple(Fraction(1, 6), 2)

    def test_angular_orthogonality(self):
        assert moment(MultiIndex((1, 0)), MultiIndex((0, 1))).coeff == 0

    def test_shell_moment(self):
        zero = MultiIndex((0,))
        assert moment(zero, zero, 0, HALF_SHELL) == PiMultiple(Fraction(3, 4), 1)

    def test_weight_constant(self):
        assert weight_constant(2, 1) == 3
        assert weight_constant(3, 0) == 1

    @pytest.mark.parametrize(
        "alpha,t,expected",
        [((0, 0), 0, Fraction(1)), ((1, 0), 0, Fraction(1, 3)), ((1, 0), 1, Fraction(1, 4)), ((1, 1), 0, Fraction(1, 12))],
    )
    def test_monomial_norm(self, alpha, t, expected):
        assert monomial_norm_sq(MultiIndex(alpha), t) == expected

    def test_normalized_integral_matches_norm_formula(self):
        for alpha in multiindex_enumerate(2, 3):
            for t in range(3):
                value = weighted_L2_sq(HoloPoly.monomial(alpha), t, normalized=True)
                assert value == PiMultiple(monomial_norm_sq(alpha, t), 0)

    def test_weight_spec_carries_normalization(self):
        f = parse_polynomial("z1 + 2*z2", 2)
        assert weighted_L2_sq(f, WeightSpec(1, "normalized")) == weighted_L2_sq(f, 1, normalized=True)
        assert weighted_L2_sq(f, WeightSpec(1)) == weighted_L2_sq(f, 1)
        assert WeightSpec(2).c_t(2) == weight_constant(2, 2)

    def test_weight_spec_rejects_negative_exponent(self):
        with pytest.raises(ValueError):
            WeightSpec(-1)

    def test_holo_norm_uses_orthogonality(self):
        f = parse_polynomial("z1 + 2*z2", 2)
        assert holo_norm_sq(f) == Fraction(1, 3) + 4 * Fraction(1, 3)

    def test_sphere_moment(self):
        assert sphere_moment(MultiIndex((1, 0))) == Fraction(1, 2)
        assert sphere_moment(MultiIndex((1, 1))) == Fraction(1, 6)

    def test_mixed_integrand_is_real(self):
        h = MixedPoly.conj_coordinate(2, 1) * HoloPoly.coordinate(2, 2)
        value = weighted_L2_sq(h, 1, HALF_SHELL)
        assert value.is_exact
        assert value.coeff > 0

    def test_float_kind_propagates(self):
        value = weighted_L2_sq(HoloPoly.monomial((1, 0), 0.5), 0)
        assert not value.is_exact
        assert float(value) == pytest.approx(0.25 * 3.141592653589793 ** 2 / 6)

    def test_bad_region(self):
        with pytest.raises(ValueError):
            Region.shell(1)


class TestSlices:
    """Test cases for the slice decomposition and Monte Carlo estimates"""

    @pytest.mark.parametrize("region", [FULL_BALL, HALF_SHELL])
    def test_slice_matches_moment_oracle(self, region):
        for alpha in multiindex_enumerate(2, 3):
            g = HoloPoly.monomial(alpha).conjugate() * HoloPoly.monomial(alpha)
            for t in range(3):
                assert slice_integral(g, t, region) == integrate(g, t, region)

    def test_slice_on_polynomial(self):
        h = parse_polynomial("1 + z1*z2 - 3*z3^2", 3)
        g = MixedPoly.from_holo(h).abs_sq()
        assert slice_integral(g, 2) == weighted_L2_sq(h, 2)

    def test_monte_carlo_agrees_with_exact(self):
        h = MixedPoly.from_holo(HoloPoly.coordinate(2, 1)).abs_sq()
        estimate = monte_carlo_integral(h, 1, FULL_BALL, samples=20000, seed=7)
        assert estimate.agrees_with(integrate(h, 1), sigmas=4.0)

    def test_monte_carlo_is_seeded(self):
        h = MixedPoly.norm_sq(2)
        a = monte_carlo_integral(h, 0, HALF_SHELL, samples=500, seed=3)
        b = monte_carlo_integral(h, 0, HALF_SHELL, samples=500, seed=3)
        assert a == b

    def test_monte_carlo_needs_samples(self):
        with pytest.raises(ValueError):
            monte_carlo_integral(MixedPoly.norm_sq(1), samples=0)
