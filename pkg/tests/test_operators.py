"""
Bergman Toolkit - Operators Tests
Multiplication and adjoint matrices, submodule projectors, commutators and kernel checks
"""

import json
from fractions import Fraction

import numpy as np
import pytest

from bergman_toolkit.exceptions import DimensionMismatchError, SubmoduleDegeneracyError
from bergman_toolkit.operators import (
    BasisSpec,
    SubmodulePlan,
    adjoint_action,
    compress,
    compressed_commutator,
    coordinate_adjoint,
    cross_corner,
    export_matrix,
    kernel_orthogonality,
    multiplication_matrix,
    number_operator,
    orthonormal_coordinates,
    pivoted_cholesky,
    polynomial_from_coordinates,
    sample_off_zero_set,
    sample_zero_set,
    submodule_distance,
    submodule_distance_sq_exact,
    submodule_frame,
    submodule_projector,
)
from bergman_toolkit.polycore import ExactComplex, HoloPoly, MultiIndex, parse_polynomial


def _exact_equal(a: np.ndarray, b: np.ndarray) -> bool:
    return a.shape == b.shape and all(x == y for x, y in zip(a.flat, b.flat))


class TestBasis:
    """Test cases for monomial bases and coordinates"""

    def test_dimension(self):
        assert BasisSpec(2, 0, 3).dimension == 10
        assert BasisSpec(3, 1, 2).dimension == 10

    def test_invalid_basis(self):
        with pytest.raises(ValueError):
            BasisSpec(0, 0, 1)

    def test_coordinates_round_trip(self):
        spec = BasisSpec(2, 1, 3)
        f = parse_polynomial("1 + 2*z1*z2 - z2^3", 2)
        back = polynomial_from_coordinates(orthonormal_coordinates(f, spec), spec)
        assert back.almost_equal(f.to_float())

    def test_coordinates_reject_high_degree(self):
        with pytest.raises(ValueError):
            orthonormal_coordinates(HoloPoly.monomial((3, 0)), BasisSpec(2, 0, 2))


class TestOperatorMatrices:
    """Test cases for multiplication, adjoint and number operators"""

    @pytest.mark.parametrize("n,t,D", [(1, 0, 6), (2, 1, 4), (3, 3, 3)])
    def test_multiplication_adjoint_is_toeplitz_adjoint(self, n, t, D):
        """Exact adjoint of M_{z_j} equals T*_{z_j} on the larger space, entry by entry"""
        spec = BasisSpec(n, t, D)
        bigger = spec.with_degree(D + 1)
        for j in range(1, n + 1):
            m = multiplication_matrix(HoloPoly.coordinate(n, j), spec, exact=True)
            adj = m.adjoint().entries
            toeplitz = coordinate_adjoint(j, bigger, exact=True).entries
            rows = [bigger.index(alpha) for alpha in spec.indices]
            assert _exact_equal(adj, toeplitz[rows, :])

    def test_coordinate_adjoint_entries(self):
        spec = BasisSpec(2, 0, 2)
        adj = coordinate_adjoint(1, spec, exact=True)
        # T* z1^2 = 2/(2+2) z1
        col = spec.index(MultiIndex((2, 0)))
        row = spec.index(MultiIndex((1, 0)))
        assert adj.entries[row, col] == ExactComplex(Fraction(1, 2))

    def test_orthonormal_matrix_is_adjoint_of_float_multiplication(self):
        spec = BasisSpec(2, 0, 3)
        m = compress(multiplication_matrix(HoloPoly.coordinate(2, 2), spec), spec)
        adj = coordinate_adjoint(2, spec)
        assert np.allclose(m.entries.conj().T, adj.entries)

    def test_adjoint_action_matches_matrix(self):
        p = parse_polynomial("z1^2*z2 + 3*z2^2", 2)
        acted = adjoint_action(p, 2, t=1)
        assert acted == parse_polynomial("1/6*z1^2 + 6/5*z2", 2)

    def test_number_operator(self):
        spec = BasisSpec(2, 0, 2)
        diag = np.real(np.diag(number_operator(spec).entries))
        assert list(diag) == [0, 1, 1, 2, 2, 2]

    def test_zero_multiplier_rejected(self):
        with pytest.raises(ValueError):
            multiplication_matrix(HoloPoly.zero(2), BasisSpec(2, 0, 1))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            multiplication_matrix(HoloPoly.coordinate(3, 1), BasisSpec(2, 0, 1))


class TestSubmodules:
    """Test cases for the finite sections of [p]"""

    @pytest.fixture
    def plan(self):
        return SubmodulePlan(parse_polynomial("z1 - 1/2", 1), 4)

    def test_plan_shape(self, plan):
        assert plan.ambient_degree == 6
        assert len(plan.generators) == 5
        assert plan.is_band_generator(plan.generators[-1])
        assert not plan.is_band_generator(plan.generators[0])

    def test_zero_generator_rejected(self):
        with pytest.raises(ValueError):
            SubmodulePlan(HoloPoly.zero(2), 3)

    def test_projector_is_orthogonal_projection(self, plan):
        P = submodule_projector(plan).entries
        assert np.allclose(P @ P, P, atol=1e-10)
        assert np.allclose(P, P.conj().T, atol=1e-10)
        assert np.trace(P).real == pytest.approx(5)

    def test_exact_projector_agrees_with_float(self, plan):
        exact = submodule_projector(plan, exact=True).to_orthonormal().entries
        assert np.allclose(exact, submodule_projector(plan).entries, atol=1e-10)

    def test_distance_float_vs_exact(self, plan):
        f = HoloPoly.constant(1, 1)
        exact = submodule_distance_sq_exact(f, plan)
        assert isinstance(exact, Fraction)
        assert submodule_distance(f, plan) ** 2 == pytest.approx(float(exact), rel=1e-9)

    def test_generator_lies_in_submodule(self, plan):
        assert submodule_distance(plan.generator_poly(plan.generators[2]), plan) < 1e-10

    def test_frames_are_cached_with_a_bound(self, plan):
        assert submodule_frame(plan) is submodule_frame(SubmodulePlan(parse_polynomial("z1 - 1/2", 1), 4))
        limit = submodule_frame.cache_info().maxsize
        assert limit is not None
        for B in range(limit + 5):
            submodule_frame(SubmodulePlan(HoloPoly.coordinate(1, 1), B))
        assert submodule_frame.cache_info().currsize <= limit

    def test_degenerate_gram(self):
        with pytest.raises(SubmoduleDegeneracyError):
            pivoted_cholesky(np.array([[1.0, 1.0], [1.0, 1.0]]))

    def test_commutator_diagonal_oracle(self):
        """n = 1, p = 1: interior singular values 1/((k+1)(k+2))"""
        plan = SubmodulePlan(HoloPoly.constant(1, 1), 6)
        m = compressed_commutator(plan, 1, 1)
        values = np.sort(np.abs(np.linalg.eigvalsh(m.entries)))[::-1]
        expected = sorted([1 / ((k + 1) * (k + 2)) for k in range(6)] + [6 / 7], reverse=True)
        assert np.allclose(values, expected, atol=1e-12)
        assert m.metadata["band_indices"] == [6]

    def test_commutator_is_self_adjoint_on_diagonal_pair(self):
        plan = SubmodulePlan(parse_polynomial("z1*z2", 2), 3)
        m = compressed_commutator(plan, 2, 2).entries
        assert np.allclose(m, m.conj().T, atol=1e-10)

    def test_cross_corner_vanishes_on_full_space(self):
        """[1] is everything, so (I - P) T* P only sees the truncation"""
        plan = SubmodulePlan(HoloPoly.constant(2, 1), 3)
        corner = cross_corner(plan, 1).entries
        assert np.allclose(corner, 0.0, atol=1e-10)


class TestKernelChecks:
    """Test cases for reproducing-kernel orthogonality"""

    def test_kernel_on_zero_set(self):
        p = parse_polynomial("z1 - z2", 2)
        plan = SubmodulePlan(p, 3)
        for w in sample_zero_set(p, 5, seed=11):
            assert abs(p.evaluate(w)) < 1e-12
            assert kernel_orthogonality(w, plan) < 1e-8

    def test_kernel_off_zero_set(self):
        p = parse_polynomial("z1 - 1/2", 1)
        plan = SubmodulePlan(p, 4)
        points = sample_off_zero_set(p, 5, seed=2, threshold=0.2)
        assert np.all(np.abs(p.evaluate(points)) > 0.2)
        assert all(kernel_orthogonality(w, plan) > 1e-6 for w in points)

    def test_constant_has_no_zeros(self):
        with pytest.raises(ValueError):
            sample_zero_set(HoloPoly.constant(2, 1), 3, seed=0)

    def test_point_outside_ball(self):
        plan = SubmodulePlan(parse_polynomial("z1", 1), 2)
        with pytest.raises(ValueError):
            kernel_orthogonality(np.array([1.5]), plan)


class TestExport:
    """Test cases for matrix export"""

    def test_csv_and_binary(self, tmp_path):
        spec = BasisSpec(1, 0, 3)
        m = coordinate_adjoint(1, spec)
        csv_path = export_matrix(m, tmp_path / "adj.csv")
        assert csv_path.read_text().splitlines()[0].startswith("re_0,im_0,re_1")

        bin_path = export_matrix(m, tmp_path / "adj.bin")
        raw = np.fromfile(bin_path, dtype="<c16").reshape(4, 4)
        assert np.allclose(raw, m.entries)
        header = json.loads((tmp_path / "adj.json").read_text())
        assert header["rows"] == 4 and header["order"] == "row-major"
