"""Multi-index ordering, re-centering and truncated arithmetic."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from src.likelihood.multi_index import MultiIndexPoly, MultiIndexSet, get_index_set


class TestOrdering:
    def test_graded_order_two_assets(self):
        iset = get_index_set(2, 2)
        assert iset.alphas == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]

    @pytest.mark.parametrize("dim,n_deg,size", [(1, 10, 11), (2, 6, 28), (2, 4, 15), (3, 4, 35)])
    def test_sizes(self, dim, n_deg, size):
        assert get_index_set(dim, n_deg).size == size

    def test_constant_is_first(self):
        iset = get_index_set(3, 2)
        assert iset.alphas[0] == (0, 0, 0)
        assert iset.unit(2) == iset.index[(0, 0, 1)]

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            MultiIndexSet(0, 2)
        with pytest.raises(ValueError):
            MultiIndexSet(1, -1)

    def test_cached(self):
        assert get_index_set(2, 6) is get_index_set(2, 6)


class TestShift:
    def test_quadratic_one_asset(self):
        a0, a1, a2, delta = 0.3, -1.2, 2.5, 0.7
        p = MultiIndexPoly.from_coeffs(1, 2, [a0, a1, a2]).shift(0, delta)
        expected = [a0 + a1 * delta + a2 * delta**2, a1 + 2 * a2 * delta, a2]
        np.testing.assert_allclose(p.coeffs, expected)

    def test_zero_shift_is_identity(self):
        p = MultiIndexPoly.from_coeffs(2, 2, [1, 2, 3, 4, 5, 6])
        np.testing.assert_array_equal(p.shift(1, 0.0).coeffs, p.coeffs)

    def test_shift_only_moves_its_axis(self):
        # y1^2 is untouched by a shift along the second coordinate
        p = MultiIndexPoly.from_terms(2, 2, {(2, 0): 1.0})
        np.testing.assert_allclose(p.shift(1, 3.0).coeffs, p.coeffs)

    @given(
        coeffs=st.lists(st.floats(-2, 2), min_size=15, max_size=15),
        delta=st.floats(-1, 1),
        axis=st.integers(0, 1),
        point=st.tuples(st.floats(-1, 1), st.floats(-1, 1)),
    )
    def test_matches_pointwise_evaluation(self, coeffs, delta, axis, point):
        p = MultiIndexPoly.from_coeffs(2, 4, coeffs)
        y = np.array([point])
        moved = y.copy()
        moved[0, axis] += delta
        np.testing.assert_allclose(p.shift(axis, delta).evaluate(y), p.evaluate(moved), atol=1e-9)


class TestArithmetic:
    def test_truncated_product(self):
        one_plus_y = MultiIndexPoly.from_coeffs(1, 1, [1.0, 1.0])
        np.testing.assert_allclose(one_plus_y.multiply(one_plus_y).coeffs, [1.0, 2.0])

    def test_product_two_assets(self):
        y1 = MultiIndexPoly.from_terms(2, 2, {(1, 0): 1.0})
        y2 = MultiIndexPoly.from_terms(2, 2, {(0, 1): 1.0})
        prod = y1.multiply(y2)
        assert prod[(1, 1)] == 1.0
        assert np.count_nonzero(prod.coeffs) == 1

    def test_derivative(self):
        p = MultiIndexPoly.from_terms(2, 3, {(2, 1): 3.0, (0, 1): 1.0})
        d = p.derivative(0)
        assert d[(1, 1)] == 6.0
        assert d[(0, 1)] == 0.0

    def test_exp_one_asset(self):
        p = MultiIndexPoly.from_coeffs(1, 5, [1.0, 1.0, 0, 0, 0, 0])
        expected = np.e / np.array([1, 1, 2, 6, 24, 120], dtype=float)
        np.testing.assert_allclose(p.exp().coeffs, expected)

    def test_exp_of_quadratic_matches_series(self):
        # exp(y^2) = 1 + y^2 + y^4/2 + ...
        p = MultiIndexPoly.from_terms(1, 4, {(2,): 1.0})
        np.testing.assert_allclose(p.exp().coeffs, [1.0, 0.0, 1.0, 0.0, 0.5])

    def test_from_terms_drops_high_degree(self):
        p = MultiIndexPoly.from_terms(1, 2, {(3,): 5.0, (1,): 1.0})
        np.testing.assert_allclose(p.coeffs, [0.0, 1.0, 0.0])

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            MultiIndexPoly.from_coeffs(2, 2, [1.0, 2.0])
