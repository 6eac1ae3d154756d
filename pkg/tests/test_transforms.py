from __future__ import annotations

import math

import numpy as np
import pytest

from vorocil.errors import ConfigError, DataError
from vorocil.geometry import assign_cell
from vorocil.transforms import TransformParams, compose, l2_normalize, linear_transform, tukey

from conftest import centers_from


class TestL2Normalize:
    def test_three_four_five(self):
        assert np.allclose(l2_normalize([3.0, 4.0]), [0.6, 0.8])

    def test_already_unit(self):
        assert np.array_equal(l2_normalize([1.0, 0.0]), [1.0, 0.0])

    def test_zero_vector_rejected(self):
        with pytest.raises(DataError, match="zero"):
            l2_normalize([0.0, 0.0])

    def test_batch_rows_and_row_index_in_error(self):
        out = l2_normalize(np.array([[3.0, 4.0], [0.0, 2.0]]))
        assert np.allclose(np.linalg.norm(out, axis=1), 1.0)
        with pytest.raises(DataError, match="row 1"):
            l2_normalize(np.array([[1.0, 0.0], [0.0, 0.0]]))


class TestLinearTransform:
    def test_scale_and_shift(self):
        assert np.array_equal(linear_transform([1.0, 2.0], 2.0, 1.0), [3.0, 5.0])

    def test_identity(self):
        z = np.array([0.1, -0.2, 7.0])
        assert np.array_equal(linear_transform(z, 1.0, 0.0), z)

    def test_zero_fixed_point(self):
        assert np.array_equal(linear_transform([0.0, 0.0], 5.0, 0.0), [0.0, 0.0])


class TestTukey:
    def test_square_root(self):
        assert np.allclose(tukey([4.0, 9.0], 0.5), [2.0, 3.0])

    def test_identity_power(self):
        z = np.array([0.0, 1.5, 7.0])
        assert np.array_equal(tukey(z, 1.0), z)

    def test_natural_log(self):
        assert np.allclose(tukey([1.0, math.e], 0.0), [0.0, 1.0])

    def test_negative_component_named(self):
        with pytest.raises(DataError, match=r"component \(1,\)"):
            tukey([1.0, -0.5], 0.5)

    def test_clamp_policy(self):
        out = tukey([1.0, -0.5], 0.5, eps=1e-8, clamp_negative=True)
        assert out[1] == pytest.approx(1e-4)

    def test_zero_floored_for_fractional_power(self):
        assert tukey([0.0], 0.5, eps=1e-8)[0] == pytest.approx(1e-4)

    def test_negative_lambda_floors_before_inversion(self):
        out = tukey(np.array([4.0, 0.0]), -1.0, eps=1e-8)
        assert out[0] == 0.25
        assert out[1] == pytest.approx(1e8)

    def test_monotone_for_positive_lambda(self, rng):
        for lam in (0.3, 0.5, 1.0, 2.0):
            z = np.sort(rng.random(20) * 5.0)
            out = tukey(z, lam)
            assert np.all(np.diff(out) >= 0)


class TestCompose:
    def test_disabled_is_identity(self):
        z = np.array([3.0, -4.0])
        out = compose(z, TransformParams(enabled=False))
        assert np.array_equal(out, z)

    def test_reduces_to_l2(self):
        p = TransformParams(scale=1.0, shift=0.0, tukey_lambda=1.0)
        assert np.allclose(compose([3.0, 4.0], p), [0.6, 0.8])
        # exact equality with the single stage
        z = np.abs(np.random.default_rng(0).standard_normal((10, 4))) + 0.1
        assert np.array_equal(compose(z, p), l2_normalize(z))

    def test_staged_evaluation(self):
        p = TransformParams(scale=1.0, shift=1.0, tukey_lambda=0.5)
        expected = [math.sqrt(1.6), math.sqrt(1.8)]
        assert np.allclose(compose([3.0, 4.0], p), expected)

    def test_scalar_ordering_preserved(self, rng):
        p = TransformParams(scale=1.0, shift=0.5, tukey_lambda=0.5)
        values = np.sort(rng.random(15))[:, None] + 0.1
        out = compose(values, p).ravel()
        assert np.all(np.diff(out) >= 0)

    def test_assignment_invariant_to_transform_order(self, rng):
        # Transforming centers-then-query vs query-then-centers is the same
        # because each side is transformed exactly once.
        p = TransformParams(scale=1.0, shift=1.5, tukey_lambda=0.5)
        raw_centers = rng.standard_normal((5, 6)) + 3.0
        raw_query = rng.standard_normal(6) + 3.0
        centers_first = centers_from(compose(raw_centers, p))
        query_t = compose(raw_query, p)
        a = assign_cell(query_t, centers_first)
        query_first = compose(raw_query, p)
        centers_t = centers_from(compose(raw_centers, p))
        b = assign_cell(query_first, centers_t)
        assert a == b

    def test_invalid_params(self):
        with pytest.raises(ConfigError):
            TransformParams(scale=0.0)
        with pytest.raises(ConfigError):
            TransformParams(eps=0.0)
        # a disabled transform doesn't care about scale
        TransformParams(enabled=False, scale=0.0)
