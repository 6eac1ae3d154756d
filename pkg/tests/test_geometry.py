from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vorocil.errors import DataError
from vorocil.geometry import (
    Center,
    CenterKind,
    LinearProbe,
    assign_cell,
    assign_cells,
    bias_violation,
    bisector,
    constrain_bias,
    power_score,
    reduce_to_vd,
)

from conftest import centers_from


def brute_power(z, c, nu):
    """Independent scalar evaluation of squared distance minus weight."""
    total = 0.0
    for a, b in zip(z, c):
        total += (a - b) ** 2
    return total - nu


class TestPowerScore:
    def test_unit_distance_zero_weight(self):
        assert power_score([1.0, 0.0], Center(vector=[0.0, 0.0])) == 1.0

    def test_weighted_center(self):
        c = Center(vector=[2.0, 0.0], weight=3.0)
        expected = brute_power([1.0, 0.0], [2.0, 0.0], 3.0)
        assert expected == -2.0
        assert power_score([1.0, 0.0], c) == expected

    def test_identity(self):
        v = [0.3, -1.2, 4.0]
        assert power_score(v, Center(vector=v)) == 0.0

    def test_dimension_mismatch(self):
        with pytest.raises(DataError, match="dimension mismatch"):
            power_score([1.0, 0.0, 0.0], Center(vector=[0.0, 0.0]))

    def test_random_against_oracle(self, rng):
        for _ in range(200):
            n = rng.integers(1, 12)
            z = rng.standard_normal(n)
            c = rng.standard_normal(n)
            nu = float(rng.standard_normal())
            got = power_score(z, Center(vector=c, weight=nu))
            assert got == pytest.approx(brute_power(z, c, nu), rel=1e-12, abs=1e-12)


class TestAssignCell:
    def test_strictly_closer(self):
        centers = centers_from([[0.0, 0.0], [2.0, 0.0]])
        assert assign_cell([0.5, 0.0], centers) == 0

    def test_tie_breaks_to_lowest_index(self):
        centers = centers_from([[0.0, 0.0], [2.0, 0.0]])
        assert assign_cell([1.0, 0.0], centers) == 0

    def test_weight_flips_decision(self):
        centers = [Center(vector=[0.0, 0.0]), Center(vector=[2.0, 0.0], weight=3.0)]
        # direct evaluation: scores 1 vs -2
        assert power_score([1.0, 0.0], centers[0]) == 1.0
        assert power_score([1.0, 0.0], centers[1]) == -2.0
        assert assign_cell([1.0, 0.0], centers) == 1

    def test_empty_rejected(self):
        with pytest.raises(DataError):
            assign_cell([1.0], [])

    def test_appending_farther_center_never_changes_winner(self, rng):
        for _ in range(100):
            n = int(rng.integers(1, 8))
            centers = centers_from(rng.standard_normal((4, n)))
            z = rng.standard_normal(n)
            winner = assign_cell(z, centers)
            worst = max(power_score(z, c) for c in centers)
            direction = rng.standard_normal(n)
            direction /= np.linalg.norm(direction)
            far = Center(vector=z + direction * (np.sqrt(worst + 10.0) + 1.0))
            assert assign_cell(z, centers + [far]) == winner

    def test_equal_weights_collapse_to_plain_voronoi(self, rng):
        for _ in range(100):
            n = int(rng.integers(1, 8))
            pts = rng.standard_normal((5, n))
            z = rng.standard_normal(n)
            nu = float(rng.standard_normal())
            weighted = [Center(vector=p, weight=nu) for p in pts]
            plain = [Center(vector=p) for p in pts]
            assert assign_cell(z, weighted) == assign_cell(z, plain)

    def test_batch_matches_scalar(self, rng):
        centers = centers_from(rng.standard_normal((6, 4)))
        Z = rng.standard_normal((50, 4))
        batch = assign_cells(Z, centers)
        assert [assign_cell(z, centers) for z in Z] == batch.tolist()


class TestBisector:
    def test_axis_pair(self):
        b = bisector(Center(vector=[0.0, 0.0]), Center(vector=[2.0, 0.0]))
        assert np.allclose(b.normal, [-1.0, 0.0])
        assert b.offset == -1.0

    def test_symmetric_pair_through_origin(self):
        b = bisector(Center(vector=[1.0, 0.0]), Center(vector=[-1.0, 0.0]))
        assert np.allclose(b.normal, [1.0, 0.0])
        assert b.offset == 0.0

    def test_coincident_rejected(self):
        with pytest.raises(DataError, match="coincident"):
            bisector(Center(vector=[0.0, 0.0]), Center(vector=[0.0, 0.0]))

    def test_unit_normal_and_opposite_sides(self, rng):
        for _ in range(200):
            n = int(rng.integers(1, 10))
            c1 = Center(vector=rng.standard_normal(n))
            c2 = Center(vector=rng.standard_normal(n))
            b = bisector(c1, c2)
            assert abs(np.linalg.norm(b.normal) - 1.0) <= 1e-9
            assert b.side(c1.vector) > 0 > b.side(c2.vector)

    def test_sign_matches_distance_comparison(self, rng):
        hits = 0
        for _ in range(500):
            n = int(rng.integers(1, 10))
            c1 = Center(vector=rng.standard_normal(n))
            c2 = Center(vector=rng.standard_normal(n))
            z = rng.standard_normal(n)
            d1 = power_score(z, c1)
            d2 = power_score(z, c2)
            if abs(d1 - d2) < 1e-9:  # ties excluded by perturbation
                z = z + 1e-3 * rng.standard_normal(n)
                d1, d2 = power_score(z, c1), power_score(z, c2)
            assert (bisector(c1, c2).side(z) > 0) == (d1 < d2)
            hits += 1
        assert hits == 500


class TestConstrainBias:
    @pytest.mark.parametrize(
        "row,expected",
        [([2.0, 0.0], -1.0), ([0.0, 0.0], 0.0), ([1.0, 1.0], -0.5)],
    )
    def test_hand_values(self, row, expected):
        assert constrain_bias(np.array([row]))[0] == expected

    def test_matches_quarter_norm_oracle(self, rng):
        W = rng.standard_normal((7, 5))
        oracle = np.array([-0.25 * sum(x * x for x in row) for row in W])
        assert np.allclose(constrain_bias(W), oracle, atol=1e-14)

    def test_nonfinite_rejected(self):
        with pytest.raises(DataError):
            constrain_bias(np.array([[np.inf, 0.0]]))


class TestReduceToVd:
    def test_half_weight_center(self):
        probe = LinearProbe(weights=[[2.0, 0.0]], biases=[-1.0], constrained=True)
        (center,) = reduce_to_vd(probe)
        assert np.array_equal(center.vector, [1.0, 0.0])
        assert center.weight == 0.0
        assert center.kind is CenterKind.PROBING

    def test_zero_row(self):
        probe = LinearProbe(weights=[[0.0, 0.0]], biases=[0.0], constrained=True)
        (center,) = reduce_to_vd(probe)
        assert np.array_equal(center.vector, [0.0, 0.0])

    def test_violating_bias_rejected_with_magnitude(self):
        probe = LinearProbe(weights=[[2.0, 0.0]], biases=[0.0], constrained=True)
        with pytest.raises(DataError, match="1.000e"):
            reduce_to_vd(probe)

    def test_unconstrained_flag_rejected(self):
        probe = LinearProbe(weights=[[2.0, 0.0]], biases=[-1.0], constrained=False)
        with pytest.raises(DataError):
            reduce_to_vd(probe)

    def test_reduction_equivalence_sample(self, rng):
        # Full 10k-pair sweep lives in the acceptance suite.
        for _ in range(2000):
            k = int(rng.integers(2, 11))
            n = int(rng.integers(1, 65))
            W = rng.standard_normal((k, n))
            probe = LinearProbe(weights=W, biases=constrain_bias(W), constrained=True)
            z = rng.standard_normal(n)
            linear = int(np.argmax(probe.scores(z)))
            geometric = assign_cell(z, reduce_to_vd(probe))
            assert linear == geometric

    def test_bias_violation_reports_zero_for_constrained(self, rng):
        W = rng.standard_normal((3, 4))
        probe = LinearProbe(weights=W, biases=constrain_bias(W), constrained=True)
        assert bias_violation(probe) == 0.0


@settings(max_examples=50, deadline=None)
@given(
    data=st.lists(
        st.lists(st.floats(-10, 10, allow_nan=False), min_size=3, max_size=3),
        min_size=2,
        max_size=6,
    ),
    query=st.lists(st.floats(-10, 10, allow_nan=False), min_size=3, max_size=3),
    weight=st.floats(-5, 5, allow_nan=False),
)
def test_uniform_weight_shift_never_changes_assignment(data, query, weight):
    plain = [Center(vector=np.array(row)) for row in data]
    shifted = [Center(vector=np.array(row), weight=weight) for row in data]
    assert assign_cell(np.array(query), plain) == assign_cell(np.array(query), shifted)
