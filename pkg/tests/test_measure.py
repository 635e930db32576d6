"""Rearrangements, step functions and the exact level identities."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from isoperim.measure import (
    EuclideanBox,
    GaussianLine,
    GridFunction,
    StepFunction,
    UnitCube,
    WeightedInterval,
    decreasing_rearrangement,
    distribution_function,
    level_tail_integral,
    maximal_average,
    oscillation,
    profile_level_integral,
    signed_rearrangement,
    space_from_dict,
    support_measure,
    truncation,
)


def tent_on(r):
    space = UnitCube(1, r)
    x = space.centers[:, 0]
    return space, GridFunction(space, np.minimum(x, 1.0 - x))


finite_values = st.lists(
    st.floats(min_value=-50.0, max_value=50.0,
              allow_nan=False, allow_infinity=False),
    min_size=2, max_size=48)


# ---------------------------------------------------------------------------
# spaces
# ---------------------------------------------------------------------------


def test_unit_cube_mass_and_weights():
    space = UnitCube(2, 16)
    assert space.ncells == 256
    assert space.weights.shape == (256,)
    assert abs(space.total_mass - 1.0) < 1e-12
    assert np.allclose(space.weights, 1.0 / 256.0)


def test_euclidean_box_mass():
    space = EuclideanBox(2, 3.0, 8)
    assert abs(space.total_mass - 9.0) < 1e-9


def test_gaussian_line_is_probability_space():
    space = GaussianLine(256)
    assert abs(space.total_mass - 1.0) < 1e-9
    assert np.all(np.diff(space.centers[:, 0]) > 0)


def test_space_dict_round_trip():
    for space in (UnitCube(2, 8), EuclideanBox(1, 2.0, 16),
                  GaussianLine(32),
                  WeightedInterval(0.0, 1.0, (1.0, 2.0, 3.0, 4.0))):
        back = space_from_dict(space.to_dict())
        assert back.to_dict() == space.to_dict()
        assert back.ncells == space.ncells


# ---------------------------------------------------------------------------
# decreasing rearrangement
# ---------------------------------------------------------------------------


def test_rearrangement_of_indicator():
    space = UnitCube(1, 64)
    f = GridFunction(space, (space.centers[:, 0] < 0.25).astype(float))
    star = decreasing_rearrangement(f)
    assert star.value(0.1) == 1.0
    assert star.value(0.3) == 0.0
    assert abs(star.measure_above(0.5) - 0.25) < 1e-12


def test_tent_rearrangement_closed_form():
    # paired cells give f*(t) = (1 - t)/2 exactly at the pair midpoints
    r = 128
    _, f = tent_on(r)
    star = decreasing_rearrangement(f)
    t = (2.0 * np.arange(r // 2) + 1.0) / r
    assert np.max(np.abs(np.atleast_1d(star.value(t)) - (1.0 - t) / 2.0)) \
        < 1e-14


def test_rearrangement_uses_absolute_value():
    space = UnitCube(1, 4)
    f = GridFunction(space, np.array([-3.0, 1.0, -2.0, 0.5]))
    star = decreasing_rearrangement(f)
    assert np.allclose(star.values, [3.0, 2.0, 1.0, 0.5])


def test_signed_rearrangement_keeps_sign():
    space = UnitCube(1, 4)
    f = GridFunction(space, np.array([-3.0, 1.0, -2.0, 0.5]))
    gs = signed_rearrangement(f)
    assert np.allclose(gs.values, [1.0, 0.5, -2.0, -3.0])


@given(finite_values)
@settings(max_examples=120, deadline=None)
def test_rearrangement_preserves_l1(vals):
    space = UnitCube(1, len(vals))
    f = GridFunction(space, np.asarray(vals))
    star = decreasing_rearrangement(f)
    assert math.isclose(star.total_integral(), f.abs_integral(),
                        rel_tol=1e-12, abs_tol=1e-12)


@given(finite_values, st.floats(min_value=0.0, max_value=49.0))
@settings(max_examples=120, deadline=None)
def test_equimeasurability(vals, level):
    space = UnitCube(1, len(vals))
    f = GridFunction(space, np.asarray(vals))
    direct = math.fsum(
        space.weights[np.abs(f.values) > level].tolist())
    assert math.isclose(distribution_function(f, level), direct,
                        rel_tol=1e-12, abs_tol=1e-12)


def test_distribution_function_rejects_negative_levels():
    space, f = tent_on(8)
    with pytest.raises(ValueError):
        distribution_function(f, -0.1)


# ---------------------------------------------------------------------------
# step functions and running averages
# ---------------------------------------------------------------------------


def test_step_function_integral_and_median():
    step = StepFunction(np.array([0.0, 0.25, 1.0]), np.array([2.0, 1.0]))
    assert step.total_length == 1.0
    assert step.value(0.1) == 2.0
    assert step.value(0.5) == 1.0
    assert abs(step.integral_to(0.5) - (0.25 * 2.0 + 0.25)) < 1e-15
    assert step.median_value() == 1.0


def test_indicator_running_average_and_oscillation():
    # chi_[0, 1/4): average is 1 up to 1/4 and (1/4)/t beyond
    step = StepFunction(np.array([0.0, 0.25]), np.array([1.0]))
    avg = maximal_average(step)
    assert avg.value(0.1) == 1.0
    assert abs(avg.value(0.5) - 0.5) < 1e-15
    assert avg.oscillation(0.1) == 0.0
    assert abs(avg.oscillation(0.5) - 0.5) < 1e-15
    assert avg.value_at_zero() == 1.0


@given(finite_values, st.floats(min_value=0.02, max_value=0.98))
@settings(max_examples=150, deadline=None)
def test_level_tail_identity(vals, t):
    """t (f** - f*)(t) equals the tail integral of the distribution
    function, exactly, for arbitrary cell data."""
    space = UnitCube(1, len(vals))
    f = GridFunction(space, np.asarray(vals))
    lhs = t * float(oscillation(f, t))
    rhs = level_tail_integral(f, t)
    scale = max(1.0, f.abs_integral())
    assert abs(lhs - rhs) <= 1e-10 * scale


def test_oscillation_beyond_support_decays_like_one_over_t():
    step = StepFunction(np.array([0.0, 0.5]), np.array([2.0]))
    avg = maximal_average(step)
    # total integral is 1; past the support f* = 0 so osc(t) = 1/t
    assert abs(avg.oscillation(2.0) - 0.5) < 1e-15


# ---------------------------------------------------------------------------
# truncation
# ---------------------------------------------------------------------------


def test_truncation_values():
    space = UnitCube(1, 5)
    f = GridFunction(space, np.array([0.0, 1.0, 2.0, 3.0, -4.0]))
    two_sided = truncation(f, 1.0, 3.0)
    assert np.allclose(two_sided.values, [0.0, 0.0, 1.0, 2.0, 2.0])
    one_sided = truncation(f, 1.0, unbounded=True)
    assert np.allclose(one_sided.values, [0.0, 0.0, 1.0, 2.0, 3.0])


def test_truncation_level_validation():
    space, f = tent_on(8)
    with pytest.raises(ValueError):
        truncation(f, -1.0, 2.0)
    with pytest.raises(ValueError):
        truncation(f, 2.0, 1.0)
    with pytest.raises(ValueError):
        truncation(f, 1.0, np.inf)


@given(finite_values, st.floats(min_value=0.0, max_value=10.0),
       st.floats(min_value=0.01, max_value=10.0))
@settings(max_examples=120, deadline=None)
def test_truncation_l1_additivity(vals, t1, gap):
    """Cutting at t1 < t2 splits the one-sided truncation at t1 into
    the bounded middle part plus the one-sided part at t2."""
    space = UnitCube(1, len(vals))
    f = GridFunction(space, np.asarray(vals))
    t2 = t1 + gap
    low = truncation(f, t1, t2)
    high = truncation(f, t2, unbounded=True)
    full = truncation(f, t1, unbounded=True)
    assert math.isclose(low.abs_integral() + high.abs_integral(),
                        full.abs_integral(), rel_tol=1e-12, abs_tol=1e-12)


def test_support_measure_counts_nonzero_cells():
    space = UnitCube(1, 8)
    f = GridFunction(space, np.array([0.0, 1.0, 0.0, 2.0,
                                      0.0, 0.0, -1.0, 0.0]))
    assert abs(support_measure(f) - 3.0 / 8.0) < 1e-15


# ---------------------------------------------------------------------------
# exact level integrals
# ---------------------------------------------------------------------------


def test_profile_level_integral_indicator():
    # chi_[0,1/4): mu(s) = 1/4 for s in [0, 1), so the integral of
    # I(mu(s)) over levels is I(1/4)
    space = UnitCube(1, 64)
    f = GridFunction(space, (space.centers[:, 0] < 0.25).astype(float))
    val = profile_level_integral(f, lambda m: np.sqrt(m))
    assert abs(val - 0.5) < 1e-14


def test_level_tail_integral_tent_closed_form():
    # for the tent, mu(s) = 1 - 2s and f*(t) = (1-t)/2: the tail
    # integral at t = 1/2 is int_{1/4}^{1/2} (1-2s) ds = 1/16
    _, f = tent_on(512)
    got = level_tail_integral(f, 0.5)
    assert abs(got - 1.0 / 16.0) < 1e-3
    t = 0.5
    assert abs(t * float(oscillation(f, t)) - got) < 1e-12
