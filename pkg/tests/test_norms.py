"""Norm descriptors and the closed-form evaluations that pin them."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from isoperim.measure import (
    GridFunction,
    StepFunction,
    UnitCube,
    decreasing_rearrangement,
)
from isoperim.norms import (
    NormDescriptor,
    classical_linf_q_diverges,
    evaluate,
    fundamental_function,
    lorentz_oscillation,
    parse_norm,
)


def indicator(a: float) -> StepFunction:
    return StepFunction(np.array([0.0, a]), np.array([1.0]))


# ---------------------------------------------------------------------------
# descriptor parsing
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("text", [
    "Lp:2", "Lp:1.5", "Lorentz:2,2", "Lorentz:3,1", "LorentzOsc:2",
    "LinfInf", "BWH:2", "LqLogL:2,1", "FK:2",
])
def test_parse_round_trip(text):
    norm = parse_norm(text)
    assert parse_norm(norm.to_string()) == norm


@pytest.mark.parametrize("text", [
    "", "Lq:2", "Lp", "Lp:0", "Lp:-1", "Lorentz:2", "Lorentz:inf,2",
    "LorentzOsc:inf", "LinfInf:3", "BWH:1.5", "BWH:0", "LqLogL:2",
    "LqLogL:0.5,1", "FK:0.5", "Lp:two",
])
def test_parse_rejects_malformed(text):
    with pytest.raises(ValueError):
        parse_norm(text)


def test_descriptor_domain_constraints():
    with pytest.raises(ValueError):
        NormDescriptor("BWH", (2.0,), M=2.0)
    with pytest.raises(ValueError):
        NormDescriptor("LqLogL", (2.0, 1.0), M=np.inf)
    with pytest.raises(ValueError):
        NormDescriptor("Lp", (2.0,), M=-1.0)


# ---------------------------------------------------------------------------
# closed-form values
# ---------------------------------------------------------------------------


def test_lorentz_22_of_unit_indicator():
    # f** of chi_[0,1) is 1 then 1/t: the squared norm is 1 + 1 = 2
    got = evaluate(parse_norm("Lorentz:2,2"), indicator(1.0))
    assert abs(got - math.sqrt(2.0)) / math.sqrt(2.0) < 1e-5


@pytest.mark.parametrize("q", [1, 2, 3])
@pytest.mark.parametrize("a", [0.3, 1.0])
def test_oscillation_lorentz_of_indicator(q, a):
    """(f** - f*) of an indicator is a/t past its support, so the
    q-norm against dt/t is (1/q)^(1/q) regardless of the length a."""
    got = evaluate(parse_norm(f"LorentzOsc:{q}"), indicator(a))
    want = (1.0 / q) ** (1.0 / q)
    assert abs(got - want) / want < 1e-5


def test_bwh_of_unit_indicator():
    got = evaluate(parse_norm("BWH:2"), indicator(1.0))
    assert abs(got - 1.0) < 1e-5


def test_fiorenza_karadzhov_of_unit_indicator():
    want = math.sqrt(2.0 * math.pi)
    got = evaluate(parse_norm("FK:2"), indicator(1.0))
    assert abs(got - want) / want < 1e-5


def test_weak_oscillation_sup_of_indicator():
    assert abs(evaluate(parse_norm("LinfInf"), indicator(0.3)) - 1.0) < 1e-12


def test_lorentz_22_of_linear_function():
    # f = x on [0,1]: f** = 1 - t/2 then 1/(2t); the squared norm is
    # 7/12 + 1/4 = 5/6
    star = decreasing_rearrangement(
        GridFunction(UnitCube(1, 4096), UnitCube(1, 4096).centers[:, 0]))
    got = evaluate(parse_norm("Lorentz:2,2"), star)
    want = math.sqrt(5.0 / 6.0)
    assert abs(got - want) / want < 1e-5


def test_lp_norm_of_linear_function():
    space = UnitCube(1, 4096)
    star = decreasing_rearrangement(
        GridFunction(space, space.centers[:, 0]))
    got = evaluate(parse_norm("Lp:2"), star)
    assert abs(got - math.sqrt(1.0 / 3.0)) < 1e-5


def test_fundamental_function_of_lp():
    norm = parse_norm("Lp:2")
    assert abs(fundamental_function(norm, 0.25) - 0.5) < 1e-12
    with pytest.raises(ValueError):
        fundamental_function(norm, 0.0)
    with pytest.raises(ValueError):
        fundamental_function(parse_norm("BWH:2"), 1.5)


# ---------------------------------------------------------------------------
# evaluation contracts
# ---------------------------------------------------------------------------


def test_zero_input_evaluates_to_zero():
    zero = StepFunction(np.array([0.0, 1.0]), np.array([0.0]))
    for text in ("Lp:2", "Lorentz:2,2", "LorentzOsc:2", "LinfInf",
                 "BWH:2", "LqLogL:2,1", "FK:2"):
        assert evaluate(parse_norm(text), zero) == 0.0


def test_evaluate_rejects_non_rearranged_input():
    rising = StepFunction(np.array([0.0, 0.5, 1.0]), np.array([1.0, 2.0]))
    with pytest.raises(ValueError):
        evaluate(parse_norm("Lp:2"), rising)
    signed = StepFunction(np.array([0.0, 0.5, 1.0]), np.array([1.0, -1.0]))
    with pytest.raises(ValueError):
        evaluate(parse_norm("Lorentz:2,2"), signed)


def test_lorentz_oscillation_validates_exponent():
    with pytest.raises(ValueError):
        lorentz_oscillation(indicator(1.0), None, 0.0)
    with pytest.raises(ValueError):
        lorentz_oscillation(indicator(1.0), None, np.inf)


@given(st.lists(st.floats(min_value=0.0, max_value=20.0,
                          allow_nan=False, allow_infinity=False),
                min_size=2, max_size=32),
       st.floats(min_value=0.1, max_value=8.0))
@settings(max_examples=100, deadline=None)
def test_lp_positive_homogeneity(vals, scale):
    space = UnitCube(1, len(vals))
    star = decreasing_rearrangement(GridFunction(space, np.asarray(vals)))
    scaled = decreasing_rearrangement(
        GridFunction(space, scale * np.asarray(vals)))
    norm = parse_norm("Lp:2")
    assert math.isclose(evaluate(norm, scaled),
                        scale * evaluate(norm, star),
                        rel_tol=1e-10, abs_tol=1e-12)


# ---------------------------------------------------------------------------
# divergence detection
# ---------------------------------------------------------------------------


def test_classical_expression_diverges_for_indicators():
    assert classical_linf_q_diverges(indicator(0.5), 2.0)
    assert classical_linf_q_diverges(indicator(1.0), 1.0)


def test_classical_expression_zero_function():
    zero = StepFunction(np.array([0.0, 1.0]), np.array([0.0]))
    assert not classical_linf_q_diverges(zero, 2.0)
    with pytest.raises(ValueError):
        classical_linf_q_diverges(indicator(1.0), 0.0)
