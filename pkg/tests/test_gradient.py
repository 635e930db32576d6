"""Finite-difference moduli and perimeter estimates."""

import math

import numpy as np
import pytest
import scipy.stats

from isoperim.gradient import (
    ModulusTable,
    gradient_modulus,
    isoperimetric_check,
    kth_derivative_modulus,
    minkowski_content,
    modulus_of_continuity,
)
from isoperim.measure import GaussianLine, GridFunction, UnitCube
from isoperim.profiles import constant_profile, gaussian_profile


# ---------------------------------------------------------------------------
# first-order modulus
# ---------------------------------------------------------------------------


def test_gradient_of_linear_function_1d():
    space = UnitCube(1, 64)
    f = GridFunction(space, 3.0 * space.centers[:, 0])
    assert np.allclose(gradient_modulus(f).values, 3.0)


def test_gradient_is_axiswise_max():
    # x + 2y has per-axis rates 1 and 2; the modulus takes the larger
    space = UnitCube(2, 16)
    f = GridFunction(space, space.centers[:, 0] + 2.0 * space.centers[:, 1])
    assert np.allclose(gradient_modulus(f).values, 2.0)


def test_gradient_of_constant_is_zero():
    space = UnitCube(2, 8)
    f = GridFunction(space, np.full(64, 5.0))
    assert np.all(gradient_modulus(f).values == 0.0)


def test_gradient_on_gaussian_line_uses_cell_distances():
    space = GaussianLine(128)
    f = GridFunction(space, space.centers[:, 0])
    assert np.allclose(gradient_modulus(f).values, 1.0, atol=1e-12)


# ---------------------------------------------------------------------------
# higher derivatives
# ---------------------------------------------------------------------------


def test_second_difference_of_quadratic_is_exact():
    space = UnitCube(1, 128)
    x = space.centers[:, 0]
    f = GridFunction(space, x * x / 2.0)
    d2 = kth_derivative_modulus(f, 2)
    assert np.allclose(d2.values, 1.0, atol=1e-9)


def test_third_difference_of_cubic_is_exact():
    space = UnitCube(1, 128)
    x = space.centers[:, 0]
    f = GridFunction(space, x ** 3)
    d3 = kth_derivative_modulus(f, 3)
    assert np.allclose(d3.values, 6.0, atol=1e-7)


def test_mixed_second_differences_combine():
    space = UnitCube(2, 32)
    x, y = space.centers[:, 0], space.centers[:, 1]
    f = GridFunction(space, x * x / 2.0 + y * y / 2.0)
    assert np.allclose(kth_derivative_modulus(f, 2, "l2").values,
                       math.sqrt(2.0), atol=1e-8)
    assert np.allclose(kth_derivative_modulus(f, 2, "l1").values, 2.0,
                       atol=1e-8)
    assert np.allclose(kth_derivative_modulus(f, 2, "linf").values, 1.0,
                       atol=1e-8)
    g = GridFunction(space, x * y)
    assert np.allclose(kth_derivative_modulus(g, 2, "linf").values, 1.0,
                       atol=1e-8)


def test_kth_difference_preconditions():
    space = UnitCube(1, 16)
    f = GridFunction(space, space.centers[:, 0])
    with pytest.raises(ValueError):
        kth_derivative_modulus(f, 0)
    with pytest.raises(ValueError):
        kth_derivative_modulus(f, 8)  # resolution too small
    with pytest.raises(ValueError):
        kth_derivative_modulus(f, 2, combine="sup")
    gl = GaussianLine(64)
    with pytest.raises(ValueError):
        kth_derivative_modulus(GridFunction(gl, gl.centers[:, 0]), 2)


# ---------------------------------------------------------------------------
# modulus of continuity
# ---------------------------------------------------------------------------


def test_modulus_of_linear_function_snaps_to_grid_shifts():
    space = UnitCube(1, 256)
    f = GridFunction(space, space.centers[:, 0])
    # rms difference at lattice shift k/r is exactly k/r
    assert abs(modulus_of_continuity(f, 0.25, 2.0) - 0.25) < 1e-12
    assert abs(modulus_of_continuity(f, 0.2501, 2.0) - 0.25) < 1e-12


def test_modulus_table_is_monotone_and_matches_scalar():
    space = UnitCube(2, 24)
    rng = np.random.default_rng(3)
    f = GridFunction(space, rng.random(space.ncells))
    table = ModulusTable(f, p=2.0, tau_max=0.5)
    assert table.size > 0
    ts = np.array([0.1, 0.2, 0.4])
    vals = table.at(ts)
    assert np.all(np.diff(vals) >= -1e-12)
    for t, v in zip(ts, vals):
        assert abs(v - modulus_of_continuity(f, t, 2.0)) < 1e-10


def test_modulus_direct_path_agrees_with_fft_on_small_grid():
    space = UnitCube(1, 32)
    rng = np.random.default_rng(11)
    f = GridFunction(space, rng.random(32))
    fft_val = modulus_of_continuity(f, 0.3, 2.0)
    direct = ModulusTable(f, p=2.0 + 1e-12, tau_max=0.5).at(0.3)
    assert abs(float(direct) - fft_val) < 1e-8


# ---------------------------------------------------------------------------
# perimeter
# ---------------------------------------------------------------------------


def test_interval_perimeter_is_two():
    space = UnitCube(1, 256)
    x = space.centers[:, 0]
    est = minkowski_content((x > 0.25) & (x < 0.75), space)
    assert abs(est.mass - 0.5) < 1e-12
    assert abs(est.value - 2.0) < 1e-9


def test_half_space_perimeter_in_2d():
    space = UnitCube(2, 64)
    est = minkowski_content(space.centers[:, 0] < 0.5, space)
    assert abs(est.mass - 0.5) < 1e-12
    assert abs(est.value - 1.0) < 0.05


def test_gaussian_half_line_content_matches_density():
    space = GaussianLine(512)
    est = minkowski_content(space.centers[:, 0] < 0.0, space)
    want = float(scipy.stats.norm.pdf(0.0))
    assert abs(est.mass - 0.5) < 1e-3
    assert abs(est.value - want) < 1e-3


def test_isoperimetric_check_on_half_spaces():
    space = UnitCube(1, 256)
    rep = isoperimetric_check(space.centers[:, 0] < 0.5, space,
                              constant_profile(1.0))
    assert rep.verdict.passed
    gl = GaussianLine(512)
    rep2 = isoperimetric_check(gl.centers[:, 0] < 0.0, gl,
                               gaussian_profile())
    assert rep2.verdict.passed
    # half-lines are extremal for the Gaussian profile: ratio near 1
    assert abs(rep2.verdict.constant - 1.0) < 0.02


def test_isoperimetric_check_skips_degenerate_masks():
    space = UnitCube(1, 64)
    rep = isoperimetric_check(np.zeros(64, dtype=bool), space,
                              constant_profile(1.0))
    assert rep.verdict.kind == "skipped"


def test_minkowski_content_validates_mask_shape():
    space = UnitCube(1, 64)
    with pytest.raises(ValueError):
        minkowski_content(np.zeros(8, dtype=bool), space)
