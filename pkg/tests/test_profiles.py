"""Isoperimetric profiles, the inverse normal, and transference constants."""

import math

import numpy as np
import pytest
import scipy.stats

from isoperim.profiles import (
    PhiMap,
    constant_profile,
    cube_profile,
    euclidean_profile,
    gamma_transference_constant,
    gaussian_equivalence_constants,
    gaussian_profile,
    gaussian_type_check,
    norm_cdf,
    norm_ppf,
    phi_of,
    profile_from_dict,
    relative_min_profile,
    restricted_profile,
    table_profile,
    unit_ball_volume,
)


def test_unit_ball_volumes():
    assert abs(unit_ball_volume(1) - 2.0) < 1e-15
    assert abs(unit_ball_volume(2) - math.pi) < 1e-14
    assert abs(unit_ball_volume(3) - 4.0 * math.pi / 3.0) < 1e-14


# ---------------------------------------------------------------------------
# inverse normal
# ---------------------------------------------------------------------------


def test_norm_ppf_against_scipy():
    # the Newton correction flattens out where the cdf saturates, so the
    # deep complement tail is held to a looser absolute bound
    u = np.concatenate((np.geomspace(1e-9, 0.5, 200),
                        1.0 - np.geomspace(1e-9, 0.5, 200)))
    assert np.max(np.abs(norm_ppf(u) - scipy.stats.norm.ppf(u))) < 1e-8
    extreme = np.array([1e-12, 1.0 - 1e-12])
    assert np.max(np.abs(norm_ppf(extreme)
                         - scipy.stats.norm.ppf(extreme))) < 1e-7


def test_norm_cdf_ppf_round_trip():
    u = np.linspace(1e-8, 1.0 - 1e-8, 4001)
    assert np.max(np.abs(norm_cdf(norm_ppf(u)) - u)) < 1e-10


# ---------------------------------------------------------------------------
# profile families
# ---------------------------------------------------------------------------


def test_euclidean_profile_closed_form():
    p1 = euclidean_profile(1)
    assert abs(float(p1(0.3)) - 2.0) < 1e-14
    p2 = euclidean_profile(2)
    t = 0.17
    assert abs(float(p2(t)) - 2.0 * math.sqrt(math.pi * t)) < 1e-12


def test_gaussian_profile_matches_reference_density():
    gp = gaussian_profile()
    t = np.array([1e-6, 0.01, 0.25, 0.5, 0.75, 1.0 - 1e-6])
    ref = scipy.stats.norm.pdf(scipy.stats.norm.ppf(t))
    assert np.max(np.abs(np.asarray(gp(t)) - ref)) < 1e-12
    assert abs(float(gp(0.5)) - 1.0 / math.sqrt(2.0 * math.pi)) < 1e-14


def test_gaussian_profile_symmetry_and_flags():
    gp = gaussian_profile()
    assert gp.is_concave and gp.is_symmetric_about_half and gp.zero_at_zero
    assert not gp.lower_bound_only
    t = np.linspace(1e-9, 0.5, 999)
    assert np.max(np.abs(np.asarray(gp(t)) - np.asarray(gp(1.0 - t)))) \
        < 1e-12


def test_profile_domain_is_open():
    gp = gaussian_profile()
    for bad in (0.0, 1.0, -0.2, 1.3):
        with pytest.raises(ValueError):
            gp(bad)
    cp = constant_profile(2.0, mass=3.0)
    assert float(cp(2.9)) == 2.0
    with pytest.raises(ValueError):
        cp(3.0)


def test_cube_profile_is_a_lower_bound_surrogate():
    cp = cube_profile(2)
    assert cp.lower_bound_only
    assert cp.is_symmetric_about_half
    t = np.linspace(0.01, 0.99, 99)
    vals = np.asarray(cp(t))
    assert np.all(vals > 0) and np.all(np.isfinite(vals))


def test_relative_min_profile_of_the_interval_is_two():
    """min(t, 1-t)^(1-1/n) with n = 1 kills the exponent: the relative
    Euclidean profile of the unit interval is the constant 2."""
    rp = relative_min_profile(euclidean_profile(1), 1.0)
    for t in (0.01, 0.3, 0.5, 0.77, 0.99):
        assert abs(float(rp(t)) - 2.0) < 1e-13


def test_restricted_profile_window():
    rp = restricted_profile(euclidean_profile(2), 0.5)
    assert rp.mass == 0.5
    assert abs(float(rp(0.2)) - float(euclidean_profile(2)(0.2))) < 1e-14
    with pytest.raises(ValueError):
        rp(0.6)


def test_table_profile_interpolates_nodes():
    ts = np.array([0.1, 0.3, 0.5, 0.7, 0.9])
    Is = np.array([0.5, 0.9, 1.0, 0.9, 0.5])
    tp = table_profile(ts, Is, mass=1.0)
    for t, I in zip(ts, Is):
        assert abs(float(tp(t)) - I) < 1e-12
    # monotone-cubic between nodes stays inside the bracket and keeps
    # the data's symmetry
    assert 0.9 <= float(tp(0.4)) <= 1.0
    assert abs(float(tp(0.4)) - float(tp(0.6))) < 1e-12


def test_profile_dict_round_trip():
    for prof in (euclidean_profile(3), gaussian_profile(), cube_profile(2),
                 constant_profile(1.5, mass=2.0),
                 relative_min_profile(euclidean_profile(2), 1.0),
                 restricted_profile(gaussian_profile(), 0.5)):
        back = profile_from_dict(prof.to_dict())
        assert back.label == prof.label
        t = 0.3 * min(1.0, prof.mass)
        assert abs(float(back(t)) - float(prof(t))) < 1e-13


# ---------------------------------------------------------------------------
# phi maps and Gaussian structure
# ---------------------------------------------------------------------------


def test_phi_of_gaussian_is_monotone():
    phi = phi_of(gaussian_profile())
    assert isinstance(phi, PhiMap)
    assert phi.nondecreasing
    t = np.geomspace(1e-6, 0.5, 200)
    vals = np.asarray(phi(t))
    assert np.all(np.diff(vals) >= -1e-15)
    assert abs(float(phi(0.25)) - 0.25 / float(gaussian_profile()(0.25))) \
        < 1e-14


def test_gaussian_type_margin():
    # I_gamma dips below t sqrt(log 1/t) near 1/2; the margin is pinned
    ok, margin = gaussian_type_check(gaussian_profile(), 1.0)
    assert not ok
    assert abs(margin - 0.9583570261391534) < 1e-9
    ok_low, margin_low = gaussian_type_check(gaussian_profile(), 0.9)
    assert ok_low
    assert abs(margin_low - margin / 0.9) < 1e-12


def test_gaussian_equivalence_constants_pinned():
    c_lo, c_hi = gaussian_equivalence_constants(1e-6, 0.4)
    assert abs(c_lo - 1.00901096371204) < 1e-9
    assert abs(c_hi - 1.3312984413303637) < 1e-9
    with pytest.raises(ValueError):
        gaussian_equivalence_constants(0.3, 0.2)
    with pytest.raises(ValueError):
        gaussian_equivalence_constants(0.0, 0.4)


def test_gamma_transference_matches_gamma_function():
    for n in range(1, 9):
        quad = gamma_transference_constant(n)
        exact = math.exp(math.lgamma(1.0 + n / 2.0) / n) / math.sqrt(n)
        assert abs(quad - exact) / exact < 1e-6
    with pytest.raises(ValueError):
        gamma_transference_constant(0)
