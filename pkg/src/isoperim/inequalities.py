"""Numerical verification of pointwise rearrangement inequalities.

Every ``verify_*`` operation samples both sides of one inequality (or
identity) on a t-grid and returns a :class:`VerificationReport`.  Three
conventions are shared across the module:

* evaluation grids are geometric and, for pointwise checks that read
  step values of a rearrangement, snapped to step midpoints, where the
  discretized rearrangement is unambiguous;
* inequalities whose constant is explicit (1, ``2^((k+1)/p-1)``,
  ``1/(k-1)!``) are pass/fail against that constant with multiplicative
  tolerance ``1 + 1e-3 + (cell mass)/t``; inequalities with an
  unspecified constant report it and pass on finiteness, with
  refinement stability asserted by the test suite;
* ratios follow the 0/0 -> 0 convention, so constant inputs always
  produce an empirical constant of exactly 0.
"""

from __future__ import annotations

import math

import numpy as np

from .gradient import ModulusTable, gradient_modulus, kth_derivative_modulus
from .measure import (
    GridFunction,
    StepFunction,
    decreasing_rearrangement,
    maximal_average,
    profile_level_integral,
    signed_rearrangement,
    support_measure,
    truncation,
)
from .norms import _oscillation_constants, evaluate
from .profiles import PhiMap, Profile, constant_profile, phi_of
from .quadrature import (
    gauss_segment_values,
    gauss_segments,
    integrate_dt,
    integrate_dt_over_t,
    log_grid,
)
from .reports import (
    VerificationReport,
    empirical_constant,
    explicit_verdict,
    identity_verdict,
    ratio_array,
    reported_verdict,
    skipped_verdict,
)

__all__ = [
    "snapped_tgrid",
    "cell_slack",
    "verify_oscillation",
    "verify_coulhon_pointwise",
    "verify_coulhon",
    "verify_mazya_talenti",
    "verify_polya_szego",
    "verify_bobkov_houdre",
    "truncation_identity_check",
    "verify_self_improvement",
    "hardy_operator",
    "poincare_identity_check",
    "poincare_chain_check",
    "verify_oscillation_modulus",
    "verify_garsia",
    "morrey_holder_check",
    "verify_higher_order",
    "verify_transference",
]

_trapezoid = getattr(np, "trapezoid", None) or np.trapz

DEFAULT_POINTS = 48
_NESTED_CUTOFFS = (1e-3, 1e-6, 1e-9)


# ---------------------------------------------------------------------------
# grids and tolerances
# ---------------------------------------------------------------------------


def snapped_tgrid(star: StepFunction, lo: float, hi: float,
                  points: int = DEFAULT_POINTS) -> np.ndarray:
    """Geometric grid on [lo, hi] snapped to the step midpoints of ``star``.

    Midpoints are the centers of the constancy intervals, where the
    rearranged step value, the running average and backward differences
    are all well defined.  Grid points beyond the support keep their raw
    position (the step value is 0 there and the average decays exactly).
    """
    if not (0.0 < lo < hi):
        raise ValueError(f"need 0 < lo < hi, got [{lo}, {hi}]")
    raw = np.geomspace(lo, hi, points)
    mids = star.step_midpoints()
    pos = np.searchsorted(mids, raw)
    left = np.clip(pos - 1, 0, mids.size - 1)
    right = np.clip(pos, 0, mids.size - 1)
    snap = np.where(np.abs(mids[right] - raw) <= np.abs(raw - mids[left]),
                    mids[right], mids[left])
    out = np.unique(np.where(raw <= mids[-1], snap, raw))
    out = out[out <= hi]
    if out.size == 0:
        out = np.array([hi])
    return out


def cell_slack(space, tgrid) -> np.ndarray:
    """Multiplicative tolerance at scale ``t``: ``1e-3 + w_max / t``.

    Below a single cell mass the discretized rearrangement cannot
    resolve the inequality, so the allowance grows like one cell over t.
    """
    w = float(np.max(space.weights))
    return 1e-3 + w / np.asarray(tgrid, dtype=float)


def _scalar_report(inequality, label, lhs, rhs, verdict, metadata):
    meta = dict(metadata)
    meta["scalar"] = True
    return VerificationReport(inequality, label, np.array([0.0]),
                              np.array([float(lhs)]), np.array([float(rhs)]),
                              verdict, meta)


# ---------------------------------------------------------------------------
# oscillation inequality and its L^p form
# ---------------------------------------------------------------------------


def _phi_pointwise(f, phi, p, constant, inequality, t_min, points, label,
                   extra=None):
    space = f.space
    mass = space.total_mass
    star = decreasing_rearrangement(f)
    gstar = decreasing_rearrangement(gradient_modulus(f))
    lo = 1e-6 * mass if t_min is None else float(t_min)
    tgrid = snapped_tgrid(star, lo, mass - min(lo, 1e-6 * mass), points)
    ip = 1.0 / p
    favg = maximal_average(star.restrict_power(p))
    gavg = maximal_average(gstar.restrict_power(p))
    lhs = favg.value(tgrid) ** ip - star.value(tgrid)
    rhs = np.asarray(phi(tgrid), dtype=float) * gavg.value(tgrid) ** ip
    verdict = explicit_verdict(tgrid, lhs, rhs, constant,
                               cell_slack(space, tgrid))
    meta = {"p": p, "constant": constant, "points": int(tgrid.size)}
    if isinstance(phi, PhiMap):
        meta["profile"] = phi.profile.label
        meta["phi_nondecreasing"] = phi.nondecreasing
        meta["lower_bound_only"] = phi.profile.lower_bound_only
    if extra:
        meta.update(extra)
    return VerificationReport(inequality, label, tgrid, lhs, rhs, verdict,
                              meta)


def verify_oscillation(f: GridFunction, profile, *, t_min=None,
                       points: int = DEFAULT_POINTS,
                       label: str = "") -> VerificationReport:
    """Pointwise oscillation bound ``f**(t) - f*(t) <= (t/I(t)) |grad f|**(t)``.

    ``profile`` may be a :class:`Profile` (the map ``t/I(t)`` is built
    from it) or a ready-made callable ``phi``.
    """
    phi = phi_of(profile) if isinstance(profile, Profile) else profile
    return _phi_pointwise(f, phi, 1.0, 1.0, "oscillation", t_min, points,
                          label)


def verify_coulhon_pointwise(f: GridFunction, phi, p: float, *, t_min=None,
                             points: int = DEFAULT_POINTS,
                             label: str = "") -> VerificationReport:
    """L^p self-improved oscillation bound with constant ``2^((k+1)/p - 1)``.

    ``k`` is the integer with ``k < p <= k + 1``; both sides are the
    theorem's displays with ``f_(p)* = (f*)^p``.  At ``p = 1`` the code
    path is the same as :func:`verify_oscillation`, so the two reports
    agree bitwise.
    """
    if not (np.isfinite(p) and p >= 1.0):
        raise ValueError("need 1 <= p < inf")
    if isinstance(phi, Profile):
        phi = phi_of(phi)
    k = math.ceil(p) - 1
    constant = 2.0 ** ((k + 1) / p - 1.0)
    return _phi_pointwise(f, phi, float(p), constant, "coulhon-pointwise",
                          t_min, points, label, extra={"k": k})


def verify_coulhon(f: GridFunction, phi, p: float = 1.0, *,
                   label: str = "") -> VerificationReport:
    """Global inequality ``||f||_p <= phi(||f||_0) ||grad f||_p``.

    ``||f||_0`` is the support measure.  The constant is explicit (1)
    only at ``p = 1``; other exponents are report-only.
    """
    if not (np.isfinite(p) and p >= 1.0):
        raise ValueError("need 1 <= p < inf")
    if isinstance(phi, Profile):
        phi = phi_of(phi)
    supp = support_measure(f)
    lhs = f.lp_norm(p)
    if supp == 0.0:
        verdict = explicit_verdict(np.array([0.0]), [0.0], [0.0], 1.0, 1e-3)
        return _scalar_report("coulhon", label, 0.0, 0.0, verdict,
                              {"p": p, "support": 0.0})
    gnorm = gradient_modulus(f).lp_norm(p)
    meta = {"p": p, "support": supp, "gradient_norm": gnorm}
    if gnorm == 0.0 and lhs > 0.0:
        # nonzero constant function: the display degenerates to 0 * phi(M)
        verdict = skipped_verdict("gradient vanishes on a nonzero function")
        return _scalar_report("coulhon", label, lhs, 0.0, verdict, meta)
    # phi is nondecreasing, so stepping the argument just inside the
    # profile domain (where I may vanish) only makes the check stricter
    mass = phi.profile.mass
    if np.isfinite(mass):
        supp_eval = min(supp, mass * (1.0 - 1e-12))
    else:
        supp_eval = supp
    rhs = float(phi(supp_eval)) * gnorm
    if p == 1.0:
        verdict = explicit_verdict(np.array([0.0]), [lhs], [rhs], 1.0, 1e-3)
    else:
        verdict = reported_verdict(empirical_constant([lhs], [rhs]),
                                   "report-only for p > 1")
        meta["normative"] = False
    return _scalar_report("coulhon", label, lhs, rhs, verdict, meta)


# ---------------------------------------------------------------------------
# level-set pipeline: Mazya-Talenti and Polya-Szego forms
# ---------------------------------------------------------------------------


def _level_groups(f: GridFunction):
    """Cells of ``|f|`` sorted into value groups.

    Returns ``(t, v, gmass)``: cumulative measures at the group
    boundaries, the decreasing group values, and the gradient mass
    ``sum |grad f| w`` collected per group.  Ordering matches
    :func:`decreasing_rearrangement`.  Values closer than float noise
    (1e-9 of the range) are merged: symmetric functions on symmetric
    grids produce value pairs that differ only in rounding, and keeping
    them separate would assign each pair's whole value drop to half its
    true band width.
    """
    a = np.abs(f.values)
    gw = gradient_modulus(f).values * f.space.weights
    order = np.lexsort((np.arange(a.size), -a))
    av = a[order]
    wv = f.space.weights[order]
    gv = gw[order]
    tol = 1e-9 * float(av[0] - av[-1])
    idx = np.nonzero(np.concatenate(([True],
                                     av[:-1] - av[1:] > tol)))[0]
    v = av[idx]
    t = np.cumsum(np.add.reduceat(wv, idx))
    gmass = np.add.reduceat(gv, idx)
    return t, v, gmass


def verify_mazya_talenti(f: GridFunction, profile: Profile, *,
                         t_min=None, points: int = DEFAULT_POINTS,
                         label: str = "") -> VerificationReport:
    """Level-band derivative bound ``I(t) (-f*)'(t) <= (d/dt) int |grad f|``.

    Both derivatives are backward differences on the breakpoint mesh of
    ``f*``: the value drop of the j-th band and its gradient mass, each
    divided by the band width, giving two step functions of t.  Both are
    sampled at band midpoints nearest to a geometric t-grid.  The final
    drop to zero is an artifact when the support fills the whole space
    and is excluded.

    The continuum constant is 1, but the per-band pairing does not
    localize for scattered level sets (the band's gradient mass sits in
    single cells while the set boundary can be long), so the verdict
    reports the empirical constant; refinement stability is asserted by
    the test suite.
    """
    space = f.space
    mass = space.total_mass
    t, v, gmass = _level_groups(f)
    delta = np.diff(np.concatenate(([0.0], t)))
    vnext = np.concatenate((v[1:], [0.0]))
    keep = t < mass * (1.0 - 1e-12)
    if np.any(keep):
        mids = (t - delta / 2.0)[keep]
        lo = 1e-6 * mass if t_min is None else float(t_min)
        raw = np.geomspace(min(lo, mids[-1]), mids[-1], points)
        pos = np.searchsorted(mids, raw)
        left = np.clip(pos - 1, 0, mids.size - 1)
        right = np.clip(pos, 0, mids.size - 1)
        pick = np.unique(np.where(
            np.abs(mids[right] - raw) <= np.abs(raw - mids[left]),
            right, left))
        tg = mids[pick]
        lhs = np.asarray(profile(tg), dtype=float) \
            * (v - vnext)[keep][pick] / delta[keep][pick]
        rhs = gmass[keep][pick] / delta[keep][pick]
    else:
        tg = np.array([mass / 2.0])
        lhs = rhs = np.zeros(1)
    verdict = reported_verdict(empirical_constant(lhs, rhs))
    meta = {"groups": int(v.size), "points": int(tg.size),
            "profile": profile.label,
            "lower_bound_only": profile.lower_bound_only,
            "full_support_group_excluded": bool(not np.all(keep))}
    return VerificationReport("mazya-talenti", label, tg, lhs, rhs, verdict,
                              meta)


def verify_polya_szego(f: GridFunction, profile: Profile, *, t_min=None,
                       points: int = DEFAULT_POINTS,
                       label: str = "") -> VerificationReport:
    """Integrated symmetrization bound ``int_0^t (I (-f*)')* <= int_0^t |grad f|*``.

    The inner rearrangement of the product ``I(s) (-f*)'(s)`` is taken
    with respect to Lebesgue measure on the breakpoint mesh: the step
    pieces are sorted by value with their widths and accumulated
    exactly.
    """
    space = f.space
    mass = space.total_mass
    gstar = decreasing_rearrangement(gradient_modulus(f))
    lo = 1e-6 * mass if t_min is None else float(t_min)
    tg = snapped_tgrid(gstar, lo, mass - min(lo, 1e-6 * mass), points)
    t, v, gmass = _level_groups(f)
    delta = np.diff(np.concatenate(([0.0], t)))
    vnext = np.concatenate((v[1:], [0.0]))
    keep = t < mass * (1.0 - 1e-12)
    if np.any(keep):
        pieces = np.asarray(profile(t[keep]), dtype=float) \
            * (v - vnext)[keep] / delta[keep]
        widths = delta[keep]
        order = np.argsort(-pieces, kind="stable")
        pstar = StepFunction(
            np.concatenate(([0.0], np.cumsum(widths[order]))), pieces[order])
        lhs = pstar.integral_to(tg)
    else:
        lhs = np.zeros(tg.size)
    rhs = gstar.integral_to(tg)
    verdict = explicit_verdict(tg, lhs, rhs, 1.0, cell_slack(space, tg))
    meta = {"profile": profile.label,
            "lower_bound_only": profile.lower_bound_only}
    return VerificationReport("polya-szego", label, tg, lhs, rhs, verdict,
                              meta)


# ---------------------------------------------------------------------------
# Bobkov-Houdre coarea comparison
# ---------------------------------------------------------------------------


def _boundary_clamped(profile: Profile):
    """Profile evaluator extended by 0 at mass 0 and full mass.

    The perimeter of the empty set and of the whole space vanishes, so
    the level integral must see 0 there even for profiles (like the
    constant lower bound) whose interior values do not tend to 0.
    """
    mass = profile.mass

    def I(m):
        m = np.atleast_1d(np.asarray(m, dtype=float))
        out = np.zeros(m.shape)
        inside = m > 0.0
        if np.isfinite(mass):
            inside &= np.abs(mass - m) > 1e-12 * mass
            inside &= m < mass
        if np.any(inside):
            out[inside] = np.asarray(profile(m[inside]), dtype=float)
        return out

    return I


def verify_bobkov_houdre(f: GridFunction, profile: Profile, *,
                         label: str = "") -> VerificationReport:
    """Coarea comparison ``int_0^inf I(mu_f(s)) ds <= || |grad f| ||_1``.

    The left side is an exact finite sum over the value steps of ``f``;
    the right side is the weighted cell sum of the gradient modulus.
    """
    lhs = profile_level_integral(f, _boundary_clamped(profile))
    rhs = gradient_modulus(f).abs_integral()
    verdict = explicit_verdict(np.array([0.0]), [lhs], [rhs], 1.0, 1e-3)
    meta = {"profile": profile.label, "support": support_measure(f),
            "lower_bound_only": profile.lower_bound_only}
    return _scalar_report("bobkov-houdre", label, lhs, rhs, verdict, meta)


# ---------------------------------------------------------------------------
# truncation identities
# ---------------------------------------------------------------------------


def truncation_identity_check(f, t: float, *, tol: float = 1e-10,
                              label: str = "") -> VerificationReport:
    """The three truncation facts at level ``lambda = f*(t)``.

    For the truncated part ``u = (|f| - lambda)_+``: (a) its support
    measure is at most ``t``; (b) its gradient mass equals the gradient
    mass of ``f`` over ``{|f| > lambda}``; (c) its integral equals
    ``t (f**(t) - f*(t))``.

    Fact (b) uses the chain-rule convention ``|grad u| = |grad f|`` on
    ``{|f| > lambda}`` and 0 elsewhere, under which the discrete sum is
    exact by construction; the neighbor-difference gradient of the
    truncated sample itself differs in the boundary cells, and its raw
    value is recorded in the metadata for comparison.  Accepts either a
    grid function or a rearranged step function (facts (a) and (c)).
    """
    if isinstance(f, StepFunction):
        star = f
        lam = float(star.value(t))
        supp = star.measure_above(lam)
        widths = np.diff(star.breakpoints)
        l1 = float(np.dot(np.maximum(star.values - lam, 0.0), widths))
        rhs1 = float(t * maximal_average(star).oscillation(t))
        eps = abs(l1 - rhs1)
        meta = {"mode": "step", "level": lam, "support_of_truncation": supp}
    else:
        star = decreasing_rearrangement(f)
        lam = float(star.value(t))
        trunc = truncation(f, lam, unbounded=True)
        supp = support_measure(trunc)
        l1 = trunc.abs_integral()
        rhs1 = float(t * maximal_average(star).oscillation(t))
        gvals = gradient_modulus(f).values * f.space.weights
        mask = np.abs(f.values) > lam
        masked = math.fsum(gvals[mask].tolist())
        raw = gradient_modulus(trunc).abs_integral()
        eps = abs(l1 - rhs1)
        meta = {"mode": "grid", "level": lam, "support_of_truncation": supp,
                "masked_gradient_mass": masked,
                "raw_truncated_gradient_mass": raw,
                "truncation_boundary_gap": abs(raw - masked)}
    scale = star.total_length
    if supp > t * (1.0 + 1e-12) + 1e-15 * scale:
        verdict = explicit_verdict(np.array([t]), [supp], [t], 1.0, 1e-12)
    else:
        verdict = identity_verdict([l1], [rhs1], tol)
    return VerificationReport("truncation-identities", label, np.array([t]),
                              np.array([l1]), np.array([rhs1]), verdict, meta)


# ---------------------------------------------------------------------------
# Hardy isoperimetric operator and Poincare forms
# ---------------------------------------------------------------------------


def hardy_operator(g, profile: Profile, *, edges=None):
    """The operator ``Q(t) = int_t^{1/2} g(s) / I(s) ds`` on ``(0, 1/2)``.

    ``g`` is a step function or a vectorized callable; values of ``g``
    beyond 1/2 never enter.  Integration uses per-segment Gauss rules on
    ``edges`` (the step breakpoints by default, a log grid clamped at
    1e-10 for callables), with the tail sums accumulated once; the
    returned callable evaluates in a partial segment plus a suffix and
    is 0 on ``[1/2, 1)``.
    """
    if not np.isfinite(profile.mass) or abs(profile.mass - 1.0) > 1e-9:
        raise ValueError("the Hardy operator needs a probability profile")
    gv = g.value if isinstance(g, StepFunction) else g
    if edges is None:
        if isinstance(g, StepFunction):
            edges = g.breakpoints
        else:
            edges = log_grid(1e-10, 0.5, 2049)
    e = np.asarray(edges, dtype=float)
    e = np.unique(e[(e > 0.0) & (e <= 0.5)])
    if e.size == 0 or e[-1] < 0.5:
        e = np.append(e, 0.5)

    def integrand(s):
        s = np.asarray(s, dtype=float)
        return np.asarray(gv(s), dtype=float) \
            / np.asarray(profile(s), dtype=float)

    seg = gauss_segment_values(integrand, e)
    suffix = np.concatenate((np.cumsum(seg[::-1])[::-1], [0.0]))

    def Q(t):
        ts = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.zeros(ts.shape)
        for i, ti in enumerate(ts):
            if ti >= 0.5:
                continue
            x = max(float(ti), float(e[0]))
            j = int(np.searchsorted(e, x, side="right")) - 1
            j = min(max(j, 0), e.size - 2)
            out[i] = suffix[j + 1] + float(
                gauss_segment_values(integrand, np.array([x, e[j + 1]]))[0])
        t = np.asarray(t, dtype=float)
        return out.reshape(t.shape) if t.ndim else float(out[0])

    return Q


def poincare_identity_check(f: GridFunction, profile: Profile | None = None,
                            *, t_min=None, tol: float = 1e-6,
                            label: str = "") -> VerificationReport:
    """Exact representation ``g*(t) - g*(1/2) = Q(I * (-g*)')(t)``.

    ``g*`` is the signed rearrangement.  Its derivative is spread as a
    step function over the interval preceding each drop, and the profile
    cancels nodewise inside the operator, which makes the result
    profile-independent to rounding.  Both sides are evaluated at the
    rearrangement breakpoints in ``(t_min, 1/2]``.
    """
    space = f.space
    if abs(space.total_mass - 1.0) > 1e-9:
        raise ValueError("Poincare identity needs a probability space")
    if profile is None:
        profile = constant_profile(1.0)
    gs = signed_rearrangement(f)
    bp = gs.breakpoints
    vals = gs.values
    dvals = np.zeros(vals.size)
    if vals.size > 1:
        dvals[:-1] = (vals[:-1] - vals[1:]) / np.diff(bp)[:-1]
    dstep = StepFunction(bp, dvals)

    def weighted_drop(s):
        return np.asarray(profile(s), dtype=float) * dstep.value(s)

    Q = hardy_operator(weighted_drop, profile, edges=bp)
    lo = 1e-6 if t_min is None else float(t_min)
    tg = bp[(bp >= lo) & (bp <= 0.5)]
    if tg.size == 0:
        tg = np.array([0.25])
    lhs = np.atleast_1d(gs.value(tg)) - float(gs.value(0.5))
    rhs = np.atleast_1d(Q(tg))
    verdict = identity_verdict(lhs, rhs, tol)
    meta = {"profile": profile.label, "median_value": gs.median_value(),
            "value_at_half": float(gs.value(0.5)), "points": int(tg.size)}
    return VerificationReport("poincare-identity", label, tg, lhs, rhs,
                              verdict, meta)


_POWER_ALPHAS = (-0.5, -0.25, 0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0)


def _lp_on_half_interval(fn, p, lo=1e-7, nodes=513) -> float:
    """``L^p(0, 1/2)`` norm of a vectorized callable by log quadrature."""
    val = integrate_dt(lambda t: np.asarray(fn(t), dtype=float) ** p,
                       lo, 0.5, nodes)
    return val ** (1.0 / p)


def _chain_family(profile: Profile):
    """The fixed 50-member family for the operator lower bound.

    Left indicators, right indicators pushed against 1/2 (which carry
    the mass for Hardy-type suprema), a ladder of power functions, and
    the profile itself.
    """
    members = []
    for a in np.geomspace(1e-3, 0.499, 20):
        step = StepFunction([0.0, float(a)], [1.0])
        members.append((f"chi(0,{a:.4g})", step,
                        lambda p, a=float(a): a ** (1.0 / p)))
    for b in 0.5 - np.geomspace(5e-4, 0.25, 19):
        step = StepFunction([0.0, float(b), 0.5], [0.0, 1.0])
        members.append((f"chi({b:.4g},1/2)", step,
                        lambda p, b=float(b): (0.5 - b) ** (1.0 / p)))
    for al in _POWER_ALPHAS:
        def fn(s, al=al):
            s = np.asarray(s, dtype=float)
            return np.where(s < 0.5, s ** al, 0.0)

        def nf(p, al=al):
            e = al * p + 1.0
            if e <= 1e-9:
                return np.inf
            return (0.5 ** e / e) ** (1.0 / p)

        members.append((f"power({al:g})", fn, nf))
    members.append(("profile", lambda s: np.asarray(profile(s), dtype=float),
                    lambda p: _lp_on_half_interval(profile, p)))
    return members


# keyed on the profile object itself (kept alive by the map) so the
# family sweep runs once per (profile, p) in a corpus loop
_QHAT_MEMO: dict = {}


def _operator_lower_bound(profile: Profile, p: float):
    key = (id(profile), p)
    hit = _QHAT_MEMO.get(key)
    if hit is not None:
        return hit[1:]
    qhat = 0.0
    best = ""
    ratios = []
    for name, member, norm_fn in _chain_family(profile):
        un = float(norm_fn(p))
        if not np.isfinite(un) or un <= 0.0:
            continue
        edges = member.breakpoints if isinstance(member, StepFunction) \
            else log_grid(1e-9, 0.5, 513)
        Q = hardy_operator(member, profile, edges=edges)
        ratio = _lp_on_half_interval(Q, p) / un
        ratios.append({"member": name, "ratio": float(ratio)})
        if ratio > qhat:
            qhat, best = float(ratio), name
    _QHAT_MEMO[key] = (profile, qhat, best, ratios)
    return qhat, best, ratios


def poincare_chain_check(g: GridFunction, norm, profile: Profile, *,
                         label: str = "") -> VerificationReport:
    """Poincare chain ``||g - mean(g)||_p <= 4 Q^ || |grad g| ||_p``.

    ``Q^`` is a lower bound for the operator norm of the Hardy operator
    on ``L^p(0, 1/2)``, maximized over the fixed 50-member family; the
    factor 4 absorbs the chain's unspecified absolute constants.  The
    Chebyshev step ``g*(1/2) <= 2 ||g||_1`` is recorded alongside.
    """
    if norm.kind != "Lp":
        raise ValueError("operator estimation is limited to L^p norms")
    p = float(norm.params[0])
    if not np.isfinite(p) or p < 1.0:
        raise ValueError("need a finite exponent p >= 1")
    qhat, best, ratios = _operator_lower_bound(profile, p)
    w = g.space.weights
    mean = math.fsum((g.values * w).tolist()) / math.fsum(w.tolist())
    centered = GridFunction(g.space, g.values - mean)
    lhs = evaluate(norm, decreasing_rearrangement(centered))
    rhs = evaluate(norm, decreasing_rearrangement(gradient_modulus(g)))
    verdict = explicit_verdict(np.array([0.0]), [lhs], [rhs], 4.0 * qhat,
                               1e-3)
    star = decreasing_rearrangement(g)
    cheb_lhs = float(star.value(0.5)) if star.total_length > 0.5 else 0.0
    cheb_rhs = 2.0 * g.abs_integral()
    meta = {"q_hat": qhat, "best_member": best, "family": ratios,
            "mean": mean, "p": p, "profile": profile.label,
            "chebyshev_lhs": cheb_lhs, "chebyshev_rhs": cheb_rhs,
            "chebyshev_ok": bool(cheb_lhs <= cheb_rhs * (1.0 + 1e-12))}
    return _scalar_report("poincare-chain", label, lhs, rhs, verdict, meta)


# ---------------------------------------------------------------------------
# self-improvement under a profile growth hypothesis
# ---------------------------------------------------------------------------


def _oscillation_step(star: StepFunction, mass: float) -> StepFunction:
    """Constants ``C_j`` of ``(f** - f*)(s) = C_j / s`` as a step in s,
    extended beyond the support where the oscillation is ``F(L)/s``."""
    bp, C, F_total = _oscillation_constants(star)
    if star.total_length < mass * (1.0 - 1e-15):
        return StepFunction(np.append(bp, mass), np.append(C, F_total))
    return StepFunction(bp, C)


def _osc_weighted_integral(star: StepFunction, weight, tg, mass: float):
    """``int_0^t (f** - f*)(s) weight(s) ds`` for each t, by per-segment
    Gauss rules on the breakpoint mesh (the integrand is ``C_j w(s)/s``
    on each segment)."""
    cstep = _oscillation_step(star, mass)

    def g(s):
        s = np.asarray(s, dtype=float)
        return cstep.value(s) * np.asarray(weight(s), dtype=float) / s

    tg = np.atleast_1d(np.asarray(tg, dtype=float))
    tmax = float(np.max(tg))
    edges = cstep.breakpoints[cstep.breakpoints < tmax]
    if edges.size == 0:
        edges = np.array([0.0])
    seg = gauss_segment_values(g, edges) if edges.size > 1 else np.zeros(0)
    cum = np.concatenate(([0.0], np.cumsum(seg)))
    out = np.empty(tg.size)
    for i, t in enumerate(tg):
        j = int(np.searchsorted(edges, t, side="right")) - 1
        j = min(max(j, 0), edges.size - 1)
        partial = float(gauss_segment_values(g, np.array([edges[j], t]))[0])
        out[i] = cum[j] + partial
    return out


def _osc_power_integral(star: StepFunction, e: float, tg, mass: float):
    """Exact ``int_0^t (f** - f*)(s) s^(e-1) ds`` (closed-form pieces)."""
    cstep = _oscillation_step(star, mass)
    bp = cstep.breakpoints
    C = cstep.values

    def prim(s):
        return np.log(s) if e == 0.0 else s ** e / e

    tg = np.atleast_1d(np.asarray(tg, dtype=float))
    out = np.empty(tg.size)
    lo = bp[:-1]
    hi = bp[1:]
    safe_lo = np.where(C > 0.0, np.maximum(lo, 1e-300), 1.0)
    full = np.where(C > 0.0, C * (prim(hi) - prim(safe_lo)), 0.0)
    cum = np.concatenate(([0.0], np.cumsum(full)))
    for i, t in enumerate(tg):
        j = int(np.searchsorted(bp, t, side="right")) - 1
        j = min(max(j, 0), C.size - 1)
        part = C[j] * (prim(t) - prim(max(lo[j], 1e-300))) if C[j] > 0 else 0.0
        out[i] = cum[j] + part
    return out


def verify_self_improvement(f: GridFunction, profile: Profile, *, t_min=None,
                            points: int = DEFAULT_POINTS,
                            label: str = "") -> VerificationReport:
    """Stronger integrated oscillation bound under a growth hypothesis.

    Hypothesis: ``int_t^1 (I(s)/s) ds/s <= c I(t)/t`` with ``c`` stable
    as t decreases (checked at nested cutoffs; growth beyond 20 percent
    means the hypothesis fails and the conclusion is skipped, which is
    the Gaussian case).  Conclusion: ``int_0^t (f** - f*)(s) I(s)/s ds
    <= C int_0^t |grad f|*``, with the constant reported.
    """
    mass = profile.mass
    upper = 1.0 if not np.isfinite(mass) else min(1.0, mass)
    z = log_grid(1e-10, upper * (1.0 - 1e-12), 4097)
    Iz = np.asarray(profile(z), dtype=float)
    w = Iz / z
    seg = 0.5 * (w[1:] + w[:-1]) * np.diff(np.log(z))
    G = np.concatenate((np.cumsum(seg[::-1])[::-1], [0.0]))
    c = G * z / Iz
    cs = [float(np.max(c[(z >= e) & (z <= 0.5)])) for e in _NESTED_CUTOFFS]
    growth = cs[2] / cs[0] if cs[0] > 0 else np.inf
    meta = {"hypothesis_constants": cs, "hypothesis_growth": growth,
            "cutoffs": list(_NESTED_CUTOFFS), "profile": profile.label}
    if not (np.isfinite(cs[2]) and growth <= 1.2):
        return VerificationReport(
            "self-improvement", label, np.array([0.0]), np.zeros(1),
            np.zeros(1), skipped_verdict("hypothesis not satisfied"), meta)

    star = decreasing_rearrangement(f)
    gstar = decreasing_rearrangement(gradient_modulus(f))
    lo = 1e-6 * upper if t_min is None else float(t_min)
    tg = snapped_tgrid(star, lo, upper / 2.0, points)
    lhs = _osc_weighted_integral(star, profile, tg, upper)
    rhs = np.atleast_1d(gstar.integral_to(tg))
    verdict = reported_verdict(empirical_constant(lhs, rhs))

    # middle term of the display: the Lebesgue rearrangement of
    # (I(s)/s)(f** - f*)(s), sampled uniformly and accumulated
    ss = np.linspace(upper / 2048.0, upper * (1.0 - 1e-9), 2048)
    wvals = maximal_average(star).oscillation(ss) \
        * np.asarray(profile(ss), dtype=float) / ss
    dec = np.sort(wvals)[::-1]
    cumw = np.concatenate(([0.0], np.cumsum(dec * (upper / 2048.0))))
    posw = np.linspace(0.0, upper, 2049)
    meta["middle_term"] = np.interp(tg, posw, cumw).tolist()
    meta["hypothesis_constant"] = cs[2]
    if profile.spec.get("kind") == "euclidean":
        n = int(profile.spec["n"])
        spec_lhs = _osc_power_integral(star, 1.0 - 1.0 / n, tg, upper)
        meta["euclidean_specialization_n"] = n
        meta["euclidean_specialization_constant"] = \
            empirical_constant(spec_lhs, rhs)
    return VerificationReport("self-improvement", label, tg, lhs, rhs,
                              verdict, meta)


# ---------------------------------------------------------------------------
# modulus-of-continuity forms on the cube
# ---------------------------------------------------------------------------


def _require_cube(f: GridFunction, op: str):
    if f.space.kind != "unit_cube":
        raise ValueError(f"{op} runs on the unit cube")
    return f.space.dimension, f.space.shape[0]


def verify_oscillation_modulus(f: GridFunction, p: float, *, t_min=None,
                               points: int = DEFAULT_POINTS,
                               label: str = "") -> VerificationReport:
    """Oscillation against the L^p modulus: ``f** - f* <= c w(t^(1/n))/t^(1/p)``.

    The grid is clamped above one cell volume, below which the shift
    modulus has no lattice vectors to see.  The constant is unspecified;
    the verdict is finiteness.
    """
    n, r = _require_cube(f, "the modulus oscillation check")
    lo = max(1e-6 if t_min is None else float(t_min),
             float(r) ** (-n) * (1.0 + 1e-9))
    tg = np.geomspace(lo, 0.5, points)
    star = decreasing_rearrangement(f)
    lhs = maximal_average(star).oscillation(tg)
    table = ModulusTable(f, p=p, tau_max=0.5 ** (1.0 / n) * (1.0 + 1e-12))
    rhs = table.at(tg ** (1.0 / n)) / tg ** (1.0 / p)
    verdict = reported_verdict(empirical_constant(lhs, rhs))
    meta = {"p": p, "n": n, "resolution": r, "shifts": int(table.size)}
    return VerificationReport("oscillation-modulus", label, tg, lhs, rhs,
                              verdict, meta)


def verify_garsia(f: GridFunction, p: float, *, t_min=None,
                  points: int = 1025,
                  label: str = "") -> VerificationReport:
    """Garsia-type bound on both tails of the signed rearrangement.

    ``g*(x) - g*(1/2)`` and its mirror ``g*(1/2) - g*(1-x)`` are both
    compared against ``int_x^1 w(t^(1/n)) t^(-1/p) dt/t`` over x in
    ``(t_min, 1/2]``; the reported side is the larger branch.
    """
    n, r = _require_cube(f, "the Garsia check")
    xlo = max(1e-6 if t_min is None else float(t_min),
              2.0 * float(r) ** (-n))
    gs = signed_rearrangement(f)
    table = ModulusTable(f, p=p, tau_max=1.0)
    s = log_grid(xlo, 1.0, points)
    integ = table.at(s ** (1.0 / n)) * s ** (-1.0 / p)
    seg = 0.5 * (integ[1:] + integ[:-1]) * np.diff(np.log(s))
    suffix = np.concatenate((np.cumsum(seg[::-1])[::-1], [0.0]))
    keep = s <= 0.5
    xg = s[keep]
    rhs = suffix[keep]
    half = float(gs.value(0.5))
    lhs_low = np.atleast_1d(gs.value(xg)) - half
    lhs_high = half - np.atleast_1d(gs.value(1.0 - xg))
    lhs = np.maximum(lhs_low, lhs_high)
    verdict = reported_verdict(empirical_constant(lhs, rhs))
    meta = {"p": p, "n": n, "resolution": r,
            "lower_branch_constant": empirical_constant(lhs_low, rhs),
            "upper_branch_constant": empirical_constant(lhs_high, rhs)}
    return VerificationReport("garsia", label, xg, lhs, rhs, verdict, meta)


def _morrey_weight_norm(n: int, p: float) -> float:
    """``L^p'`` norm of ``min(t, 1-t)^(1/n - 1)`` on (0,1), by dyadic
    Gauss panels (the singular power integrates segment by segment)."""
    pp = p / (p - 1.0)
    s = (1.0 - 1.0 / n) * pp

    def g(t):
        return np.asarray(t, dtype=float) ** (-s)

    total = 0.0
    hi = 0.5
    for _ in range(20000):
        seg = float(gauss_segment_values(g, np.array([hi / 2.0, hi]))[0])
        total += seg
        if seg <= 1e-17 * total:
            break
        hi /= 2.0
    return (2.0 * total) ** (1.0 / pp)


def morrey_holder_check(f: GridFunction, p: float, n: int | None = None, *,
                        pairs: int = 200, seed: int = 0,
                        label: str = "") -> VerificationReport:
    """Supercritical embedding: global oscillation and pairwise Holder.

    (a) ``ess sup f - ess inf f <= 2 C || |grad f| ||_p`` with the
    explicit weight constant ``C = || min(t,1-t)^(1/n-1) ||_p'``;
    (b) ``|f(y) - f(z)| <= c |y-z|^(1-n/p) || |grad f| ||_p`` over a
    seeded sample of cell pairs, constant reported in the metadata.
    """
    dim, r = _require_cube(f, "the Morrey check")
    if n is None:
        n = dim
    elif n != dim:
        raise ValueError(f"space dimension is {dim}, not {n}")
    if not p > n:
        raise ValueError("the sup-norm embedding needs p > n")
    gs = signed_rearrangement(f)
    osc_all = float(gs.values[0] - gs.values[-1])
    gnorm = gradient_modulus(f).lp_norm(p)
    C = _morrey_weight_norm(n, p)
    verdict = explicit_verdict(np.array([0.0]), [osc_all], [gnorm], 2.0 * C,
                               1e-3)
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, f.space.ncells, size=(4 * pairs, 2))
    idx = idx[idx[:, 0] != idx[:, 1]][:pairs]
    dist = np.linalg.norm(f.space.centers[idx[:, 0]]
                          - f.space.centers[idx[:, 1]], axis=1)
    gaps = np.abs(f.values[idx[:, 0]] - f.values[idx[:, 1]])
    expo = 1.0 - n / p
    pair_const = empirical_constant(gaps, dist ** expo * gnorm)
    meta = {"p": p, "n": n, "resolution": r, "weight_constant": C,
            "holder_exponent": expo, "pair_constant": pair_const,
            "pair_distances": dist.tolist(), "pair_gaps": gaps.tolist(),
            "gradient_norm": gnorm}
    return _scalar_report("morrey-holder", label, osc_all, gnorm, verdict,
                          meta)


# ---------------------------------------------------------------------------
# higher-order iteration
# ---------------------------------------------------------------------------


def verify_higher_order(f: GridFunction, k: int, profile: Profile, *,
                        t_min=None, points: int = DEFAULT_POINTS,
                        label: str = "") -> VerificationReport:
    """Iterated oscillation bound through the k-th derivative modulus.

    ``f**(t) - f*(t)`` against ``(1/(k-1)!) (t/I(t)) [ int_t^{M/2}
    |d^k f|**(u) (1/I(u)) J(t,u)^(k-1) du + sum_j J(t,M/2)^(k-j-1)
    ||d^(k-j) f||_1 ]`` with ``J(t,u) = int_t^u dz/I(z)``.  The
    factorial coefficient is folded into the right side and the verdict
    reports the empirical constant relative to it.  (The displayed bound
    is not universal: boundary-hugging bumps exceed it by a stable
    ~15 percent, so a hard pass/fail at 1 would reject sound input.)
    The metadata carries the companion bound for ``f**`` itself (powers
    ``J^(k-j)``, down to the plain ``||f||_1`` term).
    """
    if k < 2:
        raise ValueError("the iteration starts at k = 2")
    space = f.space
    mass = space.total_mass
    upper = mass / 2.0
    star = decreasing_rearrangement(f)
    favg = maximal_average(star)
    dk = decreasing_rearrangement(kth_derivative_modulus(f, k))
    dkavg = maximal_average(dk)
    lower_l1 = {m: kth_derivative_modulus(f, m).abs_integral()
                for m in range(1, k)}
    lower_l1[0] = f.abs_integral()
    lo = 1e-6 * mass if t_min is None else float(t_min)
    z = log_grid(lo / 2.0, upper, 2049)
    Iz = np.asarray(profile(z), dtype=float)
    logz = np.log(z)
    gz = z / Iz
    Cz = np.concatenate(([0.0],
                         np.cumsum(0.5 * (gz[1:] + gz[:-1]) * np.diff(logz))))
    A = dkavg.value(z) / Iz
    tg = snapped_tgrid(star, lo, upper, points)
    Ct = np.interp(np.log(tg), logz, Cz)
    At = np.interp(np.log(tg), logz, A)
    Chalf = Cz[-1]
    kfact = math.factorial(k - 1)
    lhs = favg.oscillation(tg)
    It = np.asarray(profile(tg), dtype=float)
    rhs = np.empty(tg.size)
    corr = np.empty(tg.size)
    for i, t in enumerate(tg):
        j = int(np.searchsorted(z, t, side="right"))
        uu = np.concatenate(([t], z[j:]))
        AA = np.concatenate(([At[i]], A[j:]))
        JJ = np.concatenate(([0.0], Cz[j:] - Ct[i]))
        main = float(_trapezoid(AA * JJ ** (k - 1), uu))
        tail = sum((Chalf - Ct[i]) ** (k - jj - 1) * lower_l1[k - jj]
                   for jj in range(1, k))
        rhs[i] = (t / It[i]) * (main + tail) / kfact
        corr_main = float(_trapezoid(AA * JJ ** k, uu))
        corr_tail = sum((Chalf - Ct[i]) ** (k - jj) * lower_l1[k - jj]
                        for jj in range(1, k + 1))
        corr[i] = corr_main + corr_tail
    verdict = reported_verdict(empirical_constant(lhs, rhs))
    fss = favg.value(tg)
    meta = {"k": k, "profile": profile.label,
            "lower_order_l1": {str(m): v for m, v in lower_l1.items()},
            "corollary_constant": empirical_constant(fss, corr),
            "corollary_lhs": np.atleast_1d(fss).tolist(),
            "corollary_rhs": corr.tolist()}
    return VerificationReport("higher-order", label, tg, lhs, rhs, verdict,
                              meta)


# ---------------------------------------------------------------------------
# Gaussian transference
# ---------------------------------------------------------------------------


def _transference_integral(profile: Profile, eps: float,
                           nodes: int = 4097) -> float:
    """``int_eps^{1-eps} dt / (I(t) sqrt(log 1/t))`` in two pieces.

    The lower half integrates in log t; the upper half substitutes
    ``t = exp(-y^2)``, which removes the square-root singularity of the
    weight at t = 1.
    """
    def g1(t):
        t = np.asarray(t, dtype=float)
        return t / (np.asarray(profile(t), dtype=float)
                    * np.sqrt(np.log(1.0 / t)))

    v1, _ = integrate_dt_over_t(g1, eps, 0.5, nodes)
    ylo = math.sqrt(math.log(1.0 / (1.0 - eps)))
    y = np.geomspace(ylo, math.sqrt(math.log(2.0)), nodes)
    t = np.exp(-y * y)
    vals = 2.0 * t / np.asarray(profile(t), dtype=float)
    v2 = float(_trapezoid(vals, y))
    return v1 + v2


def _osc_lp_restricted(star: StepFunction, tg, p: float) -> np.ndarray:
    """Exact ``|| (f** - f*) chi_(0,t) ||_{L^p(0,1)}`` from the step
    constants (each segment integrates a power of ``C_j / s``)."""
    cstep = _oscillation_step(star, 1.0)
    bp = cstep.breakpoints
    C = cstep.values

    def prim(s):
        s = np.asarray(s, dtype=float)
        return np.log(s) if p == 1.0 else s ** (1.0 - p) / (1.0 - p)

    lo = np.maximum(bp[:-1], 1e-300)
    hi = bp[1:]
    full = np.where(C > 0.0, C ** p * (prim(hi) - prim(lo)), 0.0)
    cum = np.concatenate(([0.0], np.cumsum(full)))
    tg = np.atleast_1d(np.asarray(tg, dtype=float))
    out = np.empty(tg.size)
    for i, t in enumerate(tg):
        j = int(np.searchsorted(bp, t, side="right")) - 1
        j = min(max(j, 0), C.size - 1)
        part = C[j] ** p * (prim(t) - prim(max(bp[j], 1e-300))) \
            if C[j] > 0 else 0.0
        out[i] = cum[j] + part
    return out ** (1.0 / p)


def _maximal_lp(gstar: StepFunction, p: float) -> float:
    """``L^p(0,1)`` norm of the running average of ``gstar``."""
    if gstar.values.size == 0 or gstar.values[0] == 0.0:
        return 0.0
    avg = maximal_average(gstar)
    bp = gstar.breakpoints
    head = gstar.values[0] ** p * bp[1]
    edges = bp[1:]
    L = gstar.total_length
    if L < 1.0:
        edges = np.concatenate((edges, np.geomspace(L, 1.0, 65)[1:]))
    edges = np.unique(edges)
    body = gauss_segments(lambda s: np.asarray(avg.value(s)) ** p, edges)
    return (head + body) ** (1.0 / p)


def verify_transference(profile: Profile, norm_p: float = 1.0,
                        f: GridFunction | None = None, *, t_min=None,
                        points: int = DEFAULT_POINTS,
                        label: str = "") -> VerificationReport:
    """Transference condition and the localized oscillation bound.

    (a) evaluates ``int_0^1 dt / (I(t) sqrt(log 1/t))`` at nested
    cutoffs and flags divergence (value beyond 1e12 or growth beyond 50
    percent across cutoffs).  (b) with a test function, compares
    ``|| (f** - f*) chi_(0,t) ||_p`` against ``(t/I(t))`` times the
    ``L^p`` norm of ``|grad f|**`` and integrates the left side against
    ``dt / (t sqrt(log 1/t))`` for the dimensionless display.
    """
    if not (np.isfinite(norm_p) and norm_p >= 1.0):
        raise ValueError("need 1 <= p < inf")
    if not np.isfinite(profile.mass) or abs(profile.mass - 1.0) > 1e-9:
        raise ValueError("transference needs a profile on (0, 1)")
    Ts = [_transference_integral(profile, e) for e in _NESTED_CUTOFFS]
    diverges = (not np.isfinite(Ts[2])) or Ts[2] > 1e12 \
        or (Ts[0] > 0 and Ts[2] / Ts[0] > 1.5)
    meta = {"transference_integral": Ts[2], "integral_values": Ts,
            "cutoffs": list(_NESTED_CUTOFFS), "diverges": diverges,
            "p": norm_p, "profile": profile.label}
    if f is None:
        if diverges:
            verdict = skipped_verdict("transference integral diverges")
        else:
            verdict = reported_verdict(Ts[2], "transference integral")
        return _scalar_report("transference", label, 0.0, 0.0, verdict, meta)

    star = decreasing_rearrangement(f)
    gstar = decreasing_rearrangement(gradient_modulus(f))
    gnorm = _maximal_lp(gstar, norm_p)
    lo = 1e-6 if t_min is None else float(t_min)
    tg = snapped_tgrid(star, lo, 1.0 - lo, points)
    lhs = _osc_lp_restricted(star, tg, norm_p)
    rhs = tg / np.asarray(profile(tg), dtype=float) * gnorm
    c_emp = empirical_constant(lhs, rhs)
    verdict = reported_verdict(c_emp)

    def g2(t):
        return _osc_lp_restricted(star, t, norm_p) / np.sqrt(np.log(1.0 / t))

    d1, _ = integrate_dt_over_t(g2, 1e-9, 0.5, 2049)
    y = np.geomspace(math.sqrt(math.log(1.0 / (1.0 - 1e-9))),
                     math.sqrt(math.log(2.0)), 2049)
    d2 = float(_trapezoid(2.0 * _osc_lp_restricted(star, np.exp(-y * y),
                                                   norm_p), y))
    D = d1 + d2
    meta["gradient_average_norm"] = gnorm
    meta["dimensionless_lhs"] = D
    meta["dimensionless_bound"] = c_emp * Ts[2] * gnorm \
        if np.isfinite(Ts[2]) else np.inf
    return VerificationReport("transference", label, tg, lhs, rhs, verdict,
                              meta)
