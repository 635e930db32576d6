"""Acceptance gate: twelve end-to-end checks at fixed tolerances.

Each test prints one ``ACCEPTANCE nn PASS|FAIL`` line (run with ``-s``
to see them all) and then asserts.  Criterion 01 fails by design: the
asserted dimension-free ceiling is false in dimension one, where the
true chain value is Gamma(3/2) = 0.886; see the assertion message.
"""

import json
import math
import os
import time

import numpy as np
import pytest
import scipy.stats

from isoperim.config import RunConfig
from isoperim.cli import cmd_verify
from isoperim.corpus import TestCorpus
from isoperim.inequalities import (
    morrey_holder_check,
    poincare_identity_check,
    truncation_identity_check,
    verify_bobkov_houdre,
    verify_coulhon_pointwise,
    verify_garsia,
    verify_higher_order,
    verify_mazya_talenti,
    verify_oscillation,
    verify_oscillation_modulus,
    verify_polya_szego,
)
from isoperim.measure import (
    GaussianLine,
    GridFunction,
    StepFunction,
    UnitCube,
    decreasing_rearrangement,
    level_tail_integral,
    maximal_average,
    signed_rearrangement,
)
from isoperim.norms import classical_linf_q_diverges, evaluate, parse_norm
from isoperim.profiles import (
    constant_profile,
    gamma_transference_constant,
    gaussian_equivalence_constants,
    gaussian_profile,
    norm_cdf,
    norm_ppf,
    phi_of,
)

CONST1 = constant_profile(1.0)


def record(num: int, name: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"ACCEPTANCE {num:02d} {status} {name}{suffix}")


def indicator(a: float) -> StepFunction:
    return StepFunction(np.array([0.0, a]), np.array([1.0]))


# ---------------------------------------------------------------------------


def test_criterion_01_transference_chain():
    start = time.perf_counter()
    worst_rel = 0.0
    breaches = []
    for n in range(1, 21):
        quad = gamma_transference_constant(n)
        exact = math.exp(math.lgamma(1.0 + n / 2.0) / n) / math.sqrt(n)
        worst_rel = max(worst_rel, abs(quad - exact) / exact)
        ceiling = math.sqrt(0.5) * (n / 2.0) ** (1.0 / n)
        if not quad <= ceiling + 1e-9:
            breaches.append((n, quad, ceiling))
    elapsed = time.perf_counter() - start
    ok = worst_rel <= 1e-6 and not breaches and elapsed < 5.0
    record(1, "transference chain vs closed form and ceiling", ok,
           f"max rel err {worst_rel:.2e}, {elapsed:.2f}s, "
           f"{len(breaches)} ceiling breach(es)")
    assert worst_rel <= 1e-6
    assert elapsed < 5.0
    assert not breaches, (
        "ceiling (1/sqrt 2)(n/2)^(1/n) exceeded at "
        + "; ".join(f"n={n}: {v:.6f} > {c:.6f}" for n, v, c in breaches)
        + " -- the ceiling is false in dimension one, where the chain "
          "value is Gamma(3/2) = sqrt(pi)/2 = 0.886; it holds from "
          "n = 2 on.  Failing by design rather than weakening the bound.")


def test_criterion_02_oscillation_with_constant_one():
    start = time.perf_counter()
    worst = 0.0
    failed = []
    jobs = ((GaussianLine(4096), gaussian_profile()),
            (UnitCube(1, 4096), CONST1))
    for space, profile in jobs:
        for m in TestCorpus(space, seed=0).members:
            rep = verify_oscillation(m.f, profile)
            worst = max(worst, rep.empirical_constant)
            if not rep.verdict.passed:
                failed.append(f"{space.kind}:{m.label}")
    elapsed = time.perf_counter() - start
    ok = not failed and elapsed < 30.0
    record(2, "oscillation bound, constant 1, full corpus at 4096", ok,
           f"worst constant {worst:.6f}, {elapsed:.2f}s")
    assert not failed, failed
    assert elapsed < 30.0


def test_criterion_03_pointwise_reduction_at_p1():
    space = UnitCube(1, 512)
    worst = 0.0
    phi = phi_of(CONST1)
    for m in TestCorpus(space, seed=0).members[:10]:
        a = verify_oscillation(m.f, CONST1)
        b = verify_coulhon_pointwise(m.f, phi, 1.0)
        worst = max(worst,
                    float(np.max(np.abs(a.tgrid - b.tgrid))),
                    float(np.max(np.abs(a.lhs - b.lhs))),
                    float(np.max(np.abs(a.rhs - b.rhs))))
    ok = worst < 1e-12
    record(3, "pointwise form at p = 1 reduces to the oscillation bound",
           ok, f"max array difference {worst:.2e}")
    assert worst < 1e-12


def test_criterion_04_exact_identities_on_random_steps():
    rng = np.random.default_rng(11)
    space = UnitCube(1, 400)
    worst_tail = 0.0
    worst_trunc = 0.0
    for _ in range(10):
        cuts = np.sort(rng.choice(np.arange(1, 400), size=19,
                                  replace=False))
        lengths = np.diff(np.concatenate(([0], cuts, [400])))
        vals = np.repeat(2.0 * rng.standard_normal(20), lengths)
        f = GridFunction(space, vals)
        avg = maximal_average(decreasing_rearrangement(f))
        for t in rng.random(5) * 0.98 + 0.01:
            t = float(t)
            lhs = t * float(avg.oscillation(t))
            rhs = level_tail_integral(f, t)
            worst_tail = max(worst_tail, abs(lhs - rhs))
            rep = truncation_identity_check(f, t, tol=1e-10)
            worst_trunc = max(worst_trunc, rep.verdict.epsilon)
    ok = worst_tail <= 1e-10 and worst_trunc <= 1e-10
    record(4, "level-tail and truncation identities on random steps", ok,
           f"tail eps {worst_tail:.2e}, truncation eps {worst_trunc:.2e}")
    assert worst_tail <= 1e-10
    assert worst_trunc <= 1e-10


def test_criterion_05_gaussian_linear_closed_form():
    space = GaussianLine(4096)
    f = GridFunction(space, space.centers[:, 0])
    signed = signed_rearrangement(f)
    tmid = signed.step_midpoints()
    err = float(np.max(np.abs(signed.value(tmid)
                              - scipy.stats.norm.ppf(1.0 - tmid))))
    a = poincare_identity_check(f, gaussian_profile())
    b = poincare_identity_check(f, CONST1)
    indep = float(np.max(np.abs(a.rhs - b.rhs)))
    ok = err < 1e-6 and indep <= 1e-10 and a.verdict.passed
    record(5, "signed rearrangement of x matches the inverse normal CDF",
           ok, f"max err {err:.2e}, profile dependence {indep:.2e}")
    assert err < 1e-6
    assert indep <= 1e-10
    assert a.verdict.passed


def test_criterion_06_level_integral_bound_and_halfspace_limit():
    failed = []
    for space, profile in ((GaussianLine(512), gaussian_profile()),
                           (UnitCube(1, 512), CONST1)):
        for m in TestCorpus(space, seed=0).members:
            rep = verify_bobkov_houdre(m.f, profile)
            if not rep.verdict.passed:
                failed.append(f"{space.kind}:{m.label}")
    space = GaussianLine(512)
    gp = gaussian_profile()
    x = space.centers[:, 0]
    lhs = [float(verify_bobkov_houdre(
        GridFunction(space, np.clip(0.5 - x / w, 0.0, 1.0)), gp).lhs[0])
        for w in (0.4, 0.2, 0.1)]
    limit = float(gp(0.5))
    monotone = lhs[0] < lhs[1] < lhs[2] <= limit + 1e-12
    close = abs(lhs[2] - limit) < 1e-3
    ok = not failed and monotone and close
    record(6, "level-integral bound on corpus; half-space limit", ok,
           f"sharpening {lhs[0]:.6f} -> {lhs[2]:.6f} vs {limit:.6f}")
    assert not failed, failed
    assert monotone, lhs
    assert close


def test_criterion_07_gaussian_profile_structure():
    gp = gaussian_profile()
    t = np.linspace(1e-9, 1.0 - 1e-9, 40001)
    sym = float(np.max(np.abs(np.asarray(gp(t)) - np.asarray(gp(1.0 - t)))))
    u = np.linspace(1e-8, 1.0 - 1e-8, 100001)
    roundtrip = float(np.max(np.abs(norm_cdf(norm_ppf(u)) - u)))
    lo1, hi1 = gaussian_equivalence_constants(1e-6, 0.4, 1000)
    lo2, hi2 = gaussian_equivalence_constants(1e-6, 0.4, 2000)
    finite = all(np.isfinite(v) and v > 0 for v in (lo1, hi1, lo2, hi2))
    drift = max(abs(lo2 - lo1) / lo1, abs(hi2 - hi1) / hi1)
    ok = sym <= 1e-12 and roundtrip <= 1e-10 and finite and drift <= 0.01
    record(7, "gaussian profile symmetry, CDF round trip, equivalence sweep",
           ok, f"sym {sym:.1e}, roundtrip {roundtrip:.1e}, "
               f"c = [{lo1:.4f}, {hi1:.4f}], drift {drift:.1e}")
    assert sym <= 1e-12
    assert roundtrip <= 1e-10
    assert finite
    assert drift <= 0.01


def test_criterion_08_norm_oracles():
    cases = [("Lorentz:2,2", indicator(1.0), math.sqrt(2.0))]
    for q in (1.0, 2.0, 3.0):
        for a in (0.5, 1.0):
            cases.append((f"LorentzOsc:{q}", indicator(a),
                          (1.0 / q) ** (1.0 / q)))
    cases.append(("BWH:2", indicator(1.0), 1.0))
    cases.append(("FK:2", indicator(1.0), math.sqrt(2.0 * math.pi)))
    worst = 0.0
    for text, star, exact in cases:
        got = evaluate(parse_norm(text), star)
        worst = max(worst, abs(got - exact) / exact)
    ok = worst <= 1e-5
    record(8, "norm closed forms on indicators", ok,
           f"{len(cases)} cases, worst rel err {worst:.2e}")
    assert worst <= 1e-5


def test_criterion_09_classical_expression_divergence():
    missed = []
    for space in (UnitCube(1, 256), GaussianLine(256)):
        for m in TestCorpus(space, seed=0).members:
            star = decreasing_rearrangement(m.f)
            if float(np.max(star.values)) == 0.0:
                continue
            if not classical_linf_q_diverges(star, 2.0):
                missed.append(f"{space.kind}:{m.label}")
    zero = StepFunction(np.array([0.0, 1.0]), np.array([0.0]))
    zero_flagged = classical_linf_q_diverges(zero, 2.0)
    ok = not missed and not zero_flagged
    record(9, "classical sup-integral diverges for every nonzero member",
           ok, f"{len(missed)} missed, zero flagged: {zero_flagged}")
    assert not missed, missed
    assert not zero_flagged


def test_criterion_10_higher_order_iteration():
    start = time.perf_counter()
    space = UnitCube(1, 2048)
    x = space.centers[:, 0]
    f = GridFunction(space, x * x / 2.0)
    rep = verify_higher_order(f, 2, CONST1)
    t = rep.tgrid
    # closed forms for f = x^2/2 on the unit interval with I = 1
    lhs_exact = t / 2.0 - t * t / 3.0
    rhs_exact = t * ((0.5 - t) ** 2 / 2.0 + 0.5)
    oracle_holds = bool(np.all(lhs_exact <= rhs_exact * (1.0 + 1e-12)))
    match = max(float(np.max(np.abs(rep.lhs - lhs_exact))),
                float(np.max(np.abs(rep.rhs - rhs_exact))))
    bump = GridFunction(UnitCube(1, 512), np.exp(
        -(UnitCube(1, 512).centers[:, 0] - 0.5) ** 2 / (2.0 * 0.15 ** 2)))
    rep3 = verify_higher_order(bump, 3, CONST1)
    elapsed = time.perf_counter() - start
    ok = (rep.verdict.passed and oracle_holds and match < 2e-3
          and rep3.verdict.passed and rep3.empirical_constant < 1.0
          and elapsed < 60.0)
    record(10, "second and third order iterates", ok,
           f"oracle gap {match:.2e}, k=3 constant "
           f"{rep3.empirical_constant:.4f}, {elapsed:.2f}s")
    assert rep.verdict.passed
    assert oracle_holds
    assert match < 2e-3
    assert rep3.verdict.passed and rep3.empirical_constant < 1.0
    assert elapsed < 60.0


def _corpus_max(space, op):
    vals = [op(m.f).empirical_constant
            for m in TestCorpus(space, seed=0).members]
    return max(v for v in vals if np.isfinite(v))


def test_criterion_11_refinement_stability():
    gp = gaussian_profile()
    jobs = [
        ("band derivative / interval",
         lambda r: UnitCube(1, r), lambda f: verify_mazya_talenti(f, CONST1)),
        ("band derivative / gaussian",
         GaussianLine, lambda f: verify_mazya_talenti(f, gp)),
        ("symmetrization / interval",
         lambda r: UnitCube(1, r), lambda f: verify_polya_szego(f, CONST1)),
        ("symmetrization / gaussian",
         GaussianLine, lambda f: verify_polya_szego(f, gp)),
        ("oscillation modulus / interval",
         lambda r: UnitCube(1, r),
         lambda f: verify_oscillation_modulus(f, 2.0)),
        ("averaged modulus / interval",
         lambda r: UnitCube(1, r), lambda f: verify_garsia(f, 2.0)),
        ("supercritical bound / interval",
         lambda r: UnitCube(1, r), lambda f: morrey_holder_check(f, 2.0)),
    ]
    drifts = []
    bad = []
    for name, mk, op in jobs:
        c64 = _corpus_max(mk(64), op)
        c128 = _corpus_max(mk(128), op)
        drifts.append((name, c128 - c64))
        if c128 > c64 + 0.05:
            bad.append(f"{name}: {c64:.4f} -> {c128:.4f}")
    worst = max(d for _, d in drifts)
    ok = not bad
    record(11, "constants stable from 64 to 128 cells", ok,
           f"worst drift {worst:+.4f}")
    assert not bad, bad


def test_criterion_12_byte_deterministic_output(tmp_path):
    def run(sub):
        out = tmp_path / sub
        cfg = RunConfig.from_dict({
            "out": str(out), "grid": 16,
            "spaces": [{"space": {"kind": "unit_cube", "n": 1, "r": 64}}],
            "corpus": {"count": 3},
            "inequalities": ["oscillation", "polya-szego", "truncation"],
        })
        assert cmd_verify(cfg) == 0
        blobs = {}
        for base, _, names in os.walk(out):
            for name in names:
                if name.endswith((".csv", ".json")):
                    path = os.path.join(base, name)
                    with open(path, "rb") as fh:
                        blobs[os.path.relpath(path, out)] = fh.read()
        return blobs

    a = run("a")
    b = run("b")
    same_names = sorted(a) == sorted(b)
    diff = [rel for rel in a if a.get(rel) != b.get(rel)]
    ok = same_names and not diff and len(a) > 1
    record(12, "identical runs produce byte-identical CSV and JSON", ok,
           f"{len(a)} files compared")
    assert same_names
    assert not diff, diff


def test_summary_json_round_trips(tmp_path):
    """Sanity rider on the gate: a written report re-parses and its
    verdict survives the JSON round trip."""
    out = tmp_path / "o"
    cfg = RunConfig.from_dict({
        "out": str(out), "grid": 8,
        "spaces": [{"space": {"kind": "unit_cube", "n": 1, "r": 64}}],
        "corpus": {"count": 1}, "inequalities": ["oscillation"],
    })
    assert cmd_verify(cfg) == 0
    reports = out / "reports"
    name = next(n for n in os.listdir(reports) if n.endswith(".json"))
    doc = json.loads((reports / name).read_text())
    assert doc["verdict"]["passed"] is True
    assert doc["schema_version"] == 1
