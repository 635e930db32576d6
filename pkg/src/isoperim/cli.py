"""Config-driven command-line runner.

Subcommands: ``verify`` (reports over a corpus), ``rearrange`` (curves
for one function), ``transfer`` (transference integral tables),
``profile`` (profile tables and structure checks), ``suite`` (all of
the above).  Exit codes: 0 success, 1 configuration or precondition
error, 2 at least one violated inequality or failed identity.

All delimited output is byte-deterministic for a fixed config and seed:
JSON is compact with sorted keys, CSV uses RFC-4180 quoting with CRLF
line ends, and figure files suppress their timestamp header.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys

import numpy as np

from .config import ConfigError, RunConfig
from .corpus import TestCorpus
from .exprs import grid_function_from_expression
from .gradient import gradient_modulus
from .inequalities import (
    morrey_holder_check,
    poincare_chain_check,
    poincare_identity_check,
    truncation_identity_check,
    verify_bobkov_houdre,
    verify_coulhon,
    verify_coulhon_pointwise,
    verify_garsia,
    verify_higher_order,
    verify_mazya_talenti,
    verify_oscillation,
    verify_oscillation_modulus,
    verify_polya_szego,
    verify_self_improvement,
    verify_transference,
)
from .measure import (
    GridFunction,
    decreasing_rearrangement,
    maximal_average,
    signed_rearrangement,
    space_from_dict,
)
from .norms import parse_norm
from .profiles import (
    constant_profile,
    cube_profile,
    euclidean_profile,
    gamma_transference_constant,
    gaussian_profile,
    gaussian_type_check,
    phi_of,
    profile_from_dict,
)
from .reports import VerificationReport, json_dumps, skipped_verdict, summary_csv

__all__ = ["main", "default_config", "cmd_verify", "cmd_rearrange",
           "cmd_transfer", "cmd_profile", "cmd_suite"]


# ---------------------------------------------------------------------------
# config plumbing
# ---------------------------------------------------------------------------


def default_config() -> RunConfig:
    """A small self-contained run: Gaussian line plus unit interval."""
    return RunConfig.from_dict({
        "spaces": [
            {"space": {"kind": "gaussian_line", "m": 512, "R": 8.0}},
            {"space": {"kind": "unit_cube", "n": 1, "r": 512}},
        ],
        "function": {
            "expr": "min(x0, 1 - x0)",
            "space": {"kind": "unit_cube", "n": 1, "r": 512},
            "name": "tent",
        },
        "transfer": {"n_lo": 1, "n_hi": 8, "profiles": [
            {"kind": "gaussian"},
            {"kind": "constant", "c": 1.0, "mass": 1.0},
        ]},
    })


def _load_config(args) -> RunConfig:
    cfg = RunConfig.load(args.config) if args.config else default_config()
    updates = {}
    if args.out is not None:
        updates["out"] = args.out
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.grid is not None:
        updates["grid"] = args.grid
    if args.tmin is not None:
        updates["t_min"] = args.tmin
    if updates:
        import dataclasses

        cfg = dataclasses.replace(cfg, **updates)
    return cfg


def natural_profile(space):
    """The profile a space is checked against when none is configured.

    The Gaussian line gets the Gaussian profile, the unit interval its
    exact constant 1, higher unit cubes the symmetrized lower bound, and
    boxes the ambient Euclidean profile.  Weighted intervals have no
    honest default and must configure one.
    """
    if space.kind == "gaussian_line":
        return gaussian_profile()
    if space.kind == "unit_cube":
        return constant_profile(1.0) if space.n == 1 else cube_profile(space.n)
    if space.kind == "euclidean_box":
        return euclidean_profile(space.n)
    raise ConfigError(f"space kind {space.kind} needs an explicit profile")


def _min_cell_extent(space) -> float:
    if space.kind == "gaussian_line":
        return float(np.min(np.diff(space.edges)))
    return float(space.cell_width)


def gradient_blowup(f: GridFunction, factor: float) -> bool:
    """Screen for non-Lipschitz samples before running the checks.

    A genuine jump puts a difference of the order of the full range
    across one cell; smooth corpus members stay far below that.
    """
    frange = float(np.max(f.values) - np.min(f.values))
    if frange == 0.0:
        return False
    gmax = float(np.max(gradient_modulus(f).values))
    return gmax >= factor * frange / _min_cell_extent(f.space)


def _space_tag(space) -> str:
    return space.kind + "-" + "-".join(str(s) for s in space.shape)


# ---------------------------------------------------------------------------
# the verification runner
# ---------------------------------------------------------------------------

_CUBE_ONLY = ("oscillation-modulus", "garsia", "morrey-holder")
_UNIFORM_ONLY = ("higher-order",)
_PROBABILITY_ONLY = ("poincare-identity", "poincare-chain", "transference")


def _applicable(ineq: str, space, profile) -> bool:
    if ineq in _CUBE_ONLY:
        return space.kind == "unit_cube"
    if ineq in _UNIFORM_ONLY:
        return space.kind in ("unit_cube", "euclidean_box")
    if ineq in _PROBABILITY_ONLY:
        return abs(space.total_mass - 1.0) <= 1e-9 \
            and abs(profile.mass - 1.0) <= 1e-9
    return True


def _run_one(ineq: str, f: GridFunction, space, profile, cfg: RunConfig,
             label: str) -> VerificationReport:
    t_min = cfg.t_min
    points = cfg.grid
    if ineq == "oscillation":
        return verify_oscillation(f, profile, t_min=t_min, points=points,
                                  label=label)
    if ineq == "coulhon-pointwise":
        return verify_coulhon_pointwise(f, phi_of(profile),
                                        cfg.param("coulhon_p"),
                                        t_min=t_min, points=points,
                                        label=label)
    if ineq == "coulhon":
        return verify_coulhon(f, phi_of(profile), 1.0, label=label)
    if ineq == "mazya-talenti":
        return verify_mazya_talenti(f, profile, label=label)
    if ineq == "polya-szego":
        return verify_polya_szego(f, profile, t_min=t_min, points=points,
                                  label=label)
    if ineq == "bobkov-houdre":
        return verify_bobkov_houdre(f, profile, label=label)
    if ineq == "truncation":
        t = cfg.param("truncation_t") * space.total_mass
        return truncation_identity_check(f, t,
                                         tol=cfg.tolerance("identity"),
                                         label=label)
    if ineq == "self-improvement":
        return verify_self_improvement(f, profile, t_min=t_min,
                                       points=points, label=label)
    if ineq == "poincare-identity":
        return poincare_identity_check(f, profile, t_min=t_min,
                                       tol=cfg.tolerance("identity"),
                                       label=label)
    if ineq == "poincare-chain":
        lp = next((s for s in cfg.norms if s.startswith("Lp")), "Lp:2")
        return poincare_chain_check(f, parse_norm(lp), profile, label=label)
    if ineq == "oscillation-modulus":
        return verify_oscillation_modulus(f, cfg.param("modulus_p"),
                                          t_min=t_min, points=points,
                                          label=label)
    if ineq == "garsia":
        return verify_garsia(f, cfg.param("modulus_p"), t_min=t_min,
                             label=label)
    if ineq == "morrey-holder":
        p = cfg.param("morrey_p")
        if p is None:
            p = space.dimension + 1.0
        return morrey_holder_check(f, p, seed=cfg.seed, label=label)
    if ineq == "higher-order":
        return verify_higher_order(f, cfg.param("higher_order_k"), profile,
                                   t_min=t_min, points=points, label=label)
    if ineq == "transference":
        return verify_transference(profile, cfg.param("transference_p"), f,
                                   t_min=t_min, points=points, label=label)
    raise ConfigError(f"unknown inequality id {ineq!r}")


def _corpus_members(space, cfg: RunConfig):
    spec = cfg.corpus
    corpus = TestCorpus(space, seed=spec.seed)
    members = [(m.label, m.f) for m in corpus
               if spec.families is None or m.family in spec.families]
    if spec.count is not None:
        members = members[:spec.count]
    if spec.inject_discontinuity:
        lo = float(np.min(space.centers[:, 0]))
        hi = float(np.max(space.centers[:, 0]))
        jump = GridFunction(
            space, (space.centers[:, 0] < 0.5 * (lo + hi)).astype(float))
        members.append(("sharp-jump", jump))
    return members


def _write_text(path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def cmd_verify(cfg: RunConfig) -> int:
    if not cfg.spaces:
        raise ConfigError("verify needs at least one entry in spaces")
    outdir = os.path.join(cfg.out, "reports")
    os.makedirs(outdir, exist_ok=True)
    explicit = cfg.inequalities != "all"
    reports = []
    for job in cfg.spaces:
        space = space_from_dict(job.space)
        profile = profile_from_dict(job.profile) if job.profile \
            else natural_profile(space)
        tag = _space_tag(space)
        for member_label, f in _corpus_members(space, cfg):
            label = f"{tag}:{member_label}"
            if gradient_blowup(f, cfg.tolerance("blowup_factor")):
                reports.append(VerificationReport(
                    "lipschitz-screen", label, np.array([0.0]),
                    np.zeros(1), np.zeros(1),
                    skipped_verdict("gradient blowup, function skipped"),
                    {"max_gradient":
                     float(np.max(gradient_modulus(f).values))}))
                continue
            for ineq in cfg.selected():
                if not explicit and not _applicable(ineq, space, profile):
                    continue
                reports.append(_run_one(ineq, f, space, profile, cfg, label))
    for rep in reports:
        stem = f"{rep.inequality}__{rep.label.replace(':', '__')}"
        _write_text(os.path.join(outdir, stem + ".json"),
                    json_dumps(rep.to_dict()) + "\n")
        if not cfg_json_only(cfg):
            from .plots import report_plot

            report_plot(rep, os.path.join(outdir, stem + ".svg"))
    if not cfg_json_only(cfg):
        _write_text(os.path.join(cfg.out, "summary.csv"),
                    summary_csv(reports))
    failed = [r for r in reports if not r.verdict.passed]
    for rep in failed:
        print(f"FAIL {rep.inequality} [{rep.label}]: "
              f"{rep.verdict.describe()}", file=sys.stderr)
    n_skip = sum(r.verdict.kind == "skipped" for r in reports)
    print(f"{len(reports)} reports, {len(reports) - len(failed)} passed, "
          f"{len(failed)} failed, {n_skip} skipped")
    return 2 if failed else 0


# --json-only is threaded through an attribute set by main(); library
# callers default to full output
def cfg_json_only(cfg: RunConfig) -> bool:
    return bool(getattr(cfg, "_json_only", False))


def _set_json_only(cfg: RunConfig, value: bool) -> RunConfig:
    object.__setattr__(cfg, "_json_only", value)
    return cfg


# ---------------------------------------------------------------------------
# rearrangement curves
# ---------------------------------------------------------------------------


def _curve_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, quoting=csv.QUOTE_MINIMAL, lineterminator="\r\n")
    writer.writerow(["t", "value"])
    for t, v in rows:
        writer.writerow([repr(float(t)), repr(float(v))])
    return buf.getvalue()


def _staircase_rows(step):
    rows = [(t, v) for t, v in zip(step.breakpoints[:-1], step.values)]
    rows.append((step.total_length, 0.0))
    return rows


def cmd_rearrange(cfg: RunConfig) -> int:
    if cfg.function is None:
        raise ConfigError("rearrange needs a function entry")
    os.makedirs(cfg.out, exist_ok=True)
    space = space_from_dict(cfg.function.space)
    f = grid_function_from_expression(space, cfg.function.expr)
    name = cfg.function.name
    star = decreasing_rearrangement(f)
    avg = maximal_average(star)
    signed = signed_rearrangement(f)
    mass = space.total_mass
    lo = cfg.t_min if cfg.t_min else 1e-6 * mass
    ts = np.geomspace(lo, mass * (1.0 - 1e-9), max(cfg.grid, 256))
    curves = {
        "star": _staircase_rows(star),
        "signed": _staircase_rows(signed),
        "avg": list(zip(ts, np.atleast_1d(avg.value(ts)))),
        "oscillation": list(zip(ts, np.atleast_1d(avg.oscillation(ts)))),
    }
    if cfg_json_only(cfg):
        doc = {key: {"t": [float(t) for t, _ in rows],
                     "value": [float(v) for _, v in rows]}
               for key, rows in curves.items()}
        doc["name"] = name
        _write_text(os.path.join(cfg.out, f"{name}_rearrangement.json"),
                    json_dumps(doc) + "\n")
    else:
        for key, rows in curves.items():
            _write_text(os.path.join(cfg.out, f"{name}_{key}.csv"),
                        _curve_csv(rows))
        from .plots import rearrangement_plot

        rearrangement_plot(star, avg, signed,
                           os.path.join(cfg.out, f"{name}_rearrangement.svg"))
    print(f"wrote rearrangement curves for {name!r} to {cfg.out}")
    return 0


# ---------------------------------------------------------------------------
# transference tables and profile tables
# ---------------------------------------------------------------------------


def _closed_form_gamma(n: int) -> float:
    return math.exp(math.lgamma(1.0 + n / 2.0) / n) / math.sqrt(n)


def cmd_transfer(cfg: RunConfig) -> int:
    spec = cfg.transfer
    if spec is None:
        raise ConfigError("transfer needs a transfer entry")
    os.makedirs(cfg.out, exist_ok=True)
    buf = io.StringIO()
    writer = csv.writer(buf, quoting=csv.QUOTE_MINIMAL, lineterminator="\r\n")
    writer.writerow(["profile", "n", "integral", "closed_form",
                     "rel_error", "diverges"])
    worst = 0.0
    for n in range(spec.n_lo, spec.n_hi + 1):
        quad = float(gamma_transference_constant(n))
        exact = _closed_form_gamma(n)
        rel = abs(quad - exact) / exact
        worst = max(worst, rel)
        writer.writerow(["euclidean-chain", n, repr(quad), repr(exact),
                         repr(rel), ""])
    for pd in spec.profiles:
        profile = profile_from_dict(pd)
        rep = verify_transference(profile, cfg.param("transference_p"))
        meta = rep.metadata
        writer.writerow([profile.label, "",
                         repr(float(meta["transference_integral"])), "", "",
                         str(bool(meta["diverges"])).lower()])
    _write_text(os.path.join(cfg.out, "transfer.csv"), buf.getvalue())
    rows = max(0, spec.n_hi - spec.n_lo + 1)
    print(f"transference table: {rows} chain rows "
          f"(max rel error {worst:.3g}), {len(spec.profiles)} profiles")
    return 0


def cmd_profile(cfg: RunConfig) -> int:
    os.makedirs(cfg.out, exist_ok=True)
    profiles = []
    for job in cfg.spaces:
        space = space_from_dict(job.space)
        profiles.append(profile_from_dict(job.profile) if job.profile
                        else natural_profile(space))
    if cfg.transfer is not None:
        profiles.extend(profile_from_dict(p) for p in cfg.transfer.profiles)
    if not profiles:
        raise ConfigError("profile needs spaces or transfer profiles")
    seen = set()
    for profile in profiles:
        if profile.label in seen:
            continue
        seen.add(profile.label)
        stem = profile.label.replace("/", "_").replace(" ", "")
        stem = "".join(c for c in stem if c.isalnum() or c in "-_.,()|")
        mass = profile.mass
        hi = (1.0 if not np.isfinite(mass) else mass) * (1.0 - 1e-9)
        t = np.geomspace(cfg.t_min or 1e-6, hi, max(cfg.grid, 256))
        I = np.asarray(profile(t), dtype=float)
        rows = zip(t, I)
        buf = io.StringIO()
        writer = csv.writer(buf, quoting=csv.QUOTE_MINIMAL,
                            lineterminator="\r\n")
        writer.writerow(["t", "I", "phi"])
        for ti, Ii in rows:
            writer.writerow([repr(float(ti)), repr(float(Ii)),
                             repr(float(ti / Ii))])
        _write_text(os.path.join(cfg.out, f"profile_{stem}.csv"),
                    buf.getvalue())
        ok, margin = gaussian_type_check(profile)
        doc = {"label": profile.label, "mass": mass,
               "is_concave": profile.is_concave,
               "is_symmetric_about_half": profile.is_symmetric_about_half,
               "zero_at_zero": profile.zero_at_zero,
               "lower_bound_only": profile.lower_bound_only,
               "gaussian_type": {"ok": ok, "margin": margin}}
        _write_text(os.path.join(cfg.out, f"profile_{stem}.json"),
                    json_dumps(doc) + "\n")
        if not cfg_json_only(cfg):
            from .plots import profile_plot

            profile_plot(profile, os.path.join(cfg.out,
                                               f"profile_{stem}.svg"))
    print(f"wrote {len(seen)} profile tables to {cfg.out}")
    return 0


def cmd_suite(cfg: RunConfig) -> int:
    code = cmd_verify(cfg)
    if cfg.transfer is not None:
        cmd_transfer(cfg)
    cmd_profile(cfg)
    if cfg.function is not None:
        cmd_rearrange(cfg)
    return code


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="isoperim",
        description="rearrangement and isoperimetric inequality checks")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
            ("verify", "run inequality checks over the corpus"),
            ("rearrange", "write rearrangement curves for one function"),
            ("transfer", "tabulate transference integrals"),
            ("profile", "tabulate profiles and structure checks"),
            ("suite", "verify + transfer + profile + rearrange")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", metavar="PATH", default=None,
                       help="JSON run config (default: built-in demo run)")
        p.add_argument("--out", metavar="DIR", default=None,
                       help="output directory (overrides config)")
        p.add_argument("--seed", metavar="N", type=int, default=None,
                       help="seed override for sampled checks")
        p.add_argument("--grid", metavar="N", type=int, default=None,
                       help="t-grid point count override")
        p.add_argument("--tmin", metavar="X", type=float, default=None,
                       help="lower t cutoff override")
        p.add_argument("--json-only", action="store_true",
                       help="write JSON only (no CSV or SVG)")
    return parser


_COMMANDS = {"verify": cmd_verify, "rearrange": cmd_rearrange,
             "transfer": cmd_transfer, "profile": cmd_profile,
             "suite": cmd_suite}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _load_config(args)
        _set_json_only(cfg, args.json_only)
        return _COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"precondition error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
