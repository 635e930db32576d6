"""Verdicts, verification reports, and their serialized forms.

A report holds the sampled left and right sides of one inequality (or
identity) for one test function, the empirical constant, and a verdict.
Serialization is deterministic: JSON uses sorted keys, compact
separators and shortest-round-trip floats; non-finite floats become the
strings ``"inf"`` / ``"-inf"`` / ``"nan"``.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SCHEMA_VERSION",
    "Verdict",
    "VerificationReport",
    "ratio_array",
    "empirical_constant",
    "explicit_verdict",
    "identity_verdict",
    "reported_verdict",
    "skipped_verdict",
    "json_dumps",
    "summary_csv",
]

SCHEMA_VERSION = 1

_KINDS = ("holds_with_constant", "identity_within", "violated", "skipped")


@dataclass(frozen=True)
class Verdict:
    """Outcome of one verification.

    ``passed`` is what drives exit codes: pass/fail checks set it from
    the tolerance comparison, report-only checks set it to finiteness,
    and ``skipped`` (hypothesis not satisfied, precondition not met for
    this input) never fails a run.
    """

    kind: str
    passed: bool
    constant: float | None = None
    epsilon: float | None = None
    t: float | None = None
    ratio: float | None = None
    message: str = ""

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError(f"unknown verdict kind {self.kind!r}")

    def describe(self) -> str:
        if self.kind == "holds_with_constant":
            return f"holds_with_constant({_fmt(self.constant)})"
        if self.kind == "identity_within":
            return f"identity_within({_fmt(self.epsilon)})"
        if self.kind == "violated":
            return f"violated(t={_fmt(self.t)}, ratio={_fmt(self.ratio)})"
        return f"skipped({self.message})"

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "passed": self.passed}
        for key in ("constant", "epsilon", "t", "ratio"):
            v = getattr(self, key)
            if v is not None:
                d[key] = v
        if self.message:
            d["message"] = self.message
        return d


def _fmt(x) -> str:
    if x is None:
        return "-"
    x = float(x)
    if not np.isfinite(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.6g}"


def ratio_array(lhs: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Pointwise lhs/rhs with the conventions 0/0 -> 0 and x/0 -> inf
    for x > 0 (negative lhs against a zero rhs also counts as 0: the
    inequality holds there)."""
    lhs = np.asarray(lhs, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    out = np.empty_like(lhs)
    zero = rhs == 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        out[~zero] = lhs[~zero] / rhs[~zero]
    out[zero & (lhs <= 0.0)] = 0.0
    out[zero & (lhs > 0.0)] = np.inf
    return out


def empirical_constant(lhs: np.ndarray, rhs: np.ndarray) -> float:
    """Max of the pointwise ratios (empty grid counts as 0)."""
    r = ratio_array(lhs, rhs)
    return float(np.max(r)) if r.size else 0.0


def explicit_verdict(tgrid, lhs, rhs, constant: float,
                     slack) -> Verdict:
    """Pass/fail against an explicit constant.

    Passes iff ``lhs <= constant * rhs * (1 + slack)`` pointwise;
    ``slack`` may be a scalar or an array aligned with the grid.  On
    failure the verdict carries the worst grid point and its ratio.
    """
    tgrid = np.asarray(tgrid, dtype=float)
    lhs = np.asarray(lhs, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    slack = np.broadcast_to(np.asarray(slack, dtype=float), lhs.shape)
    emp = empirical_constant(lhs, rhs)
    allowed = constant * rhs * (1.0 + slack)
    bad = lhs > allowed
    if not np.any(bad):
        return Verdict("holds_with_constant", True, constant=emp)
    ratios = ratio_array(lhs, rhs)
    margin = np.where(bad, ratios, -np.inf)
    i = int(np.argmax(margin))
    return Verdict("violated", False, constant=emp,
                   t=float(tgrid[i]), ratio=float(ratios[i]))


def identity_verdict(lhs, rhs, tol: float) -> Verdict:
    """Max absolute discrepancy verdict for an identity check."""
    eps = float(np.max(np.abs(np.asarray(lhs, dtype=float)
                              - np.asarray(rhs, dtype=float))))
    return Verdict("identity_within", eps <= tol, epsilon=eps)


def reported_verdict(constant: float, message: str = "") -> Verdict:
    """Unspecified-constant inequality: record the constant and pass
    iff it is finite (stability across refinements is asserted by the
    test suite, not per report)."""
    return Verdict("holds_with_constant", bool(np.isfinite(constant)),
                   constant=float(constant), message=message)


def skipped_verdict(message: str) -> Verdict:
    return Verdict("skipped", True, message=message)


@dataclass(frozen=True)
class VerificationReport:
    inequality: str
    label: str
    tgrid: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    verdict: Verdict
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        t = np.atleast_1d(np.asarray(self.tgrid, dtype=float))
        l = np.atleast_1d(np.asarray(self.lhs, dtype=float))
        r = np.atleast_1d(np.asarray(self.rhs, dtype=float))
        if not (t.shape == l.shape == r.shape):
            raise ValueError("tgrid, lhs and rhs must align")
        object.__setattr__(self, "tgrid", t)
        object.__setattr__(self, "lhs", l)
        object.__setattr__(self, "rhs", r)

    @property
    def empirical_constant(self) -> float:
        return empirical_constant(self.lhs, self.rhs)

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "inequality": self.inequality,
            "label": self.label,
            "tgrid": self.tgrid.tolist(),
            "lhs": self.lhs.tolist(),
            "rhs": self.rhs.tolist(),
            "empirical_constant": self.empirical_constant,
            "verdict": self.verdict.to_dict(),
            "metadata": self.metadata,
        }

    def csv_row(self) -> list:
        return [self.inequality, self.label,
                repr(self.empirical_constant), self.verdict.describe()]


def _sanitize(obj):
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_sanitize(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if np.isnan(x):
            return "nan"
        if np.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def json_dumps(obj) -> str:
    """Deterministic JSON: sorted keys, compact separators, non-finite
    floats as strings."""
    return json.dumps(_sanitize(obj), sort_keys=True,
                      separators=(",", ":"), allow_nan=False)


def summary_csv(reports) -> str:
    """RFC-4180 summary table, one row per report."""
    buf = io.StringIO()
    writer = csv.writer(buf, quoting=csv.QUOTE_MINIMAL, lineterminator="\r\n")
    writer.writerow(["inequality", "label", "empirical_constant", "verdict"])
    for rep in reports:
        writer.writerow(rep.csv_row())
    return buf.getvalue()
