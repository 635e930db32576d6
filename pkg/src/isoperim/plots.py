"""SVG figure rendering for reports and rearrangement curves.

Figures are written next to the delimited output, one file per report.
Rendering is deterministic: the SVG date header is suppressed and the
element-id hash salt is pinned, so repeated runs produce identical
bytes.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

__all__ = ["rearrangement_plot", "report_plot", "profile_plot"]

_SVG_OPTS = {"format": "svg", "metadata": {"Date": None}}

plt.rcParams["svg.hashsalt"] = "isoperim"


def _step_xy(step):
    """Staircase polyline for a step function, closed with a drop to 0."""
    bp = step.breakpoints
    x = np.repeat(bp, 2)[1:]
    y = np.append(np.repeat(step.values, 2), 0.0)
    return x, y


def _finish(fig, path):
    fig.savefig(path, **_SVG_OPTS)
    plt.close(fig)


def rearrangement_plot(star, avg, signed, path) -> None:
    """One panel with f*, f**, the signed rearrangement and the
    oscillation f** - f*."""
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    x, y = _step_xy(star)
    ax.plot(x, y, label="f*", lw=1.2)
    ts = np.linspace(star.breakpoints[0] + 1e-12, star.breakpoints[-1],
                     512)[1:]
    ax.plot(ts, avg.value(ts), label="f**", lw=1.2)
    xs, ys = _step_xy(signed)
    ax.plot(xs, ys, label="signed", lw=1.0, ls="--")
    ax.plot(ts, avg.oscillation(ts), label="f** - f*", lw=1.0, ls=":")
    ax.set_xlabel("t")
    ax.legend(loc="best", fontsize=8)
    ax.grid(True, alpha=0.3)
    _finish(fig, path)


def report_plot(report, path) -> None:
    """Both sides of a verification report over its t-grid."""
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    t = np.asarray(report.tgrid, dtype=float)
    lhs = np.asarray(report.lhs, dtype=float)
    rhs = np.asarray(report.rhs, dtype=float)
    if t.size > 1 and np.all(t > 0):
        ax.set_xscale("log")
    ax.plot(t, lhs, marker=".", lw=1.0, label="lhs")
    ax.plot(t, rhs, marker=".", lw=1.0, label="rhs")
    ax.set_xlabel("t")
    ax.set_title(f"{report.inequality} [{report.label}]: {report.verdict}",
                 fontsize=9)
    ax.legend(loc="best", fontsize=8)
    ax.grid(True, alpha=0.3)
    _finish(fig, path)


def profile_plot(profile, path, t_min: float = 1e-6) -> None:
    """The profile I(t) and the map t/I(t) on a log t-grid."""
    mass = profile.mass
    hi = (1.0 if not np.isfinite(mass) else mass) * (1.0 - 1e-9)
    t = np.geomspace(t_min, hi, 512)
    I = np.asarray(profile(t), dtype=float)
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.0, 4.0))
    ax1.plot(t, I, lw=1.2)
    ax1.set_xscale("log")
    ax1.set_xlabel("t")
    ax1.set_title(f"I(t): {profile.label}", fontsize=9)
    ax1.grid(True, alpha=0.3)
    ax2.plot(t, t / I, lw=1.2)
    ax2.set_xscale("log")
    ax2.set_yscale("log")
    ax2.set_xlabel("t")
    ax2.set_title("t / I(t)", fontsize=9)
    ax2.grid(True, alpha=0.3)
    _finish(fig, path)
