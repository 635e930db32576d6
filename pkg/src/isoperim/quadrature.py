"""Shared quadrature helpers for integrals against dt/t.

Most norm and inequality evaluations reduce to integrals of the form
``int g(t) dt/t`` over an interval clamped away from the endpoint
singularities.  They are computed on a log-spaced grid by the composite
trapezoid rule in u = log t, with an optional Richardson-style check
(halving the node count must move the value by less than a relative
tolerance).  Callers add closed-form head and tail corrections where the
integrand has a known elementary form near the clamped endpoints.
"""

from __future__ import annotations

from typing import Callable, Tuple

import numpy as np

DEFAULT_NODES = 4096
RICHARDSON_RTOL = 1e-6

_trapezoid = getattr(np, "trapezoid", None) or np.trapz

__all__ = [
    "DEFAULT_NODES",
    "RICHARDSON_RTOL",
    "log_grid",
    "integrate_dt_over_t",
    "integrate_dt",
    "gauss_segments",
    "gauss_segment_values",
]


def log_grid(lo: float, hi: float, n: int) -> np.ndarray:
    """Geometrically spaced grid of ``n`` points on [lo, hi]."""
    if not (0.0 < lo < hi):
        raise ValueError(f"log grid needs 0 < lo < hi, got [{lo}, {hi}]")
    if n < 2:
        raise ValueError("log grid needs at least two points")
    return np.geomspace(lo, hi, n)


def _trapezoid_log(g: Callable[[np.ndarray], np.ndarray], lo: float, hi: float,
                   nodes: int) -> float:
    t = log_grid(lo, hi, nodes)
    # int g dt/t = int g(e^u) du
    return float(_trapezoid(np.asarray(g(t), dtype=float), np.log(t)))


def integrate_dt_over_t(g: Callable[[np.ndarray], np.ndarray], lo: float,
                        hi: float, nodes: int = DEFAULT_NODES,
                        check: bool = False) -> Tuple[float, float]:
    """Integrate ``g(t)/t`` over [lo, hi] on a log-spaced trapezoid grid.

    Returns ``(value, richardson_delta)`` where the delta is the relative
    change when the node count is halved (0.0 when ``check`` is off).
    """
    if hi <= lo:
        return 0.0, 0.0
    value = _trapezoid_log(g, lo, hi, nodes)
    delta = 0.0
    if check:
        coarse = _trapezoid_log(g, lo, hi, max(nodes // 2, 2))
        scale = max(abs(value), abs(coarse), 1e-300)
        delta = abs(value - coarse) / scale
    return value, delta


def integrate_dt(g: Callable[[np.ndarray], np.ndarray], lo: float, hi: float,
                 nodes: int = DEFAULT_NODES) -> float:
    """Integrate ``g(t) dt`` over [lo, hi] on a log-spaced trapezoid grid.

    Used for integrands whose variation concentrates near ``lo``; the
    log-spaced mesh resolves that end at no extra cost.
    """
    if hi <= lo:
        return 0.0
    t = log_grid(lo, hi, nodes)
    return float(_trapezoid(np.asarray(g(t), dtype=float), t))


_GAUSS_X, _GAUSS_W = np.polynomial.legendre.leggauss(8)


def gauss_segments(g: Callable[[np.ndarray], np.ndarray],
                   edges: np.ndarray) -> float:
    """Integrate ``g`` over consecutive segments with 8-point Gauss rules.

    ``edges`` is an increasing array of segment endpoints.  Intended for
    piecewise-smooth integrands whose breakpoints are known: the rule is
    exact for polynomials of degree 15 on each segment, so step-aligned
    integrands integrate to machine accuracy.
    """
    edges = np.asarray(edges, dtype=float)
    if edges.size < 2:
        return 0.0
    return float(np.sum(gauss_segment_values(g, edges)))


def gauss_segment_values(g: Callable[[np.ndarray], np.ndarray],
                         edges: np.ndarray) -> np.ndarray:
    """Per-segment 8-point Gauss integrals; one value per edge pair."""
    edges = np.asarray(edges, dtype=float)
    if np.any(np.diff(edges) < 0):
        raise ValueError("edges must be non-decreasing")
    a = edges[:-1]
    h = np.diff(edges)
    # nodes shaped (segments, 8)
    x = a[:, None] + (_GAUSS_X[None, :] + 1.0) * (h[:, None] / 2.0)
    vals = np.asarray(g(x.ravel()), dtype=float).reshape(x.shape)
    return (vals @ _GAUSS_W) * (h / 2.0)
