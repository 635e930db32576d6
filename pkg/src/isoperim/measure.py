"""Discretized measure spaces and rearrangement primitives.

A measure space is a finite family of cells, each carrying a positive
weight (its measure) and a center coordinate.  Functions are cell-center
samples (:class:`GridFunction`).  Their decreasing rearrangements are
right-continuous step functions on ``[0, total_mass)``
(:class:`StepFunction`), and running averages of step functions are
:class:`PiecewiseAverage` objects evaluated exactly from the piecewise
linear primitive.

Conventions
-----------
* Rearrangements sort on ``(|value|, cell index)`` with a stable sort, so
  ties break by cell index and outputs are reproducible.
* The signed rearrangement sorts the raw values in decreasing order; it is
  equimeasurable with ``f`` itself rather than ``|f|``.
* Step functions are right-continuous and evaluate to 0 at and beyond
  their total length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterable, Sequence

import numpy as np

from .normal import norm_cdf, norm_ppf

__all__ = [
    "MeasureSpace",
    "UnitCube",
    "EuclideanBox",
    "GaussianLine",
    "WeightedInterval",
    "GridFunction",
    "StepFunction",
    "PiecewiseAverage",
    "space_from_dict",
    "decreasing_rearrangement",
    "signed_rearrangement",
    "maximal_average",
    "distribution_function",
    "oscillation",
    "truncation",
    "support_measure",
    "level_tail_integral",
    "profile_level_integral",
]


# ---------------------------------------------------------------------------
# measure spaces
# ---------------------------------------------------------------------------


class MeasureSpace:
    """Common interface of the concrete space descriptors.

    Subclasses provide ``kind``, ``dimension``, ``weights`` (cell
    measures), ``centers`` (cell center coordinates, shape
    ``(ncells, dimension)``) and ``total_mass``.
    """

    kind: str = "abstract"

    @property
    def dimension(self) -> int:
        raise NotImplementedError

    @property
    def ncells(self) -> int:
        return self.weights.size

    @cached_property
    def weights(self) -> np.ndarray:
        raise NotImplementedError

    @cached_property
    def centers(self) -> np.ndarray:
        raise NotImplementedError

    @cached_property
    def total_mass(self) -> float:
        return math.fsum(self.weights.tolist())

    def to_dict(self) -> dict:
        raise NotImplementedError

    # grid spaces override these
    @property
    def shape(self) -> tuple:
        raise NotImplementedError(f"{self.kind} has no grid shape")

    @property
    def cell_width(self) -> float:
        raise NotImplementedError(f"{self.kind} has no uniform cell width")


@dataclass(frozen=True)
class UnitCube(MeasureSpace):
    """Unit cube ``[0,1]^n`` with Lebesgue measure on an ``r^n`` grid."""

    n: int
    r: int
    kind = "unit_cube"

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("dimension must be >= 1")
        if self.r < 2:
            raise ValueError("resolution must be >= 2")

    @property
    def dimension(self) -> int:
        return self.n

    @property
    def shape(self) -> tuple:
        return (self.r,) * self.n

    @property
    def cell_width(self) -> float:
        return 1.0 / self.r

    @cached_property
    def weights(self) -> np.ndarray:
        return np.full(self.r ** self.n, self.cell_width ** self.n)

    @cached_property
    def centers(self) -> np.ndarray:
        axis = (np.arange(self.r) + 0.5) * self.cell_width
        grids = np.meshgrid(*([axis] * self.n), indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    @cached_property
    def total_mass(self) -> float:
        return 1.0

    def to_dict(self) -> dict:
        return {"kind": self.kind, "n": self.n, "r": self.r}


@dataclass(frozen=True)
class EuclideanBox(MeasureSpace):
    """Box ``[0,L]^n`` with Lebesgue measure, a finite-mass stand-in for
    the infinite-measure Euclidean setting (mass budget ``L^n``)."""

    n: int
    L: float
    r: int
    kind = "euclidean_box"

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("dimension must be >= 1")
        if not self.L > 0:
            raise ValueError("side length must be positive")
        if self.r < 2:
            raise ValueError("resolution must be >= 2")

    @property
    def dimension(self) -> int:
        return self.n

    @property
    def shape(self) -> tuple:
        return (self.r,) * self.n

    @property
    def cell_width(self) -> float:
        return self.L / self.r

    @cached_property
    def weights(self) -> np.ndarray:
        return np.full(self.r ** self.n, self.cell_width ** self.n)

    @cached_property
    def centers(self) -> np.ndarray:
        axis = (np.arange(self.r) + 0.5) * self.cell_width
        grids = np.meshgrid(*([axis] * self.n), indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "n": self.n, "L": self.L, "r": self.r}


@dataclass(frozen=True)
class GaussianLine(MeasureSpace):
    """Real line with the standard Gaussian measure, truncated to
    ``[-R, R]`` and split into ``m`` equal-probability cells.

    Cell boundaries are Gaussian quantiles and cell centers are the
    conditional median of each cell, which makes rearrangements of
    monotone functions exact at step midpoints.
    """

    m: int
    R: float = 8.0
    kind = "gaussian_line"

    def __post_init__(self) -> None:
        if self.m < 2:
            raise ValueError("need at least two cells")
        if not self.R > 0:
            raise ValueError("truncation radius must be positive")

    @property
    def dimension(self) -> int:
        return 1

    @property
    def shape(self) -> tuple:
        return (self.m,)

    @cached_property
    def _probs(self) -> np.ndarray:
        lo = norm_cdf(-self.R)
        hi = norm_cdf(self.R)
        return lo + (hi - lo) * np.arange(self.m + 1) / self.m

    @cached_property
    def edges(self) -> np.ndarray:
        q = norm_ppf(self._probs)
        q[0] = -self.R
        q[-1] = self.R
        return q

    @cached_property
    def centers(self) -> np.ndarray:
        p = self._probs
        return norm_ppf((p[:-1] + p[1:]) / 2.0).reshape(-1, 1)

    @cached_property
    def weights(self) -> np.ndarray:
        lo = norm_cdf(-self.R)
        hi = norm_cdf(self.R)
        return np.full(self.m, (hi - lo) / self.m)

    @cached_property
    def total_mass(self) -> float:
        return float(norm_cdf(self.R) - norm_cdf(-self.R))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "m": self.m, "R": self.R}


@dataclass(frozen=True)
class WeightedInterval(MeasureSpace):
    """Interval ``[a,b]`` with measure ``w(x) dx`` sampled on a uniform
    grid; ``w`` holds the density samples at cell centers."""

    a: float
    b: float
    w: tuple
    kind = "weighted_interval"

    def __post_init__(self) -> None:
        if not self.b > self.a:
            raise ValueError("need b > a")
        w = np.asarray(self.w, dtype=float)
        if w.ndim != 1 or w.size < 2:
            raise ValueError("need at least two density samples")
        if not np.all(w > 0):
            raise ValueError("density samples must be strictly positive")
        object.__setattr__(self, "w", tuple(float(x) for x in w))

    @property
    def dimension(self) -> int:
        return 1

    @property
    def shape(self) -> tuple:
        return (len(self.w),)

    @property
    def cell_width(self) -> float:
        return (self.b - self.a) / len(self.w)

    @cached_property
    def edges(self) -> np.ndarray:
        return self.a + self.cell_width * np.arange(len(self.w) + 1)

    @cached_property
    def centers(self) -> np.ndarray:
        return (self.edges[:-1] + self.cell_width / 2.0).reshape(-1, 1)

    @cached_property
    def weights(self) -> np.ndarray:
        return np.asarray(self.w) * self.cell_width

    def to_dict(self) -> dict:
        return {"kind": self.kind, "a": self.a, "b": self.b,
                "w": list(self.w)}


_SPACE_KINDS = {
    "unit_cube": lambda d: UnitCube(n=int(d["n"]), r=int(d["r"])),
    "euclidean_box": lambda d: EuclideanBox(n=int(d["n"]), L=float(d["L"]),
                                            r=int(d["r"])),
    "gaussian_line": lambda d: GaussianLine(m=int(d["m"]),
                                            R=float(d.get("R", 8.0))),
    "weighted_interval": lambda d: WeightedInterval(a=float(d["a"]),
                                                    b=float(d["b"]),
                                                    w=tuple(d["w"])),
}


def space_from_dict(d: dict) -> MeasureSpace:
    """Rebuild a measure space from its ``to_dict`` form."""
    try:
        kind = d["kind"]
    except (KeyError, TypeError):
        raise ValueError("space dict needs a 'kind' entry") from None
    if kind not in _SPACE_KINDS:
        raise ValueError(f"unknown space kind {kind!r}")
    known = {"unit_cube": {"kind", "n", "r"},
             "euclidean_box": {"kind", "n", "L", "r"},
             "gaussian_line": {"kind", "m", "R"},
             "weighted_interval": {"kind", "a", "b", "w"}}[kind]
    extra = set(d) - known
    if extra:
        raise ValueError(f"unknown keys in space dict: {sorted(extra)}")
    return _SPACE_KINDS[kind](d)


# ---------------------------------------------------------------------------
# functions on spaces
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GridFunction:
    """Cell-center samples of a function on a measure space."""

    space: MeasureSpace
    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.space.ncells,):
            raise ValueError(
                f"expected {self.space.ncells} values, got shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("function values must be finite")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_callable(cls, space: MeasureSpace,
                      fn: Callable[[np.ndarray], np.ndarray]) -> "GridFunction":
        """Sample ``fn`` at cell centers; ``fn`` receives an
        ``(ncells, dimension)`` coordinate array."""
        return cls(space, np.asarray(fn(space.centers), dtype=float).ravel())

    def grid_values(self) -> np.ndarray:
        return self.values.reshape(self.space.shape)

    def abs_integral(self) -> float:
        return math.fsum((np.abs(self.values) * self.space.weights).tolist())

    def lp_norm(self, p: float) -> float:
        if p == np.inf:
            return float(np.max(np.abs(self.values)))
        if not p > 0:
            raise ValueError("p must be positive")
        s = math.fsum((np.abs(self.values) ** p * self.space.weights).tolist())
        return s ** (1.0 / p)

    def to_dict(self) -> dict:
        return {"space": self.space.to_dict(),
                "values": self.values.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "GridFunction":
        extra = set(d) - {"space", "values"}
        if extra:
            raise ValueError(f"unknown keys in function dict: {sorted(extra)}")
        return cls(space_from_dict(d["space"]),
                   np.asarray(d["values"], dtype=float))


@dataclass(frozen=True)
class StepFunction:
    """Right-continuous step function on ``[0, M)``.

    ``breakpoints`` is increasing with ``breakpoints[0] == 0`` and
    ``breakpoints[-1] == M``; ``values[j]`` is the value on
    ``[breakpoints[j], breakpoints[j+1])``.  Evaluation at ``t >= M``
    returns 0.
    """

    breakpoints: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        bp = np.asarray(self.breakpoints, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        if bp.ndim != 1 or vals.ndim != 1 or bp.size != vals.size + 1:
            raise ValueError("need len(breakpoints) == len(values) + 1")
        if bp[0] != 0.0:
            raise ValueError("breakpoints must start at 0")
        if np.any(np.diff(bp) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)

    @property
    def total_length(self) -> float:
        return float(self.breakpoints[-1])

    @cached_property
    def _cumulative(self) -> np.ndarray:
        # primitive F with F(breakpoints[j]) exact
        widths = np.diff(self.breakpoints)
        return np.concatenate(([0.0], np.cumsum(widths * self.values)))

    def value(self, t) -> np.ndarray:
        """Right-continuous evaluation; 0 at and beyond total length."""
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.breakpoints, t, side="right") - 1
        inside = (idx >= 0) & (t < self.total_length)
        out = np.where(inside, self.values[np.clip(idx, 0, len(self.values) - 1)],
                       0.0)
        return out if out.ndim else float(out)

    def integral_to(self, t) -> np.ndarray:
        """Exact primitive ``F(t) = int_0^t`` of the step function."""
        t = np.asarray(t, dtype=float)
        tc = np.clip(t, 0.0, self.total_length)
        idx = np.clip(np.searchsorted(self.breakpoints, tc, side="right") - 1,
                      0, len(self.values) - 1)
        out = self._cumulative[idx] + self.values[idx] * (
            tc - self.breakpoints[idx])
        return out if out.ndim else float(out)

    def total_integral(self) -> float:
        """Exactly rounded integral (sum of value * width terms)."""
        widths = np.diff(self.breakpoints)
        return math.fsum((self.values * widths).tolist())

    def measure_above(self, t: float) -> float:
        """Length of ``{s : value(s) > t}`` for decreasing step data."""
        if np.any(np.diff(self.values) > 0):
            raise ValueError("measure_above needs non-increasing values")
        # values strictly decreasing after compression: first index <= t
        k = int(np.searchsorted(-self.values, -t, side="left"))
        return float(self.breakpoints[k])

    def step_midpoints(self) -> np.ndarray:
        return (self.breakpoints[:-1] + self.breakpoints[1:]) / 2.0

    def median_value(self) -> float:
        """Value at half mass, averaging the two adjacent steps when half
        mass is exactly a breakpoint (the order-statistic median)."""
        half = self.total_length / 2.0
        hits = np.nonzero(np.isclose(self.breakpoints[1:-1], half, rtol=0.0,
                                     atol=1e-12 * self.total_length))[0]
        if hits.size:
            j = int(hits[0])
            return float((self.values[j] + self.values[j + 1]) / 2.0)
        return float(self.value(half))

    def restrict_power(self, p: float) -> "StepFunction":
        """Pointwise power ``value ** p`` (values must be nonnegative)."""
        if np.any(self.values < 0):
            raise ValueError("power of a signed step function")
        return StepFunction(self.breakpoints, self.values ** p)

    def to_dict(self) -> dict:
        return {"breakpoints": self.breakpoints.tolist(),
                "values": self.values.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "StepFunction":
        extra = set(d) - {"breakpoints", "values"}
        if extra:
            raise ValueError(f"unknown keys in step dict: {sorted(extra)}")
        return cls(np.asarray(d["breakpoints"], dtype=float),
                   np.asarray(d["values"], dtype=float))


@dataclass(frozen=True)
class PiecewiseAverage:
    """Running average ``t -> (1/t) int_0^t g`` of a step function ``g``.

    Evaluation is exact: the primitive is piecewise linear, so the
    average is piecewise rational.  Also evaluates the oscillation
    ``average - value`` exactly, which on each step interval equals
    ``C_j / t`` for a constant ``C_j``.
    """

    step: StepFunction

    def value(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if np.any(t <= 0):
            raise ValueError("average defined for t > 0")
        out = self.step.integral_to(t) / t
        return out if out.ndim else float(out)

    def oscillation(self, t) -> np.ndarray:
        """Exact ``average(t) - step(t)`` (beyond the total length the
        step value is 0, so the tail decays like F(M)/t)."""
        t = np.asarray(t, dtype=float)
        out = np.atleast_1d(self.value(t)) - np.atleast_1d(self.step.value(t))
        return out if t.ndim else float(out[0])

    def value_at_zero(self) -> float:
        """Limit of the average as t -> 0+ (the top step value)."""
        return float(self.step.values[0])


# ---------------------------------------------------------------------------
# rearrangement operations
# ---------------------------------------------------------------------------


def _compress_steps(widths: np.ndarray, values: np.ndarray) -> StepFunction:
    """Merge consecutive equal values and build the step function."""
    if widths.size == 0:
        raise ValueError("empty function")
    keep = np.nonzero(np.concatenate(([True], values[1:] != values[:-1])))[0]
    bounds = np.append(keep, widths.size)
    merged_w = np.add.reduceat(widths, keep)
    bp = np.concatenate(([0.0], np.cumsum(merged_w)))
    return StepFunction(bp, values[keep[: bounds.size - 1]])


def decreasing_rearrangement(f: GridFunction) -> StepFunction:
    """Decreasing rearrangement of ``|f|`` with respect to the cell
    weights; stable sort on ``(|value| descending, cell index)``."""
    a = np.abs(f.values)
    order = np.lexsort((np.arange(a.size), -a))
    return _compress_steps(f.space.weights[order], a[order])


def signed_rearrangement(f: GridFunction) -> StepFunction:
    """Signed decreasing rearrangement: raw values sorted in decreasing
    order, equimeasurable with ``f`` itself."""
    order = np.lexsort((np.arange(f.values.size), -f.values))
    return _compress_steps(f.space.weights[order], f.values[order])


def maximal_average(g: StepFunction) -> PiecewiseAverage:
    """The running average operator applied to a step function."""
    return PiecewiseAverage(g)


def distribution_function(f: GridFunction, t) -> np.ndarray:
    """Measure of ``{|f| > t}`` for ``t >= 0``; vectorized over ``t``.

    Shares its construction with :func:`decreasing_rearrangement` (same
    sorted cumulative sums), so the equimeasurability identity
    ``mu_f(t) == |{f* > t}|`` holds to the float.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("distribution function defined for t >= 0")
    star = decreasing_rearrangement(f)
    out = np.empty(t.shape if t.ndim else (1,))
    for i, ti in enumerate(np.atleast_1d(t)):
        out[i] = star.measure_above(ti)
    return out.reshape(t.shape) if t.ndim else float(out[0])


def oscillation(f: GridFunction, t) -> np.ndarray:
    """Exact ``f**(t) - f*(t)`` computed through the rearrangement."""
    return maximal_average(decreasing_rearrangement(f)).oscillation(t)


def truncation(f: GridFunction, t1: float, t2: float = np.inf,
               unbounded: bool = False) -> GridFunction:
    """Two-sided truncation of ``|f|`` between levels ``t1 < t2``.

    Values are ``t2 - t1`` where ``|f| >= t2``, ``|f| - t1`` on
    ``t1 < |f| < t2`` and 0 at or below ``t1``.  Pass ``unbounded=True``
    (and ignore ``t2``) for the one-sided truncation ``(|f| - t1)_+``.
    """
    if t1 < 0:
        raise ValueError("lower truncation level must be >= 0")
    a = np.abs(f.values)
    if unbounded:
        vals = np.maximum(a - t1, 0.0)
    else:
        if not t2 > t1:
            raise ValueError("need t2 > t1")
        if not np.isfinite(t2):
            raise ValueError("pass unbounded=True for an infinite upper level")
        vals = np.clip(a - t1, 0.0, t2 - t1)
    return GridFunction(f.space, vals)


def support_measure(f: GridFunction) -> float:
    """Measure of ``{f != 0}`` (exactly rounded sum of cell weights)."""
    mask = f.values != 0.0
    return math.fsum(f.space.weights[mask].tolist())


def _value_steps(star: StepFunction):
    """Distinct levels of a decreasing step function.

    Returns ``(levels, masses)`` where ``masses[k]`` is the measure of
    ``{f > s}`` for ``s`` in ``[levels[k+1], levels[k])`` with the
    convention ``levels[-1+1] -> next lower level`` and the level list in
    decreasing order.
    """
    return star.values, star.breakpoints[1:]


def level_tail_integral(f: GridFunction, t: float) -> float:
    """Exact ``int_{f*(t)}^inf mu_f(s) ds`` from the step structure."""
    star = decreasing_rearrangement(f)
    a = float(star.value(t)) if t < star.total_length else 0.0
    values, cum = _value_steps(star)
    # mu_f(s) = cum[k] for s in [values[k+1], values[k]), with values
    # decreasing and mu = 0 above values[0]
    lower = np.concatenate((values[1:], [0.0]))
    lo = np.maximum(lower, a)
    seg = np.maximum(values - lo, 0.0)
    return math.fsum((cum * seg).tolist())


def profile_level_integral(f: GridFunction,
                           I: Callable[[np.ndarray], np.ndarray],
                           lo: float = 0.0, hi: float = np.inf) -> float:
    """Exact ``int_lo^hi I(mu_f(s)) ds`` over the value-step structure.

    ``mu_f`` is piecewise constant in the level ``s``, so the integral is
    a finite sum of ``I(mass) * segment length`` terms; no quadrature
    error beyond rounding.  Levels where the superlevel mass is zero or
    the full mass are included (``I`` decides their contribution).
    """
    if not hi > lo:
        return 0.0
    star = decreasing_rearrangement(f)
    values, cum = _value_steps(star)
    # segment [lower_k, values[k]) carries mass cum[k]
    lower = np.concatenate((values[1:], [0.0]))
    seg_lo = np.clip(lower, lo, hi)
    seg_hi = np.clip(values, lo, hi)
    seg = np.maximum(seg_hi - seg_lo, 0.0)
    return math.fsum((np.asarray(I(cum), dtype=float) * seg).tolist())
