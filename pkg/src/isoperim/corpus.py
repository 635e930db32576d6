"""Deterministic Lipschitz test corpus.

Twelve functions per space, drawn from five families (linear,
distance, bump, random-Lipschitz, indicator-smoothed) with all random
parameters taken from a single seeded generator in a fixed draw order,
so the corpus is reproducible from the seed alone.  The linear
coordinate on the Gaussian line, the tent (distance to the boundary)
and the smoothed indicators double as the worked examples the
verification suite expects.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .measure import GridFunction, MeasureSpace

__all__ = ["CorpusMember", "TestCorpus", "FAMILIES"]

FAMILIES = ("linear", "distance", "bump", "random-lipschitz",
            "indicator-smoothed")


@dataclass(frozen=True)
class CorpusMember:
    label: str
    family: str
    f: GridFunction


def _domain_bounds(space: MeasureSpace):
    """Axis-aligned domain bounds (not just the center hull)."""
    if space.kind == "unit_cube":
        n = space.dimension
        return np.zeros(n), np.ones(n)
    if space.kind == "euclidean_box":
        n = space.dimension
        return np.zeros(n), np.full(n, space.L)
    if space.kind == "gaussian_line":
        return np.array([-space.R]), np.array([space.R])
    if space.kind == "weighted_interval":
        return np.array([space.a]), np.array([space.b])
    raise ValueError(f"no domain bounds for space kind {space.kind!r}")


class TestCorpus:
    """The fixed 12-member corpus for one space."""

    __test__ = False  # not a pytest class despite the name

    def __init__(self, space: MeasureSpace, seed: int = 0):
        self.space = space
        self.seed = int(seed)
        rng = np.random.default_rng(self.seed)
        lo, hi = _domain_bounds(space)
        extent = hi - lo
        scale = float(np.mean(extent))
        members = []

        def add(label, family, fn):
            members.append(CorpusMember(
                label, family, GridFunction.from_callable(space, fn)))

        add("linear-0", "linear", lambda x: x[:, 0])
        slope = 0.25 + 0.5 * rng.random()
        offset = float(lo[0]) + rng.random() * float(extent[0])
        add("linear-1", "linear",
            lambda x: slope * (x[:, 0] - offset))

        center = (lo + hi) / 2.0
        add("distance-0", "distance",
            lambda x: np.linalg.norm(x - center, axis=1))
        add("distance-1", "distance",
            lambda x: np.min(np.minimum(x - lo, hi - x), axis=1))

        for i in range(3):
            c = lo + rng.random(lo.size) * extent
            sigma = (0.15 + 0.35 * rng.random()) * scale
            amp = 0.5 + rng.random()
            add(f"bump-{i}", "bump", lambda x, c=c, s=sigma, a=amp:
                a * np.exp(-np.sum((x - c) ** 2, axis=1) / (2.0 * s * s)))

        for i in range(3):
            waves = []
            for _ in range(5):
                m = rng.integers(1, 5, size=lo.size) * rng.choice(
                    [-1.0, 1.0], size=lo.size)
                a = rng.uniform(-1.0, 1.0)
                theta = rng.uniform(0.0, 2.0 * np.pi)
                waves.append((m, a, theta))

            def randlip(x, waves=waves, scale=scale):
                out = np.zeros(x.shape[0])
                for m, a, theta in waves:
                    freq = 2.0 * np.pi * np.linalg.norm(m) / scale
                    out += (a / freq) * np.cos(
                        2.0 * np.pi * (x @ m) / scale + theta)
                return out

            add(f"randlip-{i}", "random-lipschitz", randlip)

        for i in range(2):
            c = lo + rng.random(lo.size) * extent
            radius = (0.15 + 0.2 * rng.random()) * scale
            width = (0.3 + 0.4 * rng.random()) * radius
            add(f"smooth-ind-{i}", "indicator-smoothed",
                lambda x, c=c, r=radius, d=width: np.clip(
                    (r - np.linalg.norm(x - c, axis=1)) / d, 0.0, 1.0))

        self.members = members

    def labels(self) -> list:
        return [m.label for m in self.members]

    def get(self, label: str) -> CorpusMember:
        for m in self.members:
            if m.label == label:
                return m
        raise KeyError(label)

    def __iter__(self):
        return iter(self.members)

    def __len__(self) -> int:
        return len(self.members)
