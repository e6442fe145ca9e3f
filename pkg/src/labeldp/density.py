"""Piecewise-constant probability densities.

A `StepDensity` is the prior consumed by the interval optimizer and produced by
the histogram estimator. Bins are half-open `[n_i, n_{i+1})` except the last
one which is closed, integration is exact.
"""
from __future__ import annotations

import json
import math
import typing as t
from dataclasses import dataclass
from enum import Enum

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import (
    InvalidDensity,
    NegativeMass,
    NonMonotoneNodes,
    ReversedBounds,
    ShapeMismatch,
    ZeroTotalMass,
)
from .streams import RandomStream

NORMALIZATION_TOLERANCE = 1e-9


class DensityMode(str, Enum):
    """How the values handed to `make_step_density` are to be read."""

    HEIGHTS = "heights"
    """Values are density heights (probability per label unit)."""

    BIN_MASSES = "bin_masses"
    """Values are probability masses per bin, divided by bin width on construction."""


@dataclass(frozen=True)
class StepDensity:
    """Normalized piecewise-constant density with `len(nodes) - 1` bins."""

    nodes: tuple[float, ...]
    heights: tuple[float, ...]

    def __post_init__(self) -> None:
        _check_shape(self.nodes, self.heights)
        total = math.fsum(
            h * (b - a) for h, a, b in zip(self.heights, self.nodes, self.nodes[1:])
        )
        if abs(total - 1.0) > NORMALIZATION_TOLERANCE:
            raise InvalidDensity(f"density integrates to {total!r}, expected 1")

    @property
    def k(self) -> int:
        """Number of bins."""
        return len(self.heights)

    @property
    def support(self) -> tuple[float, float]:
        return self.nodes[0], self.nodes[-1]

    @property
    def node_array(self) -> NDArray[np.float64]:
        return np.asarray(self.nodes, dtype=float)

    @property
    def height_array(self) -> NDArray[np.float64]:
        return np.asarray(self.heights, dtype=float)

    @property
    def widths(self) -> NDArray[np.float64]:
        return np.diff(self.node_array)

    @property
    def masses(self) -> NDArray[np.float64]:
        """Probability mass of each bin."""
        return self.height_array * self.widths

    def bin_index(self, y: float) -> int | None:
        """Index of the bin holding `y`, `None` outside the support."""
        if y < self.nodes[0] or y > self.nodes[-1] or math.isnan(y):
            return None
        if y == self.nodes[-1]:
            return self.k - 1
        return int(np.searchsorted(self.node_array, y, side="right")) - 1

    def to_dict(self) -> dict[str, list[float]]:
        return {"nodes": list(self.nodes), "heights": list(self.heights)}

    @classmethod
    def from_dict(cls, data: t.Mapping[str, t.Any]) -> StepDensity:
        try:
            nodes = [float(v) for v in data["nodes"]]
            heights = [float(v) for v in data["heights"]]
        except (KeyError, TypeError) as exc:
            raise InvalidDensity(
                "a density needs 'nodes' and 'heights' lists"
            ) from exc
        _check_shape(nodes, heights)
        total = math.fsum(h * (b - a) for h, a, b in zip(heights, nodes, nodes[1:]))
        # Stored densities are already normalized; keep their bits untouched
        if abs(total - 1.0) <= NORMALIZATION_TOLERANCE:
            return cls(tuple(nodes), tuple(heights))
        return make_step_density(nodes, heights, DensityMode.HEIGHTS)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> StepDensity:
        return cls.from_dict(json.loads(text))


def _check_shape(nodes: t.Sequence[float], values: t.Sequence[float]) -> None:
    if len(nodes) < 2:
        raise ShapeMismatch("a step density needs at least two nodes")
    if len(values) != len(nodes) - 1:
        raise ShapeMismatch(
            f"expected {len(nodes) - 1} values for {len(nodes)} nodes, got {len(values)}"
        )
    if not all(math.isfinite(n) for n in nodes):
        raise NonMonotoneNodes("nodes must be finite")
    if any(b <= a for a, b in zip(nodes, nodes[1:])):
        raise NonMonotoneNodes(f"nodes must be strictly increasing: {list(nodes)}")
    if any(not math.isfinite(v) for v in values):
        raise NegativeMass("values must be finite")
    if any(v < 0 for v in values):
        raise NegativeMass(f"values must be non-negative: {list(values)}")


def make_step_density(
    nodes: ArrayLike,
    values: ArrayLike,
    mode: DensityMode | str = DensityMode.HEIGHTS,
) -> StepDensity:
    """Build a normalized step density from heights or from bin masses.

    Raises:
        NonMonotoneNodes: nodes are not strictly increasing.
        NegativeMass: a value is negative.
        ZeroTotalMass: every value is zero.
    """
    node_list = [float(v) for v in np.asarray(nodes, dtype=float).ravel()]
    value_list = [float(v) for v in np.asarray(values, dtype=float).ravel()]
    _check_shape(node_list, value_list)
    widths = np.diff(np.asarray(node_list))
    heights = np.asarray(value_list)
    if DensityMode(mode) is DensityMode.BIN_MASSES:
        heights = heights / widths
    total = float(np.dot(heights, widths))
    if total <= 0.0:
        raise ZeroTotalMass("at least one bin must carry positive mass")
    heights = heights / total
    return StepDensity(tuple(node_list), tuple(float(h) for h in heights))


def uniform_density(lo: float, hi: float) -> StepDensity:
    return make_step_density([lo, hi], [1.0])


def pdf_at(d: StepDensity, y: float) -> float:
    """Density height at `y` (0 outside the support)."""
    index = d.bin_index(y)
    return 0.0 if index is None else d.heights[index]


def integrate(d: StepDensity, a: float, b: float) -> float:
    """Exact mass of `[a, b]`."""
    if a > b:
        raise ReversedBounds(f"lower bound {a} is above upper bound {b}")
    nodes = d.node_array
    overlap = np.minimum(b, nodes[1:]) - np.maximum(a, nodes[:-1])
    return float(np.dot(d.height_array, np.clip(overlap, 0.0, None)))


def cdf(d: StepDensity, x: ArrayLike) -> NDArray[np.float64]:
    """Cumulative distribution function, vectorized over `x`."""
    nodes = d.node_array
    heights = d.height_array
    cumulative = np.concatenate(([0.0], np.cumsum(d.masses)))
    points = np.asarray(x, dtype=float)
    index = np.clip(np.searchsorted(nodes, points, side="right") - 1, 0, d.k - 1)
    clipped = np.clip(points, nodes[0], nodes[-1])
    return cumulative[index] + heights[index] * (clipped - nodes[index])


def sample_density(d: StepDensity, n: int, stream: RandomStream) -> NDArray[np.float64]:
    """Draw `n` values from `d` by inverse transform, one uniform per value."""
    nodes = d.node_array
    heights = d.height_array
    cumulative = np.concatenate(([0.0], np.cumsum(d.masses)))
    u = stream.uniform(size=n) * cumulative[-1]
    index = np.clip(np.searchsorted(cumulative, u, side="right") - 1, 0, d.k - 1)
    safe = np.where(heights[index] > 0.0, heights[index], 1.0)
    values = nodes[index] + (u - cumulative[index]) / safe
    return np.clip(values, nodes[0], nodes[-1])


def restrict_to_bounds(d: StepDensity, lo: float, hi: float) -> StepDensity:
    """Restrict `d` to `[lo, hi]` and renormalize.

    Falls back to the uniform density on `[lo, hi]` when `d` puts no mass there.
    """
    if lo >= hi:
        raise ReversedBounds(f"empty bounds [{lo}, {hi}]")
    a, b = max(lo, d.nodes[0]), min(hi, d.nodes[-1])
    if a >= b or integrate(d, a, b) <= 0.0:
        return uniform_density(lo, hi)
    nodes = [a] + [n for n in d.nodes if a < n < b] + [b]
    heights = [pdf_at(d, 0.5 * (left + right)) for left, right in zip(nodes, nodes[1:])]
    return make_step_density(nodes, heights, DensityMode.HEIGHTS)
