"""Histogram prior estimated from Laplace-randomized labels.

Bins have width `sigma` and are anchored on the mean `mu` of the randomized
labels. The outermost nodes are the minimum and maximum randomized label, so
the first and last bins are usually narrower than `sigma`.
"""
from __future__ import annotations

import json
import logging
import math
import typing as t
from dataclasses import asdict, dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .baselines import AdditiveNoiseSpec, NoiseKind, laplace_randomize_many
from .density import DensityMode, StepDensity, make_step_density
from .errors import (
    DegenerateSpread,
    EmptyDataset,
    InvalidParameter,
    NonFiniteLabel,
    WrongKind,
)
from .results import NOTHING, Option
from .streams import RandomStream

logger = logging.getLogger(__name__)

MAX_BINS = 4096
FALLBACK_RELATIVE_WIDTH = 1e-6


@dataclass(frozen=True)
class HistogramPlan:
    """Intermediate values of the histogram estimator, kept for replay."""

    mu: float
    sigma: float
    k0: int
    k1: int
    nodes: tuple[float, ...]
    bin_counts: tuple[int, ...]
    degenerate: bool = False

    @property
    def n(self) -> int:
        return sum(self.bin_counts)

    @property
    def masses(self) -> tuple[float, ...]:
        """Raw bin masses `count / n` before conversion to density heights."""
        n = self.n
        return tuple(count / n for count in self.bin_counts)

    def to_dict(self) -> dict[str, t.Any]:
        data = asdict(self)
        data["nodes"] = list(self.nodes)
        data["bin_counts"] = list(self.bin_counts)
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _bin_range(mu: float, sigma: float, lo: float, hi: float) -> tuple[int, int]:
    """Smallest `k0`, `k1` with `mu + k0*sigma <= lo < mu + (k0+1)*sigma` and
    `mu + k1*sigma < hi <= mu + (k1+1)*sigma`."""
    k0 = math.floor((lo - mu) / sigma)
    while mu + k0 * sigma > lo:
        k0 -= 1
    while mu + (k0 + 1) * sigma <= lo:
        k0 += 1
    k1 = math.ceil((hi - mu) / sigma) - 1
    while mu + k1 * sigma >= hi:
        k1 -= 1
    while mu + (k1 + 1) * sigma < hi:
        k1 += 1
    return k0, k1


def _fallback_histogram(values: NDArray[np.float64]) -> tuple[StepDensity, HistogramPlan]:
    c = float(values[0])
    width = max(abs(c), 1.0) * FALLBACK_RELATIVE_WIDTH
    nodes = (c - width, c + width)
    logger.warning(
        "all %d randomized labels equal %r, falling back to a single bin of half-width %r",
        values.size,
        c,
        width,
    )
    plan = HistogramPlan(c, width, 0, 0, nodes, (int(values.size),), degenerate=True)
    return make_step_density(nodes, [1.0], DensityMode.BIN_MASSES), plan


def histogram_from_randomized(
    randomized: ArrayLike,
    sigma: Option[float] = NOTHING,
    *,
    fallback: bool = False,
) -> tuple[StepDensity, HistogramPlan]:
    """Bin already randomized labels into a step density.

    `sigma` defaults to the (population) standard deviation of the randomized
    labels.

    Raises:
        EmptyDataset: `randomized` is empty.
        DegenerateSpread: all values are equal and `fallback` is not set.
    """
    values = np.asarray(randomized, dtype=float).ravel()
    if values.size == 0:
        raise EmptyDataset("cannot estimate a prior from zero labels")
    if not np.all(np.isfinite(values)):
        raise NonFiniteLabel("randomized labels must be finite")
    lo, hi = float(values.min()), float(values.max())
    if lo == hi:
        if fallback:
            return _fallback_histogram(values)
        raise DegenerateSpread(f"all {values.size} randomized labels equal {lo!r}")
    mu = float(values.mean())
    width = sigma.unwrap_or(float(values.std()))
    if not (width > 0 and math.isfinite(width)):
        raise InvalidParameter(f"histogram bin width must be positive, got {width}")
    k0, k1 = _bin_range(mu, width, lo, hi)
    if k1 - k0 + 1 > MAX_BINS:
        raise InvalidParameter(
            f"bin width {width} yields {k1 - k0 + 1} bins, more than {MAX_BINS}"
        )
    nodes = [lo] + [mu + (i + k0) * width for i in range(1, k1 - k0 + 1)] + [hi]
    if any(b <= a for a, b in zip(nodes, nodes[1:])):
        raise DegenerateSpread(
            f"bin width {width} is too small to separate labels around {mu!r}"
        )
    node_array = np.asarray(nodes)
    index = np.clip(np.searchsorted(node_array, values, side="right") - 1, 0, len(nodes) - 2)
    counts = np.bincount(index, minlength=len(nodes) - 1)
    plan = HistogramPlan(
        mu=mu,
        sigma=width,
        k0=k0,
        k1=k1,
        nodes=tuple(nodes),
        bin_counts=tuple(int(c) for c in counts),
    )
    density = make_step_density(node_array, counts / values.size, DensityMode.BIN_MASSES)
    logger.debug("histogram with %d bins, mu=%r, sigma=%r", density.k, mu, width)
    return density, plan


def estimate_prior(
    labels: ArrayLike,
    epsilon1: float,
    noise: AdditiveNoiseSpec,
    sigma: Option[float] = NOTHING,
    *,
    stream: RandomStream,
    fallback: bool = False,
) -> tuple[StepDensity, HistogramPlan]:
    """Randomize each label once with Laplace noise and bin the result.

    The returned prior costs `epsilon1` of privacy budget. Everything after the
    noising step is post-processing.

    Raises:
        EmptyDataset: `labels` is empty.
        WrongKind: `noise` is not a Laplace spec.
        DegenerateSpread: see `histogram_from_randomized`.
    """
    values = np.asarray(labels, dtype=float).ravel()
    if values.size == 0:
        raise EmptyDataset("cannot estimate a prior from zero labels")
    if not np.all(np.isfinite(values)):
        raise NonFiniteLabel("labels must be finite")
    if noise.kind is not NoiseKind.LAPLACE:
        raise WrongKind(f"the prior estimator needs Laplace noise, got {noise.kind.value}")
    if noise.epsilon != epsilon1:
        raise InvalidParameter(
            f"noise spec has epsilon={noise.epsilon}, expected epsilon1={epsilon1}"
        )
    randomized = laplace_randomize_many(values, noise, stream)
    density, plan = histogram_from_randomized(randomized, sigma, fallback=fallback)
    logger.info(
        "estimated prior over %d labels with epsilon1=%s: %d bins on [%r, %r]",
        values.size,
        epsilon1,
        density.k,
        *density.support,
    )
    return density, plan
