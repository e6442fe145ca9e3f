"""Additive-noise mechanisms on bounded labels.

The Laplace mechanism feeds the histogram prior estimator. The Gaussian
mechanism is only a benchmark baseline.
"""
from __future__ import annotations

import logging
import math
import typing as t
from dataclasses import dataclass
from enum import Enum

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import (
    InvalidDelta,
    InvalidParameter,
    MissingSensitivity,
    NegativeEpsilon,
    ReversedBounds,
    WrongKind,
)
from .results import NOTHING, Option, Some
from .streams import RandomStream

logger = logging.getLogger(__name__)

DEFAULT_GAUSSIAN_DELTA = 1e-4


class NoiseKind(str, Enum):
    LAPLACE = "laplace"
    GAUSSIAN = "gaussian"


class Calibration(str, Enum):
    NONE = "none"
    """No noise is added."""

    EXACT = "exact"
    """The noise scale meets the stated privacy guarantee."""

    HEURISTIC = "heuristic"
    """Classical Gaussian scale used with `epsilon >= 1`, where it proves nothing."""


@dataclass(frozen=True)
class AdditiveNoiseSpec:
    kind: NoiseKind
    epsilon: float
    sensitivity: float
    delta: float = 0.0
    clip_bounds: Option[tuple[float, float]] = NOTHING

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", NoiseKind(self.kind))
        if not self.epsilon > 0:
            raise NegativeEpsilon(
                f"additive noise needs a positive epsilon, got {self.epsilon}"
            )
        if not (self.sensitivity > 0 and math.isfinite(self.sensitivity)):
            raise InvalidParameter(
                f"sensitivity must be positive and finite, got {self.sensitivity}"
            )
        if self.kind is NoiseKind.LAPLACE and self.delta != 0:
            raise InvalidDelta(f"the Laplace mechanism has delta = 0, got {self.delta}")
        if self.kind is NoiseKind.GAUSSIAN and not 0 < self.delta < 1:
            raise InvalidDelta(f"the Gaussian mechanism needs 0 < delta < 1, got {self.delta}")
        for lo, hi in self.clip_bounds:
            if not lo < hi:
                raise ReversedBounds(f"clip bounds are reversed: ({lo}, {hi})")

    @property
    def scale(self) -> float:
        """Laplace scale `b` or Gaussian standard deviation."""
        if self.kind is NoiseKind.LAPLACE:
            return self.sensitivity / self.epsilon
        return self.sensitivity * math.sqrt(2.0 * math.log(1.25 / self.delta)) / self.epsilon

    @property
    def heuristic_calibration(self) -> bool:
        """`True` when the classical Gaussian calibration is used outside `epsilon < 1`."""
        return self.kind is NoiseKind.GAUSSIAN and self.epsilon >= 1.0

    @property
    def calibration(self) -> Calibration:
        return Calibration.HEURISTIC if self.heuristic_calibration else Calibration.EXACT

    def to_dict(self) -> dict[str, t.Any]:
        return {
            "kind": self.kind.value,
            "epsilon": self.epsilon,
            "delta": self.delta,
            "sensitivity": self.sensitivity,
            "scale": self.scale,
            "clip_bounds": list(self.clip_bounds.unwrap_or(())) or None,
            "calibration": self.calibration.value,
        }

    def clip(self, ys: ArrayLike) -> NDArray[np.float64]:
        labels = np.asarray(ys, dtype=float)
        for lo, hi in self.clip_bounds:
            return np.clip(labels, lo, hi)
        return labels


def make_noise_spec(
    kind: NoiseKind | str,
    epsilon: float,
    *,
    delta: float | None = None,
    sensitivity: float | None = None,
    clip_bounds: tuple[float, float] | None = None,
) -> AdditiveNoiseSpec:
    """Build a noise spec, deriving the sensitivity from the clip range when omitted.

    Raises:
        MissingSensitivity: neither `sensitivity` nor `clip_bounds` is given.
    """
    kind = NoiseKind(kind)
    if sensitivity is None:
        if clip_bounds is None:
            raise MissingSensitivity(
                f"the {kind.value} mechanism needs a sensitivity or public label bounds"
            )
        sensitivity = clip_bounds[1] - clip_bounds[0]
    if delta is None:
        delta = DEFAULT_GAUSSIAN_DELTA if kind is NoiseKind.GAUSSIAN else 0.0
    spec = AdditiveNoiseSpec(
        kind,
        epsilon,
        sensitivity,
        delta,
        Some(clip_bounds) if clip_bounds is not None else NOTHING,
    )
    if spec.heuristic_calibration:
        logger.warning(
            "Gaussian noise calibrated for epsilon=%s >= 1: the (epsilon, delta) "
            "guarantee of the classical calibration does not hold",
            epsilon,
        )
    return spec


def _check_kind(spec: AdditiveNoiseSpec, kind: NoiseKind) -> None:
    if spec.kind is not kind:
        raise WrongKind(f"expected a {kind.value} spec, got {spec.kind.value}")


def laplace_randomize_many(
    ys: ArrayLike, spec: AdditiveNoiseSpec, stream: RandomStream
) -> NDArray[np.float64]:
    """Clip then add Laplace noise, one variate per label."""
    _check_kind(spec, NoiseKind.LAPLACE)
    labels = spec.clip(ys)
    return labels + stream.laplace(spec.scale, size=labels.shape)


def gaussian_randomize_many(
    ys: ArrayLike, spec: AdditiveNoiseSpec, stream: RandomStream
) -> NDArray[np.float64]:
    """Clip then add Gaussian noise, one variate per label."""
    _check_kind(spec, NoiseKind.GAUSSIAN)
    labels = spec.clip(ys)
    return labels + stream.normal(spec.scale, size=labels.shape)


def laplace_randomize(y: float, spec: AdditiveNoiseSpec, stream: RandomStream) -> float:
    return float(laplace_randomize_many(np.array([y]), spec, stream)[0])


def gaussian_randomize(y: float, spec: AdditiveNoiseSpec, stream: RandomStream) -> float:
    return float(gaussian_randomize_many(np.array([y]), spec, stream)[0])
