"""Randomized response with a prior over continuous labels.

Labels inside the randomization interval `[A1, A2]` are mapped to a two-level
density on `[A1 - zeta, A2 + zeta]`: `1 / gamma` on the zeta-neighborhood of the
label and `exp(-epsilon) / gamma` on the rest. Labels outside the interval are
handled by a `PolicyKind`.
"""
from __future__ import annotations

import json
import logging
import math
import typing as t
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import InvalidParameter, OutOfInterval
from .optimizer import Interval, check_privacy_parameters
from .streams import RandomStream

logger = logging.getLogger(__name__)


class PolicyKind(str, Enum):
    """What happens to labels outside of the randomization interval."""

    PROJECTION = "projection"
    """Clamp the label to the nearest interval endpoint, then randomize."""

    UNIFORM_OUTSIDE = "uniform_outside"
    """Draw uniformly on `[A1 - zeta, A2 + zeta]`."""


@dataclass(frozen=True)
class RandomizerSpec:
    """Frozen mechanism parameters.

    `in_density_factor` scales the in-neighborhood level before renormalization.
    It is 1 for every mechanism that is actually deployed, other values only
    exist to exercise the auditor.
    """

    interval: Interval
    zeta: float
    epsilon: float
    policy: PolicyKind = PolicyKind.PROJECTION
    in_density_factor: float = 1.0
    gamma: float = field(init=False)

    def __post_init__(self) -> None:
        check_privacy_parameters(self.zeta, self.epsilon)
        if not (self.in_density_factor > 0 and math.isfinite(self.in_density_factor)):
            raise InvalidParameter(
                f"in_density_factor must be positive, got {self.in_density_factor}"
            )
        object.__setattr__(self, "policy", PolicyKind(self.policy))
        object.__setattr__(
            self,
            "gamma",
            2.0 * self.zeta + math.exp(-self.epsilon) * (self.interval.a2 - self.interval.a1),
        )

    @property
    def a1(self) -> float:
        return self.interval.a1

    @property
    def a2(self) -> float:
        return self.interval.a2

    @property
    def support(self) -> tuple[float, float]:
        """The interval `[A1 - zeta, A2 + zeta]` holding every randomized label."""
        return self.a1 - self.zeta, self.a2 + self.zeta

    @property
    def _normalizer(self) -> float:
        return self.in_density_factor * 2.0 * self.zeta + math.exp(-self.epsilon) * (
            self.a2 - self.a1
        )

    @property
    def in_level(self) -> float:
        """Density on the neighborhood of the (projected) label, `1 / gamma`."""
        return self.in_density_factor / self._normalizer

    @property
    def out_level(self) -> float:
        """Density away from the neighborhood, `exp(-epsilon) / gamma`."""
        return math.exp(-self.epsilon) / self._normalizer

    @property
    def outside_level(self) -> float:
        """Uniform density used for labels outside of the interval."""
        return 1.0 / (2.0 * self.zeta + (self.a2 - self.a1))

    def center(self, y: float) -> float | None:
        """Center of the high-density neighborhood for label `y`.

        `None` when the label is drawn uniformly instead.
        """
        if self.policy is PolicyKind.UNIFORM_OUTSIDE and y not in self.interval:
            return None
        return self.interval.clamp(y)

    def to_dict(self) -> dict[str, t.Any]:
        data: dict[str, t.Any] = {
            "a1": self.a1,
            "a2": self.a2,
            "zeta": self.zeta,
            "epsilon": self.epsilon,
            "policy": self.policy.value,
        }
        if self.in_density_factor != 1.0:
            data["in_density_factor"] = self.in_density_factor
        return data

    @classmethod
    def from_dict(cls, data: t.Mapping[str, t.Any]) -> RandomizerSpec:
        try:
            return build_randomizer(
                float(data["a1"]),
                float(data["a2"]),
                float(data["zeta"]),
                float(data["epsilon"]),
                PolicyKind(data.get("policy", PolicyKind.PROJECTION.value)),
                in_density_factor=float(data.get("in_density_factor", 1.0)),
            )
        except KeyError as exc:
            raise InvalidParameter(f"randomizer spec is missing {exc}") from exc

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> RandomizerSpec:
        return cls.from_dict(json.loads(text))


def build_randomizer(
    a1: float,
    a2: float,
    zeta: float,
    epsilon: float,
    policy: PolicyKind | str = PolicyKind.PROJECTION,
    *,
    in_density_factor: float = 1.0,
) -> RandomizerSpec:
    """Validate the parameters and freeze them into a `RandomizerSpec`.

    Raises:
        NonPositiveZeta: `zeta <= 0`.
        NegativeEpsilon: `epsilon < 0`.
        ReversedBounds: `a1 > a2`.
    """
    check_privacy_parameters(zeta, epsilon)
    return RandomizerSpec(
        Interval(a1, a2),
        zeta,
        epsilon,
        PolicyKind(policy),
        in_density_factor=in_density_factor,
    )


def density_pieces(r: RandomizerSpec, y: float) -> list[tuple[float, float, float]]:
    """Constant pieces `(left, right, level)` of the conditional density of `y`.

    Pieces are contiguous, cover the support and have positive length.
    """
    lo, hi = r.support
    c = r.center(y)
    if c is None:
        return [(lo, hi, r.outside_level)]
    pieces = [
        (lo, c - r.zeta, r.out_level),
        (c - r.zeta, c + r.zeta, r.in_level),
        (c + r.zeta, hi, r.out_level),
    ]
    return [piece for piece in pieces if piece[1] > piece[0]]


def conditional_density(r: RandomizerSpec, y: float, y_tilde: float) -> float:
    """Density of the randomized label `y_tilde` given the true label `y`."""
    lo, hi = r.support
    if not lo <= y_tilde <= hi:
        return 0.0
    c = r.center(y)
    if c is None:
        return r.outside_level
    return r.in_level if abs(y_tilde - c) <= r.zeta else r.out_level


def sample_many(
    r: RandomizerSpec, ys: ArrayLike, stream: RandomStream
) -> NDArray[np.float64]:
    """Randomize every label of `ys`, consuming exactly one uniform per label.

    The uniform is mapped through the inverse CDF of the (at most three)
    constant pieces of the conditional density.
    """
    labels = np.asarray(ys, dtype=float)
    u = stream.uniform(size=labels.shape)
    lo_edge, hi_edge = r.support
    centers = np.clip(labels, r.a1, r.a2)
    in_level, out_level = r.in_level, r.out_level
    left_mass = out_level * (centers - r.a1)
    middle_mass = in_level * 2.0 * r.zeta
    if out_level > 0.0:
        with np.errstate(over="ignore"):
            left = lo_edge + u / out_level
            right = centers + r.zeta + (u - left_mass - middle_mass) / out_level
    else:
        left = np.full_like(u, lo_edge)
        right = centers + r.zeta
    middle = centers - r.zeta + (u - left_mass) / in_level
    values = np.where(
        u < left_mass, left, np.where(u < left_mass + middle_mass, middle, right)
    )
    if r.policy is PolicyKind.UNIFORM_OUTSIDE:
        inside = (labels >= r.a1) & (labels <= r.a2)
        values = np.where(inside, values, lo_edge + u * (hi_edge - lo_edge))
    return np.clip(values, lo_edge, hi_edge)


def sample(r: RandomizerSpec, y: float, stream: RandomStream) -> float:
    """Randomize a single label."""
    return float(sample_many(r, np.array([y]), stream)[0])


def neighborhood_mass(r: RandomizerSpec, y: float) -> float:
    """Probability that `y` is randomized into its own zeta-neighborhood.

    Raises:
        OutOfInterval: `y` is outside of `[A1, A2]`.
    """
    if y not in r.interval:
        raise OutOfInterval(f"label {y} is outside of [{r.a1}, {r.a2}]")
    return r.in_level * 2.0 * r.zeta
