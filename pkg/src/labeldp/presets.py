"""Tuned budget splits and neighborhood widths for reference datasets.

Each table maps a total budget `epsilon` to the budget `epsilon1` spent on the
prior and to `zeta`. `epsilon = inf` rows only carry a `zeta`.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

from .errors import ConfigError

logger = logging.getLogger(__name__)

EPSILONS = (0.05, 0.1, 0.3, 0.5, 0.8, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0)


@dataclass(frozen=True)
class PresetRow:
    """`epsilon1` is `epsilon / eps1_divisor` when the divisor is set, else `eps1`."""

    epsilon: float
    zeta: float
    eps1: float = math.nan
    eps1_divisor: float = math.nan

    def epsilon1(self) -> float:
        if not math.isnan(self.eps1_divisor):
            return self.epsilon / self.eps1_divisor
        return self.eps1


def _relative(divisors: tuple[float, ...], zeta: float, zeta_inf: float) -> tuple[PresetRow, ...]:
    rows = tuple(
        PresetRow(epsilon, zeta, eps1_divisor=divisor)
        for epsilon, divisor in zip(EPSILONS, divisors)
    )
    return rows + (PresetRow(math.inf, zeta_inf),)


def _absolute(
    eps1: tuple[float, ...], zetas: tuple[float, ...], zeta_inf: float
) -> tuple[PresetRow, ...]:
    rows = tuple(
        PresetRow(epsilon, zeta, eps1=value)
        for epsilon, value, zeta in zip(EPSILONS, eps1, zetas)
    )
    return rows + (PresetRow(math.inf, zeta_inf),)


PRESETS: dict[str, tuple[PresetRow, ...]] = {
    "crime": _relative(
        (2, 2, 2, 2, 2, 2, 2.5, 2.5, 3, 3.5, 6, 7), zeta=0.4, zeta_inf=0.1
    ),
    "criteo": _absolute(
        (0.017,) * 6 + (0.01,) * 3 + (0.005, 0.003, 0.002),
        (70.0,) * 12,
        zeta_inf=0.8,
    ),
    "housing": _absolute(
        (0.017,) * 4 + (0.01,) + (0.008,) * 3 + (0.007,) * 4,
        (0.7, 0.5, 1.2, 1.0, 2.2, 1.5, 1.5, 1.5, 1.4, 1.2, 0.7, 0.1),
        zeta_inf=0.1,
    ),
}


def resolve_preset(name: str, epsilon: float) -> PresetRow:
    """Row of preset `name` for `epsilon`, the nearest tabulated one when missing.

    Raises:
        ConfigError: unknown preset name.
    """
    try:
        rows = PRESETS[name]
    except KeyError:
        raise ConfigError(
            f"unknown preset {name!r}, choose one of {', '.join(sorted(PRESETS))}"
        ) from None
    if math.isinf(epsilon):
        return rows[-1]
    finite = rows[:-1]
    row = min(finite, key=lambda row: (abs(row.epsilon - epsilon), row.epsilon))
    if row.epsilon != epsilon:
        logger.info(
            "preset %s has no row for epsilon=%s, using epsilon=%s", name, epsilon, row.epsilon
        )
        return PresetRow(
            epsilon, row.zeta, eps1=row.eps1, eps1_divisor=row.eps1_divisor
        )
    return row
