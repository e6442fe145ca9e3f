from __future__ import annotations

import logging
import math

import pytest

from labeldp.errors import ConfigError
from labeldp.presets import EPSILONS, PRESETS, resolve_preset


def test_every_preset_covers_the_sweep() -> None:
    for rows in PRESETS.values():
        assert tuple(row.epsilon for row in rows[:-1]) == EPSILONS
        assert math.isinf(rows[-1].epsilon)


def test_relative_split() -> None:
    row = resolve_preset("crime", 1.0)
    assert row.zeta == 0.4
    assert row.epsilon1() == 0.5
    assert resolve_preset("crime", 8.0).epsilon1() == pytest.approx(8.0 / 7)


def test_absolute_split() -> None:
    row = resolve_preset("housing", 0.8)
    assert row.epsilon1() == 0.01
    assert row.zeta == 2.2
    assert resolve_preset("criteo", 4.0).zeta == 70.0


def test_infinite_budget() -> None:
    assert resolve_preset("criteo", math.inf).zeta == 0.8


def test_nearest_row(caplog: pytest.LogCaptureFixture) -> None:
    with caplog.at_level(logging.INFO, logger="labeldp.presets"):
        row = resolve_preset("crime", 0.85)
    assert row.epsilon == 0.85
    assert row.epsilon1() == 0.425
    assert "using epsilon=0.8" in caplog.text


def test_unknown_preset() -> None:
    with pytest.raises(ConfigError, match="crime, criteo, housing"):
        resolve_preset("mnist", 1.0)
