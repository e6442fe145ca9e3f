from __future__ import annotations

import io
import math

import numpy as np
import pytest

from labeldp.bench import (
    BenchRow,
    BenchSettings,
    Mechanism,
    noise_calibration,
    ridge_fit,
    ridge_predict,
    run_bench,
    write_bench_table,
)
from labeldp.baselines import Calibration, NoiseKind, make_noise_spec
from labeldp.datasets import synthetic_task
from labeldp.errors import ConfigError
from labeldp.results import Some
from labeldp.streams import RandomStream


@pytest.fixture(scope="module")
def task() -> tuple[np.ndarray, np.ndarray]:
    features, dataset = synthetic_task(2_000, 5, RandomStream(0))
    return features, np.asarray(dataset.labels)


def settings(**kwargs: object) -> BenchSettings:
    values: dict = dict(
        epsilons=(0.5, math.inf),
        label_bounds=(0.0, 1.0),
        zeta=lambda epsilon: 0.2,
        trials=2,
    )
    values.update(kwargs)
    return BenchSettings(**values)


def test_ridge_recovers_a_linear_model() -> None:
    rng = np.random.default_rng(0)
    features = rng.normal(size=(500, 3))
    labels = features @ np.array([1.0, -2.0, 0.5]) + 3.0
    # Act
    weights, intercept = ridge_fit(features, labels, alpha=0.0)
    # Assert
    assert weights == pytest.approx([1.0, -2.0, 0.5])
    assert intercept == pytest.approx(3.0)
    assert ridge_predict(features, weights, intercept) == pytest.approx(labels)


def test_rows_follow_mechanisms_then_epsilons(task: tuple) -> None:
    features, labels = task
    # Act
    rows = run_bench(features, labels, settings(), seed=1, workers=1)
    # Assert
    assert [(row.mechanism, row.epsilon) for row in rows] == [
        (mechanism, epsilon) for mechanism in Mechanism for epsilon in (0.5, math.inf)
    ]
    assert all(row.trials == 2 for row in rows)
    assert all(row.mse_mean > 0 for row in rows)


def test_infinite_budget_matches_the_clean_model(task: tuple) -> None:
    features, labels = task
    rows = run_bench(features, labels, settings(epsilons=(math.inf,)), seed=2, workers=1)
    means = {row.mechanism: row.mse_mean for row in rows}
    assert len(set(means.values())) == 1


def test_noise_hurts_more_at_small_budgets(task: tuple) -> None:
    features, labels = task
    rows = run_bench(
        features,
        labels,
        settings(epsilons=(0.1, math.inf), mechanisms=(Mechanism.LAPLACE,), trials=3),
        seed=3,
        workers=1,
    )
    assert rows[0].mse_mean > rows[1].mse_mean


def test_single_trial_has_zero_std(task: tuple) -> None:
    features, labels = task
    rows = run_bench(features, labels, settings(trials=1), seed=4, workers=1)
    assert all(row.mse_std == 0.0 for row in rows)


def test_same_seed_same_rows(task: tuple) -> None:
    features, labels = task
    config = settings(eps1=lambda epsilon: Some(epsilon / 4))
    first = run_bench(features, labels, config, seed=5, workers=1)
    second = run_bench(features, labels, config, seed=5, workers=2)
    assert first == second


@pytest.mark.parametrize(
    "kwargs",
    [dict(trials=0), dict(test_fraction=1.0), dict(epsilons=())],
)
def test_invalid_settings(kwargs: dict) -> None:
    with pytest.raises(ConfigError):
        settings(**kwargs)


def test_write_bench_table() -> None:
    stream = io.StringIO()
    rows = [BenchRow(Mechanism.LAPLACE, 0.5, 10, 0.25, 0.125)]
    # Act
    write_bench_table(rows, stream)
    # Assert
    assert stream.getvalue() == (
        "mechanism,epsilon,trials,mse_mean,mse_std,calibration\r\n"
        "laplace,0.5,10,0.25,0.125,exact\r\n"
    )


@pytest.mark.parametrize(
    "mechanism,epsilon,calibration",
    [
        (Mechanism.NONE, 0.5, Calibration.NONE),
        (Mechanism.LAPLACE, math.inf, Calibration.NONE),
        (Mechanism.GAUSSIAN, math.inf, Calibration.NONE),
        (Mechanism.LAPLACE, 0.5, Calibration.EXACT),
        (Mechanism.GAUSSIAN, 0.5, Calibration.EXACT),
        (Mechanism.GAUSSIAN, 2.0, Calibration.HEURISTIC),
    ],
)
def test_noise_calibration(mechanism: Mechanism, epsilon: float, calibration: Calibration) -> None:
    noise = {
        (NoiseKind.GAUSSIAN, eps): make_noise_spec(
            NoiseKind.GAUSSIAN, eps, delta=1e-5, clip_bounds=(0.0, 1.0)
        )
        for eps in (0.5, 2.0)
    }
    assert noise_calibration(mechanism, epsilon, noise) is calibration


def test_rows_carry_calibration(task: tuple) -> None:
    features, labels = task
    # Act
    rows = run_bench(features, labels, settings(trials=1), seed=1, workers=1)
    # Assert
    calibrations = {(row.mechanism, row.epsilon): row.calibration for row in rows}
    assert calibrations[Mechanism.GAUSSIAN, 0.5] is Calibration.EXACT
    assert calibrations[Mechanism.LAPLACE, 0.5] is Calibration.EXACT
    assert calibrations[Mechanism.GAUSSIAN, math.inf] is Calibration.NONE
    assert calibrations[Mechanism.NONE, 0.5] is Calibration.NONE
