"""Desk-scale comparison of label privatization mechanisms.

Each trial splits the data 80/20, privatizes the training labels, fits a ridge
regression on them and measures the test error against the true labels.
"""
from __future__ import annotations

import csv
import logging
import math
import typing as t
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from numpy.typing import NDArray

from .baselines import (
    AdditiveNoiseSpec,
    Calibration,
    NoiseKind,
    gaussian_randomize_many,
    laplace_randomize_many,
    make_noise_spec,
)
from .errors import ConfigError
from .func import final
from .mechanism import PolicyKind
from .pipeline import LabeledDataset, privatize_dataset, split_budget
from .results import NOTHING, Option, Some
from .streams import RandomStream
from .workers import run_jobs

logger = logging.getLogger(__name__)

DEFAULT_RIDGE = 1e-4


class Mechanism(str, Enum):
    NONE = "none"
    LAPLACE = "laplace"
    GAUSSIAN = "gaussian"
    RPWITHPRIOR = "rpwithprior"


@dataclass(frozen=True)
class BenchSettings:
    """Parameters of a sweep.

    `eps1` and `zeta` map a total budget to the prior budget and neighborhood
    width used by the randomized response mechanism.
    """

    epsilons: tuple[float, ...]
    label_bounds: tuple[float, float]
    zeta: t.Callable[[float], float]
    eps1: t.Callable[[float], Option[float]] = field(default=lambda epsilon: NOTHING)
    trials: int = 10
    ridge: float = DEFAULT_RIDGE
    test_fraction: float = 0.2
    gaussian_delta: float = 1e-4
    policy: PolicyKind = PolicyKind.PROJECTION
    sigma: Option[float] = NOTHING
    mechanisms: tuple[Mechanism, ...] = tuple(Mechanism)

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ConfigError(f"need at least one trial, got {self.trials}")
        if not 0 < self.test_fraction < 1:
            raise ConfigError(f"test fraction must be in (0, 1), got {self.test_fraction}")
        if not self.epsilons:
            raise ConfigError("no epsilon to benchmark")


@dataclass(frozen=True)
class BenchRow:
    mechanism: Mechanism
    epsilon: float
    trials: int
    mse_mean: float
    mse_std: float
    calibration: Calibration = Calibration.EXACT


def ridge_fit(
    features: NDArray[np.float64], labels: NDArray[np.float64], alpha: float = DEFAULT_RIDGE
) -> tuple[NDArray[np.float64], float]:
    """Closed-form ridge regression with an unpenalized intercept.

    Minimizes `mean((X w + b - y)**2) + alpha * |w|**2`.
    """
    x_mean = features.mean(axis=0)
    y_mean = float(labels.mean())
    centered = features - x_mean
    n, d = centered.shape
    gram = centered.T @ centered / n + alpha * np.eye(d)
    weights = np.linalg.solve(gram, centered.T @ (labels - y_mean) / n)
    return weights, y_mean - float(x_mean @ weights)


def ridge_predict(
    features: NDArray[np.float64], weights: NDArray[np.float64], intercept: float
) -> NDArray[np.float64]:
    return features @ weights + intercept


def _noise_specs(
    settings: BenchSettings,
) -> dict[tuple[NoiseKind, float], AdditiveNoiseSpec]:
    specs = {}
    for epsilon in settings.epsilons:
        if math.isinf(epsilon):
            continue
        specs[NoiseKind.LAPLACE, epsilon] = make_noise_spec(
            NoiseKind.LAPLACE, epsilon, clip_bounds=settings.label_bounds
        )
        if Mechanism.GAUSSIAN in settings.mechanisms:
            specs[NoiseKind.GAUSSIAN, epsilon] = make_noise_spec(
                NoiseKind.GAUSSIAN,
                epsilon,
                delta=settings.gaussian_delta,
                clip_bounds=settings.label_bounds,
            )
    return specs


def privatize_labels(
    mechanism: Mechanism,
    labels: NDArray[np.float64],
    epsilon: float,
    settings: BenchSettings,
    noise: dict[tuple[NoiseKind, float], AdditiveNoiseSpec],
    stream: RandomStream,
) -> NDArray[np.float64]:
    """Release training labels under `mechanism`; infinite budgets pass labels through."""
    if mechanism is Mechanism.NONE or math.isinf(epsilon):
        return labels
    if mechanism is Mechanism.LAPLACE:
        return laplace_randomize_many(labels, noise[NoiseKind.LAPLACE, epsilon], stream)
    if mechanism is Mechanism.GAUSSIAN:
        return gaussian_randomize_many(labels, noise[NoiseKind.GAUSSIAN, epsilon], stream)
    dataset = LabeledDataset(
        tuple(range(labels.size)), labels, label_bounds=Some(settings.label_bounds)
    )
    released, _ = privatize_dataset(
        dataset,
        split_budget(epsilon, settings.eps1(epsilon)),
        settings.zeta(epsilon),
        settings.policy,
        settings.sigma,
        stream=stream,
    )
    return np.asarray(released.labels)


def noise_calibration(
    mechanism: Mechanism,
    epsilon: float,
    noise: dict[tuple[NoiseKind, float], AdditiveNoiseSpec],
) -> Calibration:
    """How the noise of `mechanism` at `epsilon` is calibrated."""
    if mechanism is Mechanism.NONE or math.isinf(epsilon):
        return Calibration.NONE
    if mechanism is Mechanism.GAUSSIAN:
        return noise[NoiseKind.GAUSSIAN, epsilon].calibration
    return Calibration.EXACT


def run_trial(
    features: NDArray[np.float64],
    labels: NDArray[np.float64],
    trial: int,
    settings: BenchSettings,
    noise: dict[tuple[NoiseKind, float], AdditiveNoiseSpec],
    seed: int,
) -> list[tuple[Mechanism, float, float]]:
    """Test errors of every (mechanism, epsilon) on one random split.

    Streams spawned under key 0 are left to the caller, e.g. for data generation.
    """
    root = RandomStream(seed)
    order = root.spawn(1, trial).permutation(labels.size)
    n_test = int(round(settings.test_fraction * labels.size))
    test, train = order[:n_test], order[n_test:]
    outcome = []
    for m_index, mechanism in enumerate(settings.mechanisms):
        for e_index, epsilon in enumerate(settings.epsilons):
            stream = root.spawn(2, trial, m_index, e_index)
            released = privatize_labels(
                mechanism, labels[train], epsilon, settings, noise, stream
            )
            weights, intercept = ridge_fit(features[train], released, settings.ridge)
            predictions = ridge_predict(features[test], weights, intercept)
            mse = float(np.mean((predictions - labels[test]) ** 2))
            outcome.append((mechanism, epsilon, mse))
    logger.debug("trial %d done", trial)
    return outcome


def run_bench(
    features: NDArray[np.float64],
    labels: NDArray[np.float64],
    settings: BenchSettings,
    *,
    seed: int,
    workers: int | None = None,
) -> list[BenchRow]:
    """Run every trial and aggregate test errors into mean and (population) std.

    Rows come in the order of `settings.mechanisms`, then `settings.epsilons`.
    """
    features = np.asarray(features, dtype=float)
    labels = np.asarray(labels, dtype=float)
    noise = _noise_specs(settings)
    jobs = [
        final(run_trial, features, labels, trial, settings, noise, seed)
        for trial in range(settings.trials)
    ]
    errors: dict[tuple[Mechanism, float], list[float]] = {}
    for result in run_jobs(jobs, concurrent_limit=workers):
        for mechanism, epsilon, mse in result.unwrap():
            errors.setdefault((mechanism, epsilon), []).append(mse)
    rows = [
        BenchRow(
            mechanism,
            epsilon,
            settings.trials,
            float(np.mean(errors[mechanism, epsilon])),
            float(np.std(errors[mechanism, epsilon])),
            noise_calibration(mechanism, epsilon, noise),
        )
        for mechanism in settings.mechanisms
        for epsilon in settings.epsilons
    ]
    logger.info("benchmark of %d trials done", settings.trials)
    return rows


def write_bench_table(rows: t.Sequence[BenchRow], stream: t.TextIO) -> None:
    """Write one CSV line per row: mechanism, epsilon, trials, test MSE and calibration.

    `calibration` is `heuristic` for Gaussian rows whose noise scale does not
    prove the stated guarantee.
    """
    writer = csv.writer(stream)
    writer.writerow(["mechanism", "epsilon", "trials", "mse_mean", "mse_std", "calibration"])
    for row in rows:
        writer.writerow(
            [
                row.mechanism.value,
                repr(row.epsilon),
                row.trials,
                repr(row.mse_mean),
                repr(row.mse_std),
                row.calibration.value,
            ]
        )
