from __future__ import annotations

import json
import math

import numpy as np
import pytest

from labeldp.density import make_step_density, uniform_density
from labeldp.errors import (
    EmptyDataset,
    InvalidBudgetSplit,
    InvalidParameter,
    LengthMismatch,
    MissingSensitivity,
    NonFiniteLabel,
)
from labeldp.mechanism import PolicyKind, build_randomizer, sample_many
from labeldp.pipeline import (
    BLOCK_ROWS,
    ROW_STREAMS,
    LabeledDataset,
    PrivacyBudgetSplit,
    empirical_mse,
    expected_mechanism_mse,
    monte_carlo_mse,
    privatize_dataset,
    randomize_labels,
    split_budget,
)
from labeldp.results import NOTHING, Some
from labeldp.streams import RandomStream, derive_seed


def uniform_dataset(n: int, seed: int = 0) -> LabeledDataset:
    labels = np.random.default_rng(seed).uniform(0.0, 1.0, size=n)
    return LabeledDataset(tuple(f"row-{i}" for i in range(n)), labels, Some((0.0, 1.0)))


class TestBudget:
    def test_default_split_is_half(self) -> None:
        split = split_budget(1.0)
        assert (split.epsilon1, split.epsilon2) == (0.5, 0.5)

    def test_explicit_split(self) -> None:
        split = split_budget(2.0, Some(0.017))
        assert split.epsilon1 == 0.017
        assert split.epsilon1 + split.epsilon2 == pytest.approx(2.0, abs=1e-12)

    @pytest.mark.parametrize(
        "total,first",
        [(0.0, NOTHING), (math.inf, NOTHING), (1.0, Some(1.0)), (1.0, Some(0.0))],
    )
    def test_invalid_split(self, total: float, first: object) -> None:
        with pytest.raises(InvalidBudgetSplit):
            split_budget(total, first)  # type: ignore[arg-type]

    def test_parts_must_add_up(self) -> None:
        with pytest.raises(InvalidBudgetSplit):
            PrivacyBudgetSplit(1.0, 0.5, 0.6)


class TestLabeledDataset:
    def test_labels_are_read_only(self) -> None:
        d = uniform_dataset(3)
        with pytest.raises(ValueError):
            d.labels[0] = 1.0

    def test_with_labels_keeps_payloads(self) -> None:
        payload = {"x": [1, 2]}
        d = LabeledDataset((payload,), [0.5])
        other = d.with_labels([0.25])
        assert other.features[0] is payload
        assert other.rows == [(payload, 0.25)]

    def test_invalid_datasets(self) -> None:
        with pytest.raises(LengthMismatch):
            LabeledDataset(("a",), [0.0, 1.0])
        with pytest.raises(NonFiniteLabel):
            LabeledDataset(("a",), [math.inf])


class TestEmpiricalMse:
    def test_identical(self) -> None:
        d = uniform_dataset(10)
        assert empirical_mse(d, d) == 0.0

    def test_half_squared_error(self) -> None:
        assert empirical_mse(LabeledDataset(("a",), [0.0]), LabeledDataset(("a",), [2.0])) == 2.0

    def test_length_mismatch(self) -> None:
        with pytest.raises(LengthMismatch):
            empirical_mse(uniform_dataset(2), uniform_dataset(3))

    def test_empty(self) -> None:
        empty = LabeledDataset((), [])
        with pytest.raises(EmptyDataset):
            empirical_mse(empty, empty)


class TestExpectedMse:
    def test_zero_epsilon_is_uniform_noise(self) -> None:
        r = build_randomizer(0.0, 1.0, 0.1, 0.0)
        # Act
        estimate = expected_mechanism_mse(r, uniform_density(0.0, 1.0))
        # Assert
        assert estimate.analytic == pytest.approx((1 + 1.2**2) / 24, rel=1e-9)
        assert estimate.closed_form == pytest.approx(0.1 / 1.2 + 1.2 / 2.4)

    def test_degenerate_interval(self) -> None:
        r = build_randomizer(0.3, 0.3, 0.2, 1.0)
        prior = uniform_density(0.3 - 1e-9, 0.3 + 1e-9)
        estimate = expected_mechanism_mse(r, prior)
        assert estimate.analytic == pytest.approx(0.2**2 / 6, rel=1e-6)

    @pytest.mark.parametrize("policy", list(PolicyKind))
    def test_matches_monte_carlo(self, policy: PolicyKind) -> None:
        prior = make_step_density([-0.5, 0.2, 0.6, 1.5], [0.2, 1.0, 0.4])
        r = build_randomizer(0.1, 0.9, 0.15, 1.5, policy)
        # Act
        analytic = expected_mechanism_mse(r, prior).analytic
        estimate = monte_carlo_mse(r, prior, 400_000, RandomStream(7))
        # Assert
        assert abs(estimate.mean - analytic) <= 4 * estimate.stderr
        assert estimate.n == 400_000

    def test_monte_carlo_needs_draws(self) -> None:
        r = build_randomizer(0.0, 1.0, 0.1, 1.0)
        with pytest.raises(InvalidParameter):
            monte_carlo_mse(r, uniform_density(0.0, 1.0), 0, RandomStream(0))


class TestPrivatizeDataset:
    def test_labels_stay_in_support(self) -> None:
        d = uniform_dataset(5_000)
        # Act
        released, report = privatize_dataset(
            d, split_budget(1.0), 0.1, stream=RandomStream(3)
        )
        # Assert
        lo, hi = report.interval.a1 - 0.1, report.interval.a2 + 0.1
        assert np.all((released.labels >= lo) & (released.labels <= hi))
        assert released.features == d.features
        assert all(a is b for a, b in zip(released.features, d.features))
        assert released.label_bounds == d.label_bounds

    def test_one_draw_per_label_and_stage(self) -> None:
        d = uniform_dataset(2_000)
        stream = RandomStream(4)
        _, report = privatize_dataset(d, split_budget(1.0), 0.1, stream=stream)
        assert report.draws == {"laplace": 2_000, "mechanism": 2_000}
        assert stream.counts == {"laplace": 2_000, "uniform": 2_000}

    def test_neighborhood_frequency(self) -> None:
        d = uniform_dataset(100_000, seed=1)
        # Act
        released, report = privatize_dataset(
            d, split_budget(2.0), 0.1, stream=RandomStream(5)
        )
        # Assert
        labels = d.labels
        inside = (labels >= report.interval.a1) & (labels <= report.interval.a2)
        hits = np.abs(released.labels[inside] - labels[inside]) <= 0.1
        assert np.mean(hits) == pytest.approx(0.2 / report.gamma, abs=0.01)

    def test_replay_is_bit_exact(self) -> None:
        d = uniform_dataset(1_000)
        first, first_report = privatize_dataset(d, split_budget(1.0), 0.1, stream=RandomStream(6))
        second, second_report = privatize_dataset(
            d, split_budget(1.0), 0.1, stream=RandomStream(6)
        )
        assert np.array_equal(first.labels, second.labels)
        assert first_report.to_json() == second_report.to_json()

    def test_report(self) -> None:
        d = uniform_dataset(1_000)
        # Act
        released, report = privatize_dataset(
            d,
            split_budget(1.0, Some(0.4)),
            0.2,
            PolicyKind.UNIFORM_OUTSIDE,
            Some(0.3),
            stream=RandomStream(9),
        )
        data = json.loads(report.to_json())
        # Assert
        assert report.epsilon_total == pytest.approx(1.0)
        assert report.prior_restricted is True
        assert report.prior.support == (0.0, 1.0)
        assert report.empirical_mse_vs_original == pytest.approx(empirical_mse(d, released))
        assert data["policy"] == "uniform_outside"
        assert data["sigma"] == 0.3
        assert data["seed"] == 9
        assert data["split"]["epsilon1"] == 0.4
        assert data["plan"]["sigma"] == 0.3
        assert data["prior_noise"]["kind"] == "laplace"
        assert data["prior_noise"]["epsilon"] == 0.4
        assert data["prior_noise"]["calibration"] == "exact"
        assert data["prior_noise"]["clip_bounds"] == [0.0, 1.0]

    def test_prior_restriction_can_be_disabled(self) -> None:
        d = uniform_dataset(1_000)
        _, report = privatize_dataset(
            d, split_budget(1.0), 0.1, stream=RandomStream(0), restrict_prior=False
        )
        assert report.prior_restricted is False
        assert report.prior.nodes == report.plan.nodes

    def test_requires_label_bounds(self) -> None:
        d = LabeledDataset(("a", "b"), [0.0, 1.0])
        with pytest.raises(MissingSensitivity):
            privatize_dataset(d, split_budget(1.0), 0.1, stream=RandomStream(0))

    def test_empty_dataset(self) -> None:
        d = LabeledDataset((), [], Some((0.0, 1.0)))
        with pytest.raises(EmptyDataset):
            privatize_dataset(d, split_budget(1.0), 0.1, stream=RandomStream(0))

    def test_workers_do_not_change_the_release(self) -> None:
        d = uniform_dataset(3 * BLOCK_ROWS + 17)
        # Act
        first, _ = privatize_dataset(d, split_budget(1.0), 0.1, stream=RandomStream(3), workers=1)
        second, _ = privatize_dataset(
            d, split_budget(1.0), 0.1, stream=RandomStream(3), workers=2
        )
        # Assert
        assert np.array_equal(first.labels, second.labels)


class TestRandomizeLabels:
    def test_derive_seed(self) -> None:
        assert derive_seed(5, 3) == 6
        assert derive_seed(7, 0) == 7
        assert RandomStream(5).for_row(3).seed == 6

    def test_blocks_draw_from_row_streams(self) -> None:
        r = build_randomizer(0.0, 1.0, 0.1, 1.0)
        labels = np.random.default_rng(0).uniform(0.0, 1.0, size=2 * BLOCK_ROWS + 5)
        rows = RandomStream(11).spawn(ROW_STREAMS)
        # Act
        values = randomize_labels(r, labels, RandomStream(11))
        # Assert
        expected = np.concatenate(
            [
                sample_many(r, labels[start : start + BLOCK_ROWS], rows.for_row(start))
                for start in range(0, labels.size, BLOCK_ROWS)
            ]
        )
        assert np.array_equal(values, expected)

    @pytest.mark.parametrize("workers", [2, 3, 8, None])
    def test_same_output_for_any_worker_count(self, workers: int | None) -> None:
        r = build_randomizer(0.0, 1.0, 0.1, 1.0)
        labels = np.random.default_rng(1).uniform(0.0, 1.0, size=10_000)
        # Act
        sequential = randomize_labels(r, labels, RandomStream(12), workers=1)
        parallel = randomize_labels(r, labels, RandomStream(12), workers=workers)
        # Assert
        assert np.array_equal(sequential, parallel)

    def test_draws_are_counted_on_the_parent(self) -> None:
        r = build_randomizer(0.0, 1.0, 0.1, 1.0)
        stream = RandomStream(13)
        randomize_labels(r, np.full(10_000, 0.5), stream, workers=3)
        assert stream.counts == {"uniform": 10_000}

    def test_rows_do_not_replay_the_parent_stream(self) -> None:
        r = build_randomizer(0.0, 1.0, 0.1, 0.0)
        labels = np.full(100, 0.5)
        # Act
        values = randomize_labels(r, labels, RandomStream(14))
        # Assert
        assert not np.array_equal(values, sample_many(r, labels, RandomStream(14)))

    def test_empty(self) -> None:
        r = build_randomizer(0.0, 1.0, 0.1, 1.0)
        assert randomize_labels(r, [], RandomStream(0)).size == 0
