from __future__ import annotations

import math

import numpy as np
import pytest

from labeldp.errors import (
    InvalidParameter,
    NegativeEpsilon,
    NonPositiveZeta,
    OutOfInterval,
    ReversedBounds,
)
from labeldp.mechanism import (
    PolicyKind,
    RandomizerSpec,
    build_randomizer,
    conditional_density,
    density_pieces,
    neighborhood_mass,
    sample,
    sample_many,
)
from labeldp.streams import RandomStream

GAMMA = 0.2 + math.exp(-1.0)


@pytest.fixture
def unit() -> RandomizerSpec:
    return build_randomizer(0.0, 1.0, 0.1, 1.0)


def random_spec(rng: np.random.Generator, policy: PolicyKind) -> RandomizerSpec:
    a1 = rng.uniform(-2.0, 2.0)
    return build_randomizer(
        a1,
        a1 + rng.uniform(0.0, 3.0),
        rng.uniform(0.01, 1.0),
        rng.uniform(0.0, 8.0),
        policy,
    )


class TestBuildRandomizer:
    def test_gamma(self, unit: RandomizerSpec) -> None:
        assert unit.gamma == pytest.approx(0.2 + math.exp(-1), rel=1e-12)
        assert unit.policy is PolicyKind.PROJECTION
        assert unit.support == (-0.1, 1.1)

    def test_degenerate_interval(self) -> None:
        r = build_randomizer(0.0, 0.0, 0.5, 2.0, "uniform_outside")
        assert r.gamma == 1.0
        assert r.policy is PolicyKind.UNIFORM_OUTSIDE

    @pytest.mark.parametrize(
        "args,error",
        [
            ((0.0, 1.0, 0.0, 1.0), NonPositiveZeta),
            ((0.0, 1.0, 0.1, -1.0), NegativeEpsilon),
            ((1.0, 0.0, 0.1, 1.0), ReversedBounds),
        ],
    )
    def test_invalid_parameters(self, args: tuple, error: type) -> None:
        with pytest.raises(error):
            build_randomizer(*args)

    def test_unknown_policy(self) -> None:
        with pytest.raises(ValueError):
            build_randomizer(0.0, 1.0, 0.1, 1.0, "reflect")

    def test_invalid_in_density_factor(self) -> None:
        with pytest.raises(InvalidParameter):
            build_randomizer(0.0, 1.0, 0.1, 1.0, in_density_factor=0.0)

    def test_json(self) -> None:
        r = build_randomizer(0.25, 0.75, 0.1, 2.0, PolicyKind.UNIFORM_OUTSIDE)
        assert r.to_dict() == {
            "a1": 0.25,
            "a2": 0.75,
            "zeta": 0.1,
            "epsilon": 2.0,
            "policy": "uniform_outside",
        }
        assert RandomizerSpec.from_json(r.to_json()) == r

    def test_json_requires_every_field(self) -> None:
        with pytest.raises(InvalidParameter, match="zeta"):
            RandomizerSpec.from_dict({"a1": 0, "a2": 1, "epsilon": 1})


class TestConditionalDensity:
    def test_levels(self, unit: RandomizerSpec) -> None:
        gamma = 0.2 + math.exp(-1)
        assert conditional_density(unit, 0.5, 0.55) == pytest.approx(1 / gamma, rel=1e-12)
        assert conditional_density(unit, 0.5, 0.9) == pytest.approx(math.exp(-1) / gamma, rel=1e-12)
        assert conditional_density(unit, 0.5, 1.2) == 0.0

    def test_neighborhood_is_closed(self, unit: RandomizerSpec) -> None:
        assert conditional_density(unit, 0.5, 0.5 + 0.1) == pytest.approx(1 / GAMMA)

    def test_projection_uses_the_nearest_endpoint(self, unit: RandomizerSpec) -> None:
        assert conditional_density(unit, 5.0, 1.05) == pytest.approx(1 / GAMMA)
        assert conditional_density(unit, 5.0, 0.5) == pytest.approx(math.exp(-1) / GAMMA)
        assert conditional_density(unit, -5.0, -0.05) == pytest.approx(1 / GAMMA)

    def test_uniform_outside(self) -> None:
        r = build_randomizer(0.0, 1.0, 0.1, 1.0, PolicyKind.UNIFORM_OUTSIDE)
        assert conditional_density(r, 5.0, 1.05) == pytest.approx(1 / 1.2)
        assert conditional_density(r, 5.0, 0.3) == pytest.approx(1 / 1.2)
        assert conditional_density(r, 0.5, 0.55) == pytest.approx(1 / GAMMA)

    @pytest.mark.parametrize("policy", list(PolicyKind))
    def test_pieces_integrate_to_one(self, policy: PolicyKind) -> None:
        rng = np.random.default_rng(11)
        for _ in range(100):
            r = random_spec(rng, policy)
            for y in rng.uniform(r.a1 - 2.0, r.a2 + 2.0, size=10):
                # Act
                pieces = density_pieces(r, y)
                # Assert
                total = math.fsum((right - left) * level for left, right, level in pieces)
                assert total == pytest.approx(1.0, abs=1e-9)
                assert pieces[0][0] == r.support[0] and pieces[-1][1] == r.support[1]
                for left, right, level in pieces:
                    middle = 0.5 * (left + right)
                    assert conditional_density(r, y, middle) == pytest.approx(level)

    @pytest.mark.parametrize("policy", list(PolicyKind))
    def test_density_ratio_is_bounded(self, policy: PolicyKind) -> None:
        rng = np.random.default_rng(5)
        for _ in range(200):
            r = random_spec(rng, policy)
            levels = [r.in_level, r.out_level]
            if policy is PolicyKind.UNIFORM_OUTSIDE:
                levels.append(r.outside_level)
            assert max(levels) / min(levels) <= math.exp(r.epsilon) * (1 + 1e-12)


class TestSample:
    def test_neighborhood_frequency(self, unit: RandomizerSpec) -> None:
        stream = RandomStream(42)
        # Act
        values = sample_many(unit, np.full(1_000_000, 0.5), stream)
        # Assert
        hits = np.mean(np.abs(values - 0.5) <= 0.1)
        assert hits == pytest.approx(0.2 / GAMMA, abs=0.0015)
        assert values.min() >= -0.1 and values.max() <= 1.1

    def test_one_uniform_per_label(self, unit: RandomizerSpec) -> None:
        stream = RandomStream(0)
        sample_many(unit, np.linspace(-1.0, 2.0, 1000), stream)
        assert stream.counts == {"uniform": 1000}

    def test_same_seed_same_draws(self, unit: RandomizerSpec) -> None:
        labels = np.linspace(0.0, 1.0, 500)
        first = sample_many(unit, labels, RandomStream(9))
        second = sample_many(unit, labels, RandomStream(9))
        assert np.array_equal(first, second)
        assert not np.array_equal(first, sample_many(unit, labels, RandomStream(10)))

    def test_zero_epsilon_is_uniform(self) -> None:
        r = build_randomizer(0.0, 1.0, 0.1, 0.0)
        values = sample_many(r, np.full(200_000, 0.2), RandomStream(1))
        counts, _ = np.histogram(values, bins=12, range=(-0.1, 1.1))
        assert counts / values.size == pytest.approx(np.full(12, 1 / 12), abs=0.005)

    def test_boundary_label_needs_no_clipping(self, unit: RandomizerSpec) -> None:
        values = sample_many(unit, np.zeros(100_000), RandomStream(2))
        assert np.mean(values <= 0.1) == pytest.approx(0.2 / GAMMA, abs=0.005)

    def test_uniform_outside_sampling(self) -> None:
        r = build_randomizer(0.0, 1.0, 0.1, 1.0, PolicyKind.UNIFORM_OUTSIDE)
        values = sample_many(r, np.full(100_000, 3.0), RandomStream(3))
        assert np.mean(values < 0.5) == pytest.approx(0.5, abs=0.01)
        assert values.min() >= -0.1 and values.max() <= 1.1

    def test_huge_epsilon_keeps_the_neighborhood(self) -> None:
        r = build_randomizer(0.0, 1.0, 0.1, 1e12)
        values = sample_many(r, np.full(10_000, 0.5), RandomStream(4))
        assert np.all(np.abs(values - 0.5) <= 0.1)

    def test_scalar_sample(self, unit: RandomizerSpec) -> None:
        value = sample(unit, 0.5, RandomStream(0))
        assert isinstance(value, float)
        assert -0.1 <= value <= 1.1


class TestNeighborhoodMass:
    def test_inside(self, unit: RandomizerSpec) -> None:
        expected = 0.2 / (0.2 + math.exp(-1))
        assert neighborhood_mass(unit, 0.3) == pytest.approx(expected, rel=1e-12)

    def test_large_epsilon(self) -> None:
        r = build_randomizer(0.0, 1.0, 0.1, 1e9)
        assert neighborhood_mass(r, 0.5) == pytest.approx(1.0, abs=1e-6)

    def test_outside(self, unit: RandomizerSpec) -> None:
        with pytest.raises(OutOfInterval):
            neighborhood_mass(unit, 1.5)
