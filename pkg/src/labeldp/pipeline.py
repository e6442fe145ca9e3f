"""End-to-end label privatization and its error accounting.

A privacy budget `epsilon` is split in two. The first part buys a histogram
prior from Laplace-noised labels, the second part randomizes every label with
the interval that is optimal for that prior. By sequential composition the
released labels are `epsilon1 + epsilon2` label-DP.
"""
from __future__ import annotations

import json
import logging
import math
import typing as t
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .baselines import AdditiveNoiseSpec, NoiseKind, make_noise_spec
from .density import StepDensity, restrict_to_bounds, sample_density
from .errors import (
    EmptyDataset,
    InvalidBudgetSplit,
    InvalidParameter,
    LengthMismatch,
    NonFiniteLabel,
    ReversedBounds,
)
from .mechanism import (
    PolicyKind,
    RandomizerSpec,
    build_randomizer,
    density_pieces,
    sample_many,
)
from .optimizer import Interval, optimal_interval
from .prior import HistogramPlan, estimate_prior
from .func import final
from .results import NOTHING, Option, Some
from .streams import RandomStream
from .workers import run_jobs

logger = logging.getLogger(__name__)

SPLIT_TOLERANCE = 1e-12
BLOCK_ROWS = 4096
ROW_STREAMS = 1


@dataclass(frozen=True)
class PrivacyBudgetSplit:
    epsilon_total: float
    epsilon1: float
    epsilon2: float

    def __post_init__(self) -> None:
        for name in ("epsilon_total", "epsilon1", "epsilon2"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise InvalidBudgetSplit(f"{name} must be positive and finite, got {value}")
        if abs(self.epsilon1 + self.epsilon2 - self.epsilon_total) > SPLIT_TOLERANCE * max(
            1.0, self.epsilon_total
        ):
            raise InvalidBudgetSplit(
                f"{self.epsilon1} + {self.epsilon2} does not add up to {self.epsilon_total}"
            )


def split_budget(
    epsilon_total: float, epsilon1: Option[float] = NOTHING
) -> PrivacyBudgetSplit:
    """Split `epsilon_total`, spending half of it on the prior unless told otherwise."""
    if not (epsilon_total > 0 and math.isfinite(epsilon_total)):
        raise InvalidBudgetSplit(
            f"total budget must be positive and finite, got {epsilon_total}"
        )
    first = epsilon1.unwrap_or(epsilon_total / 2.0)
    if not 0 < first < epsilon_total:
        raise InvalidBudgetSplit(
            f"epsilon1={first} must lie strictly between 0 and epsilon={epsilon_total}"
        )
    return PrivacyBudgetSplit(epsilon_total, first, epsilon_total - first)


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Rows of opaque feature payloads with one numeric label each.

    Labels are stored in a read-only array. `label_bounds` are public bounds on
    the labels, known without looking at the data.
    """

    features: tuple[t.Any, ...]
    labels: NDArray[np.float64]
    label_bounds: Option[tuple[float, float]] = NOTHING

    def __post_init__(self) -> None:
        labels = np.array(self.labels, dtype=float).ravel()
        if len(self.features) != labels.size:
            raise LengthMismatch(
                f"{len(self.features)} feature rows for {labels.size} labels"
            )
        if not np.all(np.isfinite(labels)):
            raise NonFiniteLabel("labels must be finite")
        for lo, hi in self.label_bounds:
            if not lo < hi:
                raise ReversedBounds(f"label bounds are reversed: ({lo}, {hi})")
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "features", tuple(self.features))

    def __len__(self) -> int:
        return len(self.features)

    @property
    def rows(self) -> list[tuple[t.Any, float]]:
        return [(f, float(y)) for f, y in zip(self.features, self.labels)]

    def with_labels(self, labels: ArrayLike) -> LabeledDataset:
        """Same feature payloads (same objects) with new labels."""
        return LabeledDataset(self.features, np.asarray(labels), self.label_bounds)


@dataclass(frozen=True)
class PipelineReport:
    """Everything needed to replay a privatization run."""

    split: PrivacyBudgetSplit
    plan: HistogramPlan
    prior: StepDensity
    interval: Interval
    gamma: float
    zeta: float
    policy: PolicyKind
    empirical_mse_vs_original: float
    expected_mse_bound: float
    closed_form_mse: float
    seed: int
    sigma: Option[float] = NOTHING
    prior_restricted: bool = False
    draws: dict[str, int] = field(default_factory=dict)
    prior_noise: Option[AdditiveNoiseSpec] = NOTHING

    @property
    def epsilon_total(self) -> float:
        return self.split.epsilon1 + self.split.epsilon2

    def to_dict(self) -> dict[str, t.Any]:
        return {
            "epsilon_total": self.epsilon_total,
            "split": {
                "epsilon_total": self.split.epsilon_total,
                "epsilon1": self.split.epsilon1,
                "epsilon2": self.split.epsilon2,
            },
            "plan": self.plan.to_dict(),
            "prior": self.prior.to_dict(),
            "prior_restricted": self.prior_restricted,
            "interval": {"a1": self.interval.a1, "a2": self.interval.a2},
            "gamma": self.gamma,
            "zeta": self.zeta,
            "policy": self.policy.value,
            "sigma": self.sigma.unwrap_or(None),
            "empirical_mse_vs_original": self.empirical_mse_vs_original,
            "expected_mse_bound": self.expected_mse_bound,
            "closed_form_mse": self.closed_form_mse,
            "seed": self.seed,
            "draws": dict(self.draws),
            "prior_noise": self.prior_noise.map(lambda noise: noise.to_dict()).unwrap_or(None),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


class MseEstimate(t.NamedTuple):
    analytic: float
    closed_form: float


class MonteCarloEstimate(t.NamedTuple):
    mean: float
    stderr: float
    n: int


def _fixed_piece_moment(
    left: float, right: float, level: float, p: float, q: float
) -> float:
    """`int_p^q int_left^right level * (y - t)**2 / 2 dt dy`."""

    def antiderivative(y: float) -> float:
        return ((left - y) ** 4 - (right - y) ** 4) / 24.0

    return level * (antiderivative(q) - antiderivative(p))


def _inside_moment(r: RandomizerSpec, p: float, q: float) -> float:
    """Integral over `y in [p, q]`, a sub-interval of `[A1, A2]`, of the expected loss."""
    zeta = r.zeta
    lower = r.a1 - zeta
    upper = r.a2 + zeta
    tails = (
        ((q - lower) ** 4 - (p - lower) ** 4) / 4.0
        + ((upper - p) ** 4 - (upper - q) ** 4) / 4.0
        - 2.0 * zeta**3 * (q - p)
    )
    return r.out_level * tails / 6.0 + r.in_level * zeta**3 * (q - p) / 3.0


def _outside_moment(r: RandomizerSpec, y: float, p: float, q: float) -> float:
    """Integral over `y in [p, q]` outside of the interval; `y` picks the side."""
    return math.fsum(
        _fixed_piece_moment(left, right, level, p, q)
        for left, right, level in density_pieces(r, y)
    )


def expected_mechanism_mse(r: RandomizerSpec, prior: StepDensity) -> MseEstimate:
    """Expected loss `E[(y - y_tilde)**2 / 2]` for labels drawn from `prior`.

    `analytic` integrates the conditional density exactly, bin by bin.
    `closed_form` evaluates the shortcut
    `(2/gamma) * zeta * E[P(y)] + exp(-epsilon)/(2*gamma) * (A1 + A2) * (A2 - A1 + 2*zeta)`
    with `P` the projection on the interval, reported for comparison.
    """
    a1, a2 = r.a1, r.a2
    analytic: list[float] = []
    projected: list[float] = []
    for (p, q), alpha in zip(zip(prior.nodes, prior.nodes[1:]), prior.heights):
        if alpha == 0.0:
            continue
        if p < a1:
            top = min(q, a1)
            analytic.append(alpha * _outside_moment(r, p, p, top))
            projected.append(alpha * a1 * (top - p))
        start, stop = max(p, a1), min(q, a2)
        if stop > start:
            analytic.append(alpha * _inside_moment(r, start, stop))
            projected.append(alpha * (stop**2 - start**2) / 2.0)
        if q > a2:
            bottom = max(p, a2)
            analytic.append(alpha * _outside_moment(r, q, bottom, q))
            projected.append(alpha * a2 * (q - bottom))
    closed = 2.0 / r.gamma * r.zeta * math.fsum(projected) + math.exp(-r.epsilon) / (
        2.0 * r.gamma
    ) * (a1 + a2) * (a2 - a1 + 2.0 * r.zeta)
    return MseEstimate(math.fsum(analytic), closed)


def monte_carlo_mse(
    r: RandomizerSpec,
    prior: StepDensity,
    n: int,
    stream: RandomStream,
    *,
    batch: int = 1_000_000,
) -> MonteCarloEstimate:
    """Monte-Carlo estimate of `expected_mechanism_mse`, with its standard error."""
    if n <= 0:
        raise InvalidParameter(f"need a positive number of draws, got {n}")
    total = 0.0
    total_sq = 0.0
    remaining = n
    while remaining > 0:
        size = min(batch, remaining)
        ys = sample_density(prior, size, stream)
        losses = 0.5 * (ys - sample_many(r, ys, stream)) ** 2
        total += float(losses.sum())
        total_sq += float((losses**2).sum())
        remaining -= size
    mean = total / n
    variance = max(total_sq / n - mean**2, 0.0)
    return MonteCarloEstimate(mean, math.sqrt(variance / n), n)


def empirical_mse(original: LabeledDataset, privatized: LabeledDataset) -> float:
    """Mean of `(y - y_tilde)**2 / 2` over aligned rows."""
    if len(original) != len(privatized):
        raise LengthMismatch(
            f"cannot compare {len(original)} original rows with {len(privatized)} rows"
        )
    if len(original) == 0:
        raise EmptyDataset("cannot compute an error over zero rows")
    return float(np.mean(0.5 * (original.labels - privatized.labels) ** 2))


def _randomize_blocks(
    r: RandomizerSpec,
    labels: NDArray[np.float64],
    rows: RandomStream,
    starts: t.Sequence[int],
) -> tuple[NDArray[np.float64], dict[str, int]]:
    values = []
    counts: dict[str, int] = {}
    for start in starts:
        block = rows.for_row(start)
        values.append(sample_many(r, labels[start : start + BLOCK_ROWS], block))
        for kind, n in block.counts.items():
            counts[kind] = counts.get(kind, 0) + n
    return np.concatenate(values), counts


def randomize_labels(
    r: RandomizerSpec,
    labels: ArrayLike,
    stream: RandomStream,
    *,
    workers: int | None = 1,
) -> NDArray[np.float64]:
    """Randomize `labels` in blocks of `BLOCK_ROWS` rows.

    The block starting at row `i` draws from `stream.spawn(ROW_STREAMS).for_row(i)`,
    so the output only depends on the seed, not on how blocks are shared between
    `workers`. Draws are added to the counters of `stream`.
    """
    labels = np.asarray(labels, dtype=float)
    if labels.size == 0:
        return labels.copy()
    rows = stream.spawn(ROW_STREAMS)
    starts = list(range(0, labels.size, BLOCK_ROWS))
    shards = [
        [int(start) for start in shard]
        for shard in np.array_split(starts, max(1, min(workers or 1, len(starts))))
    ]
    jobs = [final(_randomize_blocks, r, labels, rows, shard) for shard in shards]
    values = []
    for result in run_jobs(jobs, concurrent_limit=workers):
        shard_values, counts = result.unwrap()
        values.append(shard_values)
        stream.merge_counts(counts)
    return np.concatenate(values)


def privatize_dataset(
    d: LabeledDataset,
    split: PrivacyBudgetSplit,
    zeta: float,
    policy: PolicyKind | str = PolicyKind.PROJECTION,
    sigma: Option[float] = NOTHING,
    *,
    stream: RandomStream,
    restrict_prior: bool = True,
    workers: int | None = 1,
) -> tuple[LabeledDataset, PipelineReport]:
    """Replace every label of `d` by a randomized one.

    The dataset needs public label bounds: the Laplace stage clips to them and
    uses their range as sensitivity. With `restrict_prior` the estimated prior
    is restricted to those bounds before the interval search. Labels are
    randomized by `randomize_labels`, the output does not depend on `workers`.

    Raises:
        EmptyDataset: `d` has no rows.
        MissingSensitivity: `d` has no label bounds.
    """
    if len(d) == 0:
        raise EmptyDataset("cannot privatize an empty dataset")
    policy = PolicyKind(policy)
    bounds = d.label_bounds.unwrap_or(None)
    noise = make_noise_spec(NoiseKind.LAPLACE, split.epsilon1, clip_bounds=bounds)
    before = stream.counts

    prior, plan = estimate_prior(
        d.labels, split.epsilon1, noise, sigma, stream=stream, fallback=True
    )
    restricted = False
    if restrict_prior and bounds is not None:
        prior = restrict_to_bounds(prior, *bounds)
        restricted = True

    result = optimal_interval(prior, zeta, split.epsilon2)
    spec = build_randomizer(
        result.interval.a1, result.interval.a2, zeta, split.epsilon2, policy
    )
    logger.info(
        "randomizing %d labels on [%r, %r] with zeta=%s, epsilon2=%s",
        len(d),
        spec.a1,
        spec.a2,
        zeta,
        split.epsilon2,
    )
    released = d.with_labels(randomize_labels(spec, d.labels, stream, workers=workers))

    after = stream.counts
    draws = {
        "laplace": after.get("laplace", 0) - before.get("laplace", 0),
        "mechanism": after.get("uniform", 0) - before.get("uniform", 0),
    }
    expected = expected_mechanism_mse(spec, prior)
    report = PipelineReport(
        split=split,
        plan=plan,
        prior=prior,
        interval=spec.interval,
        gamma=spec.gamma,
        zeta=zeta,
        policy=policy,
        empirical_mse_vs_original=empirical_mse(d, released),
        expected_mse_bound=expected.analytic,
        closed_form_mse=expected.closed_form,
        seed=stream.seed,
        sigma=sigma,
        prior_restricted=restricted,
        draws=draws,
        prior_noise=Some(noise),
    )
    return released, report
