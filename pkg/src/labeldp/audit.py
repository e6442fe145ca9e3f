"""Check the label-DP guarantee of a configured randomizer.

The analytic audit compares the density levels the mechanism can emit. The
empirical audit samples conditional distributions of label pairs and bounds
their per-bin probability ratios with Wilson intervals.
"""
from __future__ import annotations

import json
import logging
import math
import typing as t
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import InsufficientSamples, InvalidParameter
from .func import final
from .mechanism import PolicyKind, RandomizerSpec, sample_many
from .results import NOTHING, Option, Some
from .streams import RandomStream
from .workers import run_jobs

logger = logging.getLogger(__name__)

RATIO_TOLERANCE = 1e-12
SAMPLES_PER_BIN = 10_000
DEFAULT_SIGNIFICANCE = 1e-3


@dataclass(frozen=True)
class PairAudit:
    """Empirical comparison of the randomized labels of `y` and `y_prime`."""

    y: float
    y_prime: float
    max_log_ratio: float
    lower_log_ratio: float
    slack: float


@dataclass(frozen=True)
class AuditReport:
    analytic_max_ratio: float
    epsilon_claimed: float
    pass_analytic: bool
    policy: PolicyKind
    empirical_max_log_ratio: Option[float] = NOTHING
    empirical_slack: Option[float] = NOTHING
    pass_empirical: Option[bool] = NOTHING
    samples_used: int = 0
    pairs: tuple[PairAudit, ...] = ()

    @property
    def passed(self) -> bool:
        return self.pass_analytic and self.pass_empirical.unwrap_or(True)

    def to_dict(self) -> dict[str, t.Any]:
        return {
            "analytic_max_ratio": self.analytic_max_ratio,
            "epsilon_claimed": self.epsilon_claimed,
            "pass_analytic": self.pass_analytic,
            "policy": self.policy.value,
            "empirical_max_log_ratio": self.empirical_max_log_ratio.unwrap_or(None),
            "empirical_slack": self.empirical_slack.unwrap_or(None),
            "pass_empirical": self.pass_empirical.unwrap_or(None),
            "samples_used": self.samples_used,
            "pairs": [
                {
                    "y": pair.y,
                    "y_prime": pair.y_prime,
                    "max_log_ratio": pair.max_log_ratio,
                    "lower_log_ratio": pair.lower_log_ratio,
                    "slack": pair.slack,
                }
                for pair in self.pairs
            ],
            "passed": self.passed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def render(self) -> str:
        """Human readable pass/fail table."""
        verdict = {True: "PASS", False: "FAIL"}
        lines = [
            f"policy            {self.policy.value}",
            f"epsilon claimed   {self.epsilon_claimed!r}",
            f"analytic ratio    {self.analytic_max_ratio!r}  "
            f"(bound {_exp_bound(self.epsilon_claimed)!r})  {verdict[self.pass_analytic]}",
        ]
        for passed in self.pass_empirical:
            lines.append(
                f"empirical log     {self.empirical_max_log_ratio.unwrap()!r}  "
                f"(slack {self.empirical_slack.unwrap()!r}, "
                f"{self.samples_used} samples)  {verdict[passed]}"
            )
            lines.extend(
                f"  pair ({pair.y!r}, {pair.y_prime!r})  log ratio {pair.max_log_ratio:.6f}"
                f"  lower bound {pair.lower_log_ratio:.6f}"
                for pair in self.pairs
            )
        lines.append(f"verdict           {verdict[self.passed]}")
        return "\n".join(lines)


def _exp_bound(epsilon: float) -> float:
    try:
        return math.exp(epsilon)
    except OverflowError:
        return math.inf


def mechanism_levels(r: RandomizerSpec) -> list[float]:
    """Density levels emitted on sets of positive length."""
    levels = [r.in_level]
    if r.a2 > r.a1:
        levels.append(r.out_level)
    if r.policy is PolicyKind.UNIFORM_OUTSIDE:
        levels.append(r.outside_level)
    return levels


def analytic_audit(r: RandomizerSpec) -> AuditReport:
    """Worst-case ratio of two conditional densities at the same output."""
    levels = mechanism_levels(r)
    smallest, largest = min(levels), max(levels)
    ratio = math.inf if smallest == 0.0 else largest / smallest
    passed = math.log(ratio) <= r.epsilon + math.log1p(RATIO_TOLERANCE)
    logger.info(
        "analytic audit of epsilon=%s (%s): max ratio %r, %s",
        r.epsilon,
        r.policy.value,
        ratio,
        "pass" if passed else "fail",
    )
    return AuditReport(
        analytic_max_ratio=ratio,
        epsilon_claimed=r.epsilon,
        pass_analytic=passed,
        policy=r.policy,
    )


def default_pairs(r: RandomizerSpec) -> list[tuple[float, float]]:
    """Label pairs whose neighborhoods are furthest apart."""
    middle = 0.5 * (r.a1 + r.a2)
    pairs = [(r.a1, r.a2), (middle, r.a1)]
    if r.policy is PolicyKind.UNIFORM_OUTSIDE:
        pairs.append((r.a2 + r.zeta + 1.0, middle))
    return pairs


def audit_edges(
    r: RandomizerSpec, pairs: t.Sequence[tuple[float, float]], bins: int
) -> np.ndarray:
    """Equal-width partition of the support, refined at every density breakpoint."""
    lo, hi = r.support
    edges = list(np.linspace(lo, hi, bins + 1))
    for pair in pairs:
        for y in pair:
            c = r.center(y)
            if c is not None:
                edges.extend((c - r.zeta, c + r.zeta))
    grid = np.unique(np.clip(np.asarray(edges, dtype=float), lo, hi))
    return grid


def wilson_interval(
    count: np.ndarray, n: int, z: float
) -> tuple[np.ndarray, np.ndarray]:
    """Wilson score interval of a binomial proportion, vectorized over `count`."""
    p = np.asarray(count, dtype=float) / n
    denominator = 1.0 + z**2 / n
    center = (p + z**2 / (2.0 * n)) / denominator
    half = z * np.sqrt(p * (1.0 - p) / n + z**2 / (4.0 * n**2)) / denominator
    return np.clip(center - half, 0.0, 1.0), np.clip(center + half, 0.0, 1.0)


def _histogram_pair(
    r: RandomizerSpec,
    y: float,
    y_prime: float,
    n_samples: int,
    edges: np.ndarray,
    stream: RandomStream,
) -> tuple[np.ndarray, np.ndarray]:
    first = sample_many(r, np.full(n_samples, y), stream)
    second = sample_many(r, np.full(n_samples, y_prime), stream)
    return np.histogram(first, edges)[0], np.histogram(second, edges)[0]


def _compare(
    counts: np.ndarray, other: np.ndarray, n: int, z: float
) -> tuple[float, float, float]:
    """Point and conservative log ratios over bins, in both directions."""
    low, high = wilson_interval(counts, n, z)
    other_low, other_high = wilson_interval(other, n, z)
    both = (counts > 0) & (other > 0)
    point = np.zeros(0)
    if np.any(both):
        point = np.abs(np.log(counts[both] / other[both]))
    with np.errstate(divide="ignore"):
        lower = np.maximum(
            np.where(low > 0, np.log(low) - np.log(other_high), -np.inf),
            np.where(other_low > 0, np.log(other_low) - np.log(high), -np.inf),
        )
        upper = np.maximum(np.log(high) - np.log(other_low), np.log(other_high) - np.log(low))
    if point.size == 0:
        return 0.0, float(lower.max()), 0.0
    index = int(np.argmax(point))
    worst = float(point[index])
    slack = float(upper[both][index]) - worst
    return worst, float(lower.max()), slack


def empirical_audit(
    r: RandomizerSpec,
    y_pairs: t.Sequence[tuple[float, float]] = (),
    n_samples: int = 1_000_000,
    bins: int = 20,
    *,
    stream: RandomStream,
    significance: float = DEFAULT_SIGNIFICANCE,
    include_default_pairs: bool = True,
    workers: int | None = 1,
) -> AuditReport:
    """Sample both members of every label pair and compare binned frequencies.

    `n_samples` draws are made per label. A pair fails when the Wilson lower
    bound on some bin's probability ratio exceeds `exp(epsilon)`, with a
    Bonferroni correction over all bins, pairs and both directions.

    Raises:
        InsufficientSamples: fewer than 10000 samples per bin.
    """
    if bins < 1:
        raise InvalidParameter(f"need at least one bin, got {bins}")
    if n_samples < SAMPLES_PER_BIN * bins:
        raise InsufficientSamples(
            f"{n_samples} samples are not enough for {bins} bins, "
            f"need at least {SAMPLES_PER_BIN * bins}"
        )
    if not 0 < significance < 1:
        raise InvalidParameter(f"significance must be in (0, 1), got {significance}")
    pairs = (default_pairs(r) if include_default_pairs else []) + [
        (float(y), float(y_prime)) for y, y_prime in y_pairs
    ]
    if not pairs:
        raise InvalidParameter("no label pair to audit")
    edges = audit_edges(r, pairs, bins)
    comparisons = 2 * len(pairs) * (edges.size - 1)
    z = float(stats.norm.ppf(1.0 - significance / (2.0 * comparisons)))

    jobs = [
        final(_histogram_pair, r, y, y_prime, n_samples, edges, stream.spawn(index))
        for index, (y, y_prime) in enumerate(pairs)
    ]
    histograms = [result.unwrap() for result in run_jobs(jobs, concurrent_limit=workers)]

    audits: list[PairAudit] = []
    for (y, y_prime), (counts, other) in zip(pairs, histograms):
        worst, lower, slack = _compare(counts, other, n_samples, z)
        audits.append(PairAudit(y, y_prime, worst, lower, slack))
    worst_pair = max(audits, key=lambda pair: pair.max_log_ratio)
    passed = all(pair.lower_log_ratio <= r.epsilon for pair in audits)
    analytic = analytic_audit(r)
    logger.info(
        "empirical audit over %d pairs: max log ratio %r (slack %r), %s",
        len(audits),
        worst_pair.max_log_ratio,
        worst_pair.slack,
        "pass" if passed else "fail",
    )
    return AuditReport(
        analytic_max_ratio=analytic.analytic_max_ratio,
        epsilon_claimed=r.epsilon,
        pass_analytic=analytic.pass_analytic,
        policy=r.policy,
        empirical_max_log_ratio=Some(worst_pair.max_log_ratio),
        empirical_slack=Some(worst_pair.slack),
        pass_empirical=Some(passed),
        samples_used=2 * n_samples * len(pairs),
        pairs=tuple(audits),
    )
