"""Search for the randomization interval `[A1, A2]` maximizing

    F(A1, A2) = 2 * zeta * mass([A1, A2]) / (2 * zeta + exp(-epsilon) * (A2 - A1))

over a step prior. `F` is the probability that a label drawn from the prior is
randomized into its own zeta-neighborhood.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .density import StepDensity, cdf, integrate, pdf_at
from .errors import EqualHeights, InvalidParameter, NegativeEpsilon, NonPositiveZeta, ReversedBounds
from .results import Err, Ok, Result

logger = logging.getLogger(__name__)

TIE_TOLERANCE = 1e-12


def check_privacy_parameters(zeta: float, epsilon: float) -> None:
    """Raise when `zeta` is not positive or `epsilon` is negative."""
    if not (zeta > 0 and math.isfinite(zeta)):
        raise NonPositiveZeta(f"zeta must be a positive finite number, got {zeta}")
    if not epsilon >= 0:
        raise NegativeEpsilon(f"epsilon must be non-negative, got {epsilon}")


@dataclass(frozen=True)
class Interval:
    """Closed interval `[a1, a2]` in label units."""

    a1: float
    a2: float

    def __post_init__(self) -> None:
        if not self.a1 <= self.a2:
            raise ReversedBounds(f"interval bounds are reversed: [{self.a1}, {self.a2}]")

    @property
    def length(self) -> float:
        return self.a2 - self.a1

    def __contains__(self, y: float) -> bool:
        return self.a1 <= y <= self.a2

    def clamp(self, y: float) -> float:
        return min(max(y, self.a1), self.a2)


@dataclass(frozen=True)
class CriticalPoints:
    """Stationary candidates of `F` on the cell `A1 in bin i`, `A2 in bin j`.

    `d11`, `d12` are the values of the bracket in dF/dA1 at `A2 = n_j` and
    `A2 = n_{j+1}`; `d21`, `d22` the bracket in dF/dA2 at `A1 = n_i` and
    `A1 = n_{i+1}`. A sign change of a pair places the matching critical point
    strictly inside its bin.
    """

    i: int
    j: int
    h: float
    c1: float
    c2: float
    e1: float
    e2: float
    d11: float
    d12: float
    d21: float
    d22: float


@dataclass(frozen=True)
class OptimizationResult:
    interval: Interval
    objective: float
    evaluations: int


def objective_F(
    d: StepDensity, a1: float, a2: float, zeta: float, epsilon: float
) -> float:
    """Probability that a prior label is randomized into its own neighborhood."""
    check_privacy_parameters(zeta, epsilon)
    if a1 > a2:
        raise ReversedBounds(f"interval bounds are reversed: [{a1}, {a2}]")
    gamma = 2.0 * zeta + math.exp(-epsilon) * (a2 - a1)
    return 2.0 * zeta * integrate(d, a1, a2) / gamma


def _pair_terms(
    d: StepDensity, i: int, j: int, zeta: float, epsilon: float
) -> tuple[float, float, float]:
    nodes, heights = d.nodes, d.heights
    if i == j:
        h = heights[i] * (nodes[i + 1] - nodes[i])
    else:
        middle = math.fsum(
            heights[m] * (nodes[m + 1] - nodes[m]) for m in range(i + 1, j)
        )
        h = heights[i] * nodes[i + 1] + middle - heights[j] * nodes[j]
    decay = math.exp(-epsilon)
    c1 = 2.0 * zeta * heights[i] - decay * h
    c2 = 2.0 * zeta * heights[j] - decay * h
    return h, c1, c2


def critical_points(
    d: StepDensity, i: int, j: int, zeta: float, epsilon: float
) -> Result[CriticalPoints, EqualHeights]:
    """Critical points `e1` (for A1) and `e2` (for A2) of `F` on cell `(i, j)`.

    Returns `Err(EqualHeights)` when the bins share a height, in which case `F`
    has no interior critical point on the cell and only endpoints matter.
    """
    check_privacy_parameters(zeta, epsilon)
    if not 0 <= i <= j < d.k:
        raise InvalidParameter(f"bin indices must satisfy 0 <= i <= j < {d.k}, got ({i}, {j})")
    alpha_i, alpha_j = d.heights[i], d.heights[j]
    if alpha_i == alpha_j:
        return Err(EqualHeights(f"bins {i} and {j} have equal height {alpha_i}"))
    decay = math.exp(-epsilon)
    denominator = decay * (alpha_j - alpha_i)
    if denominator == 0.0:
        return Err(EqualHeights(f"exp(-{epsilon}) underflows, critical points undefined"))
    h, c1, c2 = _pair_terms(d, i, j, zeta, epsilon)
    slope = decay * (alpha_i - alpha_j)
    nodes = d.nodes
    return Ok(
        CriticalPoints(
            i=i,
            j=j,
            h=h,
            c1=c1,
            c2=c2,
            e1=c2 / denominator,
            e2=c1 / denominator,
            d11=slope * nodes[j] + c1,
            d12=slope * nodes[j + 1] + c1,
            d21=slope * nodes[i] + c2,
            d22=slope * nodes[i + 1] + c2,
        )
    )


def objective_gradient(
    d: StepDensity, a1: float, a2: float, zeta: float, epsilon: float
) -> tuple[float, float]:
    """Partial derivatives `(dF/dA1, dF/dA2)` away from bin boundaries.

    On cells with `i < j` the closed forms in `c1`, `c2` are used, elsewhere the
    one-sided quotient rule with the local heights.
    """
    check_privacy_parameters(zeta, epsilon)
    if a1 > a2:
        raise ReversedBounds(f"interval bounds are reversed: [{a1}, {a2}]")
    decay = math.exp(-epsilon)
    gamma = 2.0 * zeta + decay * (a2 - a1)
    i, j = d.bin_index(a1), d.bin_index(a2)
    if i is not None and j is not None and i < j:
        _, c1, c2 = _pair_terms(d, i, j, zeta, epsilon)
        slope = decay * (d.heights[i] - d.heights[j])
        scale = 2.0 * zeta / gamma**2
        return -scale * (slope * a2 + c1), scale * (slope * a1 + c2)
    mass = integrate(d, a1, a2)
    scale = 2.0 * zeta / gamma**2
    return (
        scale * (decay * mass - pdf_at(d, a1) * gamma),
        scale * (pdf_at(d, a2) * gamma - decay * mass),
    )


def _prefer(
    candidate: tuple[float, float, float], best: tuple[float, float, float] | None
) -> bool:
    """`True` when candidate `(F, a1, a2)` beats `best`.

    Ties on F go to the longer interval, then to the smaller `a1`.
    """
    if best is None:
        return True
    value, a1, a2 = candidate
    best_value, best_a1, best_a2 = best
    if not math.isclose(value, best_value, rel_tol=TIE_TOLERANCE, abs_tol=1e-15):
        return value > best_value
    if a2 - a1 != best_a2 - best_a1:
        return a2 - a1 > best_a2 - best_a1
    return a1 < best_a1


def optimal_interval(d: StepDensity, zeta: float, epsilon: float) -> OptimizationResult:
    """Maximize `F` by enumerating bin corners and critical points of every cell."""
    check_privacy_parameters(zeta, epsilon)
    nodes = d.nodes
    best: tuple[float, float, float] | None = None
    evaluations = 0
    for i in range(d.k):
        for j in range(i, d.k):
            candidates = [
                (left, right)
                for left in (nodes[i], nodes[i + 1])
                for right in (nodes[j], nodes[j + 1])
            ]
            points = critical_points(d, i, j, zeta, epsilon)
            if points.is_ok():
                cp = points.unwrap()
                e1_inside = nodes[i] < cp.e1 < nodes[i + 1]
                e2_inside = nodes[j] < cp.e2 < nodes[j + 1]
                if e2_inside:
                    candidates += [(nodes[i], cp.e2), (nodes[i + 1], cp.e2)]
                if e1_inside:
                    candidates += [(cp.e1, nodes[j]), (cp.e1, nodes[j + 1])]
                if e1_inside and e2_inside:
                    candidates.append((cp.e1, cp.e2))
            for a1, a2 in candidates:
                if a1 > a2:
                    continue
                evaluations += 1
                candidate = (objective_F(d, a1, a2, zeta, epsilon), a1, a2)
                if _prefer(candidate, best):
                    best = candidate
    assert best is not None
    value, a1, a2 = best
    logger.debug(
        "optimal interval [%r, %r] with F=%r after %d evaluations",
        a1,
        a2,
        value,
        evaluations,
    )
    return OptimizationResult(Interval(a1, a2), value, evaluations)


def grid_search_interval(
    d: StepDensity,
    zeta: float,
    epsilon: float,
    resolution: float = 1e-3,
    *,
    chunk: int = 512,
) -> OptimizationResult:
    """Brute-force maximum of `F` over a uniform grid of `[n_0, n_k]`."""
    check_privacy_parameters(zeta, epsilon)
    if resolution <= 0:
        raise InvalidParameter(f"resolution must be positive, got {resolution}")
    lo, hi = d.support
    size = int(math.ceil((hi - lo) / resolution)) + 1
    grid = np.linspace(lo, hi, size)
    cumulative = cdf(d, grid)
    decay = math.exp(-epsilon)
    best: tuple[float, float, float] | None = None
    for start in range(0, size, chunk):
        rows = slice(start, min(start + chunk, size))
        mass = cumulative[None, :] - cumulative[rows, None]
        length = grid[None, :] - grid[rows, None]
        values = np.where(
            length >= 0.0, 2.0 * zeta * mass / (2.0 * zeta + decay * length), -np.inf
        )
        row, col = np.unravel_index(int(np.argmax(values)), values.shape)
        candidate = (float(values[row, col]), float(grid[start + row]), float(grid[col]))
        if best is None or candidate[0] > best[0]:
            best = candidate
    assert best is not None
    value, a1, a2 = best
    return OptimizationResult(Interval(a1, a2), value, size * (size + 1) // 2)
