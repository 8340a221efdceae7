"""Good/bad sink classification by capped backward line exploration."""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

from . import _kernels
from .asymptotics import joint_poisson_pmf, tv_distance
from .branching import Poisson, extinction_fixed_point
from .grid import GridShape, WinnerTable, make_shape, sample_winner_table, substream
from .response import out_neighbors_br, sinks

DEFAULT_EPSILON = 0.1


class NotASinkError(ValueError):
    pass


def good_threshold(k: int, epsilon: float) -> int:
    """Smallest integer line count that is at least ``k**epsilon``."""
    # round first so exact powers (64**0.5) are not pushed up by float noise
    return math.ceil(round(k**epsilon, 9))


def reaching_lines_count(w: WinnerTable, s: int, cap: int) -> tuple[int, bool]:
    """Lines whose winner can reach sink ``s``, explored breadth-first until ``cap`` are found.

    Returns ``(count, saturated)``. When saturated the count is reported as
    ``cap``; otherwise it is the exact size of the closure's line set.
    """
    shape = w.shape
    if not 0 <= s < shape.vertex_count:
        raise ValueError(f"vertex {s} out of range")
    if out_neighbors_br(w, s):
        raise NotASinkError(f"vertex {s} is not a sink")
    return _kernels.impl.reaching_lines(w.winners, shape.n, shape.k, int(s), int(cap))


@dataclass(frozen=True)
class SinkCensus:
    epsilon: float
    threshold: int
    good: tuple[int, ...]
    bad: tuple[int, ...]

    @property
    def X(self) -> int:
        return len(self.good)

    @property
    def Y(self) -> int:
        return len(self.bad)


def census(w: WinnerTable, epsilon: float = DEFAULT_EPSILON) -> SinkCensus:
    if not 0 < epsilon < 0.5:
        raise ValueError(f"epsilon must lie in (0, 1/2), got {epsilon}")
    cap = good_threshold(w.shape.k, epsilon)
    good, bad = [], []
    for s in sinks(w):
        _, saturated = _kernels.impl.reaching_lines(
            w.winners, w.shape.n, w.shape.k, int(s), cap
        )
        (good if saturated else bad).append(int(s))
    return SinkCensus(epsilon, cap, tuple(good), tuple(bad))


def census_row(w: WinnerTable, epsilon: float, seed: int) -> dict:
    c = census(w, epsilon)
    return {
        "seed": seed,
        "n": w.shape.n,
        "k": w.shape.k,
        "epsilon": epsilon,
        "X": c.X,
        "Y": c.Y,
        "sinks": sorted(c.good + c.bad),
    }


def bad_sink_probability(n: int) -> float:
    """Limiting probability that a sink is bad: the chance that ``n`` independent
    Poisson(n-1) branching processes all die out."""
    return extinction_fixed_point(Poisson(n - 1)) ** n


@dataclass
class CensusDistribution:
    shape: GridShape
    epsilon: float
    samples: int
    p: float
    histogram: Counter = field(default_factory=Counter)

    def frequencies(self) -> dict[tuple[int, int], float]:
        return {key: c / self.samples for key, c in sorted(self.histogram.items())}

    @property
    def tv(self) -> float:
        if self.samples == 0:
            raise ValueError("TV distance is undefined for an empty histogram")
        return tv_distance(self.histogram, lambda ab: joint_poisson_pmf(ab[0], ab[1], self.p))

    def prob_no_sinks(self) -> float:
        return self.histogram.get((0, 0), 0) / self.samples

    def mean_bad(self) -> float:
        return sum(b * c for (_, b), c in self.histogram.items()) / self.samples

    def frac_with_bad(self) -> float:
        return sum(c for (_, b), c in self.histogram.items() if b > 0) / self.samples


def census_distribution(
    n: int, k: int, epsilon: float = DEFAULT_EPSILON, samples: int = 10_000, seed: int = 0
) -> CensusDistribution:
    """Empirical law of (good, bad) sink counts over ``samples`` random tables.

    Sample ``j`` uses ``substream(seed, j)``.
    """
    shape = make_shape(n, k)
    dist = CensusDistribution(shape, epsilon, samples, bad_sink_probability(n))
    for j in range(samples):
        c = census(sample_winner_table(shape, substream(seed, j)), epsilon)
        dist.histogram[(c.X, c.Y)] += 1
    return dist


def no_bad_sink_bound(n: int, k: int, epsilon: float) -> float:
    """Upper bound on the probability that some sink is bad."""
    return bad_sink_probability(n) + 11 / k ** (1 - 2 * epsilon)
