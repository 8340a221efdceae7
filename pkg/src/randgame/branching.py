"""Galton-Watson processes: simulation, extinction fixed points, duality and Otter-Dwass."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.optimize import bisect
from scipy.special import gammaln


class ConvergenceError(ArithmeticError):
    pass


@dataclass(frozen=True)
class Poisson:
    mean: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.mean) and self.mean > 0):
            raise ValueError(f"Poisson mean must be finite and > 0, got {self.mean}")

    @property
    def expectation(self) -> float:
        return self.mean

    def pgf(self, z: float) -> float:
        return math.exp(self.mean * (z - 1.0))

    def pgf_prime(self, z: float) -> float:
        return self.mean * math.exp(self.mean * (z - 1.0))

    def sum_of(self, count: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """Total offspring of ``count`` individuals (a sum of iid Poissons is Poisson)."""
        return rng.poisson(self.mean * count)


@dataclass(frozen=True)
class Binomial:
    trials: int
    success: float

    def __post_init__(self) -> None:
        if int(self.trials) != self.trials or self.trials < 1:
            raise ValueError(f"Binomial trials must be an integer >= 1, got {self.trials}")
        if not 0.0 <= self.success <= 1.0:
            raise ValueError(f"Binomial success must lie in [0, 1], got {self.success}")

    @property
    def expectation(self) -> float:
        return self.trials * self.success

    def pgf(self, z: float) -> float:
        return (1.0 - self.success + self.success * z) ** self.trials

    def pgf_prime(self, z: float) -> float:
        m, q = self.trials, self.success
        return m * q * (1.0 - q + q * z) ** (m - 1)

    def sum_of(self, count: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        return rng.binomial(self.trials * count, self.success)


OffspringSpec = Union[Poisson, Binomial]


@dataclass(frozen=True)
class GWOutcome:
    extinct: bool
    total_population: int
    cap_hit: bool


def gw_run(spec: OffspringSpec, init: int, pop_cap: int, stream: np.random.Generator) -> GWOutcome:
    """Simulate one process generation by generation.

    Stops at extinction or once the cumulative population (the initial
    individuals included) reaches ``pop_cap``.
    """
    if init < 1:
        raise ValueError("initial population must be >= 1")
    if pop_cap < init:
        raise ValueError("pop_cap must be >= init")
    z = total = init
    while total < pop_cap:
        z = int(spec.sum_of(np.int64(z), stream))
        if z == 0:
            return GWOutcome(True, total, False)
        total += z
    return GWOutcome(False, total, True)


@dataclass(frozen=True)
class GWBatch:
    extinct: np.ndarray
    total_population: np.ndarray
    cap_hit: np.ndarray

    @property
    def extinction_frequency(self) -> float:
        return float(self.extinct.mean())


def gw_batch(
    spec: OffspringSpec, init: int, pop_cap: int, runs: int, stream: np.random.Generator
) -> GWBatch:
    """``runs`` independent processes advanced in lockstep, one generation per vectorised draw."""
    if pop_cap < init:
        raise ValueError("pop_cap must be >= init")
    z = np.full(runs, init, dtype=np.int64)
    total = z.copy()
    extinct = np.zeros(runs, dtype=bool)
    alive = total < pop_cap
    while alive.any():
        idx = np.flatnonzero(alive)
        nxt = spec.sum_of(z[idx], stream).astype(np.int64)
        z[idx] = nxt
        total[idx] += nxt
        died = nxt == 0
        extinct[idx[died]] = True
        alive[idx] = ~died & (total[idx] < pop_cap)
    return GWBatch(extinct, total, ~extinct)


def extinction_fixed_point(
    spec: OffspringSpec, tol: float = 1e-12, max_iter: int = 10_000_000
) -> float:
    """Smallest fixed point of the offspring pgf in [0, 1], by monotone iteration from 0.

    Returns exactly 1.0 when the mean offspring is at most 1.
    """
    if spec.expectation <= 1.0:
        return 1.0
    z = 0.0
    for _ in range(max_iter):
        nz = spec.pgf(z)
        step = nz - z
        z = nz
        # contraction factor near the fixed point is G'(z) < 1
        slope = spec.pgf_prime(z)
        if slope < 1.0 and step * slope / (1.0 - slope) < tol:
            return z
        if step <= 0.0:
            return z
    raise ConvergenceError(f"fixed-point iteration did not converge for {spec}")


def dual_parameter(lam: float, tol: float = 1e-12) -> float:
    """The ``nu < 1`` with ``nu * exp(-nu) == lam * exp(-lam)``.

    A Poisson(lam) process conditioned on dying out is a Poisson(nu) process.
    """
    if not lam > 1.0:
        raise ValueError(f"dual parameter needs lam > 1, got {lam}")
    target = lam * math.exp(-lam)
    return bisect(lambda v: v * math.exp(-v) - target, 0.0, 1.0, xtol=tol, rtol=4 * np.finfo(float).eps)


def otter_dwass_log_pmf(init: int, mean: float, total: int) -> float:
    if total < init:
        return -math.inf
    m = total - init
    x = mean * total
    return math.log(init) - math.log(total) - x + m * math.log(x) - float(gammaln(m + 1))


def otter_dwass_pmf(init: int, mean: float, total: int) -> float:
    """P(total population == ``total``) for Poisson(``mean``) offspring from ``init`` ancestors."""
    if init < 1 or mean <= 0:
        raise ValueError("need init >= 1 and mean > 0")
    return math.exp(otter_dwass_log_pmf(init, mean, total))
