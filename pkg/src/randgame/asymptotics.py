"""Limiting constants for fixed n as k grows, and Poisson reference laws."""
from __future__ import annotations

import math
from collections.abc import Callable, Mapping
from dataclasses import asdict, dataclass
from typing import Hashable

from scipy.optimize import brentq
from scipy.stats import poisson

from .branching import Poisson, extinction_fixed_point

PNE_LIMIT = 1.0 - math.exp(-1.0)


@dataclass(frozen=True)
class AsymptoticConstants:
    n: int
    eta: float
    p: float
    lambda_n: float
    zeta: float
    zeta_via_lambda: float
    connected_fraction_limit: float
    pne_fraction_limit: float
    lambda_residual: float

    def as_dict(self) -> dict:
        return asdict(self)


def _zeta(x: float) -> float:
    # literal closed form; cancels to 0.0 once x drops below ~1e-16
    return 1.0 - math.exp(-x) * (1.0 - math.exp(x - 1.0)) / (1.0 - math.exp(-1.0))


def lambda_equation_residual(x: float, n: int) -> float:
    y = x ** (1.0 / n)
    return y - math.exp((n - 1) * (y - 1.0))


def solve_lambda(n: int) -> float:
    """Smallest positive root of ``x**(1/n) == exp((n-1)(x**(1/n) - 1))``, solved directly.

    In ``y = x**(1/n)`` the residual ``exp((n-1)(y-1)) - y`` is positive at 0,
    has its minimum at ``y* = 1 - log(n-1)/(n-1)`` where it is negative, and
    vanishes again at the spurious root ``y = 1``; bracketing on ``[0, y*]``
    isolates the wanted root.
    """
    m = n - 1
    y_min = 1.0 - math.log(m) / m
    y = brentq(lambda t: math.exp(m * (t - 1.0)) - t, 0.0, y_min, xtol=1e-300, rtol=4 * 2.0**-52)
    return y**n


def constants(n: int) -> AsymptoticConstants:
    if n < 3:
        raise ValueError("constants are defined for n >= 3 (for n = 2 the connected fraction tends to 0)")
    # eta shrinks fast with n, so iterate to the floating-point fixed point
    # rather than to an absolute tolerance
    eta = extinction_fixed_point(Poisson(n - 1), tol=0.0)
    p = eta**n
    lam = solve_lambda(n)
    return AsymptoticConstants(
        n=n,
        eta=eta,
        p=p,
        lambda_n=lam,
        # P(connected) = P(X >= 1, Y = 0) = (1 - e^(p-1)) e^(-p) = e^(-p) - e^(-1),
        # so 1 - P(connected)/(1 - e^(-1)) reduces to (1 - e^(-p)) / (1 - e^(-1))
        zeta=-math.expm1(-p) / PNE_LIMIT,
        zeta_via_lambda=_zeta(lam),
        connected_fraction_limit=1.0 + math.expm1(-p) / PNE_LIMIT,
        pne_fraction_limit=PNE_LIMIT,
        lambda_residual=abs(lambda_equation_residual(p, n)),
    )


def poisson_pmf(rate: float, j: int) -> float:
    if rate < 0:
        raise ValueError("rate must be >= 0")
    if rate == 0:
        return 1.0 if j == 0 else 0.0
    return math.exp(poisson.logpmf(j, rate))


def joint_poisson_pmf(a: int, b: int, p: float) -> float:
    """P(X=a, Y=b) for independent X ~ Poi(1-p), Y ~ Poi(p)."""
    return poisson_pmf(1.0 - p, a) * poisson_pmf(p, b)


def tv_distance(histogram: Mapping[Hashable, float], pmf: Callable[[Hashable], float]) -> float:
    """Total variation between a histogram (counts or masses) and a reference pmf.

    Sums ``|p_hat - p|`` over the observed support and adds the reference mass
    that falls outside it.
    """
    total = float(sum(histogram.values()))
    if total <= 0:
        raise ValueError("histogram is empty")
    seen_ref = 0.0
    diff = 0.0
    for key, count in histogram.items():
        ref = pmf(key)
        seen_ref += ref
        diff += abs(count / total - ref)
    return 0.5 * (diff + max(0.0, 1.0 - seen_ref))


def table(n_values) -> list[dict]:
    return [constants(n).as_dict() for n in n_values]
