"""Best response with inertia.

Each step every player is selected independently with probability ``q``;
selected players simultaneously switch to their best response against the
previous profile, the rest repeat their action. A sink is absorbing, so a
run has converged exactly when it sits on a sink.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .grid import WinnerTable, line_of, line_vertex, substream

_BLOCK = 4096


@dataclass(frozen=True)
class DynamicsConfig:
    q: float = 0.5
    max_steps: int = 100_000
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0 < self.q <= 1:
            raise ValueError(f"selection probability must lie in (0, 1], got {self.q}")
        if self.max_steps < 0:
            raise ValueError("max_steps must be >= 0")


@dataclass(frozen=True)
class DynamicsResult:
    converged: bool
    absorbing_profile: int | None
    steps: int


def best_responses(profile: int, w: WinnerTable) -> list[int]:
    """Per player, the profile reached if only that player best-responds."""
    out = []
    for d in range(w.shape.n):
        line, _ = line_of(profile, d, w.shape)
        out.append(line_vertex(line, w.winner(line), w.shape))
    return out


def apply_selection(profile: int, w: WinnerTable, selected) -> int:
    """Move every selected player to its best response against ``profile``, simultaneously."""
    new = profile
    for d, target in enumerate(best_responses(profile, w)):
        if selected[d]:
            new += target - profile
    return new


def step(profile: int, w: WinnerTable, q: float, stream: np.random.Generator) -> int:
    return apply_selection(profile, w, stream.random(w.shape.n) < q)


def run(
    w: WinnerTable, start: int, cfg: DynamicsConfig, stream: np.random.Generator | None = None
) -> DynamicsResult:
    if not 0 <= start < w.shape.vertex_count:
        raise ValueError(f"start profile {start} out of range")
    stream = np.random.default_rng(cfg.seed) if stream is None else stream
    n, k = w.shape.n, w.shape.k
    v, steps, converged = int(start), 0, False
    while True:
        block = min(_BLOCK, cfg.max_steps - steps)
        if block <= 0:
            # out of budget: report whether the final profile happens to be a sink
            v, _, converged = _kernels.impl.dynamics_block(
                w.winners, n, k, v, cfg.q, np.empty((0, n))
            )
            break
        v, used, converged = _kernels.impl.dynamics_block(
            w.winners, n, k, v, cfg.q, stream.random((block, n))
        )
        steps += used
        if converged:
            break
    return DynamicsResult(converged, v if converged else None, steps)


@dataclass(frozen=True)
class Survey:
    starts: int
    converged: int
    step_quantiles: dict[str, float]
    absorption: dict[int, int]

    @property
    def rate(self) -> float:
        return self.converged / self.starts if self.starts else float("nan")

    def to_json(self) -> dict:
        return {
            "starts": self.starts,
            "converged": self.converged,
            "rate": self.rate,
            "step_quantiles": self.step_quantiles,
            "absorption": {str(s): c for s, c in sorted(self.absorption.items())},
        }


def convergence_survey(
    w: WinnerTable, cfg: DynamicsConfig, starts: str | int = "all", key: tuple[int, ...] = ()
) -> tuple[Survey, list[tuple[int, DynamicsResult]]]:
    """Run from every profile (``"all"``) or from ``starts`` uniformly drawn profiles.

    Random starts are drawn from ``substream(cfg.seed, *key, 0)``; start ``i``
    runs on ``substream(cfg.seed, *key, 1, i)``.
    """
    V = w.shape.vertex_count
    if starts == "all":
        start_list = list(range(V))
    else:
        pick = substream(cfg.seed, *key, 0)
        start_list = [int(x) for x in pick.integers(0, V, size=int(starts))]
    results = []
    for i, s in enumerate(start_list):
        results.append((s, run(w, s, cfg, substream(cfg.seed, *key, 1, i))))
    steps = np.array([r.steps for _, r in results if r.converged], dtype=float)
    if len(steps):
        qs = {f"q{int(p * 100)}": float(np.quantile(steps, p)) for p in (0.5, 0.9, 0.99)}
        qs["max"] = float(steps.max())
    else:
        qs = {}
    absorbed = Counter(r.absorbing_profile for _, r in results if r.converged)
    survey = Survey(len(start_list), sum(r.converged for _, r in results), qs, dict(absorbed))
    return survey, results
