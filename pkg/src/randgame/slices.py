"""Cycles in two-dimensional slices, their basins, and the global good-cycle checks.

A slice fixes every coordinate but the first two. Inside a slice each vertex
has at most two out-edges, and after the first move a walk must alternate
dimensions, so the walk is a deterministic function of (vertex, next
dimension). Cycles of that functional graph are exactly the slice's
best-response cycles; the basin of a cycle is every slice vertex from which
either first move leads into it.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

from . import _kernels
from .census import DEFAULT_EPSILON, census
from .grid import GridShape, WinnerTable
from .response import backward_reach_set, scc, sinks

# The basin threshold uses the natural logarithm.
BASIN_LOG = math.log


@dataclass(frozen=True)
class SliceRef:
    anchor: tuple[int, ...]
    k: int

    @property
    def index(self) -> int:
        return sum(c * self.k**i for i, c in enumerate(self.anchor))

    @classmethod
    def from_index(cls, index: int, shape: GridShape) -> SliceRef:
        anchor = []
        for _ in range(shape.n - 2):
            index, c = divmod(index, shape.k)
            anchor.append(c)
        return cls(tuple(anchor), shape.k)

    def vertices(self) -> range:
        kk = self.k * self.k
        return range(self.index * kk, (self.index + 1) * kk)


def slice_count(shape: GridShape) -> int:
    return shape.k ** (shape.n - 2)


def iter_slices(shape: GridShape) -> Iterator[SliceRef]:
    for a in range(slice_count(shape)):
        yield SliceRef.from_index(a, shape)


def min_good_length(k: int) -> float:
    return math.sqrt(k)


def min_good_basin(k: int) -> float:
    return k * k / (800.0 * BASIN_LOG(k))


def is_good(length: int, basin: int, k: int) -> bool:
    return length >= min_good_length(k) and basin >= min_good_basin(k)


@dataclass(frozen=True)
class CycleRecord:
    slice: SliceRef
    vertices: tuple[int, ...]
    basin_size: int
    good: bool

    @property
    def length(self) -> int:
        return len(self.vertices)

    def to_json(self) -> dict:
        return {
            "anchor": list(self.slice.anchor),
            "length": self.length,
            "basin_size": self.basin_size,
            "good": self.good,
        }


def _raw(w: WinnerTable, anchor_index: int):
    return _kernels.impl.slice_cycles(w.winners, w.shape.n, w.shape.k, anchor_index)


def cycles_and_basins(w: WinnerTable, sl: SliceRef) -> list[CycleRecord]:
    k = w.shape.k
    starts, verts, basins = _raw(w, sl.index)
    out = []
    for c in range(len(basins)):
        cyc = tuple(int(v) for v in verts[starts[c] : starts[c + 1]])
        b = int(basins[c])
        out.append(CycleRecord(sl, cyc, b, is_good(len(cyc), b, k)))
    return out


def good_cycles(w: WinnerTable, sl: SliceRef) -> list[CycleRecord]:
    return [c for c in cycles_and_basins(w, sl) if c.good]


def all_good_cycles(w: WinnerTable) -> list[CycleRecord]:
    out = []
    for sl in iter_slices(w.shape):
        out.extend(good_cycles(w, sl))
    return out


@dataclass(frozen=True)
class SliceStats:
    slices: int
    slices_with_good_cycle: int
    cycle_lengths: Counter

    def to_json(self) -> dict:
        return {
            "slices": self.slices,
            "good_cycle_slices": self.slices_with_good_cycle,
            "cycle_lengths": {str(k): v for k, v in sorted(self.cycle_lengths.items())},
        }


def slice_stats(w: WinnerTable) -> SliceStats:
    """Cycle-length histogram and good-cycle slice count over every slice of ``w``."""
    k = w.shape.k
    lengths: Counter = Counter()
    with_good = 0
    for a in range(slice_count(w.shape)):
        starts, _, basins = _raw(w, a)
        lens = np.diff(starts)
        lengths.update(int(x) for x in lens)
        if any(is_good(int(L), int(b), k) for L, b in zip(lens, basins)):
            with_good += 1
    return SliceStats(slice_count(w.shape), with_good, lengths)


class Verdict(NamedTuple):
    holds: bool
    witness: tuple


def _need_three(w: WinnerTable) -> None:
    if w.shape.n < 3:
        raise ValueError("the good-cycle checks need n >= 3")


def all_good_cycles_one_scc(w: WinnerTable, cycles: list[CycleRecord] | None = None) -> Verdict:
    """Whether every good cycle lies in a single strongly connected component.

    On failure the witness is a pair of vertices from good cycles in different
    components.
    """
    _need_three(w)
    cycles = all_good_cycles(w) if cycles is None else cycles
    if len(cycles) <= 1:
        return Verdict(True, ())
    labels = scc(w)
    first = cycles[0].vertices[0]
    for c in cycles[1:]:
        v = c.vertices[0]
        if labels[v] != labels[first]:
            return Verdict(False, (first, v))
    return Verdict(True, ())


def _good_cycle_vertices(cycles: list[CycleRecord]) -> np.ndarray:
    return np.array([v for c in cycles for v in c.vertices], dtype=np.int64)


def nonsinks_reach_good_cycle(w: WinnerTable, cycles: list[CycleRecord] | None = None) -> Verdict:
    """Whether every non-sink has a path into some good cycle; witnesses are the non-sinks without one."""
    _need_three(w)
    cycles = all_good_cycles(w) if cycles is None else cycles
    reach = backward_reach_set(w, _good_cycle_vertices(cycles)).astype(bool)
    reach[sinks(w)] = True
    missing = np.flatnonzero(~reach)
    return Verdict(len(missing) == 0, tuple(int(v) for v in missing))


def good_sinks_reached_from_good_cycle(
    w: WinnerTable, epsilon: float = DEFAULT_EPSILON, cycles: list[CycleRecord] | None = None
) -> Verdict:
    """Whether each epsilon-good sink can be reached from some good cycle; witnesses are the good sinks that cannot."""
    _need_three(w)
    if not 0 < epsilon < 1 / 6:
        raise ValueError("epsilon must lie in (0, 1/6)")
    cycles = all_good_cycles(w) if cycles is None else cycles
    on_cycle = np.zeros(w.shape.vertex_count, dtype=bool)
    on_cycle[_good_cycle_vertices(cycles)] = True
    failures = []
    for s in census(w, epsilon).good:
        if not on_cycle[backward_reach_set(w, [s]).astype(bool)].any():
            failures.append(s)
    return Verdict(not failures, tuple(failures))
