"""Best- and better-response digraphs over a table, never materialised as edge lists."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .grid import RankTable, WinnerTable, line_of, line_vertex


@dataclass(frozen=True)
class ClassFlags:
    has_pne: bool
    connected: bool
    weakly_acyclic: bool
    acyclic: bool

    def as_dict(self) -> dict[str, bool]:
        return {
            "pne": self.has_pne,
            "connected": self.connected,
            "weakly_acyclic": self.weakly_acyclic,
            "acyclic": self.acyclic,
        }


@dataclass(frozen=True, eq=False)
class ReachSet:
    """Vertices that can reach ``target`` (as a 0/1 mask) and how many lines are won inside it."""

    target: int
    member: np.ndarray
    touched_line_count: int

    @property
    def size(self) -> int:
        return int(self.member.sum())

    def __contains__(self, v: int) -> bool:
        return bool(self.member[v])


def _winners(w: WinnerTable) -> np.ndarray:
    return w.winners


def out_neighbors_br(w: WinnerTable, v: int) -> set[int]:
    shape = w.shape
    out = set()
    for d in range(shape.n):
        line, pos = line_of(v, d, shape)
        win = w.winner(line)
        if win != pos:
            out.add(line_vertex(line, win, shape))
    return out


def out_degrees(w: WinnerTable) -> np.ndarray:
    """Out-degree of every vertex: the number of its lines it does not win."""
    return w.shape.n - win_counts(w)


def win_counts(w: WinnerTable) -> np.ndarray:
    """For every vertex, how many of its ``n`` lines it wins."""
    return _kernels.impl.win_counts(_winners(w), w.shape.n, w.shape.k)


def sinks(w: WinnerTable) -> np.ndarray:
    """Sorted vertex ids winning all of their lines (the pure Nash equilibria)."""
    return np.flatnonzero(win_counts(w) == w.shape.n)


def backward_reach(w: WinnerTable, target: int) -> ReachSet:
    mask, touched = _kernels.impl.backward_reach(
        _winners(w), w.shape.n, w.shape.k, np.array([target], dtype=np.int64)
    )
    return ReachSet(int(target), mask, touched)


def backward_reach_set(w: WinnerTable, targets) -> np.ndarray:
    """0/1 mask of vertices that can reach any of ``targets``."""
    targets = np.asarray(targets, dtype=np.int64)
    mask, _ = _kernels.impl.backward_reach(_winners(w), w.shape.n, w.shape.k, targets)
    return mask


def has_cycle(w: WinnerTable) -> bool:
    return _kernels.impl.has_cycle(_winners(w), w.shape.n, w.shape.k)


def scc(w: WinnerTable) -> np.ndarray:
    """Strongly connected component id per vertex."""
    labels, _ = _kernels.impl.scc_labels(_winners(w), w.shape.n, w.shape.k)
    return labels


def _flags(V: int, sink_ids: np.ndarray, reach_one, cyclic) -> ClassFlags:
    if len(sink_ids) == 0:
        return ClassFlags(False, False, False, False)
    need = V - (len(sink_ids) - 1)
    masks = [reach_one(s) for s in sink_ids]
    connected = all(int(m.sum()) == need for m in masks)
    # reach of a set is the union of the single-target reaches
    weakly = connected or bool(np.logical_or.reduce(masks).all())
    acyclic = not cyclic()
    return ClassFlags(True, connected, weakly, acyclic)


def classify_br(w: WinnerTable) -> ClassFlags:
    """Connectivity class of the best-response graph.

    ``connected`` uses the fact that the only vertices unable to reach a sink
    ``s`` from behind are the other sinks, so it holds iff every backward
    closure has ``V - (#sinks - 1)`` members.
    """
    s = sinks(w)
    return _flags(
        w.shape.vertex_count,
        s,
        lambda t: backward_reach_set(w, [t]),
        lambda: has_cycle(w),
    )


def better_sinks(r: RankTable) -> np.ndarray:
    return sinks(WinnerTable(r.shape, r.ranks[:, 0]))


def classify_better(r: RankTable) -> ClassFlags:
    """Same flags on the better-response graph (edge to every strictly preferred profile of a line)."""
    n, k = r.shape.n, r.shape.k
    impl = _kernels.impl

    def reach(ts):
        return impl.better_backward_reach(r.rank_of, n, k, np.asarray(ts, dtype=np.int64))

    return _flags(
        r.shape.vertex_count,
        better_sinks(r),
        lambda t: reach([t]),
        lambda: impl.better_has_cycle(r.rank_of, n, k),
    )
