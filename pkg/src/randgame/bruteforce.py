"""Brute-force reference for small games.

Builds the explicit adjacency matrix from coordinate tuples and closes it
with boolean matrix products. Shares no code with the graph kernels, so it
serves as an independent check on them.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np


def _profiles(n: int, k: int) -> list[tuple[int, ...]]:
    # index = sum_i a_i * k**i
    return [tuple(reversed(t)) for t in itertools.product(range(k), repeat=n)]


def _index(a: tuple[int, ...], k: int) -> int:
    return sum(c * k**i for i, c in enumerate(a))


def _line_key(a: tuple[int, ...], i: int, k: int) -> int:
    others = a[:i] + a[i + 1 :]
    n = len(a)
    return i * k ** (n - 1) + sum(c * k**j for j, c in enumerate(others))


def best_adjacency(n: int, k: int, winners) -> np.ndarray:
    profs = _profiles(n, k)
    V = len(profs)
    adj = np.zeros((V, V), dtype=bool)
    for a in profs:
        for i in range(n):
            b = list(a)
            b[i] = int(winners[_line_key(a, i, k)])
            b = tuple(b)
            if b != a:
                adj[_index(a, k), _index(b, k)] = True
    return adj


def better_adjacency(n: int, k: int, ranks) -> np.ndarray:
    """``ranks[line]`` lists positions best first."""
    profs = _profiles(n, k)
    V = len(profs)
    adj = np.zeros((V, V), dtype=bool)
    for a in profs:
        for i in range(n):
            order = list(ranks[_line_key(a, i, k)])
            for c in order[: order.index(a[i])]:
                b = a[:i] + (c,) + a[i + 1 :]
                adj[_index(a, k), _index(b, k)] = True
    return adj


def closure(adj: np.ndarray) -> np.ndarray:
    """``R[x, y]`` iff ``x`` can reach ``y`` (reflexive)."""
    r = adj | np.eye(len(adj), dtype=bool)
    while True:
        nxt = r | ((r.astype(np.int64) @ r.astype(np.int64)) > 0)
        if np.array_equal(nxt, r):
            return r
        r = nxt


@dataclass(frozen=True)
class BruteResult:
    sinks: tuple[int, ...]
    has_pne: bool
    connected: bool
    weakly_acyclic: bool
    acyclic: bool
    reach: np.ndarray
    components: int


def analyse(adj: np.ndarray) -> BruteResult:
    r = closure(adj)
    V = len(adj)
    sink_ids = tuple(int(v) for v in np.flatnonzero(~adj.any(axis=1)))
    nonsinks = [v for v in range(V) if v not in sink_ids]
    has_pne = bool(sink_ids)
    connected = has_pne and all(r[x, s] for x in nonsinks for s in sink_ids)
    weakly = has_pne and all(any(r[x, s] for s in sink_ids) for x in range(V))
    mutual = r & r.T
    acyclic = not (mutual & ~np.eye(V, dtype=bool)).any()
    components = len({tuple(row) for row in mutual})
    return BruteResult(sink_ids, has_pne, connected, weakly, acyclic, r, components)


def lines_reaching(n: int, k: int, winners, target: int) -> int:
    """Number of lines whose winner can reach ``target``."""
    r = closure(best_adjacency(n, k, winners))
    count = 0
    for i in range(n):
        for key in range(k ** (n - 1)):
            # rebuild the winning profile of line (i, key)
            rest = []
            x = key
            for _ in range(n - 1):
                x, c = divmod(x, k)
                rest.append(c)
            win = int(winners[i * k ** (n - 1) + key])
            prof = tuple(rest[:i]) + (win,) + tuple(rest[i:])
            if r[_index(prof, k), target]:
                count += 1
    return count
