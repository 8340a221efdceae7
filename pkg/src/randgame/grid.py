"""Integer-coded geometry of the lattice [k]^n and random table samplers.

Vertices are encoded mixed-radix with dimension 0 varying fastest, so the
coordinate of ``v`` in dimension ``d`` is ``(v // k**d) % k``. A line in
dimension ``d`` is identified by the remaining ``n - 1`` coordinates packed
into a *slot*; the global line id is ``d * k**(n-1) + slot``.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

DEFAULT_MEMORY_CAP = 1 << 30  # 1 GiB
DEFAULT_ENUMERATION_CAP = 10_000_000

# Per-vertex scratch bytes needed by the heaviest kernel (Tarjan: index,
# lowlink, component label, stack).
_BYTES_PER_VERTEX = 24
_BYTES_PER_LINE = 2


class SizingError(ValueError):
    """Raised when a shape or enumeration exceeds the configured budget."""


@dataclass(frozen=True)
class GridShape:
    n: int
    k: int
    vertex_count: int = field(init=False)
    line_count: int = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "vertex_count", self.k**self.n)
        object.__setattr__(self, "line_count", self.n * self.k ** (self.n - 1))

    @property
    def lines_per_dim(self) -> int:
        return self.k ** (self.n - 1)

    @property
    def strides(self) -> tuple[int, ...]:
        """``k**d`` for ``d = 0..n``."""
        return tuple(self.k**d for d in range(self.n + 1))

    @property
    def winner_dtype(self) -> np.dtype:
        return np.dtype(np.uint8) if self.k <= 256 else np.dtype(np.uint16)

    def working_set_bytes(self) -> int:
        return self.vertex_count * _BYTES_PER_VERTEX + self.line_count * _BYTES_PER_LINE


def make_shape(n: int, k: int, cap: int = DEFAULT_MEMORY_CAP) -> GridShape:
    """Build a :class:`GridShape`, rejecting shapes whose scratch memory exceeds ``cap`` bytes."""
    if int(n) != n or int(k) != k:
        raise ValueError(f"n and k must be integers, got n={n!r}, k={k!r}")
    n, k = int(n), int(k)
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    if k > 65535:
        raise SizingError(f"k={k} exceeds the 16-bit position limit")
    shape = GridShape(n, k)
    need = shape.working_set_bytes()
    if need > cap:
        raise SizingError(
            f"shape n={n}, k={k} has {shape.vertex_count} vertices and needs ~{need} bytes "
            f"of scratch, above the cap of {cap} bytes"
        )
    return shape


# --- vertex / line arithmetic -------------------------------------------------


def encode(coords: Sequence[int], shape: GridShape) -> int:
    if len(coords) != shape.n:
        raise ValueError(f"expected {shape.n} coordinates, got {len(coords)}")
    v = 0
    for d in reversed(range(shape.n)):
        c = coords[d]
        if not 0 <= c < shape.k:
            raise ValueError(f"coordinate {c} out of range [0, {shape.k})")
        v = v * shape.k + c
    return v


def decode(v: int, shape: GridShape) -> tuple[int, ...]:
    if not 0 <= v < shape.vertex_count:
        raise ValueError(f"vertex {v} out of range [0, {shape.vertex_count})")
    out = []
    for _ in range(shape.n):
        v, c = divmod(v, shape.k)
        out.append(c)
    return tuple(out)


@dataclass(frozen=True)
class LineId:
    dim: int
    slot: int

    def index(self, shape: GridShape) -> int:
        return self.dim * shape.lines_per_dim + self.slot

    @classmethod
    def from_index(cls, index: int, shape: GridShape) -> LineId:
        dim, slot = divmod(index, shape.lines_per_dim)
        return cls(dim, slot)


def line_of(v: int, dim: int, shape: GridShape) -> tuple[LineId, int]:
    """The line through ``v`` in dimension ``dim`` and ``v``'s position on it."""
    s = shape.k**dim
    low = v % s
    rest, pos = divmod(v // s, shape.k)
    return LineId(dim, low + rest * s), pos


def lines_through(v: int, shape: GridShape) -> list[tuple[LineId, int]]:
    if not 0 <= v < shape.vertex_count:
        raise ValueError(f"vertex {v} out of range [0, {shape.vertex_count})")
    return [line_of(v, d, shape) for d in range(shape.n)]


def line_vertex(line: LineId, pos: int, shape: GridShape) -> int:
    s = shape.k**line.dim
    low, high = line.slot % s, line.slot // s
    return low + pos * s + high * s * shape.k


def line_vertices(line: LineId, shape: GridShape) -> list[int]:
    return [line_vertex(line, p, shape) for p in range(shape.k)]


# --- tables ---------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class WinnerTable:
    """One winning position per line.

    Doubles as a sample of the random digraph L(n, k) and as the best-response
    graph of a generic game.
    """

    shape: GridShape
    winners: np.ndarray

    def __post_init__(self) -> None:
        raw = np.asarray(self.winners)
        if raw.size and (raw.min() < 0 or raw.max() >= self.shape.k):
            raise ValueError("winner position out of range")
        w = np.ascontiguousarray(raw, dtype=self.shape.winner_dtype)
        if w.shape != (self.shape.line_count,):
            raise ValueError(f"expected {self.shape.line_count} winners, got shape {w.shape}")
        w.setflags(write=False)
        object.__setattr__(self, "winners", w)

    def winner(self, line: LineId) -> int:
        return int(self.winners[line.index(self.shape)])

    def winner_vertex(self, line: LineId) -> int:
        return line_vertex(line, self.winner(line), self.shape)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, WinnerTable):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self.winners, other.winners)

    def to_json(self) -> dict:
        return {"n": self.shape.n, "k": self.shape.k, "winners": self.winners.tolist()}

    @classmethod
    def from_json(cls, obj: dict | str, cap: int = DEFAULT_MEMORY_CAP) -> WinnerTable:
        if isinstance(obj, str):
            obj = json.loads(obj)
        shape = make_shape(obj["n"], obj["k"], cap)
        return cls(shape, np.asarray(obj["winners"]))

    def to_bytes(self) -> bytes:
        """Raw little-endian winner array (uint8 for k <= 256, else uint16)."""
        return self.winners.astype(self.winners.dtype.newbyteorder("<")).tobytes()

    @classmethod
    def from_bytes(cls, shape: GridShape, raw: bytes) -> WinnerTable:
        dt = shape.winner_dtype.newbyteorder("<")
        return cls(shape, np.frombuffer(raw, dtype=dt))


@dataclass(frozen=True, eq=False)
class RankTable:
    """Full ranking of every line, best position first.

    ``ranks[line]`` is a permutation of ``range(k)``; ``rank_of[line][p]`` is
    the rank of position ``p`` (0 = best) and is what the kernels consume.
    """

    shape: GridShape
    ranks: np.ndarray
    rank_of: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        r = np.ascontiguousarray(self.ranks, dtype=np.uint16)
        if r.shape != (self.shape.line_count, self.shape.k):
            raise ValueError(f"expected ranks of shape {(self.shape.line_count, self.shape.k)}")
        if not np.array_equal(np.sort(r, axis=1), np.broadcast_to(np.arange(self.shape.k), r.shape)):
            raise ValueError("every line ranking must be a permutation of range(k)")
        inv = np.empty_like(r)
        rows = np.arange(r.shape[0])[:, None]
        inv[rows, r] = np.arange(self.shape.k, dtype=np.uint16)
        r.setflags(write=False)
        inv.setflags(write=False)
        object.__setattr__(self, "ranks", r)
        object.__setattr__(self, "rank_of", inv)

    def to_json(self) -> dict:
        return {"n": self.shape.n, "k": self.shape.k, "ranks": self.ranks.tolist()}


def winner_of(r: RankTable) -> WinnerTable:
    return WinnerTable(r.shape, r.ranks[:, 0])


# --- randomness -----------------------------------------------------------------


def substream(master_seed: int, *key: int) -> np.random.Generator:
    """Independent generator for the task addressed by ``key`` (e.g. a sample index).

    Depends only on ``(master_seed, key)``, so results do not depend on how
    samples are scheduled across workers.
    """
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=key))


def sample_winner_table(shape: GridShape, stream: np.random.Generator) -> WinnerTable:
    w = stream.integers(0, shape.k, size=shape.line_count, dtype=shape.winner_dtype)
    return WinnerTable(shape, w)


def sample_rank_table(shape: GridShape, stream: np.random.Generator) -> RankTable:
    base = np.broadcast_to(np.arange(shape.k, dtype=np.uint16), (shape.line_count, shape.k))
    return RankTable(shape, stream.permuted(base, axis=1))


# --- enumeration ----------------------------------------------------------------


def enumerate_winner_tables(
    shape: GridShape, cap: int = DEFAULT_ENUMERATION_CAP
) -> Iterator[WinnerTable]:
    total = shape.k**shape.line_count
    if total > cap:
        raise SizingError(f"{total} winner tables exceed the enumeration cap {cap}")
    for combo in itertools.product(range(shape.k), repeat=shape.line_count):
        yield WinnerTable(shape, np.array(combo))


def enumerate_rank_tables(
    shape: GridShape, cap: int = DEFAULT_ENUMERATION_CAP
) -> Iterator[RankTable]:
    total = math.factorial(shape.k) ** shape.line_count
    if total > cap:
        raise SizingError(f"{total} rank tables exceed the enumeration cap {cap}")
    perms = list(itertools.permutations(range(shape.k)))
    for combo in itertools.product(perms, repeat=shape.line_count):
        yield RankTable(shape, np.array(combo))
