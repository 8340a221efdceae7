"""Random generic games on [k]^n: best-response graph connectivity, sink census,
slice cycles, branching-process constants and best response with inertia."""

from ._kernels import BACKEND
from .grid import (
    GridShape,
    LineId,
    RankTable,
    SizingError,
    WinnerTable,
    decode,
    encode,
    enumerate_rank_tables,
    enumerate_winner_tables,
    lines_through,
    make_shape,
    sample_rank_table,
    sample_winner_table,
    substream,
    winner_of,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "GridShape",
    "LineId",
    "RankTable",
    "SizingError",
    "WinnerTable",
    "decode",
    "encode",
    "enumerate_rank_tables",
    "enumerate_winner_tables",
    "lines_through",
    "make_shape",
    "sample_rank_table",
    "sample_winner_table",
    "substream",
    "winner_of",
]
