import numpy as np
import pytest

from randgame import WinnerTable, make_shape
from randgame._kernels import available_backends
from randgame.grid import line_of

# Best-response graph of the 3-player 2-action example game. Vertex names are
# "zxy" with 1-based coordinates; player i moves along coordinate i of (x, y, z).
FIGURE_EDGES = [
    ("211", "111"), ("121", "221"), ("111", "121"), ("211", "221"),
    ("212", "112"), ("122", "222"), ("122", "112"), ("222", "212"),
    ("212", "211"), ("111", "112"), ("121", "122"), ("222", "221"),
]
FIGURE_SINKS = ("112", "221")


def figure_vertex(name: str) -> int:
    z, x, y = (int(c) - 1 for c in name)
    return x + 2 * y + 4 * z


def figure_table() -> WinnerTable:
    shape = make_shape(3, 2)
    winners = np.full(shape.line_count, -1)
    for a, b in FIGURE_EDGES:
        u, v = figure_vertex(a), figure_vertex(b)
        diff = [d for d in range(3) if (u >> d) & 1 != (v >> d) & 1]
        assert len(diff) == 1, (a, b)
        line, _ = line_of(u, diff[0], shape)
        _, pos = line_of(v, diff[0], shape)
        idx = line.index(shape)
        assert winners[idx] == -1, "two edges on one line"
        winners[idx] = pos
    assert (winners >= 0).all()
    return WinnerTable(shape, winners)


@pytest.fixture
def figure():
    return figure_table()


@pytest.fixture(params=sorted(available_backends()))
def backend(request):
    return available_backends()[request.param]


# --- acceptance reporting ------------------------------------------------------

CRITERIA: dict[int, tuple[bool, str]] = {}


def record_criterion(number: int, ok: bool, detail: str) -> None:
    CRITERIA[number] = (bool(ok), detail)


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(CRITERIA):
        ok, detail = CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
