import math
import random

import numpy as np
import pytest

from randgame import WinnerTable, enumerate_winner_tables, make_shape, sample_winner_table, substream
from randgame import bruteforce
from randgame.asymptotics import constants
from randgame.census import (
    CensusDistribution,
    NotASinkError,
    bad_sink_probability,
    census,
    census_distribution,
    good_threshold,
    no_bad_sink_bound,
    reaching_lines_count,
)
from randgame.grid import LineId, line_of, line_vertex
from randgame.response import classify_br, sinks


def test_threshold_rounding():
    assert good_threshold(64, 0.1) == 2  # 64**0.1 = 1.515
    assert good_threshold(1024, 0.1) == 2  # exactly 2.0, not 3
    assert good_threshold(2**20, 0.1) == 4
    assert good_threshold(10_000, 0.25) == 10
    assert good_threshold(10_001, 0.25) == 11


def test_non_sink_rejected():
    w = sample_winner_table(make_shape(3, 5), substream(1))
    non = next(v for v in range(w.shape.vertex_count) if v not in set(sinks(w)))
    with pytest.raises(NotASinkError):
        reaching_lines_count(w, non, 10)


def test_own_lines_saturate_small_caps():
    shape = make_shape(3, 8)
    for j in range(30):
        w = sample_winner_table(shape, substream(2, j))
        for s in sinks(w):
            for cap in range(1, shape.n + 1):
                assert reaching_lines_count(w, int(s), cap) == (cap, True)


def test_all_lines_reach_the_only_sink():
    s = make_shape(3, 4)
    w = WinnerTable(s, np.zeros(s.line_count, dtype=int))
    assert reaching_lines_count(w, 0, s.line_count + 1) == (s.line_count, False)
    assert reaching_lines_count(w, 0, s.line_count) == (s.line_count, True)


def test_exact_counts_match_bruteforce_everywhere():
    shape = make_shape(3, 2)
    checked = 0
    for w in enumerate_winner_tables(shape):
        for s in sinks(w):
            count, saturated = reaching_lines_count(w, int(s), shape.line_count + 1)
            assert not saturated
            assert count == bruteforce.lines_reaching(3, 2, w.winners, int(s))
            checked += 1
    assert checked == 4096  # one sink per table on average


def _shuffled_count(w, s, rng):
    """Reference exploration visiting lines in random order, no cap."""
    shape = w.shape
    reached = {s}
    frontier = [s]
    lines = set()
    while frontier:
        v = frontier.pop(rng.randrange(len(frontier)))
        for d in range(shape.n):
            line, pos = line_of(v, d, shape)
            if w.winner(line) != pos:
                continue
            lines.add(line.index(shape))
            for p in range(shape.k):
                u = line_vertex(line, p, shape)
                if u not in reached:
                    reached.add(u)
                    frontier.append(u)
    return len(lines)


def test_exploration_order_does_not_matter():
    shape = make_shape(3, 5)
    rng = random.Random(0)
    for j in range(40):
        w = sample_winner_table(shape, substream(3, j))
        for s in sinks(w):
            exact, _ = reaching_lines_count(w, int(s), shape.line_count + 1)
            for _ in range(3):
                assert _shuffled_count(w, int(s), rng) == exact
            for cap in (exact - 1, exact, exact + 1):
                if cap >= 1:
                    assert reaching_lines_count(w, int(s), cap)[1] == (exact >= cap)


def test_census_partitions_sinks():
    shape = make_shape(3, 16)
    for j in range(100):
        w = sample_winner_table(shape, substream(4, j))
        c = census(w, 0.4)
        assert sorted(c.good + c.bad) == sorted(int(s) for s in sinks(w))
        assert not set(c.good) & set(c.bad)
        assert c.X + c.Y == len(sinks(w))
        for s in c.bad:
            assert reaching_lines_count(w, s, shape.line_count + 1)[0] < c.threshold


def test_small_threshold_means_every_sink_good():
    shape = make_shape(3, 64)
    for j in range(20):
        c = census(sample_winner_table(shape, substream(5, j)), 0.1)
        assert c.threshold <= shape.n
        assert c.Y == 0


def test_good_sink_in_connected_game_reached_by_all_lines():
    # in a connected game each sink is reached by every line not won by another sink
    shape = make_shape(3, 6)
    for j in range(200):
        w = sample_winner_table(shape, substream(6, j))
        if not classify_br(w).connected:
            continue
        ss = set(int(s) for s in sinks(w))
        for s in ss:
            count, _ = reaching_lines_count(w, s, shape.line_count + 1)
            others = 0
            for idx in range(shape.line_count):
                line = LineId.from_index(idx, shape)
                if line_vertex(line, int(w.winners[idx]), shape) in ss - {s}:
                    others += 1
            assert count == shape.line_count - others


def test_epsilon_range():
    w = sample_winner_table(make_shape(3, 4), substream(0))
    for eps in (0.0, 0.5, -0.1):
        with pytest.raises(ValueError):
            census(w, eps)


def test_bad_sink_probability_and_bound():
    p3 = bad_sink_probability(3)
    assert p3 == pytest.approx(constants(3).p, rel=1e-12)
    assert p3 == pytest.approx(0.20318787**3, rel=1e-6)
    assert no_bad_sink_bound(3, 64, 0.1) == pytest.approx(p3 + 11 * 64 ** (-0.8))


def test_nontrivial_bad_sinks_exist_with_large_epsilon():
    # 64**0.4 rounds up to 6 lines, above the sink's own 3
    dist = census_distribution(3, 64, epsilon=0.4, samples=2000, seed=8)
    assert dist.mean_bad() > 0
    bound = no_bad_sink_bound(3, 64, 0.4)
    sigma = math.sqrt(dist.mean_bad() / dist.samples)
    assert dist.frac_with_bad() <= bound + 3 * sigma


def test_empty_distribution_rejects_tv():
    dist = CensusDistribution(make_shape(3, 4), 0.1, 0, 0.0)
    with pytest.raises(ValueError, match="empty"):
        _ = dist.tv


def test_distribution_deterministic():
    a = census_distribution(3, 8, samples=50, seed=3)
    b = census_distribution(3, 8, samples=50, seed=3)
    assert a.histogram == b.histogram
    assert sum(a.histogram.values()) == 50
