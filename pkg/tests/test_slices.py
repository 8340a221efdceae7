import math

import numpy as np
import pytest

from randgame import WinnerTable, decode, make_shape, sample_winner_table, substream
from randgame.bruteforce import closure
from randgame.response import out_neighbors_br, sinks
from randgame.slices import (
    SliceRef,
    all_good_cycles,
    all_good_cycles_one_scc,
    cycles_and_basins,
    good_sinks_reached_from_good_cycle,
    is_good,
    iter_slices,
    min_good_basin,
    min_good_length,
    nonsinks_reach_good_cycle,
    slice_count,
    slice_stats,
)


def _slice_graph(w, sl):
    verts = list(sl.vertices())
    idx = {v: i for i, v in enumerate(verts)}
    adj = np.zeros((len(verts), len(verts)), dtype=bool)
    for v in verts:
        for u in out_neighbors_br(w, v):
            if u in idx:
                adj[idx[v], idx[u]] = True
    return verts, adj


def _brute_cycles(w, sl):
    """{frozenset(cycle): basin size} from explicit in-slice reachability."""
    verts, adj = _slice_graph(w, sl)
    r = closure(adj)
    strict = (adj.astype(int) @ r.astype(int)) > 0
    on_cycle = np.diag(strict)
    out = {}
    seen = set()
    for i in np.flatnonzero(on_cycle):
        if i in seen:
            continue
        members = {j for j in np.flatnonzero(on_cycle) if r[i, j] and r[j, i]}
        seen |= members
        basin = int(r[:, i].sum())
        out[frozenset(verts[j] for j in members)] = basin
    return out


def test_four_vertex_cycle():
    s = make_shape(2, 2)
    w = WinnerTable(s, np.array([1, 0, 0, 1]))
    (cyc,) = cycles_and_basins(w, SliceRef((), 2))
    assert cyc.length == 4
    assert cyc.basin_size == 4
    assert set(cyc.vertices) == {0, 1, 2, 3}


def test_no_cycle_when_all_winners_zero():
    s = make_shape(3, 5)
    w = WinnerTable(s, np.zeros(s.line_count, dtype=int))
    assert all(cycles_and_basins(w, sl) == [] for sl in iter_slices(s))


@pytest.mark.parametrize("n,k", [(2, 5), (3, 5), (3, 4), (2, 7)])
def test_cycles_match_bruteforce(n, k):
    shape = make_shape(n, k)
    for j in range(30):
        w = sample_winner_table(shape, substream(17, j))
        for sl in iter_slices(shape):
            got = {frozenset(c.vertices): c.basin_size for c in cycles_and_basins(w, sl)}
            assert got == _brute_cycles(w, sl)


def test_cycle_structure():
    shape = make_shape(3, 9)
    for j in range(20):
        w = sample_winner_table(shape, substream(18, j))
        for sl in iter_slices(shape):
            cycles = cycles_and_basins(w, sl)
            for c in cycles:
                L = c.length
                assert L % 2 == 0 and L >= 4
                assert c.basin_size <= shape.k**2
                assert set(c.vertices) <= set(sl.vertices())
                dims = []
                for a, b in zip(c.vertices, c.vertices[1:] + c.vertices[:1]):
                    assert b in out_neighbors_br(w, a)
                    diff = [d for d, (x, y) in enumerate(zip(decode(a, shape), decode(b, shape))) if x != y]
                    assert len(diff) == 1
                    dims.append(diff[0])
                assert all(dims[i] != dims[i + 1] for i in range(L - 1))
            # a vertex lies on at most one cycle
            flat = [v for c in cycles for v in c.vertices]
            assert len(flat) == len(set(flat))


def test_slice_refs():
    shape = make_shape(4, 3)
    assert slice_count(shape) == 9
    refs = list(iter_slices(shape))
    assert [r.index for r in refs] == list(range(9))
    assert SliceRef.from_index(5, shape) == refs[5]
    covered = sorted(v for r in refs for v in r.vertices())
    assert covered == list(range(shape.vertex_count))
    for r in refs:
        for v in r.vertices():
            assert decode(v, shape)[2:] == r.anchor


def test_good_thresholds():
    assert min_good_length(100) == 10
    assert min_good_basin(100) == pytest.approx(10_000 / (800 * math.log(100)))
    assert is_good(10, 3, 100) and not is_good(8, 3, 100)
    assert not is_good(10, 2, 100)


def test_slice_stats_counts():
    shape = make_shape(3, 6)
    w = sample_winner_table(shape, substream(19))
    stats = slice_stats(w)
    lengths = {}
    good = 0
    for sl in iter_slices(shape):
        cs = cycles_and_basins(w, sl)
        for c in cs:
            lengths[c.length] = lengths.get(c.length, 0) + 1
        good += any(c.good for c in cs)
    assert dict(stats.cycle_lengths) == lengths
    assert stats.slices_with_good_cycle == good
    assert stats.to_json()["slices"] == 6


def test_verifiers_need_three_players():
    w = sample_winner_table(make_shape(2, 5), substream(0))
    for check in (all_good_cycles_one_scc, nonsinks_reach_good_cycle, good_sinks_reached_from_good_cycle):
        with pytest.raises(ValueError, match="n >= 3"):
            check(w)
    w3 = sample_winner_table(make_shape(3, 5), substream(0))
    with pytest.raises(ValueError, match="1/6"):
        good_sinks_reached_from_good_cycle(w3, 0.2)


def test_verifiers_on_cycle_free_table():
    # all winners at 0: no cycles, one sink that everything reaches
    s = make_shape(3, 4)
    w = WinnerTable(s, np.zeros(s.line_count, dtype=int))
    assert all_good_cycles(w) == []
    assert all_good_cycles_one_scc(w).holds
    v = nonsinks_reach_good_cycle(w)
    assert not v.holds and len(v.witness) == s.vertex_count - 1
    g = good_sinks_reached_from_good_cycle(w)
    assert not g.holds and g.witness == (0,)


def test_verifiers_agree_with_bruteforce():
    shape = make_shape(3, 5)
    from randgame import bruteforce

    for j in range(15):
        w = sample_winner_table(shape, substream(23, j))
        adj = bruteforce.best_adjacency(3, 5, w.winners)
        r = bruteforce.closure(adj)
        cycles = all_good_cycles(w)
        cyc_verts = [v for c in cycles for v in c.vertices]
        one = all(r[a, b] for a in cyc_verts for b in cyc_verts)
        assert all_good_cycles_one_scc(w, cycles).holds == one
        ss = set(int(x) for x in sinks(w))
        reach = all(any(r[x, c] for c in cyc_verts) for x in range(shape.vertex_count) if x not in ss)
        assert nonsinks_reach_good_cycle(w, cycles).holds == reach


def test_good_cycle_slices_common_at_moderate_k():
    shape = make_shape(2, 200)
    good = sum(slice_stats(sample_winner_table(shape, substream(29, j))).slices_with_good_cycle for j in range(100))
    assert good >= 1
