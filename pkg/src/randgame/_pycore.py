"""Pure-Python kernels, used when the compiled ``_core`` extension is unavailable.

Every function here has a twin of the same name and signature in
``_core.pyx``; both must produce identical outputs (including label order)
for identical inputs.
"""
from __future__ import annotations

from collections import deque

import numpy as np


def _strides(n, k):
    return [k**d for d in range(n + 1)]


def win_counts(winners, n, k):
    """For every vertex, how many of its ``n`` lines it wins."""
    lpd = k ** (n - 1)
    counts = np.zeros(k**n, dtype=np.int32)
    pos = np.arange(k)[None, :, None]
    winners = np.asarray(winners)
    for d in range(n):
        wd = winners[d * lpd : (d + 1) * lpd].reshape(k ** (n - 1 - d), k**d)
        counts += (wd[:, None, :] == pos).reshape(-1)
    return counts


def backward_reach(winners, n, k, targets):
    """Vertices with a directed path into ``targets``; also counts lines whose winner is among them."""
    pw = _strides(n, k)
    lpd = pw[n - 1]
    w = winners.tolist()
    V = pw[n]
    mask = np.zeros(V, dtype=np.uint8)
    seen = bytearray(V)
    queue = deque()
    for t in targets:
        t = int(t)
        if not seen[t]:
            seen[t] = 1
            queue.append(t)
    touched = 0
    while queue:
        u = queue.popleft()
        for d in range(n):
            s = pw[d]
            low = u % s
            rest = u // s
            pos = rest % k
            line = d * lpd + low + (rest // k) * s
            if w[line] != pos:
                continue
            touched += 1
            base = u - pos * s
            for p in range(k):
                x = base + p * s
                if not seen[x]:
                    seen[x] = 1
                    queue.append(x)
    mask[:] = np.frombuffer(bytes(seen), dtype=np.uint8)
    return mask, touched


def reaching_lines(winners, n, k, sink, cap):
    """Count lines whose winner reaches ``sink``, stopping once ``cap`` is reached."""
    pw = _strides(n, k)
    lpd = pw[n - 1]
    w = winners.tolist()
    seen = set([int(sink)])
    queue = deque([int(sink)])
    count = 0
    while queue:
        u = queue.popleft()
        for d in range(n):
            s = pw[d]
            low = u % s
            rest = u // s
            pos = rest % k
            line = d * lpd + low + (rest // k) * s
            if w[line] != pos:
                continue
            count += 1
            base = u - pos * s
            for p in range(k):
                x = base + p * s
                if x not in seen:
                    seen.add(x)
                    queue.append(x)
        if count >= cap:
            return cap, True
    return count, False


def _successor(w, pw, lpd, k, v, d):
    s = pw[d]
    low = v % s
    rest = v // s
    pos = rest % k
    win = w[d * lpd + low + (rest // k) * s]
    if win == pos:
        return -1
    return v + (win - pos) * s


def has_cycle(winners, n, k):
    pw = _strides(n, k)
    lpd = pw[n - 1]
    w = winners.tolist()
    V = pw[n]
    color = bytearray(V)  # 0 white, 1 on stack, 2 done
    for root in range(V):
        if color[root]:
            continue
        stack = [[root, 0]]
        color[root] = 1
        while stack:
            frame = stack[-1]
            v, d = frame
            if d == n:
                color[v] = 2
                stack.pop()
                continue
            frame[1] = d + 1
            u = _successor(w, pw, lpd, k, v, d)
            if u < 0:
                continue
            if color[u] == 1:
                return True
            if color[u] == 0:
                color[u] = 1
                stack.append([u, 0])
    return False


def scc_labels(winners, n, k):
    """Iterative Tarjan; components are labelled 0, 1, ... in completion order."""
    pw = _strides(n, k)
    lpd = pw[n - 1]
    w = winners.tolist()
    V = pw[n]
    index = [-1] * V
    low = [0] * V
    onstack = bytearray(V)
    label = np.full(V, -1, dtype=np.int64)
    comp_stack = []
    counter = 0
    ncomp = 0
    for root in range(V):
        if index[root] >= 0:
            continue
        index[root] = low[root] = counter
        counter += 1
        comp_stack.append(root)
        onstack[root] = 1
        call = [[root, 0]]
        while call:
            frame = call[-1]
            v, d = frame
            if d < n:
                frame[1] = d + 1
                u = _successor(w, pw, lpd, k, v, d)
                if u < 0:
                    continue
                if index[u] < 0:
                    index[u] = low[u] = counter
                    counter += 1
                    comp_stack.append(u)
                    onstack[u] = 1
                    call.append([u, 0])
                elif onstack[u] and index[u] < low[v]:
                    low[v] = index[u]
                continue
            call.pop()
            if call:
                parent = call[-1][0]
                if low[v] < low[parent]:
                    low[parent] = low[v]
            if low[v] == index[v]:
                while True:
                    x = comp_stack.pop()
                    onstack[x] = 0
                    label[x] = ncomp
                    if x == v:
                        break
                ncomp += 1
    return label, ncomp


def slice_cycles(winners, n, k, anchor):
    """Best-response cycles of one 2-D slice and their within-slice basin sizes.

    Works on the functional graph over states ``2*i + d`` (slice vertex ``i``,
    next move in dimension ``d``). Returns ``(starts, verts, basins)`` where
    cycle ``c`` visits ``verts[starts[c]:starts[c+1]]`` (global vertex ids)
    in edge order.
    """
    lpd = k ** (n - 1)
    w = winners.tolist()
    kk = k * k
    base = anchor * kk
    row_line0 = anchor * k  # dim-0 line of local row y is row_line0 + y
    col_line0 = lpd + anchor * k  # dim-1 line of local column x is col_line0 + x

    def succ(s):
        i, d = s >> 1, s & 1
        y, x = divmod(i, k)
        if d == 0:
            wx = w[row_line0 + y]
            if wx != x:
                return ((wx + y * k) << 1) | 1
            wy = w[col_line0 + x]
            if wy != y:
                return (x + wy * k) << 1
        else:
            wy = w[col_line0 + x]
            if wy != y:
                return (x + wy * k) << 1
            wx = w[row_line0 + y]
            if wx != x:
                return ((wx + y * k) << 1) | 1
        return -1

    nstates = 2 * kk
    UNSEEN, ACTIVE = -2, -3
    dest = [UNSEEN] * nstates
    where = [0] * nstates
    starts = [0]
    verts = []
    for s0 in range(nstates):
        if dest[s0] != UNSEEN:
            continue
        path = []
        s = s0
        while s >= 0 and dest[s] == UNSEEN:
            dest[s] = ACTIVE
            where[s] = len(path)
            path.append(s)
            s = succ(s)
        if s < 0:
            result = -1
        elif dest[s] == ACTIVE:
            cid = len(starts) - 1
            j = where[s]
            for t in path[j:]:
                dest[t] = cid
                verts.append(base + (t >> 1))
            starts.append(len(verts))
            del path[j:]
            result = cid
        else:
            result = dest[s]
        for t in path:
            dest[t] = result
    ncyc = len(starts) - 1
    basins = [0] * ncyc
    for i in range(kk):
        c0, c1 = dest[2 * i], dest[2 * i + 1]
        if c0 >= 0:
            basins[c0] += 1
        if c1 >= 0 and c1 != c0:
            basins[c1] += 1
    return (
        np.asarray(starts, dtype=np.int64),
        np.asarray(verts, dtype=np.int64),
        np.asarray(basins, dtype=np.int64),
    )


def dynamics_block(winners, n, k, start, q, uniforms):
    """Best response with inertia for up to ``len(uniforms)`` steps.

    Returns ``(profile, steps_taken, converged)``; stops as soon as the
    current profile is a sink.
    """
    pw = _strides(n, k)
    lpd = pw[n - 1]
    w = winners.tolist()
    u = uniforms.tolist()
    v = int(start)
    for t in range(len(u)):
        targets = [_successor(w, pw, lpd, k, v, d) for d in range(n)]
        if all(x < 0 for x in targets):
            return v, t, True
        row = u[t]
        nv = v
        for d in range(n):
            if row[d] < q and targets[d] >= 0:
                nv += targets[d] - v
        v = nv
    converged = all(_successor(w, pw, lpd, k, v, d) < 0 for d in range(n))
    return v, len(u), converged


def better_backward_reach(rank_of, n, k, targets):
    """Backward closure in the better-response graph (edge to any strictly better position)."""
    pw = _strides(n, k)
    lpd = pw[n - 1]
    r = rank_of.tolist()
    V = pw[n]
    seen = bytearray(V)
    queue = deque()
    for t in targets:
        t = int(t)
        if not seen[t]:
            seen[t] = 1
            queue.append(t)
    while queue:
        u = queue.popleft()
        for d in range(n):
            s = pw[d]
            low = u % s
            rest = u // s
            pos = rest % k
            ranks = r[d * lpd + low + (rest // k) * s]
            mine = ranks[pos]
            base = u - pos * s
            for p in range(k):
                if ranks[p] > mine:
                    x = base + p * s
                    if not seen[x]:
                        seen[x] = 1
                        queue.append(x)
    return np.frombuffer(bytes(seen), dtype=np.uint8).copy()


def better_has_cycle(rank_of, n, k):
    pw = _strides(n, k)
    lpd = pw[n - 1]
    r = rank_of.tolist()
    V = pw[n]
    nk = n * k
    color = bytearray(V)
    for root in range(V):
        if color[root]:
            continue
        color[root] = 1
        stack = [[root, 0]]
        while stack:
            frame = stack[-1]
            v, it = frame
            if it == nk:
                color[v] = 2
                stack.pop()
                continue
            frame[1] = it + 1
            d, p = divmod(it, k)
            s = pw[d]
            low = v % s
            rest = v // s
            pos = rest % k
            ranks = r[d * lpd + low + (rest // k) * s]
            if ranks[p] >= ranks[pos]:
                continue
            u = v + (p - pos) * s
            if color[u] == 1:
                return True
            if color[u] == 0:
                color[u] = 1
                stack.append([u, 0])
    return False
