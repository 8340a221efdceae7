# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels over implicit best-/better-response graphs.

Mirror of ``_pycore``: same function names, signatures and outputs.
"""
import numpy as np
cimport numpy as cnp

cnp.import_array()

ctypedef long long i64

cdef int MAXN = 64


cdef inline int _fill_strides(i64* pw, int n, i64 k) except -1:
    cdef int d
    if n + 1 > MAXN:
        raise ValueError("n too large")
    pw[0] = 1
    for d in range(1, n + 1):
        pw[d] = pw[d - 1] * k
    return 0


cdef inline i64 _line(i64 v, int d, const i64* pw, i64 lpd, i64 k, i64* pos) noexcept nogil:
    cdef i64 s = pw[d]
    cdef i64 rest = v // s
    pos[0] = rest % k
    return d * lpd + (v % s) + (rest // k) * s


cdef inline i64 _succ(const cnp.uint16_t[::1] w, i64 v, int d, const i64* pw, i64 lpd, i64 k) noexcept nogil:
    cdef i64 pos
    cdef i64 line = _line(v, d, pw, lpd, k, &pos)
    cdef i64 win = w[line]
    if win == pos:
        return -1
    return v + (win - pos) * pw[d]


cdef cnp.uint8_t[::1] _win_mask(const cnp.uint16_t[::1] w, int n, i64 k, const i64* pw) noexcept:
    # bit d of mask[v] is set when v wins its dimension-d line; needs n <= 8
    cdef i64 lpd = pw[n - 1]
    cdef cnp.uint8_t[::1] mask = np.zeros(pw[n], dtype=np.uint8)
    cdef i64 slot, s
    cdef int d
    with nogil:
        for d in range(n):
            s = pw[d]
            for slot in range(lpd):
                mask[(slot % s) + w[d * lpd + slot] * s + (slot // s) * s * k] |= <cnp.uint8_t>(1 << d)
    return mask


def win_counts(winners, int n, i64 k):
    cdef i64 pw[64]
    _fill_strides(pw, n, k)
    cdef i64 lpd = pw[n - 1]
    cdef const cnp.uint16_t[::1] w = np.ascontiguousarray(winners, dtype=np.uint16)
    out = np.zeros(pw[n], dtype=np.int32)
    cdef int[::1] c = out
    cdef i64 slot, s
    cdef int d
    with nogil:
        for d in range(n):
            s = pw[d]
            for slot in range(lpd):
                c[(slot % s) + w[d * lpd + slot] * s + (slot // s) * s * k] += 1
    return out


def backward_reach(winners, int n, i64 k, targets):
    cdef i64 pw[64]
    _fill_strides(pw, n, k)
    cdef i64 lpd = pw[n - 1]
    cdef i64 V = pw[n]
    cdef const cnp.uint16_t[::1] w = np.ascontiguousarray(winners, dtype=np.uint16)
    cdef const i64[::1] tg = np.ascontiguousarray(targets, dtype=np.int64)
    out = np.zeros(V, dtype=np.uint8)
    cdef cnp.uint8_t[::1] seen = out
    cdef i64[::1] queue = np.empty(V, dtype=np.int64)
    cdef i64 head = 0, tail = 0, u, pos, line, s, base, x, p, touched = 0, t
    cdef int d
    cdef bint use_mask = n <= 8
    cdef cnp.uint8_t[::1] mask
    cdef cnp.uint8_t bits
    if use_mask:
        mask = _win_mask(w, n, k, pw)
    with nogil:
        for t in range(tg.shape[0]):
            if not seen[tg[t]]:
                seen[tg[t]] = 1
                queue[tail] = tg[t]
                tail += 1
        while head < tail:
            u = queue[head]
            head += 1
            bits = mask[u] if use_mask else 0xFF
            if bits == 0:
                continue
            for d in range(n):
                if use_mask:
                    if not (bits >> d) & 1:
                        continue
                    pos = (u // pw[d]) % k
                else:
                    line = _line(u, d, pw, lpd, k, &pos)
                    if w[line] != pos:
                        continue
                touched += 1
                s = pw[d]
                base = u - pos * s
                for p in range(k):
                    x = base + p * s
                    if not seen[x]:
                        seen[x] = 1
                        queue[tail] = x
                        tail += 1
    return out, int(touched)


def reaching_lines(winners, int n, i64 k, i64 sink, i64 cap):
    cdef i64 pw[64]
    _fill_strides(pw, n, k)
    cdef i64 lpd = pw[n - 1]
    cdef i64 V = pw[n]
    cdef const cnp.uint16_t[::1] w = np.ascontiguousarray(winners, dtype=np.uint16)
    cdef cnp.uint8_t[::1] seen = np.zeros(V, dtype=np.uint8)
    cdef i64[::1] queue = np.empty(V, dtype=np.int64)
    cdef i64 head = 0, tail = 1, u, pos, line, s, base, x, p, count = 0
    cdef int d
    cdef bint saturated = False
    queue[0] = sink
    seen[sink] = 1
    with nogil:
        while head < tail:
            u = queue[head]
            head += 1
            for d in range(n):
                line = _line(u, d, pw, lpd, k, &pos)
                if w[line] != pos:
                    continue
                count += 1
                s = pw[d]
                base = u - pos * s
                for p in range(k):
                    x = base + p * s
                    if not seen[x]:
                        seen[x] = 1
                        queue[tail] = x
                        tail += 1
            if count >= cap:
                saturated = True
                break
    if saturated:
        return int(cap), True
    return int(count), False


def has_cycle(winners, int n, i64 k):
    cdef i64 pw[64]
    _fill_strides(pw, n, k)
    cdef i64 lpd = pw[n - 1]
    cdef i64 V = pw[n]
    cdef const cnp.uint16_t[::1] w = np.ascontiguousarray(winners, dtype=np.uint16)
    cdef cnp.uint8_t[::1] color = np.zeros(V, dtype=np.uint8)
    cdef i64[::1] sv = np.empty(V, dtype=np.int64)
    cdef cnp.int32_t[::1] sd = np.empty(V, dtype=np.int32)
    cdef i64 root, v, u, top
    cdef int d
    cdef bint found = False
    with nogil:
        for root in range(V):
            if color[root]:
                continue
            top = 0
            sv[0] = root
            sd[0] = 0
            color[root] = 1
            while top >= 0:
                v = sv[top]
                d = sd[top]
                if d == n:
                    color[v] = 2
                    top -= 1
                    continue
                sd[top] = d + 1
                u = _succ(w, v, d, pw, lpd, k)
                if u < 0:
                    continue
                if color[u] == 1:
                    found = True
                    break
                if color[u] == 0:
                    color[u] = 1
                    top += 1
                    sv[top] = u
                    sd[top] = 0
            if found:
                break
    return bool(found)


def scc_labels(winners, int n, i64 k):
    cdef i64 pw[64]
    _fill_strides(pw, n, k)
    cdef i64 lpd = pw[n - 1]
    cdef i64 V = pw[n]
    cdef const cnp.uint16_t[::1] w = np.ascontiguousarray(winners, dtype=np.uint16)
    cdef i64[::1] index = np.full(V, -1, dtype=np.int64)
    cdef i64[::1] low = np.empty(V, dtype=np.int64)
    cdef cnp.uint8_t[::1] onstack = np.zeros(V, dtype=np.uint8)
    out = np.full(V, -1, dtype=np.int64)
    cdef i64[::1] label = out
    cdef i64[::1] cstack = np.empty(V, dtype=np.int64)
    cdef i64[::1] callv = np.empty(V, dtype=np.int64)
    cdef cnp.int32_t[::1] calld = np.empty(V, dtype=np.int32)
    cdef i64 root, v, u, x, parent, counter = 0, ncomp = 0, ctop = -1, top
    cdef int d
    with nogil:
        for root in range(V):
            if index[root] >= 0:
                continue
            index[root] = counter
            low[root] = counter
            counter += 1
            ctop += 1
            cstack[ctop] = root
            onstack[root] = 1
            top = 0
            callv[0] = root
            calld[0] = 0
            while top >= 0:
                v = callv[top]
                d = calld[top]
                if d < n:
                    calld[top] = d + 1
                    u = _succ(w, v, d, pw, lpd, k)
                    if u < 0:
                        continue
                    if index[u] < 0:
                        index[u] = counter
                        low[u] = counter
                        counter += 1
                        ctop += 1
                        cstack[ctop] = u
                        onstack[u] = 1
                        top += 1
                        callv[top] = u
                        calld[top] = 0
                    elif onstack[u] and index[u] < low[v]:
                        low[v] = index[u]
                    continue
                top -= 1
                if top >= 0:
                    parent = callv[top]
                    if low[v] < low[parent]:
                        low[parent] = low[v]
                if low[v] == index[v]:
                    while True:
                        x = cstack[ctop]
                        ctop -= 1
                        onstack[x] = 0
                        label[x] = ncomp
                        if x == v:
                            break
                    ncomp += 1
    return out, int(ncomp)


cdef inline i64 _slice_succ(const cnp.uint16_t[::1] w, i64 s, i64 k, i64 row0, i64 col0) noexcept nogil:
    cdef i64 i = s >> 1
    cdef i64 d = s & 1
    cdef i64 y = i // k
    cdef i64 x = i - y * k
    cdef i64 wx, wy
    if d == 0:
        wx = w[row0 + y]
        if wx != x:
            return ((wx + y * k) << 1) | 1
        wy = w[col0 + x]
        if wy != y:
            return (x + wy * k) << 1
    else:
        wy = w[col0 + x]
        if wy != y:
            return (x + wy * k) << 1
        wx = w[row0 + y]
        if wx != x:
            return ((wx + y * k) << 1) | 1
    return -1


def slice_cycles(winners, int n, i64 k, i64 anchor):
    cdef i64 lpd = k ** (n - 1)
    cdef const cnp.uint16_t[::1] w = np.ascontiguousarray(winners, dtype=np.uint16)
    cdef i64 kk = k * k
    cdef i64 base = anchor * kk
    cdef i64 row0 = anchor * k
    cdef i64 col0 = lpd + anchor * k
    cdef i64 nstates = 2 * kk
    cdef i64 UNSEEN = -2, ACTIVE = -3
    cdef i64[::1] dest = np.full(nstates, UNSEEN, dtype=np.int64)
    cdef i64[::1] where = np.zeros(nstates, dtype=np.int64)
    cdef i64[::1] path = np.empty(nstates, dtype=np.int64)
    starts_a = np.zeros(kk + 1, dtype=np.int64)
    verts_a = np.empty(kk, dtype=np.int64)
    cdef i64[::1] starts = starts_a
    cdef i64[::1] verts = verts_a
    cdef i64 ncyc = 0, nverts = 0, s0, s, plen, j, t, result, i, c0, c1
    with nogil:
        for s0 in range(nstates):
            if dest[s0] != UNSEEN:
                continue
            plen = 0
            s = s0
            while s >= 0 and dest[s] == UNSEEN:
                dest[s] = ACTIVE
                where[s] = plen
                path[plen] = s
                plen += 1
                s = _slice_succ(w, s, k, row0, col0)
            if s < 0:
                result = -1
            elif dest[s] == ACTIVE:
                j = where[s]
                for t in range(j, plen):
                    dest[path[t]] = ncyc
                    verts[nverts] = base + (path[t] >> 1)
                    nverts += 1
                ncyc += 1
                starts[ncyc] = nverts
                plen = j
                result = ncyc - 1
            else:
                result = dest[s]
            for t in range(plen):
                dest[path[t]] = result
    basins_a = np.zeros(ncyc, dtype=np.int64)
    cdef i64[::1] basins = basins_a
    with nogil:
        for i in range(kk):
            c0 = dest[2 * i]
            c1 = dest[2 * i + 1]
            if c0 >= 0:
                basins[c0] += 1
            if c1 >= 0 and c1 != c0:
                basins[c1] += 1
    return starts_a[: ncyc + 1].copy(), verts_a[:nverts].copy(), basins_a


def dynamics_block(winners, int n, i64 k, i64 start, double q, uniforms):
    cdef i64 pw[64]
    _fill_strides(pw, n, k)
    cdef i64 lpd = pw[n - 1]
    cdef const cnp.uint16_t[::1] w = np.ascontiguousarray(winners, dtype=np.uint16)
    cdef const double[:, ::1] u = np.ascontiguousarray(uniforms, dtype=np.float64)
    cdef i64 m = u.shape[0]
    cdef i64 v = start, nv, t, steps = m
    cdef i64 tg[64]
    cdef int d
    cdef bint sink = False
    with nogil:
        for t in range(m):
            sink = True
            for d in range(n):
                tg[d] = _succ(w, v, d, pw, lpd, k)
                if tg[d] >= 0:
                    sink = False
            if sink:
                steps = t
                break
            nv = v
            for d in range(n):
                if u[t, d] < q and tg[d] >= 0:
                    nv += tg[d] - v
            v = nv
        if not sink:
            sink = True
            for d in range(n):
                if _succ(w, v, d, pw, lpd, k) >= 0:
                    sink = False
    return int(v), int(steps), bool(sink)


def better_backward_reach(rank_of, int n, i64 k, targets):
    cdef i64 pw[64]
    _fill_strides(pw, n, k)
    cdef i64 lpd = pw[n - 1]
    cdef i64 V = pw[n]
    cdef const cnp.uint16_t[:, ::1] r = np.ascontiguousarray(rank_of, dtype=np.uint16)
    cdef const i64[::1] tg = np.ascontiguousarray(targets, dtype=np.int64)
    out = np.zeros(V, dtype=np.uint8)
    cdef cnp.uint8_t[::1] seen = out
    cdef i64[::1] queue = np.empty(V, dtype=np.int64)
    cdef i64 head = 0, tail = 0, u, pos, line, s, base, x, p, t, mine
    cdef int d
    with nogil:
        for t in range(tg.shape[0]):
            if not seen[tg[t]]:
                seen[tg[t]] = 1
                queue[tail] = tg[t]
                tail += 1
        while head < tail:
            u = queue[head]
            head += 1
            for d in range(n):
                line = _line(u, d, pw, lpd, k, &pos)
                mine = r[line, pos]
                s = pw[d]
                base = u - pos * s
                for p in range(k):
                    if r[line, p] > mine:
                        x = base + p * s
                        if not seen[x]:
                            seen[x] = 1
                            queue[tail] = x
                            tail += 1
    return out


def better_has_cycle(rank_of, int n, i64 k):
    cdef i64 pw[64]
    _fill_strides(pw, n, k)
    cdef i64 lpd = pw[n - 1]
    cdef i64 V = pw[n]
    cdef const cnp.uint16_t[:, ::1] r = np.ascontiguousarray(rank_of, dtype=np.uint16)
    cdef cnp.uint8_t[::1] color = np.zeros(V, dtype=np.uint8)
    cdef i64[::1] sv = np.empty(V, dtype=np.int64)
    cdef i64[::1] sit = np.empty(V, dtype=np.int64)
    cdef i64 nk = n * k, root, v, u, top, it, pos, line, p
    cdef int d
    cdef bint found = False
    with nogil:
        for root in range(V):
            if color[root]:
                continue
            top = 0
            sv[0] = root
            sit[0] = 0
            color[root] = 1
            while top >= 0:
                v = sv[top]
                it = sit[top]
                if it == nk:
                    color[v] = 2
                    top -= 1
                    continue
                sit[top] = it + 1
                d = <int>(it // k)
                p = it - d * k
                line = _line(v, d, pw, lpd, k, &pos)
                if r[line, p] >= r[line, pos]:
                    continue
                u = v + (p - pos) * pw[d]
                if color[u] == 1:
                    found = True
                    break
                if color[u] == 0:
                    color[u] = 1
                    top += 1
                    sv[top] = u
                    sit[top] = 0
            if found:
                break
    return bool(found)
