"""Compiled inner loops for the Monte Carlo chains.

Diagrams here are int64 partner arrays with the same 0-based slot layout as
``diagrams.Diagram``.  Orientation codes: 0 empty, 1 NE ("/"), 2 NW ("\\").
All kernels release the GIL so batches can be split over threads.
"""

import numpy as np
from numba import njit

from .rng import below, draw, street_key, to_unit

# LOCAL[orientation, side] -> side reached inside the site; sides N=0 S=1 E=2 W=3
LOCAL = np.array([[1, 0, 3, 2], [2, 3, 0, 1], [3, 2, 1, 0]], dtype=np.int64)


@njit(cache=True, nogil=True)
def compose_into(a, b, out, seen, n, count_loops):
    """out <- a above b.  Returns the loop count when requested, else 0."""
    for v in range(2 * n):
        out[v] = -1
    for c in range(n):
        seen[c] = False
    for start in range(2 * n):
        if out[start] >= 0:
            continue
        in_a = start < n
        v = start
        while True:
            if in_a:
                w = a[v]
                if w < n:
                    break
                seen[w - n] = True
                in_a = False
                v = w - n
            else:
                w = b[v]
                if w >= n:
                    break
                seen[w] = True
                in_a = True
                v = n + w
        out[start] = w
        out[w] = start
    if not count_loops:
        return 0
    loops = 0
    for c in range(n):
        if seen[c]:
            continue
        loops += 1
        col = c
        while not seen[col]:
            seen[col] = True
            nxt = a[n + col] - n
            seen[nxt] = True
            col = b[nxt]
    return loops


@njit(cache=True, nogil=True)
def count_bars(d, n):
    k = 0
    for v in range(n):
        if d[v] < n:
            k += 1
    return k // 2


@njit(cache=True, nogil=True)
def trace_into(orient, out, n):
    for v in range(2 * n):
        out[v] = -1
    for start in range(2 * n):
        if out[start] >= 0:
            continue
        x = start % n
        side = 0 if start < n else 1
        h = LOCAL[orient[x], side]
        while h >= 2:
            if h == 2:
                x = (x + 1) % n
                side = 3
            else:
                x = (x - 1) % n
                side = 2
            h = LOCAL[orient[x], side]
        end = x if h == 0 else n + x
        out[start] = end
        out[end] = start


@njit(cache=True, nogil=True)
def _mirror_count(key, cdf):
    u = to_unit(draw(key, 0))
    m = 0
    while u >= cdf[m]:
        m += 1
    return m


@njit(cache=True, nogil=True)
def _place_mirrors(key, m, n, manhattan, t, orient, chosen):
    """Floyd sampling of m distinct sites, with orientations, into ``orient``."""
    cnt = 0
    slot = 1
    for j in range(n - m, n):
        h = draw(key, slot)
        slot += 1
        x = below(h, j + 1)
        if orient[x] != 0:
            x = j
        if manhattan:
            o = 2 if (x + 1 + t) % 2 == 1 else 1
        else:
            o = 1 + np.int64(h & np.uint64(1))
        orient[x] = o
        chosen[cnt] = x
        cnt += 1
    return cnt


@njit(cache=True, nogil=True)
def full_trial(seed, trial, n, manhattan, offset, cdf, cap, count_loops, level_time):
    """One trial of the full model.  Returns (hitting_time, censored, tau, loops)."""
    half = n // 2
    for k in range(half + 1):
        level_time[k] = -1
    level_time[0] = 0
    if cdf[0] >= 1.0:
        return cap, True, cap, 0
    prod = np.empty(2 * n, dtype=np.int64)
    nxt = np.empty(2 * n, dtype=np.int64)
    street_d = np.empty(2 * n, dtype=np.int64)
    for v in range(n):
        prod[v] = v + n
        prod[v + n] = v
    orient = np.zeros(n, dtype=np.int64)
    chosen = np.empty(n, dtype=np.int64)
    seen = np.empty(n, dtype=np.bool_)
    bars = 0
    tau = 0
    loops = 0
    for street in range(1, cap + 1):
        key = street_key(seed, trial, street)
        m = _mirror_count(key, cdf)
        if m <= 2:
            tau += 1
        if m <= 1:
            continue
        cnt = _place_mirrors(key, m, n, manhattan, street + offset, orient, chosen)
        trace_into(orient, street_d, n)
        for c in range(cnt):
            orient[chosen[c]] = 0
        loops += compose_into(prod, street_d, nxt, seen, n, count_loops)
        prod, nxt = nxt, prod
        nb = count_bars(prod, n)
        if nb > bars:
            for k in range(bars + 1, nb + 1):
                level_time[k] = street
            bars = nb
            if bars == half:
                return street, False, tau, loops
    return cap, True, tau, loops


@njit(cache=True, nogil=True)
def conditioned_trial(seed, trial, n, q_id, pair_i, pair_j, pair_bar, cap, count_loops, level_time):
    """One trial of the conditioned chain.  Returns (hitting_time, censored, loops)."""
    half = n // 2
    for k in range(half + 1):
        level_time[k] = -1
    level_time[0] = 0
    if q_id >= 1.0:
        return cap, True, 0
    npairs = pair_i.shape[0]
    prod = np.empty(2 * n, dtype=np.int64)
    nxt = np.empty(2 * n, dtype=np.int64)
    street_d = np.empty(2 * n, dtype=np.int64)
    for v in range(n):
        prod[v] = v + n
        prod[v + n] = v
        street_d[v] = v + n
        street_d[v + n] = v
    seen = np.empty(n, dtype=np.bool_)
    bars = 0
    loops = 0
    for street in range(1, cap + 1):
        key = street_key(seed, trial, street)
        if to_unit(draw(key, 0)) < q_id:
            continue
        idx = below(draw(key, 1), npairs)
        a = pair_i[idx]
        b = pair_j[idx]
        if pair_bar[idx]:
            street_d[a] = b
            street_d[b] = a
            street_d[n + a] = n + b
            street_d[n + b] = n + a
        else:
            street_d[a] = n + b
            street_d[n + b] = a
            street_d[b] = n + a
            street_d[n + a] = b
        loops += compose_into(prod, street_d, nxt, seen, n, count_loops)
        street_d[a] = n + a
        street_d[n + a] = a
        street_d[b] = n + b
        street_d[n + b] = b
        prod, nxt = nxt, prod
        nb = count_bars(prod, n)
        if nb > bars:
            for k in range(bars + 1, nb + 1):
                level_time[k] = street
            bars = nb
            if bars == half:
                return street, False, loops
    return cap, True, loops


@njit(cache=True, nogil=True)
def _store_waits(level_time, half, row):
    for k in range(half):
        if level_time[k] >= 0 and level_time[k + 1] >= 0:
            row[k] = level_time[k + 1] - level_time[k]
        else:
            row[k] = -1


@njit(cache=True, nogil=True)
def full_batch(seed, t0, n, manhattan, offset, cdf, cap, count_loops, hit, cens, tau, loops, waits):
    half = n // 2
    level_time = np.empty(half + 1, dtype=np.int64)
    for r in range(hit.shape[0]):
        h, c, t, lp = full_trial(seed, t0 + r, n, manhattan, offset, cdf, cap, count_loops, level_time)
        hit[r] = h
        cens[r] = c
        tau[r] = t
        loops[r] = lp
        _store_waits(level_time, half, waits[r])


@njit(cache=True, nogil=True)
def conditioned_batch(seed, t0, n, q_id, pair_i, pair_j, pair_bar, cap, count_loops, hit, cens, loops, waits):
    half = n // 2
    level_time = np.empty(half + 1, dtype=np.int64)
    for r in range(hit.shape[0]):
        h, c, lp = conditioned_trial(seed, t0 + r, n, q_id, pair_i, pair_j, pair_bar, cap, count_loops, level_time)
        hit[r] = h
        cens[r] = c
        loops[r] = lp
        _store_waits(level_time, half, waits[r])


@njit(cache=True, nogil=True)
def tau_table(seed, t0, cdf, checkpoints, out):
    """out[r, c] = number of the first checkpoints[c] streets of trial t0 + r with <= 2 mirrors."""
    last = checkpoints[checkpoints.shape[0] - 1] if checkpoints.shape[0] else 0
    for r in range(out.shape[0]):
        count = 0
        c = 0
        while c < checkpoints.shape[0] and checkpoints[c] == 0:
            out[r, c] = 0
            c += 1
        for street in range(1, last + 1):
            if _mirror_count(street_key(seed, t0 + r, street), cdf) <= 2:
                count += 1
            while c < checkpoints.shape[0] and checkpoints[c] == street:
                out[r, c] = count
                c += 1


@njit(cache=True, nogil=True)
def sampled_streets(seed, trial, streets, n, manhattan, offset, cdf, orient_out, diag_out):
    """Street configurations and their traced diagrams as the full-model chain draws them."""
    orient = np.zeros(n, dtype=np.int64)
    chosen = np.empty(n, dtype=np.int64)
    for s in range(streets):
        street = s + 1
        key = street_key(seed, trial, street)
        m = _mirror_count(key, cdf)
        cnt = 0
        if m >= 1:
            cnt = _place_mirrors(key, m, n, manhattan, street + offset, orient, chosen)
        for x in range(n):
            orient_out[s, x] = orient[x]
        trace_into(orient, diag_out[s], n)
        for c in range(cnt):
            orient[chosen[c]] = 0
