"""numba kernels behind the Leiden phases.

Every vertex loop exists twice: a ``*_par`` variant using ``prange`` and a
``*_seq`` variant using ``range``.  Both share the same per-vertex helpers
and the same atomic primitives, so ``threads=1`` runs the sequential twin
and is deterministic.  Hashtables are dense per-thread rows of a
``(threads, N)`` array plus a key list; slots are reset by walking the keys.
"""

import numba
import numpy as np
from numba import njit, prange

from ._atomics import atomic_add, atomic_cas

EMPTY = -1


@njit(cache=True, inline="always")
def delta_modularity(k_i_to_c, k_i_to_d, k_i, sigma_c, sigma_d, m):
    """Gain in modularity from moving a vertex out of ``d`` into ``c``.

    ``sigma_d`` still includes ``k_i``; ``sigma_c`` does not.
    """
    return (k_i_to_c - k_i_to_d) / m - k_i * (k_i + sigma_c - sigma_d) / (
        2.0 * m * m
    )


@njit(cache=True)
def _scan(i, offsets, nbrs, wts, C, self_loops, vals, keys):
    nk = 0
    for e in range(offsets[i], offsets[i + 1]):
        j = nbrs[e]
        if j == i and not self_loops:
            continue
        c = C[j]
        if vals[c] == 0.0:
            keys[nk] = c
            nk += 1
        vals[c] += wts[e]
    return nk


@njit(cache=True)
def _scan_bounded(i, offsets, nbrs, wts, bounds, C, self_loops, vals, keys):
    nk = 0
    bi = bounds[i]
    for e in range(offsets[i], offsets[i + 1]):
        j = nbrs[e]
        if j == i and not self_loops:
            continue
        if bounds[j] != bi:
            continue
        c = C[j]
        if vals[c] == 0.0:
            keys[nk] = c
            nk += 1
        vals[c] += wts[e]
    return nk


@njit(cache=True)
def _clear(nk, vals, keys):
    for t in range(nk):
        vals[keys[t]] = 0.0


@njit(cache=True)
def _best(nk, d, k_i, vals, keys, S, m):
    """Best target by delta-modularity; ties go to the lowest community id.

    Returns ``(d, 0.0)`` when no community improves on staying in ``d``.
    """
    best_c = d
    best_dq = 0.0
    k_i_to_d = vals[d]
    sigma_d = S[d]
    for t in range(nk):
        c = keys[t]
        if c == d:
            continue
        dq = delta_modularity(vals[c], k_i_to_d, k_i, S[c], sigma_d, m)
        if dq > best_dq or (dq == best_dq and best_c != d and c < best_c):
            best_c = c
            best_dq = dq
    return best_c, best_dq


# -- scans exposed to Python ---------------------------------------------------


@njit(cache=True)
def scan_into(i, offsets, nbrs, wts, C, bounds, use_bounds, self_loops):
    n = len(C)
    vals = np.zeros(n, np.float64)
    keys = np.empty(max(n, 1), np.int64)
    if use_bounds:
        nk = _scan_bounded(i, offsets, nbrs, wts, bounds, C, self_loops, vals, keys)
    else:
        nk = _scan(i, offsets, nbrs, wts, C, self_loops, vals, keys)
    out_k = keys[:nk].copy()
    out_v = np.empty(nk, np.float64)
    for t in range(nk):
        out_v[t] = vals[out_k[t]]
    return out_k, out_v


# -- local-moving ----------------------------------------------------------------


@njit(cache=True)
def _move_vertex(i, offsets, nbrs, wts, C, K, S, changed, processed, m, vals, keys):
    nk = _scan(i, offsets, nbrs, wts, C, False, vals, keys)
    d = C[i]
    c, dq = _best(nk, d, K[i], vals, keys, S, m)
    _clear(nk, vals, keys)
    if c == d:
        return 0.0
    atomic_add(S, d, -K[i])
    atomic_add(S, c, K[i])
    C[i] = c
    for e in range(offsets[i], offsets[i + 1]):
        j = nbrs[e]
        if j != i:
            processed[j] = 0
    changed[d] = 1
    changed[c] = 1
    return dq


@njit(cache=True)
def move_iteration_seq(offsets, nbrs, wts, C, K, S, changed, processed, in_range, m, ht_vals, ht_keys):
    dq_total = 0.0
    moves = 0
    vals = ht_vals[0]
    keys = ht_keys[0]
    for i in range(len(C)):
        if processed[i]:
            continue
        processed[i] = 1
        if not in_range[i]:
            continue
        dq = _move_vertex(i, offsets, nbrs, wts, C, K, S, changed, processed, m, vals, keys)
        if dq > 0.0:
            dq_total += dq
            moves += 1
    return dq_total, moves


@njit(cache=True, parallel=True)
def move_iteration_par(offsets, nbrs, wts, C, K, S, changed, processed, in_range, m, ht_vals, ht_keys):
    dq_total = 0.0
    moves = 0
    for i in prange(len(C)):
        if processed[i] or not in_range[i]:
            processed[i] = 1
            continue
        processed[i] = 1
        t = numba.get_thread_id()
        dq = _move_vertex(i, offsets, nbrs, wts, C, K, S, changed, processed, m, ht_vals[t], ht_keys[t])
        if dq > 0.0:
            dq_total += dq
            moves += 1
    return dq_total, moves


# -- refinement ------------------------------------------------------------------


@njit(cache=True)
def _refine_vertex(i, offsets, nbrs, wts, bounds, C, K, S, changed, m, vals, keys):
    c = C[i]
    k_i = K[i]
    if changed[c] == 0 or S[c] != k_i:
        return 0
    nk = _scan_bounded(i, offsets, nbrs, wts, bounds, C, False, vals, keys)
    target, _ = _best(nk, c, k_i, vals, keys, S, m)
    _clear(nk, vals, keys)
    if target == c or C[target] != target:
        return 0
    if atomic_cas(S, c, k_i, 0.0) == k_i:
        atomic_add(S, target, k_i)
        C[i] = target
        return 1
    return 0


@njit(cache=True)
def refine_seq(offsets, nbrs, wts, bounds, C, K, S, changed, m, ht_vals, ht_keys):
    moves = 0
    for i in range(len(C)):
        moves += _refine_vertex(i, offsets, nbrs, wts, bounds, C, K, S, changed, m, ht_vals[0], ht_keys[0])
    return moves


@njit(cache=True, parallel=True)
def refine_par(offsets, nbrs, wts, bounds, C, K, S, changed, m, ht_vals, ht_keys):
    moves = 0
    for i in prange(len(C)):
        t = numba.get_thread_id()
        moves += _refine_vertex(i, offsets, nbrs, wts, bounds, C, K, S, changed, m, ht_vals[t], ht_keys[t])
    return moves


# -- renumbering / breaking ----------------------------------------------------


@njit(cache=True)
def _rekey(C, S, changed, rep):
    n = len(C)
    S2 = np.zeros_like(S)
    ch2 = np.zeros_like(changed)
    for c in range(n):
        r = rep[c]
        if r != EMPTY:
            S2[r] = S[c]
            ch2[r] = changed[c]
    for i in range(n):
        C[i] = rep[C[i]]
    S[:] = S2
    changed[:] = ch2


@njit(cache=True)
def subset_renumber_seq(C, S, changed):
    rep = np.full(len(C), EMPTY, np.int64)
    for i in range(len(C)):
        c = C[i]
        if rep[c] == EMPTY:
            rep[c] = i
    _rekey(C, S, changed, rep)


@njit(cache=True, parallel=True)
def subset_renumber_par(C, S, changed):
    rep = np.full(len(C), EMPTY, np.int64)
    for i in prange(len(C)):
        atomic_cas(rep, C[i], EMPTY, i)
    _rekey(C, S, changed, rep)


@njit(cache=True)
def break_changed(C, K, S, changed):
    # Flagging the new singleton id keeps the refine gate keyed by C[i] valid
    # for members other than the community's representative.
    for i in range(len(C)):
        if changed[C[i]] == 0:
            continue
        C[i] = i
        S[i] = K[i]
        changed[i] = 1


@njit(cache=True)
def renumber_dense(C):
    """Relabel to ``0..k-1`` in order of first appearance; returns (labels, k)."""
    n = len(C)
    lut = np.full(max(n, 1), EMPTY, np.int64)
    out = np.empty(n, np.int64)
    k = 0
    for i in range(n):
        c = C[i]
        if lut[c] == EMPTY:
            lut[c] = k
            k += 1
        out[i] = lut[c]
    return out, k


# -- aggregation -----------------------------------------------------------------


@njit(cache=True)
def _exclusive_scan(counts):
    out = np.zeros(len(counts) + 1, np.int64)
    for i in range(len(counts)):
        out[i + 1] = out[i] + counts[i]
    return out


@njit(cache=True)
def _community_vertices(C, ncom):
    counts = np.zeros(ncom, np.int64)
    for i in range(len(C)):
        counts[C[i]] += 1
    coff = _exclusive_scan(counts)
    cursor = coff[:-1].copy()
    cverts = np.empty(len(C), np.int64)
    for i in range(len(C)):
        pos = atomic_add(cursor, C[i], 1)
        cverts[pos] = i
    return coff, cverts


@njit(cache=True)
def _super_offsets(offsets, C, ncom):
    deg = np.zeros(ncom, np.int64)
    for i in range(len(C)):
        deg[C[i]] += offsets[i + 1] - offsets[i]
    return _exclusive_scan(deg)


@njit(cache=True)
def _fill_community(c, coff, cverts, offsets, nbrs, wts, C, yoff, ynbrs, ywts, vals, keys):
    nk = 0
    for p in range(coff[c], coff[c + 1]):
        i = cverts[p]
        for e in range(offsets[i], offsets[i + 1]):
            d = C[nbrs[e]]
            if vals[d] == 0.0:
                keys[nk] = d
                nk += 1
            vals[d] += wts[e]
    base = yoff[c]
    for t in range(nk):
        d = keys[t]
        ynbrs[base + t] = d
        ywts[base + t] = vals[d]
        vals[d] = 0.0
    return nk


@njit(cache=True)
def _compact(ncom, yoff, ydeg, ynbrs, ywts):
    offs = _exclusive_scan(ydeg)
    out_n = np.empty(offs[-1], np.int32)
    out_w = np.empty(offs[-1], np.float64)
    for c in range(ncom):
        src = yoff[c]
        dst = offs[c]
        for t in range(ydeg[c]):
            out_n[dst + t] = ynbrs[src + t]
            out_w[dst + t] = ywts[src + t]
    return offs, out_n, out_w


@njit(cache=True)
def aggregate_seq(offsets, nbrs, wts, C, ncom, ht_vals, ht_keys):
    coff, cverts = _community_vertices(C, ncom)
    yoff = _super_offsets(offsets, C, ncom)
    ynbrs = np.empty(yoff[-1], np.int64)
    ywts = np.empty(yoff[-1], np.float64)
    ydeg = np.zeros(ncom, np.int64)
    for c in range(ncom):
        if coff[c + 1] == coff[c]:
            continue
        ydeg[c] = _fill_community(c, coff, cverts, offsets, nbrs, wts, C, yoff, ynbrs, ywts, ht_vals[0], ht_keys[0])
    return _compact(ncom, yoff, ydeg, ynbrs, ywts)


@njit(cache=True, parallel=True)
def aggregate_par(offsets, nbrs, wts, C, ncom, ht_vals, ht_keys):
    coff, cverts = _community_vertices(C, ncom)
    yoff = _super_offsets(offsets, C, ncom)
    ynbrs = np.empty(yoff[-1], np.int64)
    ywts = np.empty(yoff[-1], np.float64)
    ydeg = np.zeros(ncom, np.int64)
    for c in prange(ncom):
        if coff[c + 1] == coff[c]:
            continue
        t = numba.get_thread_id()
        ydeg[c] = _fill_community(c, coff, cverts, offsets, nbrs, wts, C, yoff, ynbrs, ywts, ht_vals[t], ht_keys[t])
    return _compact(ncom, yoff, ydeg, ynbrs, ywts)


# -- auxiliary weights -----------------------------------------------------------


@njit(cache=True)
def _apply_owned(lo, hi, pairs, w, sign, C, K, S):
    for r in range(len(pairs)):
        i = pairs[r, 0]
        c = C[i]
        if lo <= i < hi:
            K[i] += sign * w[r]
        if lo <= c < hi:
            S[c] += sign * w[r]


@njit(cache=True, parallel=True)
def update_weights_owned(n, nparts, dels, dw, ins, iw, C, K, S):
    """Each part owns a contiguous id range and applies only its own updates."""
    step = (n + nparts - 1) // nparts if nparts > 0 else n
    for p in prange(nparts):
        lo = p * step
        hi = min(n, lo + step)
        _apply_owned(lo, hi, dels, dw, -1.0, C, K, S)
        _apply_owned(lo, hi, ins, iw, 1.0, C, K, S)


def ht_alloc(threads: int, n: int):
    """Per-thread dense hashtables: values (float64) and key lists."""
    return np.zeros((threads, max(n, 1)), np.float64), np.empty((threads, max(n, 1)), np.int64)
