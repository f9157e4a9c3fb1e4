"""Compiled inner loops for the permutation engine.

Each permutation index owns its own random stream, derived from
(master_seed, perm_index) with SplitMix64-style mixing: workers can
process indices in any order or grouping and the tallies come out
bit-identical.  Bounded draws use 32-bit multiply-shift with rejection,
so the Fisher-Yates shuffle is exactly uniform.

N-gram keys are packed into a single int64 in base W (W = number of word
types), which caps W at 55k for 4-grams and 2M for 3-grams; the packing
helpers enforce the cap.
"""

from __future__ import annotations

import numpy as np
from numba import njit

U64 = np.uint64
_GOLD = U64(0x9E3779B97F4A7C15)
_MIXA = U64(0xBF58476D1CE4E5B9)
_MIXB = U64(0x94D049BB133111EB)
_GOLD_INT = 0x9E3779B97F4A7C15
_MASK64 = (1 << 64) - 1


@njit(cache=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> U64(30))) * _MIXA
    z = (z ^ (z >> U64(27))) * _MIXB
    return z ^ (z >> U64(31))


@njit(cache=True, inline="always")
def _stream_init(master_seed, perm_index):
    s0 = _mix64(U64(master_seed))
    state = _mix64(s0 ^ _mix64(U64(perm_index) + _GOLD))
    gamma = _mix64(state + _GOLD) | U64(1)
    return state, gamma


@njit(cache=True, inline="always")
def _next32(state, gamma):
    state = state + gamma
    return _mix64(state) >> U64(32), state


@njit(cache=True, inline="always")
def _rand_below(state, gamma, k):
    # Lemire multiply-shift on 32-bit draws; the rare low band is rejected
    # so every value in [0, k) is exactly equally likely.
    ku = U64(k)
    x, state = _next32(state, gamma)
    m = x * ku
    low = m & U64(0xFFFFFFFF)
    if low < ku:
        threshold = U64(0x100000000) % ku
        while low < threshold:
            x, state = _next32(state, gamma)
            m = x * ku
            low = m & U64(0xFFFFFFFF)
    return m >> U64(32), state


@njit(cache=True, nogil=True)
def _shuffle_in_place(buf, master_seed, perm_index):
    state, gamma = _stream_init(master_seed, perm_index)
    for i in range(buf.size - 1, 0, -1):
        j, state = _rand_below(state, gamma, i + 1)
        tmp = buf[i]
        buf[i] = buf[int(j)]
        buf[int(j)] = tmp


@njit(cache=True, inline="always")
def _probe(slot_keys, slot_rows, shift, mask, key):
    h = (U64(key) * _GOLD) >> U64(shift)
    while True:
        k = slot_keys[int(h)]
        if k == key:
            return slot_rows[int(h)]
        if k == -1:
            return np.int32(-1)
        h = (h + U64(1)) & U64(mask)


@njit(cache=True, nogil=True)
def _tally_range(
    compact,
    master_seed,
    i0,
    i1,
    w_base,
    sk2, sr2, oc2,
    sk3, sr3, oc3,
    sk4, sr4, oc4,
):
    """Exceedance tallies for permutation indices [i0, i1).

    ``compact`` holds compact word ids with -1 at non-word positions; the
    shuffle permutes it whole, and counting applies the word-run rule.
    Returns one exceedance array per length, aligned with the oc arrays.
    """
    n = compact.size
    k2, k3, k4 = oc2.size, oc3.size, oc4.size
    m2 = U64(sk2.size - 1) if sk2.size else U64(0)
    m3 = U64(sk3.size - 1) if sk3.size else U64(0)
    m4 = U64(sk4.size - 1) if sk4.size else U64(0)
    s2 = U64(64)
    c = sk2.size
    while c > 1:
        s2 = s2 - U64(1)
        c >>= 1
    s3 = U64(64)
    c = sk3.size
    while c > 1:
        s3 = s3 - U64(1)
        c >>= 1
    s4 = U64(64)
    c = sk4.size
    while c > 1:
        s4 = s4 - U64(1)
        c >>= 1

    buf = np.empty(n, np.int32)
    cnt2 = np.zeros(k2, np.int32)
    cnt3 = np.zeros(k3, np.int32)
    cnt4 = np.zeros(k4, np.int32)
    touched2 = np.empty(n, np.int32)
    touched3 = np.empty(n, np.int32)
    touched4 = np.empty(n, np.int32)
    r2 = np.zeros(k2, np.int64)
    r3 = np.zeros(k3, np.int64)
    r4 = np.zeros(k4, np.int64)
    wb = np.int64(w_base)

    for idx in range(i0, i1):
        buf[:] = compact
        _shuffle_in_place(buf, master_seed, idx)
        nt2 = 0
        nt3 = 0
        nt4 = 0
        run = 0
        p1 = np.int64(-1)
        p2 = np.int64(-1)
        p3 = np.int64(-1)
        for i in range(n):
            cid = np.int64(buf[i])
            if cid < 0:
                run = 0
                continue
            run += 1
            if run >= 2:
                if k2 > 0:
                    row = _probe(sk2, sr2, s2, m2, p1 * wb + cid)
                    if row >= 0:
                        if cnt2[row] == 0:
                            touched2[nt2] = row
                            nt2 += 1
                        cnt2[row] += 1
                if run >= 3:
                    if k3 > 0:
                        row = _probe(sk3, sr3, s3, m3, (p2 * wb + p1) * wb + cid)
                        if row >= 0:
                            if cnt3[row] == 0:
                                touched3[nt3] = row
                                nt3 += 1
                            cnt3[row] += 1
                    if k4 > 0 and run >= 4:
                        row = _probe(sk4, sr4, s4, m4, ((p3 * wb + p2) * wb + p1) * wb + cid)
                        if row >= 0:
                            if cnt4[row] == 0:
                                touched4[nt4] = row
                                nt4 += 1
                            cnt4[row] += 1
            p3 = p2
            p2 = p1
            p1 = cid
        for j in range(nt2):
            row = touched2[j]
            if cnt2[row] >= oc2[row]:
                r2[row] += 1
            cnt2[row] = 0
        for j in range(nt3):
            row = touched3[j]
            if cnt3[row] >= oc3[row]:
                r3[row] += 1
            cnt3[row] = 0
        for j in range(nt4):
            row = touched4[j]
            if cnt4[row] >= oc4[row]:
                r4[row] += 1
            cnt4[row] = 0
    return r2, r3, r4


def shuffle_ids(ids: np.ndarray, master_seed: int, perm_index: int) -> np.ndarray:
    """Uniform random permutation of ``ids``, fixed by (seed, index)."""
    if ids.size >= 2**32:
        raise ValueError("streams of 2^32 tokens or more are not supported")
    buf = np.ascontiguousarray(ids, dtype=np.int32).copy()
    _shuffle_in_place(buf, master_seed, perm_index)
    return buf


def pack_keys(keys: list[tuple[int, ...]], base: int, n: int) -> np.ndarray:
    """Pack id tuples into int64 in the given base; raises if it overflows."""
    if base**n >= 2**63:
        raise ValueError(
            f"{base} word types cannot be packed for {n}-grams; "
            f"the limit is {int((2**63) ** (1 / n))} types"
        )
    packed = np.empty(len(keys), np.int64)
    for i, key in enumerate(keys):
        acc = 0
        for cid in key:
            acc = acc * base + cid
        packed[i] = acc
    return packed


def build_probe_table(packed: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Open-addressing lookup table (Fibonacci hash, linear probing)."""
    k = packed.size
    cap = 8
    while cap < 2 * max(k, 1):
        cap *= 2
    slot_keys = np.full(cap, -1, np.int64)
    slot_rows = np.full(cap, -1, np.int32)
    shift = 64 - (cap.bit_length() - 1)
    mask = cap - 1
    for row in range(k):
        key = int(packed[row])
        h = ((key * _GOLD_INT) & _MASK64) >> shift
        while slot_keys[h] != -1:
            h = (h + 1) & mask
        slot_keys[h] = key
        slot_rows[h] = row
    return slot_keys, slot_rows


_EMPTY_KEYS = np.empty(0, np.int64)
_EMPTY_ROWS = np.empty(0, np.int32)
_EMPTY_COUNTS = np.empty(0, np.int32)


def empty_length() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Placeholder arrays for an n-gram length the kernel should skip."""
    return _EMPTY_KEYS, _EMPTY_ROWS, _EMPTY_COUNTS
