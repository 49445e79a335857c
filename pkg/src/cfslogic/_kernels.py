"""Numba kernels for bit-parallel simulation.

Simulation values are packed 64 examples per uint64 word; example ``e``
lives at word ``e // 64``, bit ``e % 64``.  All columns are kept pad-clean:
bits beyond the example count are always zero.

The PRNG used for randomized perturbation and blanket noise is a splitmix64
finalizer keyed on ``(seed, node, absolute word index[, draw index])`` so
results do not depend on traversal order or on how the word range is split
across threads.
"""

import math

import numpy as np
from numba import njit

from .circuit import KIND_AND, KIND_CONST0, KIND_INPUT, KIND_XOR

MODE_NORMAL = 0
MODE_SIMPLE = 1
MODE_COMPOSITE = 2
MODE_RANDOMIZED = 3
MODE_NOISE = 4
MODE_AFFECT = 5

_M1 = np.uint64(0x5555555555555555)
_M2 = np.uint64(0x3333333333333333)
_M4 = np.uint64(0x0F0F0F0F0F0F0F0F)
_H01 = np.uint64(0x0101010101010101)
_U0 = np.uint64(0)
_U1 = np.uint64(1)

_SM_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_SM_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_SM_MIX2 = np.uint64(0x94D049BB133111EB)
_NODE_SALT = np.uint64(0xD1342543DE82EF95)


@njit(cache=True, inline="always")
def _popcount(x):
    x = x - ((x >> _U1) & _M1)
    x = (x & _M2) + ((x >> np.uint64(2)) & _M2)
    x = (x + (x >> np.uint64(4))) & _M4
    return np.int64((x * _H01) >> np.uint64(56))


@njit(cache=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> np.uint64(30))) * _SM_MIX1
    z = (z ^ (z >> np.uint64(27))) * _SM_MIX2
    return z ^ (z >> np.uint64(31))


@njit(cache=True, inline="always")
def _rng_word(seed, node, word):
    z = seed + _SM_GAMMA * (np.uint64(node) * _NODE_SALT + np.uint64(word) + _U1)
    return _mix64(z)


@njit(cache=True, inline="always")
def _rng_draw(seed, node, word, i):
    z = seed + _SM_GAMMA * (
        np.uint64(node) * _NODE_SALT
        + np.uint64(word) * np.uint64(67)
        + np.uint64(i)
        + _U1
    )
    return _mix64(z)


@njit(cache=True)
def compute_levels(kind, f0, f1):
    n = kind.shape[0]
    level = np.zeros(n, dtype=np.int32)
    for i in range(n):
        if kind[i] >= KIND_AND:
            la = level[f0[i] >> 1]
            lb = level[f1[i] >> 1]
            level[i] = (la if la > lb else lb) + 1
    return level


@njit(cache=True)
def assign_slots(kind, f0, f1, refcount):
    """Greedy storage recycling: one buffer slot per live column.

    ``refcount`` is the per-node fanout count (gate fanins plus output-bus
    references); bus references are never consumed, which pins output
    columns.  Returns (slot per node, number of slots, peak live columns).
    """
    n = kind.shape[0]
    ref = refcount.copy()
    slot = np.empty(n, dtype=np.int64)
    free = np.empty(n, dtype=np.int64)
    ntop = 0
    nslots = 0
    live = 0
    peak = 0
    for i in range(n):
        if ntop > 0:
            ntop -= 1
            slot[i] = free[ntop]
        else:
            slot[i] = nslots
            nslots += 1
        live += 1
        if live > peak:
            peak = live
        if kind[i] >= KIND_AND:
            for f in (f0[i], f1[i]):
                m = f >> 1
                ref[m] -= 1
                if ref[m] == 0:
                    free[ntop] = slot[m]
                    ntop += 1
                    live -= 1
        if ref[i] == 0:
            free[ntop] = slot[i]
            ntop += 1
            live -= 1
    return slot, nslots, peak


@njit(cache=True, nogil=True)
def run_pass(
    kind,
    f0,
    f1,
    slot,
    nslots,
    stim,
    pads,
    block_examples,
    total_examples,
    word_offset,
    mode,
    l_thresh,
    ones_in,
    pairs_in,
    seed,
    noise_p,
    perturb_inputs,
    want_pairs,
    affect_ls,
):
    """One topological pass; returns (buf, ones, pairs, affected).

    ``mode`` 0 simulates and counts ones per node (optionally fanin-pattern
    pair counts per gate).  Mode 5 re-simulates and, for each threshold in
    ``affect_ls``, accumulates a packed mask of the examples that see at
    least one l-rare value at some node (rarity judged from the global
    ``ones_in`` / ``total_examples``).  Modes 1-4 re-simulate with a
    perturbation rule applied to each node's column before its fanouts
    read it:

    * 1 simple: a node whose pass-1 value count is <= l is forced to its
      majority constant (inverted if both values are rare).
    * 2 composite: a gate output bit is flipped when its fanin value pair
      has pass-1 count <= l.
    * 3 randomized: where simple would flip, an independent fair random bit
      is substituted instead.
    * 4 noise: every gate-output bit flips independently with probability p.
    """
    n_nodes = kind.shape[0]
    nwords = pads.shape[0]
    buf = np.zeros((nslots, nwords), dtype=np.uint64)
    ones = np.zeros(n_nodes if mode == MODE_NORMAL else 1, dtype=np.int64)
    pairs = np.zeros(
        (n_nodes if mode == MODE_NORMAL and want_pairs else 1, 4), dtype=np.int64
    )
    n_ls = affect_ls.shape[0]
    affected = np.zeros((n_ls if mode == MODE_AFFECT else 0, nwords), dtype=np.uint64)
    log1mp = 0.0
    if mode == MODE_NOISE and 0.0 < noise_p < 1.0:
        log1mp = math.log1p(-noise_p)

    for n in range(n_nodes):
        k = kind[n]
        col = buf[slot[n]]
        if k == KIND_CONST0:
            for w in range(nwords):
                col[w] = _U0
        elif k == KIND_INPUT:
            src = stim[f0[n]]
            for w in range(nwords):
                col[w] = src[w]
        else:
            a = buf[slot[f0[n] >> 1]]
            b = buf[slot[f1[n] >> 1]]
            if mode == MODE_COMPOSITE:
                r00 = pairs_in[n, 0] <= l_thresh
                r01 = pairs_in[n, 1] <= l_thresh
                r10 = pairs_in[n, 2] <= l_thresh
                r11 = pairs_in[n, 3] <= l_thresh
                for w in range(nwords):
                    pad = pads[w]
                    va = a[w] ^ pad if f0[n] & 1 else a[w]
                    vb = b[w] ^ pad if f1[n] & 1 else b[w]
                    c = va & vb if k == KIND_AND else va ^ vb
                    flip = _U0
                    na = va ^ pad
                    nb = vb ^ pad
                    if r00:
                        flip |= na & nb
                    if r01:
                        flip |= na & vb
                    if r10:
                        flip |= va & nb
                    if r11:
                        flip |= va & vb
                    col[w] = c ^ flip
                continue
            if k == KIND_AND:
                for w in range(nwords):
                    pad = pads[w]
                    va = a[w] ^ pad if f0[n] & 1 else a[w]
                    vb = b[w] ^ pad if f1[n] & 1 else b[w]
                    col[w] = va & vb
            else:
                for w in range(nwords):
                    pad = pads[w]
                    va = a[w] ^ pad if f0[n] & 1 else a[w]
                    vb = b[w] ^ pad if f1[n] & 1 else b[w]
                    col[w] = va ^ vb
            if mode == MODE_NORMAL and want_pairs:
                n01 = 0
                n10 = 0
                n11 = 0
                for w in range(nwords):
                    pad = pads[w]
                    va = a[w] ^ pad if f0[n] & 1 else a[w]
                    vb = b[w] ^ pad if f1[n] & 1 else b[w]
                    n01 += _popcount((va ^ pad) & vb)
                    n10 += _popcount(va & (vb ^ pad))
                    n11 += _popcount(va & vb)
                pairs[n, 1] = n01
                pairs[n, 2] = n10
                pairs[n, 3] = n11
                pairs[n, 0] = block_examples - n01 - n10 - n11

        if mode == MODE_NORMAL:
            cnt = 0
            for w in range(nwords):
                cnt += _popcount(col[w])
            ones[n] = cnt
        elif mode == MODE_AFFECT:
            c1 = ones_in[n]
            for j in range(n_ls):
                lv = affect_ls[j]
                if 0 < c1 and c1 <= lv:
                    for w in range(nwords):
                        affected[j, w] |= col[w]
                if 0 < total_examples - c1 and total_examples - c1 <= lv:
                    for w in range(nwords):
                        affected[j, w] |= col[w] ^ pads[w]
        elif mode == MODE_SIMPLE or mode == MODE_RANDOMIZED:
            if k >= KIND_AND or perturb_inputs:
                c1 = ones_in[n]
                rare1 = c1 <= l_thresh
                rare0 = total_examples - c1 <= l_thresh
                if rare1 or rare0:
                    if mode == MODE_SIMPLE:
                        if rare1 and rare0:
                            for w in range(nwords):
                                col[w] ^= pads[w]
                        elif rare1:
                            for w in range(nwords):
                                col[w] = _U0
                        else:
                            for w in range(nwords):
                                col[w] = pads[w]
                    else:
                        for w in range(nwords):
                            pad = pads[w]
                            trig = _U0
                            if rare1:
                                trig |= col[w]
                            if rare0:
                                trig |= col[w] ^ pad
                            if trig != _U0:
                                rnd = _rng_word(seed, n, word_offset + w)
                                col[w] = (col[w] & ~trig) | (rnd & trig & pad)
        elif mode == MODE_NOISE:
            if (k >= KIND_AND or (perturb_inputs and k == KIND_INPUT)) and noise_p > 0.0:
                if noise_p >= 1.0:
                    for w in range(nwords):
                        col[w] ^= pads[w]
                else:
                    for w in range(nwords):
                        # geometric skipping: visit only the flipped bits
                        flips = _U0
                        pos = -1
                        i = 0
                        while True:
                            u = _rng_draw(seed, n, word_offset + w, i)
                            i += 1
                            x = (np.float64(u >> np.uint64(11)) + 0.5) * (
                                1.0 / 9007199254740992.0
                            )
                            pos += 1 + int(math.log(x) / log1mp)
                            if pos >= 64:
                                break
                            flips |= _U1 << np.uint64(pos)
                        if flips != _U0:
                            col[w] ^= flips & pads[w]

    return buf, ones, pairs, affected
