"""Compiled kernels for snapshot reachability and bucket-constrained rewiring.

Everything here operates on flat integer arrays so numba can compile it;
object-level wrappers live in citegraph.py and nullmodel.py. The PRNG is
splitmix64, inlined so replicates are bit-reproducible across platforms,
and duplicate-arc checks use a generation-stamped open-addressing table
with backward-shift deletion (a proposed swap can only collide with arcs
of its own bucket, so one shared table is reset per bucket by bumping the
generation counter instead of clearing memory).
"""

from __future__ import annotations

import numba as nb
import numpy as np

U64 = np.uint64

_SPLITMIX_GAMMA = U64(0x9E3779B97F4A7C15)
_MIX_1 = U64(0xBF58476D1CE4E5B9)
_MIX_2 = U64(0x94D049BB133111EB)


@nb.njit(nb.uint64(nb.uint64), cache=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> U64(30))) * _MIX_1
    z = (z ^ (z >> U64(27))) * _MIX_2
    return z ^ (z >> U64(31))


@nb.njit(cache=True, inline="always")
def _next_u64(state):
    state = state + _SPLITMIX_GAMMA
    return state, _mix64(state)


@nb.njit(nb.int64(nb.uint64), cache=True, inline="always")
def _popcount(x):
    x = x - ((x >> U64(1)) & U64(0x5555555555555555))
    x = (x & U64(0x3333333333333333)) + ((x >> U64(2)) & U64(0x3333333333333333))
    x = (x + (x >> U64(4))) & U64(0x0F0F0F0F0F0F0F0F)
    return np.int64((x * U64(0x0101010101010101)) >> U64(56))


@nb.njit(cache=True)
def reach_counts(n, indptr, targets, descending, bits, counts):
    """Count nodes reachable through already-processed neighbors, plus self.

    Nodes are processed in index order (reversed when ``descending``);
    every target listed for a node must have been processed before it.
    ``bits`` is an (n, ceil(n/64)) uint64 scratch matrix, cleared here.
    """
    words = bits.shape[1]
    bits[:] = U64(0)
    for idx in range(n):
        v = n - 1 - idx if descending else idx
        row = bits[v]
        row[v >> 6] |= U64(1) << U64(v & 63)
        for e in range(indptr[v], indptr[v + 1]):
            other = bits[targets[e]]
            for w in range(words):
                row[w] |= other[w]
        total = np.int64(0)
        for w in range(words):
            total += _popcount(row[w])
        counts[v] = total


@nb.njit(cache=True)
def _csr_group(keys, n, indptr, slots):
    """Counting sort: group arc indices by integer key into (indptr, slots)."""
    m = keys.shape[0]
    indptr[:] = 0
    for e in range(m):
        indptr[keys[e] + 1] += 1
    for i in range(n):
        indptr[i + 1] += indptr[i]
    cursor = indptr[:n].copy()
    for e in range(m):
        k = keys[e]
        slots[cursor[k]] = e
        cursor[k] += 1


@nb.njit(cache=True, inline="always")
def _table_find(key_table, gen_table, gen, mask, key):
    slot = np.int64(_mix64(key) & U64(mask))
    while gen_table[slot] == gen:
        if key_table[slot] == key:
            return slot
        slot = (slot + 1) & mask
    return np.int64(-1)


@nb.njit(cache=True, inline="always")
def _table_insert(key_table, gen_table, gen, mask, key):
    slot = np.int64(_mix64(key) & U64(mask))
    while gen_table[slot] == gen:
        slot = (slot + 1) & mask
    key_table[slot] = key
    gen_table[slot] = gen


@nb.njit(cache=True, inline="always")
def _table_delete(key_table, gen_table, gen, mask, key):
    # Backward-shift deletion keeps probe chains intact without tombstones.
    hole = _table_find(key_table, gen_table, gen, mask, key)
    gen_table[hole] = 0
    probe = (hole + 1) & mask
    while gen_table[probe] == gen:
        ideal = np.int64(_mix64(key_table[probe]) & U64(mask))
        if ((probe - ideal) & mask) >= ((probe - hole) & mask):
            key_table[hole] = key_table[probe]
            gen_table[hole] = gen
            gen_table[probe] = 0
            hole = probe
        probe = (probe + 1) & mask


@nb.njit(cache=True)
def rewire_buckets(
    citing,
    cited,
    order,
    ptr,
    n_nodes,
    swap_factor,
    seed,
    key_table,
    gen_table,
    gen_start,
    attempts_out,
    rejected_out,
):
    """Markov-chain rewiring of ``cited`` endpoints, one bucket at a time.

    For each bucket of at least two arcs, performs ceil(swap_factor * size)
    attempted pairwise swaps of cited endpoints; a swap is rejected when it
    would create a self-citation or duplicate an existing arc. Swapping two
    arcs that share a citing or cited endpoint leaves the arc set unchanged
    and counts as an accepted no-op. Returns the updated generation counter.
    """
    mask = np.int64(key_table.shape[0] - 1)
    state = seed
    gen = gen_start
    scale = U64(n_nodes)
    n_buckets = ptr.shape[0] - 1
    for b in range(n_buckets):
        lo = ptr[b]
        hi = ptr[b + 1]
        size = hi - lo
        if size < 2:
            attempts_out[b] = 0
            rejected_out[b] = 0
            continue
        gen += 1
        for s in range(lo, hi):
            arc = order[s]
            _table_insert(
                key_table, gen_table, gen, mask,
                U64(citing[arc]) * scale + U64(cited[arc]),
            )
        attempts = np.int64(np.ceil(swap_factor * size))
        rejected = np.int64(0)
        usize = U64(size)
        for _ in range(attempts):
            state, draw = _next_u64(state)
            i = np.int64(draw % usize)
            state, draw = _next_u64(state)
            j = np.int64(draw % U64(size - 1))
            if j >= i:
                j += 1
            a = order[lo + i]
            b2 = order[lo + j]
            u1 = citing[a]
            v1 = cited[a]
            u2 = citing[b2]
            v2 = cited[b2]
            if u1 == u2 or v1 == v2:
                continue
            if u1 == v2 or u2 == v1:
                rejected += 1
                continue
            new1 = U64(u1) * scale + U64(v2)
            new2 = U64(u2) * scale + U64(v1)
            if _table_find(key_table, gen_table, gen, mask, new1) >= 0:
                rejected += 1
                continue
            if _table_find(key_table, gen_table, gen, mask, new2) >= 0:
                rejected += 1
                continue
            _table_delete(key_table, gen_table, gen, mask, U64(u1) * scale + U64(v1))
            _table_delete(key_table, gen_table, gen, mask, U64(u2) * scale + U64(v2))
            _table_insert(key_table, gen_table, gen, mask, new1)
            _table_insert(key_table, gen_table, gen, mask, new2)
            cited[a] = v2
            cited[b2] = v1
        attempts_out[b] = attempts
        rejected_out[b] = rejected
    return gen


@nb.njit(cache=True)
def null_accumulate(
    n,
    citing,
    cited_obs,
    order,
    ptr,
    swap_factor,
    seed,
    replicates,
    key_table,
    gen_table,
):
    """Accumulate node-pair centrality sums over rewired replicates.

    Replicate r rewires a fresh copy of the observed arcs with sub-seed
    ``seed XOR r`` and accumulates value = n_minus * n_plus per node.
    Returns (sums, sumsq, attempts, rejected) with per-bucket counts
    summed across replicates.
    """
    m = citing.shape[0]
    words = (n + 63) >> 6
    bits = np.zeros((n, words), dtype=np.uint64)
    counts_plus = np.zeros(n, dtype=np.int64)
    counts_minus = np.zeros(n, dtype=np.int64)
    sums = np.zeros(n, dtype=np.float64)
    sumsq = np.zeros(n, dtype=np.float64)
    n_buckets = ptr.shape[0] - 1
    attempts_total = np.zeros(n_buckets, dtype=np.int64)
    rejected_total = np.zeros(n_buckets, dtype=np.int64)
    attempts = np.zeros(n_buckets, dtype=np.int64)
    rejected = np.zeros(n_buckets, dtype=np.int64)
    cited_work = np.empty(m, dtype=citing.dtype)
    indptr = np.zeros(n + 1, dtype=np.int64)
    slots = np.empty(m, dtype=np.int64)
    targets = np.empty(m, dtype=citing.dtype)
    gen = np.int64(0)

    for r in range(replicates):
        cited_work[:] = cited_obs
        sub_seed = seed ^ U64(r)
        gen = rewire_buckets(
            citing, cited_work, order, ptr, n, swap_factor, sub_seed,
            key_table, gen_table, gen, attempts, rejected,
        )
        for b in range(n_buckets):
            attempts_total[b] += attempts[b]
            rejected_total[b] += rejected[b]
        _csr_group(citing, n, indptr, slots)
        for s in range(m):
            targets[s] = cited_work[slots[s]]
        reach_counts(n, indptr, targets, False, bits, counts_plus)
        _csr_group(cited_work, n, indptr, slots)
        for s in range(m):
            targets[s] = citing[slots[s]]
        reach_counts(n, indptr, targets, True, bits, counts_minus)
        for v in range(n):
            value = np.float64(counts_minus[v]) * np.float64(counts_plus[v])
            sums[v] += value
            sumsq[v] += value * value
    return sums, sumsq, attempts_total, rejected_total


def table_capacity(max_bucket_size: int) -> int:
    """Power-of-two hash-table size keeping load factor at or below 1/2."""
    need = max(4, 2 * int(max_bucket_size))
    cap = 1
    while cap < need:
        cap <<= 1
    return cap
