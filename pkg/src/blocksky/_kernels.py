"""Hot loops: pair enumeration within code buckets and skyline filtering.

Each kernel has a numba and a pure-numpy implementation. The numba path is
used when numba imports cleanly and the environment variable
``BLOCKSKY_NO_NUMBA`` is unset; both paths compute identical results and
the test suite runs them side by side.

Record pairs are packed into uint64 keys as ``left * stride + right`` with
``left < right`` for dedup datasets; linkage keys use the second source's
record index on the right.
"""

from __future__ import annotations

import os

import numpy as np

_DISABLED = os.environ.get("BLOCKSKY_NO_NUMBA", "").lower() in ("1", "true", "yes")

try:
    import numba

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - depends on environment
    numba = None
    HAS_NUMBA = False

USING_NUMBA = HAS_NUMBA and not _DISABLED


def _within_group_pairs_np(members: np.ndarray, offsets: np.ndarray,
                           stride: int) -> np.ndarray:
    total = 0
    for g in range(len(offsets) - 1):
        size = offsets[g + 1] - offsets[g]
        total += size * (size - 1) // 2
    out = np.empty(total, dtype=np.uint64)
    pos = 0
    for g in range(len(offsets) - 1):
        group = members[offsets[g]:offsets[g + 1]]
        size = len(group)
        if size < 2:
            continue
        left, right = np.triu_indices(size, k=1)
        keys = group[left].astype(np.uint64) * np.uint64(stride) + group[right].astype(np.uint64)
        out[pos:pos + len(keys)] = keys
        pos += len(keys)
    return out


def _cross_group_pairs_np(left_members: np.ndarray, left_offsets: np.ndarray,
                          right_members: np.ndarray, right_offsets: np.ndarray,
                          stride: int) -> np.ndarray:
    total = 0
    for g in range(len(left_offsets) - 1):
        total += (left_offsets[g + 1] - left_offsets[g]) * (right_offsets[g + 1] - right_offsets[g])
    out = np.empty(total, dtype=np.uint64)
    pos = 0
    for g in range(len(left_offsets) - 1):
        lg = left_members[left_offsets[g]:left_offsets[g + 1]].astype(np.uint64)
        rg = right_members[right_offsets[g]:right_offsets[g + 1]].astype(np.uint64)
        if len(lg) == 0 or len(rg) == 0:
            continue
        keys = (lg[:, None] * np.uint64(stride) + rg[None, :]).ravel()
        out[pos:pos + len(keys)] = keys
        pos += len(keys)
    return out


def _naive_skyline_mask_np(pc: np.ndarray, pq: np.ndarray,
                           chunk: int = 256) -> np.ndarray:
    n = len(pc)
    mask = np.ones(n, dtype=bool)
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        pc_block = pc[start:stop, None]
        pq_block = pq[start:stop, None]
        geq = (pc[None, :] >= pc_block) & (pq[None, :] >= pq_block)
        strict = (pc[None, :] > pc_block) | (pq[None, :] > pq_block)
        mask[start:stop] = ~(geq & strict).any(axis=1)
    return mask


if HAS_NUMBA:

    @numba.njit(cache=True, nogil=True)
    def _within_group_pairs_nb(members, offsets, stride):  # pragma: no cover - jit
        total = 0
        for g in range(len(offsets) - 1):
            size = offsets[g + 1] - offsets[g]
            total += size * (size - 1) // 2
        out = np.empty(total, dtype=np.uint64)
        pos = 0
        for g in range(len(offsets) - 1):
            lo, hi = offsets[g], offsets[g + 1]
            for i in range(lo, hi):
                left = np.uint64(members[i]) * np.uint64(stride)
                for j in range(i + 1, hi):
                    out[pos] = left + np.uint64(members[j])
                    pos += 1
        return out

    @numba.njit(cache=True, nogil=True)
    def _cross_group_pairs_nb(left_members, left_offsets, right_members,
                              right_offsets, stride):  # pragma: no cover - jit
        total = 0
        for g in range(len(left_offsets) - 1):
            total += ((left_offsets[g + 1] - left_offsets[g])
                      * (right_offsets[g + 1] - right_offsets[g]))
        out = np.empty(total, dtype=np.uint64)
        pos = 0
        for g in range(len(left_offsets) - 1):
            for i in range(left_offsets[g], left_offsets[g + 1]):
                left = np.uint64(left_members[i]) * np.uint64(stride)
                for j in range(right_offsets[g], right_offsets[g + 1]):
                    out[pos] = left + np.uint64(right_members[j])
                    pos += 1
        return out

    @numba.njit(cache=True, nogil=True)
    def _naive_skyline_mask_nb(pc, pq):  # pragma: no cover - jit
        n = len(pc)
        mask = np.ones(n, dtype=numba.boolean)
        for i in range(n):
            for j in range(n):
                if (pc[j] >= pc[i] and pq[j] >= pq[i]
                        and (pc[j] > pc[i] or pq[j] > pq[i])):
                    mask[i] = False
                    break
        return mask


def within_group_pairs(members: np.ndarray, offsets: np.ndarray, stride: int) -> np.ndarray:
    """All unordered record pairs inside each group, as packed keys.

    ``members`` holds record indices grouped contiguously and ascending
    within each group; ``offsets`` delimits the groups.
    """
    members = np.ascontiguousarray(members, dtype=np.int64)
    offsets = np.ascontiguousarray(offsets, dtype=np.int64)
    if USING_NUMBA:
        return _within_group_pairs_nb(members, offsets, stride)
    return _within_group_pairs_np(members, offsets, stride)


def cross_group_pairs(left_members: np.ndarray, left_offsets: np.ndarray,
                      right_members: np.ndarray, right_offsets: np.ndarray,
                      stride: int) -> np.ndarray:
    """All cross-source pairs of aligned groups, as packed keys."""
    left_members = np.ascontiguousarray(left_members, dtype=np.int64)
    left_offsets = np.ascontiguousarray(left_offsets, dtype=np.int64)
    right_members = np.ascontiguousarray(right_members, dtype=np.int64)
    right_offsets = np.ascontiguousarray(right_offsets, dtype=np.int64)
    if USING_NUMBA:
        return _cross_group_pairs_nb(left_members, left_offsets,
                                     right_members, right_offsets, stride)
    return _cross_group_pairs_np(left_members, left_offsets,
                                 right_members, right_offsets, stride)


def naive_skyline_mask(pc: np.ndarray, pq: np.ndarray) -> np.ndarray:
    """Quadratic reference filter: True where no other point dominates."""
    pc = np.ascontiguousarray(pc, dtype=np.float64)
    pq = np.ascontiguousarray(pq, dtype=np.float64)
    if USING_NUMBA:
        return _naive_skyline_mask_nb(pc, pq)
    return _naive_skyline_mask_np(pc, pq)
