"""Balanced active sampling of record pairs.

The sampler keeps, per scheme, the balance rate of the drawn sample: the
share of covered minus uncovered pairs, in [-1, 1]. Active rounds draw
similar pairs (inside code buckets) for schemes whose sample leans
uncovered, and dissimilar pairs (outside the scheme's cover) otherwise,
pushing every balance rate toward zero, which minimizes the summed squared
objective.

Draws never rescan the dataset: similar pairs come from the cached
conjunct indexes, dissimilar and random pairs from rejection over packed
pair keys. Tiny candidate populations (at most `POOL_LIMIT` pairs) are
enumerated once and drawn exactly, so exhaustion terminates cleanly.
Instrumentation counters (`bucket_probes`, `pool_scans`, and
`DatasetIndex.index_builds`) expose the per-draw work to tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

from blocksky.datamodel import DEDUP, RecordPair
from blocksky.metrics import DatasetIndex
from blocksky.scheme import Scheme

MATCH = "M"
NONMATCH = "N"

POOL_LIMIT = 2048
_BATCH = 64


@dataclass(frozen=True, eq=False)
class FeatureVector:
    """A sampled pair plus its per-predicate agreement bits."""

    pair: RecordPair
    key: int
    bits: np.ndarray = field(repr=False)

    def __hash__(self) -> int:
        return hash(self.key)


class TrainingSet:
    """Labelled feature vectors, keyed by pair, in insertion order."""

    def __init__(self):
        self._rows: dict[int, int] = {}
        self._vectors: list[FeatureVector] = []
        self._labels: list[bool] = []
        self._matrix: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self._vectors)

    def __contains__(self, key: int) -> bool:
        return key in self._rows

    def add(self, vector: FeatureVector, label: str) -> None:
        if label not in (MATCH, NONMATCH):
            raise ValueError(f"label must be {MATCH!r} or {NONMATCH!r}, got {label!r}")
        row = self._rows.get(vector.key)
        if row is not None:
            if self._labels[row] != (label == MATCH):
                raise ValueError(f"conflicting relabel of pair {vector.pair}")
            return
        self._rows[vector.key] = len(self._vectors)
        self._vectors.append(vector)
        self._labels.append(label == MATCH)
        self._matrix = None

    @property
    def n_matches(self) -> int:
        return sum(self._labels)

    def vectors(self) -> tuple[FeatureVector, ...]:
        return tuple(self._vectors)

    def label_of(self, key: int) -> str:
        return MATCH if self._labels[self._rows[key]] else NONMATCH

    def bits_matrix(self) -> np.ndarray:
        if self._matrix is None:
            if not self._vectors:
                self._matrix = np.zeros((0, 0), dtype=bool)
            else:
                self._matrix = np.stack([v.bits for v in self._vectors])
        return self._matrix

    def labels_array(self) -> np.ndarray:
        return np.array(self._labels, dtype=bool)


Sample = Union[TrainingSet, Sequence[FeatureVector]]


def _sample_bits(sample: Sample) -> np.ndarray | None:
    if isinstance(sample, TrainingSet):
        if len(sample) == 0:
            return None
        return sample.bits_matrix()
    if len(sample) == 0:
        return None
    return np.stack([v.bits for v in sample])


def balance_rate(scheme: Scheme, sample: Sample) -> float:
    """(covered - uncovered) / |sample|; 0 for an empty sample."""
    bits = _sample_bits(sample)
    if bits is None:
        return 0.0
    covered = int(scheme.covers_rows(bits).sum())
    n = len(bits)
    return (2 * covered - n) / n


def sampling_objective(schemes: Iterable[Scheme], sample: Sample) -> float:
    """Sum of squared balance rates; the sampler drives this toward 0."""
    return sum(balance_rate(s, sample) ** 2 for s in schemes)


@dataclass
class _ConjunctPool:
    """Similar-pair candidates of one conjunct."""

    eligible: np.ndarray  # bucket ids with a drawable pair
    total_pairs: int
    sampled: int = 0
    pool: np.ndarray | None = None  # enumerated keys for tiny populations

    @property
    def exhausted(self) -> bool:
        return self.sampled >= self.total_pairs


class SamplerState:
    """Seeded sampling state shared by all draws of one learning run."""

    def __init__(self, index: DatasetIndex, seed: int):
        self.index = index
        self.rng = np.random.default_rng(seed)
        self.sampled: set[int] = set()
        self._pools: dict[tuple[int, ...], _ConjunctPool] = {}
        self._universal: dict[int, bool] = {}
        # instrumentation: per-draw work, inspected by structural tests
        self.bucket_probes = 0
        self.pool_scans = 0

    # -- bookkeeping ---------------------------------------------------------

    def _vectorize(self, keys: list[int]) -> list[FeatureVector]:
        if not keys:
            return []
        arr = np.array(keys, dtype=np.uint64)
        bits = self.index.bits_for_keys(arr)
        out = []
        for pos, key in enumerate(keys):
            out.append(FeatureVector(self.index.key_to_pair(key), int(key), bits[pos]))
        return out

    def _accept(self, key: int) -> None:
        self.sampled.add(key)
        for conjunct, pool in self._pools.items():
            if not pool.exhausted and self._key_in_conjunct(key, conjunct):
                pool.sampled += 1

    def _key_in_conjunct(self, key: int, conjunct: tuple[int, ...]) -> bool:
        i, j = self.index.key_to_indices(key)
        right_src = 0 if self.index.dataset.mode == DEDUP else 1
        for p in conjunct:
            left_arrays = self.index.codes[p][0]
            right_arrays = self.index.codes[p][right_src]
            left_vals = {int(a[i]) for a in left_arrays}
            if not any(int(a[j]) in left_vals for a in right_arrays):
                return False
        return True

    def _conjunct_pool(self, conjunct: tuple[int, ...]) -> _ConjunctPool:
        pool = self._pools.get(conjunct)
        if pool is not None:
            return pool
        groups = self.index.conjunct_index(conjunct)
        if self.index.dataset.mode == DEDUP:
            sizes = groups[0].sizes()
            eligible = np.flatnonzero(sizes >= 2)
            total = int((sizes * (sizes - 1) // 2).sum())
        else:
            left_sizes = groups[0].sizes()
            right_sizes = groups[1].sizes()
            eligible = np.flatnonzero((left_sizes > 0) & (right_sizes > 0))
            total = int((left_sizes * right_sizes).sum())
        pool = _ConjunctPool(eligible=eligible, total_pairs=total)
        if 0 < total <= POOL_LIMIT:
            pool.pool = self.index.conjunct_pair_keys(conjunct)
        # count pairs this state has already drawn from the conjunct
        for key in self.sampled:
            if self._key_in_conjunct(key, conjunct):
                pool.sampled += 1
        self._pools[conjunct] = pool
        return pool

    def _predicate_universal(self, pred_idx: int) -> bool:
        """Whether every record shares a common code under the predicate."""
        cached = self._universal.get(pred_idx)
        if cached is not None:
            return cached
        candidate_sets = []
        for source, arrays in enumerate(self.index.codes[pred_idx]):
            stacked = np.stack(arrays)  # (slots, n)
            candidate_sets.append(set(stacked[:, 0].tolist()))
        candidates = set.intersection(*candidate_sets) if candidate_sets else set()
        result = False
        for code in candidates:
            if all(np.any(np.stack(arrays) == code, axis=0).all()
                   for arrays in self.index.codes[pred_idx]):
                result = True
                break
        self._universal[pred_idx] = result
        return result

    def _conjunct_universal(self, conjunct: tuple[int, ...]) -> bool:
        return all(self._predicate_universal(p) for p in conjunct)

    # -- raw pair draws -------------------------------------------------------

    def _ordinals_to_keys(self, ordinals: np.ndarray) -> np.ndarray:
        index = self.index
        if index.dataset.mode != DEDUP:
            return ordinals.astype(np.uint64)
        n = index.stride
        t = ordinals.astype(np.float64)
        i = np.floor(n - 0.5 - np.sqrt((n - 0.5) ** 2 - 2.0 * t)).astype(np.int64)
        i = np.clip(i, 0, n - 2)
        offset = i * n - i * (i + 1) // 2

        def fix(i, offset):
            too_high = offset > ordinals
            while too_high.any():
                i = np.where(too_high, i - 1, i)
                offset = i * n - i * (i + 1) // 2
                too_high = offset > ordinals
            row_size = n - 1 - i
            too_low = ordinals - offset >= row_size
            while too_low.any():
                i = np.where(too_low, i + 1, i)
                offset = i * n - i * (i + 1) // 2
                row_size = n - 1 - i
                too_low = ordinals - offset >= row_size
            return i, offset

        i, offset = fix(i, offset)
        j = ordinals - offset + i + 1
        return (i.astype(np.uint64) * np.uint64(n) + j.astype(np.uint64))


def similar_sample(state: SamplerState, scheme: Scheme, k: int) -> list[FeatureVector]:
    """Draw up to k new pairs covered by the scheme.

    Each draw picks a disjunct, then one of its code buckets, then a pair
    inside the bucket. Returns fewer than k vectors only when the covered
    population is (nearly) exhausted.
    """
    rng = state.rng
    accepted: list[int] = []
    pools = [state._conjunct_pool(c) for c in scheme.disjuncts]
    cap = max(64, 8 * k)
    attempts = 0
    while len(accepted) < k and attempts < cap:
        open_pools = [(c, p) for c, p in zip(scheme.disjuncts, pools) if not p.exhausted]
        if not open_pools:
            break
        attempts += 1
        conjunct, pool = open_pools[int(rng.integers(len(open_pools)))]
        if pool.pool is not None:
            # tiny population: exact scan in random order
            order = rng.permutation(len(pool.pool))
            state.pool_scans += len(order)
            for pos in order:
                key = int(pool.pool[pos])
                if key not in state.sampled:
                    accepted.append(key)
                    state._accept(key)
                    break
            else:
                pool.sampled = pool.total_pairs
            continue
        state.bucket_probes += 1
        groups = state.index.conjunct_index(conjunct)
        bucket = int(pool.eligible[int(rng.integers(len(pool.eligible)))])
        if state.index.dataset.mode == DEDUP:
            members = groups[0].members[groups[0].offsets[bucket]:groups[0].offsets[bucket + 1]]
            a, b = rng.choice(len(members), size=2, replace=False)
            i, j = int(members[a]), int(members[b])
            if i > j:
                i, j = j, i
            key = state.index.pair_key(i, j)
        else:
            left, right = groups
            lm = left.members[left.offsets[bucket]:left.offsets[bucket + 1]]
            rm = right.members[right.offsets[bucket]:right.offsets[bucket + 1]]
            key = state.index.pair_key(int(lm[int(rng.integers(len(lm)))]),
                                       int(rm[int(rng.integers(len(rm)))]))
        if key in state.sampled:
            continue
        accepted.append(key)
        state._accept(key)
    return state._vectorize(accepted)


def dissimilar_sample(state: SamplerState, scheme: Scheme, k: int) -> list[FeatureVector]:
    """Draw up to k new pairs the scheme does not cover.

    Returns an empty list at once when some conjunct holds on every pair
    (then no dissimilar pair exists). Otherwise rejection-samples uniform
    pairs, falling back to directed cross-bucket draws for schemes that
    cover almost everything.
    """
    if state.index.total_pairs == 0:
        return []
    if any(state._conjunct_universal(c) for c in scheme.disjuncts):
        return []
    rng = state.rng
    index = state.index
    accepted: list[int] = []
    rounds = max(4, (8 * k) // _BATCH + 1)
    for _ in range(rounds):
        if len(accepted) >= k:
            break
        ordinals = rng.integers(0, index.total_pairs, size=_BATCH, dtype=np.int64)
        keys = state._ordinals_to_keys(np.unique(ordinals))
        state.bucket_probes += len(keys)
        bits = index.bits_for_keys(keys)
        uncovered = ~scheme.covers_rows(bits)
        for pos in np.flatnonzero(uncovered):
            key = int(keys[pos])
            if key in state.sampled:
                continue
            accepted.append(key)
            state._accept(key)
            if len(accepted) >= k:
                break
    if not accepted:
        # directed fallback: records straddling two buckets of one predicate
        preds = scheme.predicates_used()
        for _ in range(max(32, 4 * k)):
            if len(accepted) >= k:
                break
            p = preds[int(rng.integers(len(preds)))]
            groups = index.conjunct_index((p,))
            left_group = groups[0]
            if left_group.n_groups < 2:
                continue
            g1, g2 = rng.choice(left_group.n_groups, size=2, replace=False)
            state.bucket_probes += 1
            right_group = groups[0] if index.dataset.mode == DEDUP else groups[1]
            lm = left_group.members[left_group.offsets[g1]:left_group.offsets[g1 + 1]]
            rm = right_group.members[right_group.offsets[g2]:right_group.offsets[g2 + 1]]
            if len(lm) == 0 or len(rm) == 0:
                continue
            i = int(lm[int(rng.integers(len(lm)))])
            j = int(rm[int(rng.integers(len(rm)))])
            if index.dataset.mode == DEDUP:
                if i == j:
                    continue
                if i > j:
                    i, j = j, i
            key = index.pair_key(i, j)
            if key in state.sampled:
                continue
            arr = np.array([key], dtype=np.uint64)
            if scheme.covers_rows(index.bits_for_keys(arr))[0]:
                continue
            accepted.append(key)
            state._accept(key)
    return state._vectorize(accepted)


def random_sample(state: SamplerState, k: int) -> list[FeatureVector]:
    """Draw up to k new pairs uniformly from all comparable pairs."""
    rng = state.rng
    index = state.index
    total = index.total_pairs
    if total == 0:
        return []
    accepted: list[int] = []
    if total <= max(POOL_LIMIT, 4 * k):
        ordinals = rng.permutation(total)
        state.pool_scans += total
        keys = state._ordinals_to_keys(ordinals.astype(np.int64))
        for key in keys:
            key = int(key)
            if key not in state.sampled:
                accepted.append(key)
                state._accept(key)
                if len(accepted) >= k:
                    break
        return state._vectorize(accepted)
    rounds = max(4, (8 * k) // _BATCH + 1)
    for _ in range(rounds):
        if len(accepted) >= k:
            break
        ordinals = rng.integers(0, total, size=_BATCH, dtype=np.int64)
        state.bucket_probes += _BATCH
        for key in state._ordinals_to_keys(np.unique(ordinals)):
            key = int(key)
            if key in state.sampled:
                continue
            accepted.append(key)
            state._accept(key)
            if len(accepted) >= k:
                break
    return state._vectorize(accepted)


def active_round(state: SamplerState, schemes: Sequence[Scheme], k: int,
                 sample: Sample, limit: int | None = None) -> list[FeatureVector]:
    """One balanced sampling pass over the candidate schemes.

    For each scheme in order: draw k similar pairs when its balance rate
    over the growing sample is <= 0, else k dissimilar pairs. `limit`
    caps the total number of new vectors (budget truncation).
    """
    current: list[FeatureVector] = list(
        sample.vectors() if isinstance(sample, TrainingSet) else sample)
    new: list[FeatureVector] = []
    for scheme in schemes:
        if limit is not None and len(new) >= limit:
            break
        k_eff = k if limit is None else min(k, limit - len(new))
        gamma = balance_rate(scheme, current)
        if gamma <= 0:
            batch = similar_sample(state, scheme, k_eff)
        else:
            batch = dissimilar_sample(state, scheme, k_eff)
        current.extend(batch)
        new.extend(batch)
    return new
