"""Blocking quality measures over datasets and labelled samples.

Pair sets are computed from per-predicate code buckets (inverted indexes),
never by scanning all record pairs. A conjunction's pairs come from a
composite index that groups records by the tuple of codes of its
predicates; double-metaphone predicates contribute one group membership
per distinct code, which realizes the any-code agreement semantics.

Exact measures (pc, pq, rr) are defined against full ground truth.
Empirical measures are the same ratios over a labelled training set.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable

import numpy as np

from blocksky._kernels import cross_group_pairs, within_group_pairs
from blocksky.datamodel import DEDUP, Dataset, GroundTruth, RecordPair
from blocksky.functions import PredicateUniverse
from blocksky.scheme import Scheme

if TYPE_CHECKING:  # pragma: no cover
    from blocksky.sampling import TrainingSet


class MetricsError(ValueError):
    """Base class for measurement errors."""


class UndefinedMetricError(MetricsError):
    """A ratio whose denominator is structurally zero (e.g. no matches)."""


class NotEvaluableError(MetricsError):
    """The training set holds no match labels yet, so PC has no estimate."""


@dataclass(frozen=True)
class ConfusionCounts:
    """Pair-level confusion counts of a scheme against ground truth."""

    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    @property
    def coblocked(self) -> int:
        return self.tp + self.fp


@dataclass(frozen=True)
class GroupIndex:
    """Records grouped contiguously by a shared key.

    ``members`` holds record indices, ascending inside each group;
    ``offsets`` has one more entry than there are groups.
    """

    members: np.ndarray
    offsets: np.ndarray

    @property
    def n_groups(self) -> int:
        return len(self.offsets) - 1

    def sizes(self) -> np.ndarray:
        return np.diff(self.offsets)


class DatasetIndex:
    """Per-(dataset, universe) code tables and cached pair indexes."""

    def __init__(self, dataset: Dataset, universe: PredicateUniverse):
        self.dataset = dataset
        self.universe = universe
        self.n_sources = len(dataset.sources)
        sizes = dataset.source_sizes()
        # dedup keys are i*n + j with i < j; linkage keys are i*n2 + j
        self.stride = sizes[0] if dataset.mode == DEDUP else sizes[1]
        self.total_pairs = dataset.total_pairs
        # codes[p][source] -> tuple of int64 arrays, one per code slot
        self.codes: list[tuple[tuple[np.ndarray, ...], ...]] = []
        for pred in universe:
            table: dict[str, int] = {}
            per_source = []
            for src in dataset.sources:
                raw = [pred.codes(rec) for rec in src]
                slots = pred.function.n_codes
                arrays = []
                for slot in range(slots):
                    ids = np.empty(len(src), dtype=np.int64)
                    for i, codes in enumerate(raw):
                        ids[i] = table.setdefault(codes[slot], len(table))
                    arrays.append(ids)
                per_source.append(tuple(arrays))
            self.codes.append(tuple(per_source))
        self._conjunct_indexes: dict[tuple[int, ...], tuple[GroupIndex, ...]] = {}
        self._conjunct_keys: dict[tuple[int, ...], np.ndarray] = {}
        self._match_keys: dict[int, np.ndarray] = {}
        self.index_builds = 0  # structural accounting for the sampler tests

    # -- pair keys ---------------------------------------------------------

    def pair_key(self, left_idx: int, right_idx: int) -> int:
        return left_idx * self.stride + right_idx

    def key_to_indices(self, key: int) -> tuple[int, int]:
        return int(key) // self.stride, int(key) % self.stride

    def key_to_pair(self, key: int) -> RecordPair:
        i, j = self.key_to_indices(key)
        if self.dataset.mode == DEDUP:
            src = self.dataset.sources[0]
            return RecordPair.canonical(src[i].id, src[j].id)
        return RecordPair(self.dataset.sources[0][i].id, self.dataset.sources[1][j].id)

    def pair_to_key(self, pair: RecordPair) -> int:
        if self.dataset.mode == DEDUP:
            i = self.dataset.position(pair.left, 0)
            j = self.dataset.position(pair.right, 0)
            if i > j:
                i, j = j, i
            return self.pair_key(i, j)
        i = self.dataset.position(pair.left, 0)
        j = self.dataset.position(pair.right, 1)
        return self.pair_key(i, j)

    def match_keys(self, truth: GroundTruth) -> np.ndarray:
        """Sorted packed keys of all ground-truth matches."""
        cached = self._match_keys.get(id(truth))
        if cached is None:
            keys = np.fromiter((self.pair_to_key(p) for p in truth),
                               dtype=np.uint64, count=len(truth))
            keys.sort()
            cached = keys
            self._match_keys[id(truth)] = cached
        return cached

    # -- predicate evaluation on explicit pairs ----------------------------

    def agree_on_predicate(self, pred_idx: int, left: np.ndarray,
                           right: np.ndarray) -> np.ndarray:
        """Agreement bits of a predicate over parallel index arrays."""
        left_src = 0
        right_src = 0 if self.dataset.mode == DEDUP else 1
        lcodes = self.codes[pred_idx][left_src]
        rcodes = self.codes[pred_idx][right_src]
        out = np.zeros(len(left), dtype=bool)
        for lc in lcodes:
            for rc in rcodes:
                out |= lc[left] == rc[right]
        return out

    def bits_for_keys(self, keys: np.ndarray) -> np.ndarray:
        """Feature-vector matrix for packed pair keys."""
        keys = np.asarray(keys, dtype=np.uint64)
        left = (keys // np.uint64(self.stride)).astype(np.int64)
        right = (keys % np.uint64(self.stride)).astype(np.int64)
        bits = np.empty((len(keys), len(self.universe)), dtype=bool)
        for p in range(len(self.universe)):
            bits[:, p] = self.agree_on_predicate(p, left, right)
        return bits

    # -- conjunct indexes ---------------------------------------------------

    def _expanded_rows(self, conjunct: tuple[int, ...],
                       source: int) -> tuple[np.ndarray, np.ndarray]:
        """(record indices, code-tuple matrix) with one row per code choice."""
        n = len(self.dataset.sources[source])
        recs = np.arange(n, dtype=np.int64)
        rows = np.empty((n, 0), dtype=np.int64)
        for pred_idx in conjunct:
            arrays = self.codes[pred_idx][source]
            if len(arrays) == 1:
                rows = np.hstack([rows, arrays[0][recs][:, None]])
            else:
                primary, alternate = arrays
                with_primary = np.hstack([rows, primary[recs][:, None]])
                distinct = alternate[recs] != primary[recs]
                with_alternate = np.hstack([rows[distinct], alternate[recs][distinct][:, None]])
                rows = np.vstack([with_primary, with_alternate])
                recs = np.concatenate([recs, recs[distinct]])
        return recs, rows

    def conjunct_index(self, conjunct: tuple[int, ...]) -> tuple[GroupIndex, ...]:
        """Group records by the composite code tuple of a conjunct.

        Returns one `GroupIndex` for dedup, two aligned ones for linkage.
        Cached per conjunct; building scans each source once.
        """
        conjunct = tuple(conjunct)
        cached = self._conjunct_indexes.get(conjunct)
        if cached is not None:
            return cached
        self.index_builds += 1
        per_source = [self._expanded_rows(conjunct, s) for s in range(self.n_sources)]
        all_rows = np.vstack([rows for _, rows in per_source])
        _, inverse = np.unique(all_rows, axis=0, return_inverse=True)
        n_groups = int(inverse.max()) + 1 if len(inverse) else 0
        indexes = []
        start = 0
        for recs, rows in per_source:
            gids = inverse[start:start + len(rows)]
            start += len(rows)
            order = np.lexsort((recs, gids))
            members = recs[order]
            counts = np.bincount(gids, minlength=n_groups)
            offsets = np.zeros(n_groups + 1, dtype=np.int64)
            np.cumsum(counts, out=offsets[1:])
            indexes.append(GroupIndex(members, offsets))
        result = tuple(indexes)
        self._conjunct_indexes[conjunct] = result
        return result

    def conjunct_pair_keys(self, conjunct: tuple[int, ...]) -> np.ndarray:
        """Sorted unique keys of all pairs agreeing on every predicate."""
        conjunct = tuple(conjunct)
        cached = self._conjunct_keys.get(conjunct)
        if cached is not None:
            return cached
        if self.dataset.mode == DEDUP:
            (index,) = self.conjunct_index(conjunct)
            keys = within_group_pairs(index.members, index.offsets, self.stride)
        else:
            left, right = self.conjunct_index(conjunct)
            keys = cross_group_pairs(left.members, left.offsets,
                                     right.members, right.offsets, self.stride)
        keys = np.unique(keys)
        self._conjunct_keys[conjunct] = keys
        return keys

    def scheme_pair_keys(self, scheme: Scheme) -> np.ndarray:
        """Sorted unique keys of all pairs the scheme co-blocks."""
        if scheme.universe != self.universe:
            raise MetricsError("scheme universe does not match the index")
        keys = self.conjunct_pair_keys(scheme.disjuncts[0])
        for conjunct in scheme.disjuncts[1:]:
            keys = np.union1d(keys, self.conjunct_pair_keys(conjunct))
        return keys

    def cache_clear(self) -> None:
        self._conjunct_indexes.clear()
        self._conjunct_keys.clear()
        self._match_keys.clear()


def build_index(dataset: Dataset, universe: PredicateUniverse) -> DatasetIndex:
    """Construct the shared per-dataset index used by metrics and sampling."""
    return DatasetIndex(dataset, universe)


def coblocked(scheme: Scheme, pair: RecordPair, index: DatasetIndex) -> bool:
    """Whether a scheme places the two records of a pair together."""
    key = np.array([index.pair_to_key(pair)], dtype=np.uint64)
    return bool(scheme.covers_rows(index.bits_for_keys(key))[0])


def confusion(scheme: Scheme, index: DatasetIndex, truth: GroundTruth) -> ConfusionCounts:
    """Pair-level confusion counts of a scheme on the full dataset."""
    keys = index.scheme_pair_keys(scheme)
    matches = index.match_keys(truth)
    tp = int(np.isin(matches, keys, assume_unique=True).sum())
    fp = int(len(keys)) - tp
    fn = int(len(matches)) - tp
    tn = index.total_pairs - tp - fp - fn
    return ConfusionCounts(tp=tp, fp=fp, fn=fn, tn=tn)


def pc(counts: ConfusionCounts) -> float:
    """Pair completeness: share of true matches co-blocked."""
    denom = counts.tp + counts.fn
    if denom == 0:
        raise UndefinedMetricError("pair completeness is undefined without matches")
    return counts.tp / denom


def pq(counts: ConfusionCounts) -> float:
    """Pair quality: share of co-blocked pairs that are matches.

    A scheme that co-blocks nothing has quality 0 by convention.
    """
    denom = counts.tp + counts.fp
    if denom == 0:
        return 0.0
    return counts.tp / denom


def rr(counts: ConfusionCounts) -> float:
    """Reduction ratio: share of comparisons avoided."""
    if counts.total == 0:
        raise UndefinedMetricError("reduction ratio is undefined on an empty dataset")
    return 1.0 - counts.coblocked / counts.total


def fm(pc_value: float, pq_value: float) -> float:
    """Harmonic mean of pair completeness and pair quality."""
    if pc_value + pq_value == 0:
        return 0.0
    return 2.0 * pc_value * pq_value / (pc_value + pq_value)


def empirical_pc(scheme: Scheme, training: "TrainingSet") -> float:
    """PC estimated over the labelled sample instead of ground truth."""
    bits, labels = training.bits_matrix(), training.labels_array()
    n_matches = int(labels.sum())
    if n_matches == 0:
        raise NotEvaluableError("no match labels in the training set yet")
    covered = scheme.covers_rows(bits)
    return float((covered & labels).sum()) / n_matches


def empirical_pq(scheme: Scheme, training: "TrainingSet") -> float:
    """PQ estimated over the labelled sample; 0 when nothing is covered."""
    bits, labels = training.bits_matrix(), training.labels_array()
    covered = scheme.covers_rows(bits)
    n_covered = int(covered.sum())
    if n_covered == 0:
        return 0.0
    return float((covered & labels).sum()) / n_covered


@dataclass(frozen=True)
class BlockPartition:
    """A disjoint partition of record ids into blocks."""

    blocks: tuple[frozenset[str], ...]

    def __len__(self) -> int:
        return len(self.blocks)


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def _partition(ids: Iterable[str], pairs: Iterable[tuple[int, int]], n: int) -> tuple[frozenset[str], ...]:
    ids = list(ids)
    uf = _UnionFind(n)
    for a, b in pairs:
        uf.union(a, b)
    groups: dict[int, set[str]] = {}
    for i in range(n):
        groups.setdefault(uf.find(i), set()).add(ids[i])
    blocks = sorted((frozenset(g) for g in groups.values()), key=lambda b: min(b))
    return tuple(blocks)


def materialize_blocks(scheme: Scheme, index: DatasetIndex) -> BlockPartition:
    """Partition records into blocks: connected components of co-blocking.

    For linkage datasets each source is partitioned separately (ids keep
    their source: ``0:id`` and ``1:id``), since cross-source co-blocking
    does not merge records of one source by itself.
    """
    if index.dataset.mode == DEDUP:
        keys = index.scheme_pair_keys(scheme)
        left = (keys // np.uint64(index.stride)).astype(np.int64)
        right = (keys % np.uint64(index.stride)).astype(np.int64)
        src = index.dataset.sources[0]
        blocks = _partition((r.id for r in src), zip(left.tolist(), right.tolist()), len(src))
        return BlockPartition(blocks)
    all_blocks: list[frozenset[str]] = []
    for s, source in enumerate(index.dataset.sources):
        pairs: list[tuple[int, int]] = []
        for conjunct in scheme.disjuncts:
            group = index.conjunct_index(conjunct)[s]
            keys = within_group_pairs(group.members, group.offsets, len(source))
            left = (keys // np.uint64(len(source))).astype(np.int64)
            right = (keys % np.uint64(len(source))).astype(np.int64)
            pairs.extend(zip(left.tolist(), right.tolist()))
        all_blocks.extend(_partition((f"{s}:{r.id}" for r in source), pairs, len(source)))
    return BlockPartition(tuple(all_blocks))
