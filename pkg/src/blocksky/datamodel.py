"""Records, datasets and ground truth for pairwise entity resolution.

A dataset is either a single record collection whose records are compared
against each other (deduplication) or two collections compared across
sources (record linkage).  Record pairs are always held in canonical order
so that a pair compares and hashes identically no matter how it was built.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

DEDUP = "dedup"
LINKAGE = "linkage"


class IngestError(ValueError):
    """Raised when a dataset or ground-truth file cannot be loaded."""


@dataclass(frozen=True)
class Record:
    """A single record: an identifier plus attribute values.

    Values are stored exactly as read from the source file; whitespace
    trimming and case folding happen later, when a blocking function
    encodes a value.
    """

    id: str
    values: tuple[str, ...]
    schema: tuple[str, ...] = field(repr=False, compare=False)

    def __getitem__(self, attribute: str) -> str:
        try:
            return self.values[self.schema.index(attribute)]
        except ValueError:
            raise KeyError(attribute) from None

    def as_dict(self) -> dict[str, str]:
        return dict(zip(self.schema, self.values))


@dataclass(frozen=True)
class RecordPair:
    """An unordered comparable pair of record identifiers.

    For deduplication the two ids come from the same collection and are
    stored in lexicographic order.  For linkage `left` always belongs to
    the first source and `right` to the second, so no reordering applies.
    """

    left: str
    right: str

    @staticmethod
    def canonical(a: str, b: str, mode: str = DEDUP) -> "RecordPair":
        if mode == DEDUP:
            if a == b:
                raise ValueError(f"self-pair {a!r} is not comparable")
            if b < a:
                a, b = b, a
        return RecordPair(a, b)


class Dataset:
    """An immutable record collection (or pair of collections).

    Parameters
    ----------
    schema:
        Attribute names, excluding the id column, in file order.
    mode:
        ``"dedup"`` for one source, ``"linkage"`` for two.
    sources:
        One or two tuples of records.  Ids must be unique per source.
    """

    def __init__(self, schema: Iterable[str], mode: str,
                 sources: Iterable[tuple[Record, ...]]):
        self.schema = tuple(schema)
        self.mode = mode
        self.sources = tuple(tuple(src) for src in sources)
        if mode not in (DEDUP, LINKAGE):
            raise ValueError(f"unknown mode {mode!r}")
        if mode == DEDUP and len(self.sources) != 1:
            raise ValueError("dedup mode takes exactly one source")
        if mode == LINKAGE and len(self.sources) != 2:
            raise ValueError("linkage mode takes exactly two sources")
        self._by_id: tuple[dict[str, int], ...] = tuple(
            {rec.id: i for i, rec in enumerate(src)} for src in self.sources)
        for src, index in zip(self.sources, self._by_id):
            if len(index) != len(src):
                seen: set[str] = set()
                for rec in src:
                    if rec.id in seen:
                        raise IngestError(f"duplicate record id {rec.id!r}")
                    seen.add(rec.id)

    @property
    def records(self) -> tuple[Record, ...]:
        """All records of a dedup dataset."""
        if self.mode != DEDUP:
            raise ValueError("records is only defined for dedup datasets")
        return self.sources[0]

    def source_sizes(self) -> tuple[int, ...]:
        return tuple(len(src) for src in self.sources)

    @property
    def total_pairs(self) -> int:
        """Number of comparable record pairs."""
        if self.mode == DEDUP:
            n = len(self.sources[0])
            return n * (n - 1) // 2
        n1, n2 = (len(src) for src in self.sources)
        return n1 * n2

    def has_id(self, rid: str) -> bool:
        return any(rid in index for index in self._by_id)

    def locate(self, rid: str) -> tuple[int, int]:
        """Return (source index, position) of a record id."""
        for s, index in enumerate(self._by_id):
            pos = index.get(rid)
            if pos is not None:
                return s, pos
        raise KeyError(rid)

    def position(self, rid: str, source: int) -> int:
        """Index of a record id inside one source."""
        return self._by_id[source][rid]

    def record(self, rid: str, source: int | None = None) -> Record:
        if source is not None:
            return self.sources[source][self._by_id[source][rid]]
        s, pos = self.locate(rid)
        return self.sources[s][pos]

    def pair_records(self, pair: RecordPair) -> tuple[Record, Record]:
        """Resolve a canonical pair to its two records."""
        if self.mode == DEDUP:
            return self.record(pair.left, 0), self.record(pair.right, 0)
        return self.record(pair.left, 0), self.record(pair.right, 1)

    def canonical_pair(self, a: str, b: str) -> RecordPair:
        """Build and validate a canonical pair of this dataset."""
        pair = RecordPair.canonical(a, b, self.mode)
        if self.mode == DEDUP:
            for rid in (pair.left, pair.right):
                if rid not in self._by_id[0]:
                    raise KeyError(rid)
        else:
            if pair.left not in self._by_id[0]:
                raise KeyError(pair.left)
            if pair.right not in self._by_id[1]:
                raise KeyError(pair.right)
        return pair

    def __len__(self) -> int:
        return sum(len(src) for src in self.sources)

    def __repr__(self) -> str:
        sizes = "+".join(str(len(src)) for src in self.sources)
        return f"Dataset(mode={self.mode!r}, records={sizes}, schema={list(self.schema)})"


class GroundTruth:
    """The set of true match pairs of a dataset."""

    def __init__(self, matches: Iterable[RecordPair]):
        self.matches: frozenset[RecordPair] = frozenset(matches)

    def __contains__(self, pair: RecordPair) -> bool:
        return pair in self.matches

    def __len__(self) -> int:
        return len(self.matches)

    def __iter__(self) -> Iterator[RecordPair]:
        return iter(self.matches)


@dataclass(frozen=True)
class IngestConfig:
    """How to read delimited record and ground-truth files.

    ``other_path`` names the second source file for linkage datasets.
    Ground-truth files carry no header by default; set
    ``truth_has_header`` when the first line is a column header.
    """

    mode: str = DEDUP
    delimiter: str = ","
    id_column: str = "id"
    encoding: str = "utf-8"
    other_path: str | None = None
    truth_has_header: bool = False


def _read_source(path: str | Path, config: IngestConfig) -> tuple[tuple[str, ...], tuple[Record, ...]]:
    path = Path(path)
    try:
        handle = path.open("r", encoding=config.encoding, newline="")
    except OSError as exc:
        raise IngestError(f"cannot open {path}: {exc}") from exc
    with handle:
        reader = csv.reader(handle, delimiter=config.delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise IngestError(f"{path}: empty file") from None
        if config.id_column not in header:
            raise IngestError(
                f"{path}: id column {config.id_column!r} missing from header {header}")
        id_pos = header.index(config.id_column)
        schema = tuple(name for i, name in enumerate(header) if i != id_pos)
        records = []
        seen: set[str] = set()
        for row_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise IngestError(
                    f"{path}: row {row_no} has {len(row)} fields, expected {len(header)}")
            rid = row[id_pos]
            if rid in seen:
                raise IngestError(f"{path}: row {row_no}: duplicate record id {rid!r}")
            seen.add(rid)
            values = tuple(v for i, v in enumerate(row) if i != id_pos)
            records.append(Record(id=rid, values=values, schema=schema))
    return schema, tuple(records)


def load_dataset(path: str | Path, config: IngestConfig | None = None) -> Dataset:
    """Load a dataset from one delimited file (two for linkage).

    The file must carry a header line naming every column; the id column
    is identified by ``config.id_column`` and the remaining columns form
    the schema.  Loading is lossless: values are kept verbatim.
    """
    config = config or IngestConfig()
    schema, records = _read_source(path, config)
    if config.mode == LINKAGE:
        if not config.other_path:
            raise IngestError("linkage mode needs config.other_path for the second source")
        schema_b, records_b = _read_source(config.other_path, config)
        if schema_b != schema:
            raise IngestError(
                f"linkage sources disagree on schema: {list(schema)} vs {list(schema_b)}")
        return Dataset(schema, LINKAGE, (records, records_b))
    return Dataset(schema, DEDUP, (records,))


def save_dataset(dataset: Dataset, path: str | Path,
                 config: IngestConfig | None = None, source: int = 0) -> None:
    """Write one source of a dataset back to a delimited file.

    Together with `load_dataset` this round-trips every record value.
    """
    config = config or IngestConfig()
    with Path(path).open("w", encoding=config.encoding, newline="") as handle:
        writer = csv.writer(handle, delimiter=config.delimiter)
        writer.writerow((config.id_column,) + dataset.schema)
        for rec in dataset.sources[source]:
            writer.writerow((rec.id,) + rec.values)


def load_ground_truth(path: str | Path, dataset: Dataset,
                      config: IngestConfig | None = None) -> GroundTruth:
    """Load true match pairs: one delimited line per pair of record ids.

    Every id must exist in the dataset; for linkage the first column
    refers to the first source.  Self-pairs are rejected.
    """
    config = config or IngestConfig()
    path = Path(path)
    matches: set[RecordPair] = set()
    try:
        handle = path.open("r", encoding=config.encoding, newline="")
    except OSError as exc:
        raise IngestError(f"cannot open {path}: {exc}") from exc
    with handle:
        reader = csv.reader(handle, delimiter=config.delimiter)
        start = 1
        if config.truth_has_header:
            next(reader, None)
            start = 2
        for row_no, row in enumerate(reader, start=start):
            if not row:
                continue
            if len(row) < 2:
                raise IngestError(f"{path}: row {row_no}: expected two id columns")
            a, b = row[0], row[1]
            try:
                pair = dataset.canonical_pair(a, b)
            except ValueError:
                raise IngestError(f"{path}: row {row_no}: self-pair {a!r}") from None
            except KeyError as exc:
                raise IngestError(
                    f"{path}: row {row_no}: unknown record id {exc.args[0]!r}") from None
            matches.add(pair)
    return GroundTruth(matches)
