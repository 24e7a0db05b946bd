"""Label oracles: budgeted sources of match/non-match answers.

Every label request is appended to the session log, so any run can be
replayed deterministically later. A replay oracle answers from a recorded
log and refuses to continue when the requested pair diverges from it.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable

from blocksky.datamodel import GroundTruth, RecordPair
from blocksky.sampling import MATCH, NONMATCH


class OracleError(RuntimeError):
    """Base class for labelling errors."""


class BudgetExhaustedError(OracleError):
    """The label budget is spent; the learner must stop sampling."""


class ReplayDivergenceError(OracleError):
    """A replayed run requested a different pair than the recorded one."""


class SessionAbortedError(OracleError):
    """The labelling session was aborted by the user."""


@dataclass(frozen=True)
class LabelEntry:
    seq: int
    left: str
    right: str
    label: str


class OracleSession:
    """A budgeted label source with an append-only log.

    Subclasses implement `_answer`. `label` enforces the budget, records
    the answer and returns it.
    """

    def __init__(self, budget: int):
        if budget < 0:
            raise ValueError("budget must be non-negative")
        self.budget = budget
        self.log: list[LabelEntry] = []

    @property
    def used(self) -> int:
        return len(self.log)

    @property
    def remaining(self) -> int:
        return self.budget - self.used

    def _answer(self, pair: RecordPair) -> str:
        raise NotImplementedError

    def _record(self, entry: LabelEntry) -> None:
        self.log.append(entry)

    def label(self, pair: RecordPair) -> str:
        if self.remaining <= 0:
            raise BudgetExhaustedError(
                f"label budget of {self.budget} is exhausted")
        value = self._answer(pair)
        if value not in (MATCH, NONMATCH):
            raise OracleError(f"oracle produced invalid label {value!r}")
        self._record(LabelEntry(self.used + 1, pair.left, pair.right, value))
        return value

    def subsession(self, quota: int) -> "SlicedSession":
        """A view of this session limited to `quota` further labels."""
        return SlicedSession(self, quota)

    def log_lines(self) -> list[str]:
        lines = [f"# budget={self.budget}"]
        for e in self.log:
            lines.append(f"{e.seq}\t{e.left}\t{e.right}\t{e.label}")
        return lines

    def write_log(self, path: str | Path) -> None:
        Path(path).write_text("\n".join(self.log_lines()) + "\n", encoding="utf-8")


class SlicedSession(OracleSession):
    """A budget slice; labels are answered and logged by the parent."""

    def __init__(self, parent: OracleSession, quota: int):
        super().__init__(min(quota, parent.remaining))
        self.parent = parent

    @property
    def remaining(self) -> int:
        return min(self.budget - self.used, self.parent.remaining)

    def _answer(self, pair: RecordPair) -> str:
        return self.parent._answer(pair)

    def _record(self, entry: LabelEntry) -> None:
        self.parent._record(LabelEntry(self.parent.used + 1, entry.left,
                                       entry.right, entry.label))
        super()._record(entry)


class GroundTruthOracle(OracleSession):
    """Answers from a ground-truth match set."""

    def __init__(self, truth: GroundTruth, budget: int):
        super().__init__(budget)
        self.truth = truth

    def _answer(self, pair: RecordPair) -> str:
        return MATCH if pair in self.truth else NONMATCH


class CallbackOracle(OracleSession):
    """Answers by calling out, e.g. to an interactive labelling session.

    The callable may block until a human answers, and may raise
    `SessionAbortedError` to stop the learner.
    """

    def __init__(self, ask: Callable[[RecordPair], str], budget: int):
        super().__init__(budget)
        self._ask = ask

    def _answer(self, pair: RecordPair) -> str:
        return self._ask(pair)


class ReplayOracle(OracleSession):
    """Re-answers a recorded log, verifying the request sequence."""

    def __init__(self, entries: Iterable[LabelEntry], budget: int):
        super().__init__(budget)
        self.entries = list(entries)

    def _answer(self, pair: RecordPair) -> str:
        position = self.used
        if position >= len(self.entries):
            raise ReplayDivergenceError(
                f"log exhausted after {len(self.entries)} labels, "
                f"but {pair.left},{pair.right} was requested")
        expected = self.entries[position]
        if (expected.left, expected.right) != (pair.left, pair.right):
            raise ReplayDivergenceError(
                f"label {position + 1}: run requested {pair.left},{pair.right} "
                f"but the log recorded {expected.left},{expected.right}")
        return expected.label


def parse_log(lines: Iterable[str]) -> tuple[int, list[LabelEntry]]:
    """Parse log lines into (budget, entries)."""
    budget = None
    entries: list[LabelEntry] = []
    for line_no, line in enumerate(lines, start=1):
        line = line.rstrip("\n")
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("budget="):
                budget = int(body[len("budget="):])
            continue
        parts = line.split("\t")
        if len(parts) != 4:
            raise OracleError(f"log line {line_no}: expected 4 fields, got {len(parts)}")
        seq, left, right, label = parts
        if label not in (MATCH, NONMATCH):
            raise OracleError(f"log line {line_no}: invalid label {label!r}")
        entries.append(LabelEntry(int(seq), left, right, label))
    if budget is None:
        raise OracleError("log is missing its '# budget=N' header")
    for pos, entry in enumerate(entries, start=1):
        if entry.seq != pos:
            raise OracleError(f"log sequence broken at entry {pos}")
    return budget, entries


def replay(path: str | Path) -> ReplayOracle:
    """Load a label log and return an oracle that replays it."""
    with Path(path).open("r", encoding="utf-8") as handle:
        budget, entries = parse_log(handle)
    return ReplayOracle(entries, budget)
