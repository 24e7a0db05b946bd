"""Experiment orchestration: stability, label-cost sweeps, comparisons.

Learners are randomized, so a single run says little. The harness repeats
a run over consecutive seeds and reports how often each distinct outcome
appears (`run_cs`), walks the label budget upward until results stabilize
(`sweep_label_cost`), and scores a learned skyline against fixed baseline
schemes on the full ground truth (`compare_baselines`). Report payloads
are plain dicts with deterministic serialization, so identical runs
produce byte-identical files.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

from blocksky.learner import (
    LearnError,
    SchemePoint,
    SkylineResult,
    active_sky,
    asl,
    dominates,
    naive_sky,
    pro_sky,
)
from blocksky.metrics import DatasetIndex, confusion, fm, pc, pq, rr
from blocksky.datamodel import GroundTruth
from blocksky.oracle import GroundTruthOracle, OracleError
from blocksky.scheme import Scheme

NO_SCHEME = "no-scheme"

ALGORITHMS = ("asl", "naive_sky", "active_sky", "pro_sky")


class HarnessError(ValueError):
    """An experiment plan or harness argument is malformed."""


@dataclass(frozen=True)
class ExperimentPlan:
    """A repeatable experiment: one algorithm over a parameter grid.

    Exactly one of `epsilons` (asl), `deltas` (naive_sky / active_sky) or
    `ls` (pro_sky) must be non-empty, matching the algorithm. `budgets`
    holds the label budgets to try; `run_cs` works on a single-cell plan,
    `sweep_label_cost` walks the grid itself.
    """

    algorithm: str
    index: DatasetIndex
    truth: GroundTruth
    budgets: tuple[int, ...]
    epsilons: tuple[float, ...] = ()
    deltas: tuple[float, ...] = ()
    ls: tuple[int, ...] = ()
    k: int | None = None
    repetitions: int = 10
    base_seed: int = 1
    sampler: str = "active"

    def __post_init__(self) -> None:
        if self.algorithm not in ALGORITHMS:
            raise HarnessError(f"unknown algorithm {self.algorithm!r}")
        if self.repetitions < 1:
            raise HarnessError("repetitions must be at least 1")
        if not self.budgets:
            raise HarnessError("budget grid must not be empty")
        if any(b < 0 for b in self.budgets):
            raise HarnessError("budgets must be non-negative")
        if self.sampler not in ("active", "random"):
            raise HarnessError(f"unknown sampler {self.sampler!r}")
        if self.algorithm == "pro_sky" and self.sampler != "active":
            raise HarnessError("pro_sky always samples actively")
        applicable = {"asl": "epsilons", "pro_sky": "ls"}.get(
            self.algorithm, "deltas")
        if not self.param_grid:
            raise HarnessError(
                f"{self.algorithm} needs a non-empty {applicable} grid")
        for field in ("epsilons", "deltas", "ls"):
            if field != applicable and getattr(self, field):
                raise HarnessError(
                    f"{field} grid does not apply to {self.algorithm}")

    @property
    def param_name(self) -> str:
        if self.algorithm == "asl":
            return "epsilon"
        if self.algorithm == "pro_sky":
            return "l"
        return "delta"

    @property
    def param_grid(self) -> tuple:
        if self.algorithm == "asl":
            return self.epsilons
        if self.algorithm == "pro_sky":
            return self.ls
        return self.deltas

    def cell(self, param, budget: int) -> "ExperimentPlan":
        """A copy narrowed to a single (parameter, budget) combination."""
        updates: dict = {"budgets": (budget,)}
        if self.algorithm == "asl":
            updates["epsilons"] = (param,)
        elif self.algorithm == "pro_sky":
            updates["ls"] = (param,)
        else:
            updates["deltas"] = (param,)
        return dataclasses.replace(self, **updates)


@dataclass(frozen=True)
class RunOutcome:
    """One seeded run, reduced to its canonical identity."""

    identity: str
    labels_used: int
    seed: int
    error: str | None = None


def _default_k(budget: int, n_predicates: int) -> int:
    # same spend-rate heuristic naive_sky uses for its slices
    return max(1, budget // (3 * n_predicates))


def run_algorithm(index: DatasetIndex, oracle, *, algorithm: str, seed: int,
                  epsilon: float | None = None, delta: float | None = None,
                  l: int | None = None, k: int | None = None,
                  sampler: str = "active", progress: Callable | None = None):
    """One learner run over an arbitrary oracle session.

    Returns an `AslResult` for "asl" and a `SkylineResult` otherwise.
    The label service runs this over an interactive oracle; the harness
    over a ground-truth one.
    """
    if algorithm == "asl":
        if epsilon is None:
            raise HarnessError("asl needs an epsilon")
        chosen_k = k if k is not None else _default_k(oracle.budget,
                                                      len(index.universe))
        return asl(index, oracle, epsilon=epsilon, k=chosen_k, seed=seed,
                   sampler=sampler, progress=progress)
    if algorithm == "pro_sky":
        if l is None:
            raise HarnessError("pro_sky needs a conjunction cap l")
        return pro_sky(index, oracle, l=l, seed=seed, k=k, progress=progress)
    if algorithm in ("naive_sky", "active_sky"):
        if delta is None:
            raise HarnessError(f"{algorithm} needs a delta")
        fn = naive_sky if algorithm == "naive_sky" else active_sky
        return fn(index, oracle, delta=delta, seed=seed, k=k, sampler=sampler,
                  progress=progress)
    raise HarnessError(f"unknown algorithm {algorithm!r}")


def result_identity(result) -> str:
    """Canonical text of a run's outcome, for grouping across seeds."""
    if hasattr(result, "points"):
        text = " | ".join(p.scheme.text for p in result.points)
    else:
        text = result.scheme.text
    return text or NO_SCHEME


def run_once(plan: ExperimentPlan, seed: int) -> RunOutcome:
    """Run the plan's algorithm once; errors become `no-scheme` outcomes."""
    if len(plan.param_grid) != 1 or len(plan.budgets) != 1:
        raise HarnessError("run_once needs a single-cell plan; use plan.cell()")
    param = plan.param_grid[0]
    budget = plan.budgets[0]
    oracle = GroundTruthOracle(plan.truth, budget)
    try:
        result = run_algorithm(plan.index, oracle, algorithm=plan.algorithm,
                               seed=seed, k=plan.k, sampler=plan.sampler,
                               **{plan.param_name: param})
        return RunOutcome(identity=result_identity(result),
                          labels_used=result.labels_used, seed=seed)
    except (LearnError, OracleError) as exc:
        return RunOutcome(identity=NO_SCHEME, labels_used=oracle.used,
                          seed=seed, error=str(exc))


@dataclass(frozen=True)
class CsOutcome:
    """One distinct result with its constraint-satisfaction share."""

    identity: str
    count: int
    cs: float


@dataclass(frozen=True)
class CsReport:
    """Outcome frequencies over `repetitions` seeded runs of one cell."""

    algorithm: str
    param_name: str
    param: float | int
    budget: int
    repetitions: int
    base_seed: int
    outcomes: tuple[CsOutcome, ...]
    labels_used: tuple[int, ...]

    @property
    def max_cs(self) -> float:
        return self.outcomes[0].cs

    @property
    def best_identity(self) -> str:
        return self.outcomes[0].identity

    @property
    def stable(self) -> bool:
        """Most common outcome in at least 90% of runs."""
        return self.max_cs >= 0.9


def run_cs(plan: ExperimentPlan) -> CsReport:
    """Repeat one plan cell over consecutive seeds and group the outcomes.

    Seeds are `base_seed .. base_seed + repetitions - 1`. Each distinct
    canonical outcome (scheme text for asl, joined skyline text otherwise,
    `no-scheme` for failures) gets CS = count / repetitions.
    """
    if len(plan.param_grid) != 1 or len(plan.budgets) != 1:
        raise HarnessError("run_cs needs a single-cell plan; use plan.cell()")
    counts: dict[str, int] = {}
    labels: list[int] = []
    for seed in range(plan.base_seed, plan.base_seed + plan.repetitions):
        outcome = run_once(plan, seed)
        counts[outcome.identity] = counts.get(outcome.identity, 0) + 1
        labels.append(outcome.labels_used)
    total = sum(counts.values())
    assert total == plan.repetitions
    outcomes = tuple(
        CsOutcome(identity=ident, count=n, cs=n / plan.repetitions)
        for ident, n in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0])))
    return CsReport(algorithm=plan.algorithm, param_name=plan.param_name,
                    param=plan.param_grid[0], budget=plan.budgets[0],
                    repetitions=plan.repetitions, base_seed=plan.base_seed,
                    outcomes=outcomes, labels_used=tuple(labels))


@dataclass(frozen=True)
class SweepRow:
    """First stable budget for one parameter value (None = never)."""

    param: float | int
    budget: int | None
    cs: float

    @property
    def label(self) -> str:
        return "cap+" if self.budget is None else str(self.budget)


@dataclass(frozen=True)
class SweepReport:
    algorithm: str
    param_name: str
    target_cs: float
    step: int
    cap: int
    rows: tuple[SweepRow, ...]


def sweep_label_cost(plan: ExperimentPlan, target_cs: float, *,
                     step: int = 50, cap: int = 10_000,
                     require_identity: str | None = None) -> SweepReport:
    """Smallest budget whose max-CS reaches `target_cs`, per parameter.

    Budgets walk up from `plan.budgets[0]` in `step` increments; a plan
    with an explicit multi-entry budget grid walks exactly that ladder
    instead. Parameters that never stabilize within `cap` report a None
    budget (rendered "cap+"), carrying the CS observed at the last budget
    tried.

    A budget qualifies only when the modal outcome is an actual scheme:
    seeds that agree on `no-scheme` agree on a failure, not on a learned
    output, so such rungs never stop the walk. Passing `require_identity`
    narrows that further to the cost of stably producing one particular
    output, e.g. the skyline the learner converges to when labels are
    plentiful; rungs that stabilize on anything else keep walking.
    """
    if not 0.0 < target_cs <= 1.0:
        raise HarnessError("target_cs must be within (0, 1]")
    if step < 1:
        raise HarnessError("step must be positive")
    if len(plan.budgets) > 1:
        ladder = list(plan.budgets)
        if sorted(ladder) != ladder:
            raise HarnessError("explicit budget ladder must be increasing")
    else:
        ladder = list(range(plan.budgets[0], cap + 1, step))
    rows = []
    for param in plan.param_grid:
        found: int | None = None
        last_cs = 0.0
        for budget in ladder:
            if budget > cap:
                break
            report = run_cs(plan.cell(param, budget))
            last_cs = report.max_cs
            if report.max_cs < target_cs or report.best_identity == NO_SCHEME:
                continue
            if require_identity is not None \
                    and report.best_identity != require_identity:
                continue
            found = budget
            break
        rows.append(SweepRow(param=param, budget=found, cs=last_cs))
    return SweepReport(algorithm=plan.algorithm, param_name=plan.param_name,
                       target_cs=target_cs, step=step, cap=cap,
                       rows=tuple(rows))


@dataclass(frozen=True)
class MeasureRow:
    """One scheme scored on the full ground truth."""

    scheme: str
    pc: float
    pq: float
    rr: float
    fm: float


@dataclass(frozen=True)
class BaselineEntry:
    """A preset baseline next to the skyline's answer at its completeness."""

    name: str
    measures: MeasureRow
    flag: str  # "dominated", "contained" or ""
    response: MeasureRow | None  # skyline member selected at eps = preset pc


@dataclass(frozen=True)
class ComparisonReport:
    presets: tuple[BaselineEntry, ...]
    skyline: tuple[MeasureRow, ...]
    best_fm: MeasureRow | None


def _measure(scheme: Scheme, index: DatasetIndex,
             truth: GroundTruth) -> MeasureRow:
    counts = confusion(scheme, index, truth)
    pc_value = pc(counts)
    pq_value = pq(counts)
    return MeasureRow(scheme=scheme.text, pc=pc_value, pq=pq_value,
                      rr=rr(counts), fm=fm(pc_value, pq_value))


def compare_baselines(index: DatasetIndex, truth: GroundTruth,
                      skyline: SkylineResult | Sequence[Scheme],
                      presets: Sequence[tuple[str, Scheme]],
                      ) -> ComparisonReport:
    """Score preset schemes against a learned skyline on full ground truth.

    Every scheme (presets and skyline members alike) is re-measured
    exactly. A preset is flagged "dominated" when some member beats it in
    both dimensions, "contained" when a member ties it in both. Each
    preset also gets the skyline's own answer at a completeness threshold
    equal to the preset's pc: the member with maximal pq among those with
    pc >= threshold, the same rule asl uses for its final pick.
    """
    if isinstance(skyline, SkylineResult):
        schemes = [p.scheme for p in skyline.points]
    else:
        schemes = list(skyline)
    members = [(s, _measure(s, index, truth)) for s in schemes]
    member_points = [SchemePoint(scheme=s, pc=m.pc, pq=m.pq, source="exact")
                     for s, m in members]
    entries = []
    for name, scheme in presets:
        row = _measure(scheme, index, truth)
        point = SchemePoint(scheme=scheme, pc=row.pc, pq=row.pq,
                            source="exact")
        flag = ""
        if any(dominates(mp, point) for mp in member_points):
            flag = "dominated"
        elif any(mp.pc == point.pc and mp.pq == point.pq
                 for mp in member_points):
            flag = "contained"
        response = _select_at(members, row.pc)
        entries.append(BaselineEntry(name=name, measures=row, flag=flag,
                                     response=response))
    best = None
    best_scheme = None
    for scheme, row in members:
        if best is None or row.fm > best.fm or (
                row.fm == best.fm
                and scheme.sort_key() < best_scheme.sort_key()):
            best, best_scheme = row, scheme
    return ComparisonReport(presets=tuple(entries),
                            skyline=tuple(m for _, m in members),
                            best_fm=best)


def _select_at(members: Sequence[tuple[Scheme, MeasureRow]],
               epsilon: float) -> MeasureRow | None:
    """asl's final pick applied to exact measures: max pq with pc >= eps."""
    best: MeasureRow | None = None
    best_scheme: Scheme | None = None
    for scheme, row in members:
        if row.pc < epsilon:
            continue
        if best is None or (row.pq, row.pc) > (best.pq, best.pc) or (
                (row.pq, row.pc) == (best.pq, best.pc)
                and scheme.sort_key() < best_scheme.sort_key()):
            best, best_scheme = row, scheme
    return best


def skyline_payload(result: SkylineResult, index: DatasetIndex | None = None,
                    truth: GroundTruth | None = None) -> dict:
    """JSON-ready report of a skyline run.

    Includes exact coordinates, reduction ratio and f-measure per point
    when the index and truth are available; otherwise the empirical
    coordinates stand alone.
    """
    points = []
    for p in result.points:
        entry: dict = {"scheme": p.scheme.text,
                       "pc_empirical": p.pc, "pq_empirical": p.pq}
        if index is not None and truth is not None:
            row = _measure(p.scheme, index, truth)
            entry.update({"pc_exact": row.pc, "pq_exact": row.pq,
                          "rr": row.rr, "fm": row.fm})
        points.append(entry)
    return {"points": points, "labels_used": result.labels_used,
            "asl_invocations": result.asl_invocations,
            "candidates_evaluated": result.candidates_evaluated,
            "trace": result.trace}


def asl_payload(result, index: DatasetIndex | None = None,
                truth: GroundTruth | None = None) -> dict:
    """JSON-ready report of a single-threshold `asl` run."""
    entry: dict = {"scheme": result.scheme.text,
                   "pc_empirical": result.point.pc,
                   "pq_empirical": result.point.pq}
    if index is not None and truth is not None:
        row = _measure(result.scheme, index, truth)
        entry.update({"pc_exact": row.pc, "pq_exact": row.pq,
                      "rr": row.rr, "fm": row.fm})
    return {"scheme": entry, "labels_used": result.labels_used,
            "rounds": result.rounds, "used_fallback": result.used_fallback,
            "trace": result.trace}


def cs_payload(report: CsReport) -> dict:
    return {"algorithm": report.algorithm,
            report.param_name: report.param,
            "budget": report.budget,
            "repetitions": report.repetitions,
            "base_seed": report.base_seed,
            "max_cs": report.max_cs,
            "stable": report.stable,
            "labels_used": list(report.labels_used),
            "outcomes": [{"identity": o.identity, "count": o.count,
                          "cs": o.cs} for o in report.outcomes]}


def sweep_payload(report: SweepReport) -> dict:
    return {"algorithm": report.algorithm,
            "param_name": report.param_name,
            "target_cs": report.target_cs,
            "step": report.step,
            "cap": report.cap,
            "rows": [{"param": r.param, "budget": r.label, "cs": r.cs}
                     for r in report.rows]}


def comparison_payload(report: ComparisonReport) -> dict:
    def row(m: MeasureRow) -> dict:
        return {"scheme": m.scheme, "pc": m.pc, "pq": m.pq,
                "rr": m.rr, "fm": m.fm}

    return {"presets": [{"name": e.name, "flag": e.flag,
                         "measures": row(e.measures),
                         "response": row(e.response) if e.response else None}
                        for e in report.presets],
            "skyline": [row(m) for m in report.skyline],
            "best_fm": row(report.best_fm) if report.best_fm else None}


def write_report(path: str | Path, payload: dict) -> None:
    """Serialize a payload deterministically (sorted keys, stable floats)."""
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    Path(path).write_text(text, encoding="utf-8")


def sweep_csv(report: SweepReport) -> str:
    """Budget-vs-stability table as CSV, for plotting elsewhere."""
    lines = [f"{report.param_name},budget,cs"]
    for r in report.rows:
        lines.append(f"{r.param},{r.label},{r.cs}")
    return "\n".join(lines) + "\n"
