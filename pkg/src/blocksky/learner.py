"""Scheme selection and skyline learning.

`asl` learns one scheme for a completeness threshold by alternating
balanced sampling with greedy DNF growth: when some candidate reaches the
threshold, candidates are specialized by conjunction (raising quality);
otherwise they are generalized by disjunction (raising completeness).

Three algorithms stack on top of it to learn the whole scheme skyline:

* `naive_sky`: run `asl` once per threshold step.
* `active_sky`: like `naive_sky`, but jump the next threshold past the
  completeness the last scheme already achieved.
* `pro_sky`: learn the skyline progressively in one run, extending the
  current empirical skyline by one predicate at a time and keeping only
  extensions that land on or beyond it.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from blocksky.metrics import (
    DatasetIndex,
    NotEvaluableError,
    empirical_pc,
    empirical_pq,
)
from blocksky.oracle import BudgetExhaustedError, OracleSession
from blocksky.sampling import (
    FeatureVector,
    SamplerState,
    TrainingSet,
    active_round,
    random_sample,
)
from blocksky.scheme import Scheme, conjoin, disjoin


class LearnError(RuntimeError):
    """The learner could not produce a scheme (e.g. no match labels)."""


class Region(enum.Enum):
    """Position of a candidate point relative to an anchor point."""

    DOMINATED = "dominated_space"
    SKYLINE = "skyline_space"
    DOMINATING = "dominating_space"
    EQUAL = "equal"


@dataclass(frozen=True)
class SchemePoint:
    """A scheme with its (pc, pq) coordinates.

    ``source`` records how the coordinates were measured ("empirical" from
    a training set, "exact" from full ground truth); points of different
    sources never take part in the same dominance comparison.
    """

    scheme: Scheme
    pc: float
    pq: float
    source: str = "empirical"


def dominates(a: SchemePoint, b: SchemePoint) -> bool:
    """Max-max dominance: at least as good in both, better in one."""
    if a.source != b.source:
        raise ValueError(f"cannot compare {a.source} with {b.source} coordinates")
    return (a.pc >= b.pc and a.pq >= b.pq
            and (a.pc > b.pc or a.pq > b.pq))


def classify_region(candidate: SchemePoint, anchor: SchemePoint) -> Region:
    """Which region of the plane, relative to `anchor`, the candidate hits."""
    if candidate.pc == anchor.pc and candidate.pq == anchor.pq:
        return Region.EQUAL
    if dominates(candidate, anchor):
        return Region.DOMINATING
    if dominates(anchor, candidate):
        return Region.DOMINATED
    return Region.SKYLINE


def skyline_of(points: Iterable[SchemePoint]) -> tuple[SchemePoint, ...]:
    """All non-dominated points, one scheme per coordinate.

    Coordinate ties collapse to the smallest canonical scheme. The result
    is sorted by ascending pc (so descending pq), deterministically.
    """
    pts = list(points)
    if not pts:
        return ()
    source = pts[0].source
    if any(p.source != source for p in pts):
        raise ValueError("mixed coordinate sources in one skyline")
    pc = np.array([p.pc for p in pts])
    pq = np.array([p.pq for p in pts])
    order = np.lexsort((-pq, -pc))  # pc desc, then pq desc
    best_pq_above = -np.inf  # max pq among strictly higher pc
    survivors: dict[tuple[float, float], SchemePoint] = {}
    pos = 0
    n = len(pts)
    while pos < n:
        stop = pos
        head = order[pos]
        while stop < n and pc[order[stop]] == pc[head]:
            stop += 1
        group_best_pq = pq[order[pos]]  # first of group has max pq
        if group_best_pq > best_pq_above:
            for idx in order[pos:stop]:
                if pq[idx] != group_best_pq:
                    break
                point = pts[idx]
                coords = (point.pc, point.pq)
                kept = survivors.get(coords)
                if kept is None or point.scheme.sort_key() < kept.scheme.sort_key():
                    survivors[coords] = point
        best_pq_above = max(best_pq_above, group_best_pq)
        pos = stop
    return tuple(sorted(survivors.values(),
                        key=lambda p: (p.pc, p.pq, p.scheme.sort_key())))


def _evaluate(schemes: Sequence[Scheme], training: TrainingSet,
              source: str = "empirical") -> list[SchemePoint]:
    return [SchemePoint(s, empirical_pc(s, training), empirical_pq(s, training),
                        source) for s in schemes]


def find_optimal_scheme(schemes: Sequence[Scheme], training: TrainingSet,
                        epsilon: float) -> SchemePoint | None:
    """Highest-quality scheme whose empirical completeness reaches epsilon.

    Ties break toward higher completeness, then the smaller canonical
    scheme, making the optimum unique for a fixed training set.
    """
    best: SchemePoint | None = None
    for point in _evaluate(schemes, training):
        if point.pc < epsilon:
            continue
        if best is None:
            best = point
            continue
        key = (point.pq, point.pc)
        best_key = (best.pq, best.pc)
        if key > best_key or (key == best_key
                              and point.scheme.sort_key() < best.scheme.sort_key()):
            best = point
    return best


def find_approximate_scheme(schemes: Sequence[Scheme], training: TrainingSet,
                            epsilon: float = 0.0) -> SchemePoint:
    """Fallback when nothing is feasible: maximize completeness instead.

    `epsilon` is accepted for interface symmetry; the choice does not
    depend on it.
    """
    best: SchemePoint | None = None
    for point in _evaluate(schemes, training):
        if best is None:
            best = point
            continue
        key = (point.pc, point.pq)
        best_key = (best.pc, best.pq)
        if key > best_key or (key == best_key
                              and point.scheme.sort_key() < best.scheme.sort_key()):
            best = point
    if best is None:
        raise LearnError("no candidate schemes to pick from")
    return best


@dataclass
class AslResult:
    """Outcome of one `asl` run."""

    scheme: Scheme
    point: SchemePoint
    training: TrainingSet
    labels_used: int
    rounds: int
    used_fallback: bool
    trace: dict = field(default_factory=dict)


def _label_all(vectors: Sequence[FeatureVector], oracle: OracleSession,
               training: TrainingSet) -> None:
    for vector in vectors:
        try:
            label = oracle.label(vector.pair)
        except BudgetExhaustedError:
            break
        training.add(vector, label)


def singles(index: DatasetIndex) -> list[Scheme]:
    """One single-predicate scheme per universe entry, in universe order."""
    return [Scheme.single(index.universe, i) for i in range(len(index.universe))]


Progress = Callable[[tuple[SchemePoint, ...]], None]


def asl(index: DatasetIndex, oracle: OracleSession, epsilon: float, k: int,
        seed: int, sampler: str = "active",
        progress: Progress | None = None) -> AslResult:
    """Active scheme learning for one completeness threshold.

    Draws a random seed sample, then rounds of balanced draws
    (`sampler="active"`) or uniform draws (`sampler="random"`) over the
    current candidate set; labels everything sampled so far; selects the
    best feasible candidate and specializes the set by conjunction, or
    generalizes by disjunction when nothing reaches the threshold. The
    last selected scheme is returned. Raises `LearnError` if the budget
    runs out before any scheme can be evaluated.
    """
    if sampler not in ("active", "random"):
        raise ValueError(f"unknown sampler {sampler!r}")
    if not 0.0 < epsilon <= 1.0:
        raise ValueError("epsilon must be within (0, 1]")
    zeta = oracle.remaining
    state = SamplerState(index, seed)
    candidates = singles(index)
    training = TrainingSet()
    sample: list[FeatureVector] = list(random_sample(state, min(k, zeta)))
    pending = list(sample)  # sampled but not yet labeled
    chosen: SchemePoint | None = None
    used_fallback = False
    rounds = 0
    trace_rounds: list[dict] = []
    # candidate sets seen since sampling last made progress; a repeat (or
    # too long a dry stretch) means further rounds cannot learn anything new
    dry_states: set[frozenset] = set()
    while len(sample) < zeta:
        rounds += 1
        room = zeta - len(sample)
        if sampler == "active":
            new = active_round(state, candidates, k, sample, limit=room)
        else:
            new = random_sample(state, min(k * len(candidates), room))
        sample.extend(new)
        pending.extend(new)
        _label_all(pending, oracle, training)
        pending = []
        try:
            point = find_optimal_scheme(candidates, training, epsilon)
            feasible = point is not None
            if not feasible:
                point = find_approximate_scheme(candidates, training)
            chosen = point
            used_fallback = not feasible
            trace_rounds.append({
                "round": rounds,
                "labels": oracle.used,
                "scheme": point.scheme.text,
                "pc": point.pc,
                "pq": point.pq,
                "feasible": feasible,
            })
            if progress is not None:
                progress((point,))
            if feasible:
                candidates = _combine(point.scheme, candidates, conjoin)
            else:
                candidates = _combine(point.scheme, candidates, disjoin)
        except NotEvaluableError:
            trace_rounds.append({"round": rounds, "labels": oracle.used,
                                 "scheme": None})
        if new:
            dry_states.clear()
        else:
            key = frozenset(candidates)
            if key in dry_states or len(dry_states) >= 50:
                break
            dry_states.add(key)
    if chosen is None:
        raise LearnError(
            f"budget spent without learning a scheme ({oracle.used} labels)")
    return AslResult(
        scheme=chosen.scheme,
        point=chosen,
        training=training,
        labels_used=oracle.used,
        rounds=rounds,
        used_fallback=used_fallback,
        trace={"algorithm": "asl", "epsilon": epsilon, "k": k,
               "sampler": sampler, "rounds": trace_rounds},
    )


def _combine(scheme: Scheme, partners: Sequence[Scheme], op) -> list[Scheme]:
    out: dict[Scheme, None] = {}
    for partner in partners:
        out.setdefault(op(scheme, partner))
    return list(out)


@dataclass
class SkylineResult:
    """Outcome of a skyline run: the skyline plus everything evaluated."""

    points: tuple[SchemePoint, ...]
    candidates: tuple[SchemePoint, ...]
    training: TrainingSet
    labels_used: int
    asl_invocations: int
    trace: dict = field(default_factory=dict)

    @property
    def candidates_evaluated(self) -> int:
        return len(self.candidates)


def _merge_training(parts: Iterable[TrainingSet]) -> tuple[TrainingSet, int]:
    merged = TrainingSet()
    conflicts = 0
    for part in parts:
        for vector in part.vectors():
            try:
                merged.add(vector, part.label_of(vector.key))
            except ValueError:
                conflicts += 1  # first label wins; the log keeps both answers
    return merged, conflicts


_EPS_TOL = 1e-9


def _threshold_count(delta: float) -> int:
    if not 0.0 < delta <= 1.0:
        raise ValueError("delta must be in (0, 1]")
    return int(1.0 / delta + _EPS_TOL)


def _slice_k(quota: int, n_predicates: int, k: int | None,
             rounds_estimate: int = 3) -> int:
    if k is not None:
        return k
    return max(1, quota // (rounds_estimate * n_predicates))


def naive_sky(index: DatasetIndex, oracle: OracleSession, delta: float,
              seed: int, k: int | None = None, sampler: str = "active",
              progress: Progress | None = None) -> SkylineResult:
    """Learn the skyline by running `asl` at every threshold step.

    The label budget is split evenly: each threshold slice may spend
    ``budget * delta`` labels.
    """
    steps = _threshold_count(delta)
    quota = max(1, int(oracle.budget * delta))
    per_scheme_k = _slice_k(quota, len(index.universe), k)
    slices = []
    results: list[AslResult] = []
    invocations = 0
    for i in range(1, steps + 1):
        epsilon = i * delta
        if oracle.remaining <= 0:
            slices.append({"epsilon": epsilon, "skipped": "budget exhausted"})
            continue
        sub = oracle.subsession(quota)
        invocations += 1
        try:
            result = asl(index, sub, epsilon, per_scheme_k, seed + i,
                         sampler=sampler)
        except LearnError as exc:
            slices.append({"epsilon": epsilon, "failed": str(exc)})
            continue
        results.append(result)
        slices.append({"epsilon": epsilon, "scheme": result.scheme.text,
                       "labels": result.labels_used})
        if progress is not None:
            progress(skyline_of(r.point for r in results))
    return _finish_skyline("naive_sky", index, oracle, results, invocations,
                           {"delta": delta, "k": per_scheme_k, "slices": slices})


def active_sky(index: DatasetIndex, oracle: OracleSession, delta: float,
               seed: int, k: int | None = None, sampler: str = "active",
               progress: Progress | None = None) -> SkylineResult:
    """Learn the skyline, skipping thresholds the last scheme already met.

    The next threshold is the completeness the last scheme achieved plus
    delta, so flat stretches of the skyline are crossed in one step and
    the walk ends once a scheme leaves no room above it. Slice budgets
    match naive_sky's; slice seeds follow the invocation count.
    """
    _threshold_count(delta)  # validates delta
    quota = max(1, int(oracle.budget * delta))
    per_scheme_k = _slice_k(quota, len(index.universe), k)
    slices = []
    results: list[AslResult] = []
    invocations = 0
    epsilon = delta
    while epsilon <= 1.0 + _EPS_TOL:
        epsilon = min(epsilon, 1.0)
        if oracle.remaining <= 0:
            slices.append({"epsilon": epsilon, "skipped": "budget exhausted"})
            break
        sub = oracle.subsession(quota)
        invocations += 1
        try:
            result = asl(index, sub, epsilon, per_scheme_k,
                         seed + invocations, sampler=sampler)
        except LearnError as exc:
            slices.append({"epsilon": epsilon, "failed": str(exc)})
            epsilon += delta
            continue
        results.append(result)
        slices.append({"epsilon": epsilon, "scheme": result.scheme.text,
                       "labels": result.labels_used, "pc": result.point.pc})
        if progress is not None:
            progress(skyline_of(r.point for r in results))
        # max() keeps the walk moving when the achieved completeness
        # lands below the threshold that produced it
        epsilon = max(result.point.pc, epsilon) + delta
    return _finish_skyline("active_sky", index, oracle, results, invocations,
                           {"delta": delta, "k": per_scheme_k, "slices": slices})


def _finish_skyline(algorithm: str, index: DatasetIndex, oracle: OracleSession,
                    results: list[AslResult], invocations: int,
                    trace: dict) -> SkylineResult:
    if not results:
        raise LearnError(f"{algorithm}: no threshold slice produced a scheme")
    merged, conflicts = _merge_training(r.training for r in results)
    pool: dict[Scheme, None] = {}
    for result in results:
        pool.setdefault(result.scheme)
    candidates = tuple(_evaluate(list(pool), merged))
    points = skyline_of(candidates)
    trace = dict(trace)
    trace.update({"algorithm": algorithm, "label_conflicts": conflicts,
                  "asl_invocations": invocations})
    return SkylineResult(points=points, candidates=candidates, training=merged,
                         labels_used=oracle.used, asl_invocations=invocations,
                         trace=trace)


def pro_sky(index: DatasetIndex, oracle: OracleSession, l: int, seed: int,
            k: int | None = None,
            progress: Progress | None = None) -> SkylineResult:
    """Learn the whole skyline progressively in a single run.

    Keeps a candidate pool (initially the single predicates), samples
    around the pool's current empirical skyline, and extends each skyline
    scheme by one predicate (conjunction and disjunction, capped at
    `l` predicates per conjunct). Extensions that dominate their parent
    replace it; extensions landing on the open side are kept; dominated
    ones are dropped.
    """
    if l < 1:
        raise ValueError("conjunction size cap l must be >= 1")
    universe_size = len(index.universe)
    if k is None:
        k = oracle.budget // (2 * l * universe_size)
        if k < 1:
            raise LearnError(
                f"budget {oracle.budget} too small for pro_sky with "
                f"{universe_size} predicates and l={l}")
    state = SamplerState(index, seed)
    pool: dict[Scheme, None] = {s: None for s in singles(index)}
    training = TrainingSet()
    sample: list[FeatureVector] = []
    rounds: list[dict] = []
    round_no = 0
    while oracle.remaining > 0:
        round_no += 1
        new = active_round(state, list(pool), k, sample, limit=oracle.remaining)
        _label_all(new, oracle, training)
        sample.extend(new)
        try:
            points = _evaluate(list(pool), training)
        except NotEvaluableError:
            if not new:
                break
            rounds.append({"round": round_no, "labels": oracle.used,
                           "note": "no match labels yet"})
            continue
        sky = skyline_of(points)
        if progress is not None:
            progress(sky)
        added, removed = _extend_skyline(sky, pool, training, index, l)
        rounds.append({"round": round_no, "labels": oracle.used,
                       "pool": len(pool), "skyline": len(sky),
                       "added": len(added), "removed": len(removed)})
        if not new and not added:
            break
    try:
        candidates = tuple(_evaluate(list(pool), training))
    except NotEvaluableError:
        raise LearnError("budget spent without finding a match label") from None
    points = skyline_of(candidates)
    return SkylineResult(points=points, candidates=candidates, training=training,
                         labels_used=oracle.used, asl_invocations=0,
                         trace={"algorithm": "pro_sky", "l": l, "k": k,
                                "rounds": rounds})


def _extend_skyline(sky: Sequence[SchemePoint], pool: dict[Scheme, None],
                    training: TrainingSet, index: DatasetIndex,
                    l: int) -> tuple[list[Scheme], list[Scheme]]:
    """Grow each skyline scheme by one predicate; classify against parent."""
    added: list[Scheme] = []
    removed: list[Scheme] = []
    for parent in sorted(sky, key=lambda p: (p.pc, p.pq, p.scheme.sort_key())):
        used = set(parent.scheme.predicates_used())
        for pred_idx in range(len(index.universe)):
            if pred_idx in used:
                continue
            single = Scheme.single(index.universe, pred_idx)
            for op in (conjoin, disjoin):
                combined = op(parent.scheme, single)
                if combined.ary > l or combined in pool:
                    continue
                point = SchemePoint(combined,
                                    empirical_pc(combined, training),
                                    empirical_pq(combined, training))
                region = classify_region(point, parent)
                if region is Region.DOMINATING:
                    pool.pop(parent.scheme, None)
                    if parent.scheme not in removed:
                        removed.append(parent.scheme)
                    pool.setdefault(combined)
                    added.append(combined)
                elif region is Region.SKYLINE:
                    pool.setdefault(combined)
                    added.append(combined)
                # dominated or equal extensions are discarded
    return added, removed
