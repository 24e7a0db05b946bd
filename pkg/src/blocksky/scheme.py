"""Blocking schemes: monotone DNF formulas over a predicate universe.

A scheme is a disjunction of conjunctions of predicates, without negation.
Schemes are kept in a canonical form so that syntactically different but
equivalent formulas compare equal:

* every conjunct is a sorted tuple of distinct predicate indices,
* no conjunct is a superset of another (absorption),
* conjuncts are sorted lexicographically.

For monotone formulas this canonical form is unique, so canonical equality
coincides with truth-table equivalence.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from blocksky.functions import PredicateUniverse


class SchemeError(ValueError):
    """Raised for malformed schemes or mixed-universe operations."""


def _canonicalize(disjuncts: Iterable[Iterable[int]], size: int) -> tuple[tuple[int, ...], ...]:
    conjuncts = []
    for conjunct in disjuncts:
        conj = tuple(sorted(set(conjunct)))
        if not conj:
            raise SchemeError("empty conjunct")
        for idx in conj:
            if not isinstance(idx, (int, np.integer)) or idx < 0 or idx >= size:
                raise SchemeError(f"predicate index {idx!r} outside universe of size {size}")
        conjuncts.append(tuple(int(i) for i in conj))
    if not conjuncts:
        raise SchemeError("scheme needs at least one conjunct")
    kept = []
    for conj in conjuncts:
        conj_set = set(conj)
        if any(set(other) < conj_set for other in conjuncts):
            continue
        if conj not in kept:
            kept.append(conj)
    return tuple(sorted(kept))


@dataclass(frozen=True)
class Scheme:
    """A canonical blocking scheme bound to a predicate universe."""

    universe: PredicateUniverse
    disjuncts: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "disjuncts",
                           _canonicalize(self.disjuncts, len(self.universe)))

    @staticmethod
    def single(universe: PredicateUniverse, index: int) -> "Scheme":
        """The scheme consisting of one predicate."""
        return Scheme(universe, ((index,),))

    @property
    def ary(self) -> int:
        """Number of distinct predicates the scheme mentions."""
        return len(self.predicates_used())

    def predicates_used(self) -> tuple[int, ...]:
        seen: set[int] = set()
        for conj in self.disjuncts:
            seen.update(conj)
        return tuple(sorted(seen))

    def covers(self, bits: Sequence[bool]) -> bool:
        """Whether a feature vector of predicate outcomes satisfies the scheme."""
        if len(bits) != len(self.universe):
            raise SchemeError(
                f"feature vector has {len(bits)} bits, universe has {len(self.universe)}")
        return any(all(bits[i] for i in conj) for conj in self.disjuncts)

    def covers_rows(self, bits: np.ndarray) -> np.ndarray:
        """Vectorized `covers` over an (n, |universe|) boolean matrix."""
        if bits.ndim != 2 or bits.shape[1] != len(self.universe):
            raise SchemeError("bit matrix does not match universe")
        out = np.zeros(len(bits), dtype=bool)
        for conj in self.disjuncts:
            out |= bits[:, conj].all(axis=1)
        return out

    def sort_key(self) -> tuple:
        """Deterministic total order; 'smaller' means simpler."""
        return (self.ary, len(self.disjuncts), self.disjuncts)

    @property
    def text(self) -> str:
        parts = []
        for conj in self.disjuncts:
            inner = " ∧ ".join(self.universe[i].text for i in conj)
            parts.append(f"({inner})")
        return " ∨ ".join(parts)

    def __repr__(self) -> str:
        return f"Scheme[{self.text}]"

    def _check_same_universe(self, other: "Scheme") -> None:
        if self.universe != other.universe:
            raise SchemeError("schemes belong to different predicate universes")

    def __and__(self, other: "Scheme") -> "Scheme":
        return conjoin(self, other)

    def __or__(self, other: "Scheme") -> "Scheme":
        return disjoin(self, other)


def conjoin(a: Scheme, b: Scheme) -> Scheme:
    """Conjunction of two schemes, distributed back into canonical DNF."""
    a._check_same_universe(b)
    crossed = [ca + cb for ca in a.disjuncts for cb in b.disjuncts]
    return Scheme(a.universe, tuple(crossed))


def disjoin(a: Scheme, b: Scheme) -> Scheme:
    """Disjunction of two schemes in canonical DNF."""
    a._check_same_universe(b)
    return Scheme(a.universe, a.disjuncts + b.disjuncts)


def parse_scheme(text: str, universe: PredicateUniverse) -> Scheme:
    """Parse the text rendering of a scheme back into a `Scheme`.

    Accepts the unicode connectives of `Scheme.text` as well as plain
    ``&`` and ``|``. Conjunct parentheses are optional.
    """
    if not text or not text.strip():
        raise SchemeError("empty scheme text")
    disjuncts = []
    for part in text.replace("|", "∨").split("∨"):
        part = part.strip()
        if part.startswith("(") and part.endswith(")"):
            part = part[1:-1]
        if not part.strip():
            raise SchemeError(f"empty disjunct in {text!r}")
        indices = []
        for atom in part.replace("&", "∧").split("∧"):
            atom = atom.strip()
            if not atom:
                raise SchemeError(f"empty predicate in {text!r}")
            try:
                indices.append(universe.index_of(atom))
            except KeyError as exc:
                raise SchemeError(str(exc)) from None
        disjuncts.append(tuple(indices))
    return Scheme(universe, tuple(disjuncts))
