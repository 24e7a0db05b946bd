"""Blocking functions, predicates and the predicate universe.

A blocking predicate pairs one schema attribute with one blocking function.
Two records agree on a predicate when the function maps their attribute
values to a common code; double metaphone yields two codes per value and
agreement means any code is shared.

Values are normalized (trimmed, case folded) here, immediately before
encoding, so stored records stay verbatim copies of their source file.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence, Union

from blocksky.datamodel import Record
from blocksky.phonetic import double_metaphone, soundex

EXACT_MATCH = "exact_match"
SOUNDEX = "soundex"
DOUBLE_METAPHONE = "double_metaphone"
GET_SUBSTRING = "get_substring"

_KINDS = (EXACT_MATCH, SOUNDEX, DOUBLE_METAPHONE, GET_SUBSTRING)

Code = Union[str, tuple[str, str]]


def normalize_value(value: str) -> str:
    """Trim surrounding whitespace and fold case."""
    return value.strip().casefold()


@dataclass(frozen=True)
class BlockingFunction:
    """One of the four supported key functions.

    ``length`` only applies to ``get_substring`` and is the prefix length;
    a value shorter than the prefix keeps its whole normalized text.
    """

    kind: str
    length: int = 4

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown blocking function {self.kind!r}")
        if self.kind == GET_SUBSTRING and self.length < 1:
            raise ValueError("substring length must be positive")

    @property
    def name(self) -> str:
        if self.kind == GET_SUBSTRING:
            return f"{GET_SUBSTRING}({self.length})"
        return self.kind

    def codes(self, value: str) -> tuple[str, ...]:
        """All codes of a value, normalized first.

        Single-code functions return a 1-tuple; double metaphone returns
        (primary, alternate).
        """
        value = normalize_value(value)
        if self.kind == EXACT_MATCH:
            return (value,)
        if self.kind == SOUNDEX:
            return (soundex(value),)
        if self.kind == DOUBLE_METAPHONE:
            return double_metaphone(value)
        return (value[: self.length],)

    @property
    def n_codes(self) -> int:
        return 2 if self.kind == DOUBLE_METAPHONE else 1


def exact_match() -> BlockingFunction:
    return BlockingFunction(EXACT_MATCH)


def soundex_function() -> BlockingFunction:
    return BlockingFunction(SOUNDEX)


def double_metaphone_function() -> BlockingFunction:
    return BlockingFunction(DOUBLE_METAPHONE)


def get_substring(length: int = 4) -> BlockingFunction:
    return BlockingFunction(GET_SUBSTRING, length)


def default_functions() -> tuple[BlockingFunction, ...]:
    """The standard function set, in universe order."""
    return (exact_match(), soundex_function(), double_metaphone_function(),
            get_substring(4))


def encode(function: BlockingFunction, value: str) -> Code:
    """Code of one value: a string, or a code pair for double metaphone."""
    codes = function.codes(value)
    if function.kind == DOUBLE_METAPHONE:
        return (codes[0], codes[1])
    return codes[0]


@dataclass(frozen=True)
class BlockingPredicate:
    """An (attribute, function) pair, rendered as ``attribute.function``."""

    attribute: str
    function: BlockingFunction

    @property
    def text(self) -> str:
        return f"{self.attribute}.{self.function.name}"

    @staticmethod
    def from_text(text: str) -> "BlockingPredicate":
        attribute, sep, func = text.partition(".")
        if not sep or not attribute or not func:
            raise ValueError(f"malformed predicate {text!r}")
        if func.startswith(GET_SUBSTRING) and func != GET_SUBSTRING:
            inner = func[len(GET_SUBSTRING):]
            if not (inner.startswith("(") and inner.endswith(")")):
                raise ValueError(f"malformed predicate {text!r}")
            try:
                length = int(inner[1:-1])
            except ValueError:
                raise ValueError(f"malformed predicate {text!r}") from None
            return BlockingPredicate(attribute, get_substring(length))
        return BlockingPredicate(attribute, BlockingFunction(func))

    def codes(self, record: Record) -> tuple[str, ...]:
        return self.function.codes(record[self.attribute])


def predicate_agrees(predicate: BlockingPredicate, left: Record, right: Record) -> bool:
    """True when the two records share at least one code under the predicate."""
    left_codes = predicate.codes(left)
    right_codes = predicate.codes(right)
    return any(c in right_codes for c in left_codes)


class PredicateUniverse(Sequence):
    """An ordered, immutable collection of predicates.

    Order is schema-major: every function applied to the first attribute,
    then to the second, and so on, following the order the functions were
    given in. Schemes index into this ordering.
    """

    def __init__(self, predicates: Iterable[BlockingPredicate]):
        self.predicates: tuple[BlockingPredicate, ...] = tuple(predicates)
        self._by_text = {p.text: i for i, p in enumerate(self.predicates)}
        if len(self._by_text) != len(self.predicates):
            raise ValueError("duplicate predicates in universe")

    def __len__(self) -> int:
        return len(self.predicates)

    def __getitem__(self, index: int) -> BlockingPredicate:
        return self.predicates[index]

    def __iter__(self) -> Iterator[BlockingPredicate]:
        return iter(self.predicates)

    def __eq__(self, other) -> bool:
        return isinstance(other, PredicateUniverse) and self.predicates == other.predicates

    def __hash__(self) -> int:
        return hash(self.predicates)

    def index_of(self, text: str) -> int:
        """Position of a predicate given its text form."""
        try:
            return self._by_text[text]
        except KeyError:
            raise KeyError(f"predicate {text!r} not in universe") from None

    def __repr__(self) -> str:
        return f"PredicateUniverse({[p.text for p in self.predicates]})"


def predicate_universe(schema: Iterable[str],
                       functions: Iterable[BlockingFunction] | None = None) -> PredicateUniverse:
    """Cross product of schema attributes and blocking functions."""
    functions = tuple(functions) if functions is not None else default_functions()
    return PredicateUniverse(
        BlockingPredicate(attr, func) for attr in schema for func in functions)
