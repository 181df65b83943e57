"""State spaces, states, and the metrics used by commutation checks.

Abstract spaces hold the values programs compute over; physical spaces hold
simulated device configurations. The two families never mix: verification
code crosses between them only through representation relations, so physical
values stay opaque to program-level code.

All types here are immutable and all operations are pure.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Union

from .errors import DeclarationError, MetricMismatch, NotEnumerable, OutOfDomain

#: Canonical state values: labels and bitstrings are str, integers int,
#: real vectors tuples of float, tuple-space values tuples of member values.
Value = Union[str, int, float, tuple]


class AbstractSpace:
    """Marker base for spaces of abstract (program-level) values."""


class PhysicalSpace:
    """Marker base for spaces of simulated device configurations."""


@dataclass(frozen=True)
class LabelSpace(AbstractSpace):
    """A finite set of named values, enumerated in declaration order."""

    id: str
    labels: tuple[str, ...]

    def __post_init__(self):
        _check_labels(self.id, self.labels)


@dataclass(frozen=True)
class BitSpace(AbstractSpace):
    """Bitstrings of a fixed width, written most significant bit first."""

    id: str
    width: int

    def __post_init__(self):
        if self.width < 1:
            raise DeclarationError(f"space {self.id!r}: bitstring width must be >= 1")


@dataclass(frozen=True)
class IntSpace(AbstractSpace):
    """Integers in the inclusive range [lo, hi]."""

    id: str
    lo: int
    hi: int

    def __post_init__(self):
        if self.lo > self.hi:
            raise DeclarationError(f"space {self.id!r}: lo must not exceed hi")


@dataclass(frozen=True)
class TupleSpace(AbstractSpace):
    """An ordered product of abstract component spaces."""

    id: str
    components: tuple[AbstractSpace, ...]

    def __post_init__(self):
        if not self.components:
            raise DeclarationError(f"space {self.id!r}: tuple space needs components")


@dataclass(frozen=True)
class PhysicalLabelSpace(PhysicalSpace):
    """A finite set of named device configurations."""

    id: str
    labels: tuple[str, ...]

    def __post_init__(self):
        _check_labels(self.id, self.labels)


@dataclass(frozen=True)
class RealVectorSpace(PhysicalSpace):
    """Real-valued device coordinates with inclusive per-coordinate bounds.

    Unbounded coordinates are rejected up front so that instantiation search
    stays decidable.
    """

    id: str
    bounds: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if not self.bounds:
            raise DeclarationError(f"space {self.id!r}: vector space needs a dimension")
        for i, (lo, hi) in enumerate(self.bounds):
            if not (lo <= hi):
                raise DeclarationError(
                    f"space {self.id!r}: coordinate {i} bounds must satisfy lo <= hi"
                )

    @property
    def dimension(self) -> int:
        return len(self.bounds)


@dataclass(frozen=True)
class PhysicalTupleSpace(PhysicalSpace):
    """An ordered product of physical component spaces."""

    id: str
    components: tuple[PhysicalSpace, ...]

    def __post_init__(self):
        if not self.components:
            raise DeclarationError(f"space {self.id!r}: tuple space needs components")


Space = Union[AbstractSpace, PhysicalSpace]


def _check_labels(space_id: str, labels: tuple[str, ...]) -> None:
    if not labels:
        raise DeclarationError(f"space {space_id!r}: label set must be non-empty")
    if len(set(labels)) != len(labels):
        raise DeclarationError(f"space {space_id!r}: duplicate labels")


def normalize_value(space: Space, value) -> Value:
    """Coerce ``value`` into canonical form for ``space`` or raise OutOfDomain."""
    if isinstance(space, (LabelSpace, PhysicalLabelSpace)):
        if isinstance(value, str) and value in space.labels:
            return value
    elif isinstance(space, BitSpace):
        if (
            isinstance(value, str)
            and len(value) == space.width
            and all(c in "01" for c in value)
        ):
            return value
    elif isinstance(space, IntSpace):
        if isinstance(value, int) and not isinstance(value, bool):
            if space.lo <= value <= space.hi:
                return value
    elif isinstance(space, RealVectorSpace):
        if isinstance(value, (tuple, list)) and len(value) == space.dimension:
            coords = []
            for v, (lo, hi) in zip(value, space.bounds):
                if isinstance(v, bool) or not isinstance(v, (int, float)):
                    break
                v = float(v)
                if not (lo <= v <= hi):
                    break
                coords.append(v)
            else:
                return tuple(coords)
    elif isinstance(space, (TupleSpace, PhysicalTupleSpace)):
        if isinstance(value, (tuple, list)) and len(value) == len(space.components):
            return tuple(
                normalize_value(comp, v) for comp, v in zip(space.components, value)
            )
    else:
        raise DeclarationError(f"unknown space type {type(space).__name__}")
    raise OutOfDomain(f"value {value!r} is not a member of space {space.id!r}")


@dataclass(frozen=True)
class AbstractState:
    """A value tagged with the abstract space it belongs to."""

    space: AbstractSpace
    value: Value

    def __post_init__(self):
        object.__setattr__(self, "value", normalize_value(self.space, self.value))


@dataclass(frozen=True)
class PhysicalState:
    """A simulated device configuration tagged with its space."""

    space: PhysicalSpace
    value: Value

    def __post_init__(self):
        object.__setattr__(self, "value", normalize_value(self.space, self.value))


State = Union[AbstractState, PhysicalState]


def contains(space: Space, state) -> bool:
    """True iff ``state`` (a State or a raw value) is a member of ``space``.

    For tagged states the space reference must match as well.
    """
    if isinstance(state, (AbstractState, PhysicalState)):
        if state.space != space:
            return False
        state = state.value
    try:
        normalize_value(space, state)
    except OutOfDomain:
        return False
    return True


def is_finite(space: Space) -> bool:
    if isinstance(space, RealVectorSpace):
        return False
    if isinstance(space, (TupleSpace, PhysicalTupleSpace)):
        return all(is_finite(c) for c in space.components)
    return True


def cardinality(space: Space) -> int:
    """Analytic size of a finite space."""
    if isinstance(space, (LabelSpace, PhysicalLabelSpace)):
        return len(space.labels)
    if isinstance(space, BitSpace):
        return 2 ** space.width
    if isinstance(space, IntSpace):
        return space.hi - space.lo + 1
    if isinstance(space, (TupleSpace, PhysicalTupleSpace)):
        n = 1
        for comp in space.components:
            n *= cardinality(comp)
        return n
    raise NotEnumerable(f"space {space.id!r} is continuous")


def enumerate_values(space: Space) -> Iterator[Value]:
    """Yield every value of a finite space once, in canonical order.

    Labels follow declaration order, bitstrings are lexicographic, integers
    ascend, and tuple spaces run in row-major order. The order is a pure
    function of the declaration, so repeated calls are identical.
    """
    if isinstance(space, (LabelSpace, PhysicalLabelSpace)):
        yield from space.labels
    elif isinstance(space, BitSpace):
        for i in range(2 ** space.width):
            yield format(i, f"0{space.width}b")
    elif isinstance(space, IntSpace):
        yield from range(space.lo, space.hi + 1)
    elif isinstance(space, (TupleSpace, PhysicalTupleSpace)):
        pools = [list(enumerate_values(c)) for c in space.components]
        for combo in itertools.product(*pools):
            yield combo
    else:
        raise NotEnumerable(f"space {space.id!r} is continuous")


def enumerate_states(space: Space) -> list[State]:
    """All states of a finite space, in the canonical enumeration order."""
    make = AbstractState if isinstance(space, AbstractSpace) else PhysicalState
    return [make(space, v) for v in enumerate_values(space)]


@dataclass(frozen=True)
class Metric:
    """A distance on states, named by kind.

    ``discrete`` is 0 on equal states and 1 otherwise and applies anywhere;
    ``hamming`` counts differing bits of equal-width bitstrings;
    ``absolute-difference`` is |a - b| on integers; ``max-coordinate`` takes
    the maximum over coordinates of a vector or tuple, recursing with the
    natural leaf metric (hamming on bits, absolute difference on integers,
    discrete on labels).
    """

    kind: str

    def __post_init__(self):
        if self.kind not in METRIC_KINDS:
            raise DeclarationError(f"unknown metric kind {self.kind!r}")


METRIC_KINDS = ("discrete", "hamming", "absolute-difference", "max-coordinate")

DISCRETE = Metric("discrete")
HAMMING = Metric("hamming")
ABSOLUTE_DIFFERENCE = Metric("absolute-difference")
MAX_COORDINATE = Metric("max-coordinate")

METRICS = {
    "discrete": DISCRETE,
    "hamming": HAMMING,
    "absolute-difference": ABSOLUTE_DIFFERENCE,
    "max-coordinate": MAX_COORDINATE,
}


def distance(metric: Metric, a: State, b: State) -> float:
    """Metric distance between two states of the same space.

    Comparing states from different spaces is forbidden rather than guessed
    at; it raises MetricMismatch, as does applying a metric to a space kind
    it does not measure.
    """
    if a.space != b.space:
        raise MetricMismatch(
            f"cannot compare states from spaces {a.space.id!r} and {b.space.id!r}"
        )
    return _distance_value(metric.kind, a.space, a.value, b.value)


def _distance_value(kind: str, space: Space, a: Value, b: Value) -> float:
    if kind == "discrete":
        return 0.0 if a == b else 1.0
    if kind == "hamming":
        if not isinstance(space, BitSpace):
            raise MetricMismatch(f"hamming does not apply to space {space.id!r}")
        return float(sum(1 for x, y in zip(a, b) if x != y))
    if kind == "absolute-difference":
        if not isinstance(space, IntSpace):
            raise MetricMismatch(
                f"absolute-difference does not apply to space {space.id!r}"
            )
        return float(abs(a - b))
    if kind == "max-coordinate":
        if isinstance(space, RealVectorSpace):
            return max(abs(x - y) for x, y in zip(a, b))
        if isinstance(space, (TupleSpace, PhysicalTupleSpace)):
            return max(
                _distance_value(_leaf_kind(comp), comp, x, y)
                for comp, x, y in zip(space.components, a, b)
            )
        raise MetricMismatch(f"max-coordinate does not apply to space {space.id!r}")
    raise MetricMismatch(f"unknown metric kind {kind!r}")


def _leaf_kind(space: Space) -> str:
    if isinstance(space, BitSpace):
        return "hamming"
    if isinstance(space, IntSpace):
        return "absolute-difference"
    if isinstance(space, (TupleSpace, PhysicalTupleSpace, RealVectorSpace)):
        return "max-coordinate"
    return "discrete"
