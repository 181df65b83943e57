"""Abstract evolutions (programs) and physical evolutions (device updates).

Both kinds of dynamics are single discrete-time steps; multi-step devices
are modeled as chains. Physical dynamics may carry a noise model whose
randomness is counter-based: every random draw is a pure function of the
trial seed and a draw index, so trial k of a batch can be reproduced in
isolation and independent trials may run concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Union

from .errors import DeclarationError, OutOfDomain, SpaceMismatch
from .spaces import (
    AbstractSpace,
    AbstractState,
    BitSpace,
    PhysicalLabelSpace,
    PhysicalSpace,
    PhysicalState,
    RealVectorSpace,
    TupleSpace,
    Value,
    contains,
    enumerate_values,
    is_finite,
)

_MASK64 = (1 << 64) - 1


def _splitmix(z: int) -> int:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & _MASK64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _MASK64
    return z ^ (z >> 31)


def _blend(*words: int) -> int:
    h = 0x9E3779B97F4A7C15
    for w in words:
        h = _splitmix((h + (w & _MASK64)) & _MASK64)
    return h


@dataclass(frozen=True)
class TrialSeed:
    """A 64-bit seed identifying one reproducible trial."""

    value: int = 0

    def __post_init__(self):
        if not (0 <= self.value <= _MASK64):
            raise DeclarationError("trial seed must fit in 64 bits")


def derive_seed(base: TrialSeed, *counters: int) -> TrialSeed:
    """A child seed for one cell of a batch, stable under rescheduling."""
    return TrialSeed(_blend(base.value, *counters))


def unit_draw(seed: TrialSeed, *counters: int) -> float:
    """A deterministic draw in [0, 1) for the given seed and counters."""
    return (_blend(seed.value, *counters) >> 11) / float(1 << 53)


BUILTIN_NAMES = ("identity", "bit-not", "and", "xor", "ripple-add", "swap-pair")


@dataclass(frozen=True)
class TableRule:
    """A total lookup from state value to state value."""

    entries: Mapping[Value, Value]


@dataclass(frozen=True)
class BuiltinRule:
    """One of the named built-in evolutions.

    identity: any space. bit-not: flips every bit of a bitstring.
    and / xor: on a pair of equal-width bitstrings, (a, b) -> (a op b, b).
    ripple-add: on (x, y, out) registers of widths (w, w, w+1), writes the
    exact sum of x and y into out. swap-pair: (a, b) -> (b, a) on a pair of
    like spaces.
    """

    name: str

    def __post_init__(self):
        if self.name not in BUILTIN_NAMES:
            raise DeclarationError(f"unknown builtin dynamics {self.name!r}")


@dataclass(frozen=True)
class ChainRule:
    """Apply component dynamics left to right."""

    parts: tuple["AbstractDynamics", ...]


AbstractRule = Union[TableRule, BuiltinRule, ChainRule]


@dataclass(frozen=True)
class AbstractDynamics:
    """A total endomap on an abstract space."""

    id: str
    space: AbstractSpace
    rule: AbstractRule

    def __post_init__(self):
        rule = self.rule
        if isinstance(rule, TableRule):
            _check_total_table(self.id, self.space, rule.entries)
        elif isinstance(rule, BuiltinRule):
            _check_builtin_shape(self.id, self.space, rule.name)
        elif isinstance(rule, ChainRule):
            for part in rule.parts:
                if part.space != self.space:
                    raise SpaceMismatch(
                        f"dynamics {self.id!r}: chain part {part.id!r} acts on a"
                        " different space"
                    )
        else:
            raise DeclarationError(f"dynamics {self.id!r}: unknown rule type")


def _check_total_table(dyn_id: str, space, entries: Mapping[Value, Value]) -> None:
    if not is_finite(space):
        raise DeclarationError(f"dynamics {dyn_id!r}: table rule needs a finite space")
    seen = 0
    for value in enumerate_values(space):
        if value not in entries:
            raise DeclarationError(f"dynamics {dyn_id!r}: table misses {value!r}")
        if not contains(space, entries[value]):
            raise DeclarationError(
                f"dynamics {dyn_id!r}: image of {value!r} leaves the space"
            )
        seen += 1
    if len(entries) != seen:
        raise DeclarationError(f"dynamics {dyn_id!r}: table has extraneous keys")


def _check_builtin_shape(dyn_id: str, space: AbstractSpace, name: str) -> None:
    def fail(requirement: str):
        raise DeclarationError(f"dynamics {dyn_id!r}: builtin {name!r} needs {requirement}")

    if name == "identity":
        return
    if name == "bit-not":
        if not isinstance(space, BitSpace):
            fail("a bitstring space")
    elif name in ("and", "xor"):
        if not (
            isinstance(space, TupleSpace)
            and len(space.components) == 2
            and all(isinstance(c, BitSpace) for c in space.components)
            and space.components[0].width == space.components[1].width
        ):
            fail("a pair of equal-width bitstring registers")
    elif name == "ripple-add":
        ok = (
            isinstance(space, TupleSpace)
            and len(space.components) == 3
            and all(isinstance(c, BitSpace) for c in space.components)
        )
        if ok:
            x, y, out = space.components
            ok = x.width == y.width and out.width == x.width + 1
        if not ok:
            fail("registers of widths (w, w, w+1)")
    elif name == "swap-pair":
        if not (
            isinstance(space, TupleSpace)
            and len(space.components) == 2
            and space.components[0] == space.components[1]
        ):
            fail("a pair of like component spaces")


def evolve_abstract(c: AbstractDynamics, m: AbstractState) -> AbstractState:
    """Image of ``m`` under the program ``c``."""
    if not contains(c.space, m):
        raise OutOfDomain(f"state is not in the space of dynamics {c.id!r}")
    return AbstractState(c.space, _apply_abstract(c.rule, c.space, m.value))


def _apply_abstract(rule: AbstractRule, space: AbstractSpace, value: Value) -> Value:
    if isinstance(rule, TableRule):
        return rule.entries[value]
    if isinstance(rule, ChainRule):
        for part in rule.parts:
            value = _apply_abstract(part.rule, part.space, value)
        return value
    name = rule.name
    if name == "identity":
        return value
    if name == "bit-not":
        return "".join("1" if c == "0" else "0" for c in value)
    if name in ("and", "xor"):
        a, b = value
        if name == "and":
            combined = "".join("1" if x == "1" and y == "1" else "0" for x, y in zip(a, b))
        else:
            combined = "".join("1" if x != y else "0" for x, y in zip(a, b))
        return (combined, b)
    if name == "ripple-add":
        x, y, _ = value
        out_width = space.components[2].width
        total = int(x, 2) + int(y, 2)
        return (x, y, format(total % (1 << out_width), f"0{out_width}b"))
    if name == "swap-pair":
        a, b = value
        return (b, a)
    raise DeclarationError(f"unknown builtin {name!r}")


def compose_dynamics(first: AbstractDynamics, second: AbstractDynamics) -> AbstractDynamics:
    """A chain acting as ``second`` after ``first`` on every state."""
    if first.space != second.space:
        raise SpaceMismatch(
            f"cannot compose dynamics on {first.space.id!r} with {second.space.id!r}"
        )
    return AbstractDynamics(
        id=f"{first.id}>>{second.id}",
        space=first.space,
        rule=ChainRule((first, second)),
    )


@dataclass(frozen=True)
class BinarySumUpdate:
    """Write the binary sum of two voltage registers into a target register.

    Source registers are digitized at ``threshold``; the sum's bits are
    written back as ``high`` / ``low`` levels, most significant bit first,
    wrapping modulo the target width. Assignments read the working state,
    so earlier assignments in the same update are visible.
    """

    a_lines: tuple[int, ...]
    b_lines: tuple[int, ...]
    out_lines: tuple[int, ...]
    threshold: float
    low: float
    high: float


@dataclass(frozen=True)
class ConstantUpdate:
    """Pin coordinates to fixed levels (the stuck-at fault primitive)."""

    lines: tuple[int, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.lines) != len(self.values):
            raise DeclarationError("constant update: lines and values differ in length")


@dataclass(frozen=True)
class CoordinateUpdateRule:
    """Ordered coordinate assignments on a real-vector space.

    An empty assignment list is the identity update. Later assignments
    override earlier ones on overlapping lines.
    """

    assignments: tuple[Union[BinarySumUpdate, ConstantUpdate], ...] = ()


@dataclass(frozen=True)
class PhysicalChainRule:
    """Apply component device updates left to right."""

    parts: tuple["PhysicalDynamics", ...]


PhysicalRule = Union[TableRule, CoordinateUpdateRule, PhysicalChainRule]


@dataclass(frozen=True)
class CoordinateFlipNoise:
    """Independent per-coordinate flips across a voltage threshold.

    Each listed coordinate flips with the given probability: a level at or
    above ``threshold`` drops to ``low``, anything below rises to ``high``.
    """

    probability: float
    coordinates: tuple[int, ...]
    threshold: float
    low: float
    high: float

    def __post_init__(self):
        if not (0.0 <= self.probability <= 1.0):
            raise DeclarationError("flip probability must lie in [0, 1]")


@dataclass(frozen=True)
class LabelFlipNoise:
    """Relabeling noise for finite devices; every label needs a partner."""

    probability: float
    partners: Mapping[str, str]

    def __post_init__(self):
        if not (0.0 <= self.probability <= 1.0):
            raise DeclarationError("flip probability must lie in [0, 1]")


Noise = Union[CoordinateFlipNoise, LabelFlipNoise]


@dataclass(frozen=True)
class PhysicalDynamics:
    """A device update: a total endomap on a physical space, plus noise."""

    id: str
    space: PhysicalSpace
    rule: PhysicalRule
    noise: Noise | None = None

    def __post_init__(self):
        rule = self.rule
        if isinstance(rule, TableRule):
            _check_total_table(self.id, self.space, rule.entries)
        elif isinstance(rule, CoordinateUpdateRule):
            if not isinstance(self.space, RealVectorSpace):
                raise DeclarationError(
                    f"dynamics {self.id!r}: coordinate updates need a real-vector space"
                )
            _check_update_levels(self.id, self.space, rule)
        elif isinstance(rule, PhysicalChainRule):
            for part in rule.parts:
                if part.space != self.space:
                    raise SpaceMismatch(
                        f"dynamics {self.id!r}: chain part {part.id!r} acts on a"
                        " different space"
                    )
        else:
            raise DeclarationError(f"dynamics {self.id!r}: unknown rule type")
        _check_noise(self.id, self.space, self.noise)


def _check_update_levels(dyn_id: str, space: RealVectorSpace, rule: CoordinateUpdateRule):
    def check_line(line: int, level: float):
        if not (0 <= line < space.dimension):
            raise DeclarationError(f"dynamics {dyn_id!r}: line {line} out of range")
        lo, hi = space.bounds[line]
        if not (lo <= level <= hi):
            raise DeclarationError(
                f"dynamics {dyn_id!r}: level {level} leaves the bounds of line {line}"
            )

    for upd in rule.assignments:
        if isinstance(upd, BinarySumUpdate):
            for line in upd.a_lines + upd.b_lines:
                if not (0 <= line < space.dimension):
                    raise DeclarationError(f"dynamics {dyn_id!r}: line {line} out of range")
            for line in upd.out_lines:
                check_line(line, upd.low)
                check_line(line, upd.high)
        elif isinstance(upd, ConstantUpdate):
            for line, value in zip(upd.lines, upd.values):
                check_line(line, value)
        else:
            raise DeclarationError(f"dynamics {dyn_id!r}: unknown update type")


def _check_noise(dyn_id: str, space: PhysicalSpace, noise: Noise | None) -> None:
    if noise is None:
        return
    if isinstance(noise, CoordinateFlipNoise):
        if not isinstance(space, RealVectorSpace):
            raise DeclarationError(
                f"dynamics {dyn_id!r}: coordinate-flip noise needs a real-vector space"
            )
        for line in noise.coordinates:
            if not (0 <= line < space.dimension):
                raise DeclarationError(f"dynamics {dyn_id!r}: noise line {line} out of range")
            lo, hi = space.bounds[line]
            if not (lo <= noise.low <= hi and lo <= noise.high <= hi):
                raise DeclarationError(
                    f"dynamics {dyn_id!r}: noise levels leave the bounds of line {line}"
                )
    elif isinstance(noise, LabelFlipNoise):
        if not isinstance(space, PhysicalLabelSpace):
            raise DeclarationError(
                f"dynamics {dyn_id!r}: label-flip noise needs a labeled space"
            )
        missing = [l for l in space.labels if l not in noise.partners]
        if missing:
            raise DeclarationError(
                f"dynamics {dyn_id!r}: labels without noise partners: {missing}"
            )
        for label, partner in noise.partners.items():
            if label not in space.labels or partner not in space.labels:
                raise DeclarationError(
                    f"dynamics {dyn_id!r}: noise partner pair {label!r} -> {partner!r}"
                    " leaves the space"
                )
    else:
        raise DeclarationError(f"dynamics {dyn_id!r}: unknown noise type")


def evolve_physical(h: PhysicalDynamics, p: PhysicalState, t: TrialSeed) -> PhysicalState:
    """Image of configuration ``p`` under device update ``h`` for trial ``t``.

    The output is a pure function of (h, p, t); noise-free dynamics ignore
    the seed entirely.
    """
    if not contains(h.space, p):
        raise OutOfDomain(f"configuration is not in the space of dynamics {h.id!r}")
    value = _apply_physical(h.rule, p.value, t)
    if h.noise is not None:
        value = _apply_noise(h.noise, value, t)
    return PhysicalState(h.space, value)


def _apply_physical(rule: PhysicalRule, value: Value, t: TrialSeed) -> Value:
    if isinstance(rule, TableRule):
        return rule.entries[value]
    if isinstance(rule, PhysicalChainRule):
        for stage, part in enumerate(rule.parts):
            sub = derive_seed(t, stage + 1)
            value = _apply_physical(part.rule, value, sub)
            if part.noise is not None:
                value = _apply_noise(part.noise, value, sub)
        return value
    working = list(value)
    for upd in rule.assignments:
        if isinstance(upd, BinarySumUpdate):
            a = _register_int(working, upd.a_lines, upd.threshold)
            b = _register_int(working, upd.b_lines, upd.threshold)
            width = len(upd.out_lines)
            bits = format((a + b) % (1 << width), f"0{width}b")
            for line, bit in zip(upd.out_lines, bits):
                working[line] = upd.high if bit == "1" else upd.low
        else:
            for line, level in zip(upd.lines, upd.values):
                working[line] = level
    return tuple(working)


def _register_int(coords: list[float], lines: tuple[int, ...], threshold: float) -> int:
    n = 0
    for line in lines:
        n = (n << 1) | (1 if coords[line] >= threshold else 0)
    return n


def _apply_noise(noise: Noise, value: Value, t: TrialSeed) -> Value:
    if isinstance(noise, CoordinateFlipNoise):
        working = list(value)
        for line in noise.coordinates:
            if unit_draw(t, line) < noise.probability:
                working[line] = (
                    noise.low if working[line] >= noise.threshold else noise.high
                )
        return tuple(working)
    if unit_draw(t, 0) < noise.probability:
        return noise.partners[value]
    return value


def identity_dynamics(dyn_id: str, space: PhysicalSpace) -> PhysicalDynamics:
    """The do-nothing device update, usable as engineering dynamics."""
    if isinstance(space, RealVectorSpace):
        return PhysicalDynamics(dyn_id, space, CoordinateUpdateRule(()))
    entries = {v: v for v in enumerate_values(space)}
    return PhysicalDynamics(dyn_id, space, TableRule(entries))
