"""Representation relations, representational triples, and device theories.

A representation relation is the one bridge between a simulated device and
the abstract values it carries: a total, deterministic map from physical
configurations to abstract states. Running it backwards, to *prepare* a
configuration that represents a wanted abstract state, is realized here as
an exhaustive search over declared seed configurations driven through an
engineering dynamics, which keeps preparation decidable and reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Mapping, Union

from .dynamics import (
    AbstractDynamics,
    PhysicalDynamics,
    TrialSeed,
    evolve_physical,
)
from .errors import (
    DeclarationError,
    MissingInstantiation,
    NotInstantiable,
    OutOfDomain,
)
from .spaces import (
    AbstractSpace,
    AbstractState,
    BitSpace,
    PhysicalSpace,
    PhysicalState,
    PhysicalTupleSpace,
    RealVectorSpace,
    TupleSpace,
    Value,
    contains,
    enumerate_values,
    is_finite,
)

if TYPE_CHECKING:
    from .verification import ValidityReport


@dataclass(frozen=True)
class LookupRule:
    """A total table from physical values to abstract values."""

    entries: Mapping[Value, Value]


@dataclass(frozen=True)
class ThresholdRule:
    """One bit per real coordinate: level >= threshold reads as 1.

    The bits fill the codomain in coordinate order, either a single
    bitstring register or a tuple of registers whose widths sum to the
    vector dimension.
    """

    thresholds: tuple[float, ...]


@dataclass(frozen=True)
class TupleWiseRule:
    """Apply component relations to the components of a product state."""

    parts: tuple["RepresentationRelation", ...]


RepresentationRule = Union[LookupRule, ThresholdRule, TupleWiseRule]


@dataclass(frozen=True)
class RepresentationRelation:
    """The directed map from device configurations to abstract states.

    Total on its domain and deterministic: equal configurations always
    represent as equal abstract states.
    """

    id: str
    domain: PhysicalSpace
    codomain: AbstractSpace
    rule: RepresentationRule

    def __post_init__(self):
        rule = self.rule
        if isinstance(rule, LookupRule):
            if not is_finite(self.domain):
                raise DeclarationError(
                    f"relation {self.id!r}: lookup rules need a finite domain"
                )
            seen = 0
            for value in enumerate_values(self.domain):
                if value not in rule.entries:
                    raise DeclarationError(
                        f"relation {self.id!r}: no image for {value!r}"
                    )
                if not contains(self.codomain, rule.entries[value]):
                    raise DeclarationError(
                        f"relation {self.id!r}: image of {value!r} leaves the codomain"
                    )
                seen += 1
            if len(rule.entries) != seen:
                raise DeclarationError(f"relation {self.id!r}: extraneous table keys")
        elif isinstance(rule, ThresholdRule):
            if not isinstance(self.domain, RealVectorSpace):
                raise DeclarationError(
                    f"relation {self.id!r}: threshold rules need a real-vector domain"
                )
            if len(rule.thresholds) != self.domain.dimension:
                raise DeclarationError(
                    f"relation {self.id!r}: one threshold per coordinate required"
                )
            if _register_widths(self.codomain) is None:
                raise DeclarationError(
                    f"relation {self.id!r}: codomain must be a bitstring register"
                    " or a tuple of bitstring registers"
                )
            if sum(_register_widths(self.codomain)) != self.domain.dimension:
                raise DeclarationError(
                    f"relation {self.id!r}: register widths must sum to the dimension"
                )
        elif isinstance(rule, TupleWiseRule):
            ok = (
                isinstance(self.domain, PhysicalTupleSpace)
                and isinstance(self.codomain, TupleSpace)
                and len(rule.parts) == len(self.domain.components)
                and len(rule.parts) == len(self.codomain.components)
            )
            if not ok:
                raise DeclarationError(
                    f"relation {self.id!r}: tuple-wise rules need matching products"
                )
            for part, dom, cod in zip(
                rule.parts, self.domain.components, self.codomain.components
            ):
                if part.domain != dom or part.codomain != cod:
                    raise DeclarationError(
                        f"relation {self.id!r}: part {part.id!r} does not line up"
                        " with the product components"
                    )
        else:
            raise DeclarationError(f"relation {self.id!r}: unknown rule type")


def _register_widths(codomain: AbstractSpace) -> tuple[int, ...] | None:
    if isinstance(codomain, BitSpace):
        return (codomain.width,)
    if isinstance(codomain, TupleSpace) and all(
        isinstance(c, BitSpace) for c in codomain.components
    ):
        return tuple(c.width for c in codomain.components)
    return None


def represent(relation: RepresentationRelation, p: PhysicalState) -> AbstractState:
    """The abstract state assigned to configuration ``p``."""
    if not contains(relation.domain, p):
        raise OutOfDomain(
            f"configuration is not in the domain of relation {relation.id!r}"
        )
    return AbstractState(relation.codomain, _apply(relation, p.value))


def _apply(relation: RepresentationRelation, value: Value) -> Value:
    rule = relation.rule
    if isinstance(rule, LookupRule):
        return rule.entries[value]
    if isinstance(rule, ThresholdRule):
        bits = "".join(
            "1" if v >= th else "0" for v, th in zip(value, rule.thresholds)
        )
        widths = _register_widths(relation.codomain)
        if len(widths) == 1 and isinstance(relation.codomain, BitSpace):
            return bits
        out, at = [], 0
        for w in widths:
            out.append(bits[at : at + w])
            at += w
        return tuple(out)
    return tuple(_apply(part, v) for part, v in zip(rule.parts, value))


@dataclass(frozen=True)
class RepresentationalTriple:
    """A configuration, the relation used to read it, and the reading."""

    physical: PhysicalState
    relation: RepresentationRelation
    abstract: AbstractState


def make_triple(relation: RepresentationRelation, p: PhysicalState) -> RepresentationalTriple:
    return RepresentationalTriple(p, relation, represent(relation, p))


@dataclass(frozen=True)
class InstantiationProcedure:
    """Seeded preparation: candidate start states plus engineering dynamics.

    Preparation searches the seeds in declaration order, so equal targets
    always prepare the same configuration.
    """

    seeds: tuple[PhysicalState, ...]
    engineering: PhysicalDynamics


@dataclass(frozen=True)
class Prediction:
    """A named pairing of a program with the device update meant to run it."""

    name: str
    abstract: AbstractDynamics
    physical: PhysicalDynamics


UNTESTED = "untested"
VALID = "valid"
INVALID = "invalid"


@dataclass(frozen=True)
class Validity:
    """Machine-managed verification status of a theory."""

    status: str = UNTESTED
    evidence: "ValidityReport | None" = None

    def __post_init__(self):
        if self.status not in (UNTESTED, VALID, INVALID):
            raise DeclarationError(f"unknown validity status {self.status!r}")
        if self.status != UNTESTED and self.evidence is None:
            raise DeclarationError("valid/invalid status requires evidence")


@dataclass(frozen=True)
class Theory:
    """A device theory: representation, asserted domain, and predictions.

    ``validity`` starts untested and is only ever set by theory validation,
    which returns a new Theory value rather than mutating this one.
    """

    id: str
    representation: RepresentationRelation
    domain: tuple[PhysicalState, ...]
    predictions: tuple[Prediction, ...]
    instantiation: InstantiationProcedure | None = None
    validity: Validity = field(default_factory=Validity)

    def __post_init__(self):
        space = self.representation.domain
        for state in self.domain:
            if state.space != space:
                raise DeclarationError(
                    f"theory {self.id!r}: domain state outside the represented space"
                )
        names = [p.name for p in self.predictions]
        if len(set(names)) != len(names):
            raise DeclarationError(f"theory {self.id!r}: duplicate prediction names")
        for pred in self.predictions:
            if pred.abstract.space != self.representation.codomain:
                raise DeclarationError(
                    f"theory {self.id!r}: prediction {pred.name!r} does not act on"
                    " the representation codomain"
                )
            if pred.physical.space != space:
                raise DeclarationError(
                    f"theory {self.id!r}: prediction {pred.name!r} device dynamics"
                    " act on the wrong space"
                )
        if self.instantiation is not None:
            if self.instantiation.engineering.space != space:
                raise DeclarationError(
                    f"theory {self.id!r}: engineering dynamics act on the wrong space"
                )
            for seed in self.instantiation.seeds:
                if seed.space != space:
                    raise DeclarationError(
                        f"theory {self.id!r}: seed outside the represented space"
                    )

    @property
    def is_valid(self) -> bool:
        return self.validity.status == VALID

    def prediction(self, name: str) -> Prediction:
        for pred in self.predictions:
            if pred.name == name:
                return pred
        raise KeyError(name)


# Engineering dynamics run with a fixed seed so preparation is a pure
# function of (theory, target) even for noisy engineering declarations.
_ENGINEERING_SEED = TrialSeed(0)


def instantiate(theory: Theory, target: AbstractState) -> PhysicalState:
    """Prepare a configuration whose representation is exactly ``target``.

    Seeds are driven through the engineering dynamics in declaration order;
    the first prepared configuration that represents as ``target`` wins.
    """
    if theory.instantiation is None:
        raise MissingInstantiation(
            f"theory {theory.id!r} declares no instantiation procedure"
        )
    relation = theory.representation
    if not contains(relation.codomain, target):
        raise OutOfDomain(
            f"target is not in the codomain of relation {relation.id!r}"
        )
    for seed in theory.instantiation.seeds:
        prepared = evolve_physical(
            theory.instantiation.engineering, seed, _ENGINEERING_SEED
        )
        if represent(relation, prepared) == target:
            return prepared
    raise NotInstantiable(
        f"theory {theory.id!r}: no seed prepares {target.value!r}"
    )
