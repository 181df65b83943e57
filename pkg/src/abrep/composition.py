"""Composition of computing systems and the hybrid/heterotic classifier.

Two devices compose into a joint system over the product of their physical
spaces. When the joint representation reads the two halves independently and
the joint dynamics act coordinate by coordinate, the joint system is nothing
more than its parts run side by side: a *hybrid*. When either the reading or
the dynamics couples the halves, so that no such factorization reproduces
them, the composition is happening inside the representation itself and the
system is *heterotic*.

The classifier decides this structurally, by coordinate-constancy checks and
factor read-off. ``brute_force_classify`` is its independent oracle: it
enumerates candidate factor functions outright and searches for a witness.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .dynamics import AbstractDynamics, TableRule, evolve_abstract
from .errors import (
    DeclarationError,
    NotEnumerable,
    NotProductSpace,
    TheoryNotValidated,
    TooLarge,
)
from .relations import (
    RepresentationRelation,
    Theory,
    TupleWiseRule,
    represent,
)
from .spaces import (
    AbstractState,
    PhysicalState,
    PhysicalTupleSpace,
    TupleSpace,
    Value,
    cardinality,
    enumerate_states,
    enumerate_values,
    is_finite,
)

HYBRID = "Hybrid"
HETEROTIC = "Heterotic"

#: Above this many candidate function pairs the oracle searches each factor
#: exhaustively on its own rather than materializing the pair product.
_PAIR_ENUMERATION_CAP = 4096

#: Component abstract spaces larger than this make the oracle refuse.
_ORACLE_SIZE_BOUND = 6

#: Hard cap on candidate functions per factor; beyond it the oracle refuses
#: rather than enumerate forever (large physical spaces under tiny abstract
#: ones would otherwise slip past the size bound).
_CANDIDATE_CAP = 1_000_000


@dataclass(frozen=True)
class Component:
    """One half of a joint system: a device theory plus its computation."""

    theory: Theory
    dynamics: AbstractDynamics

    def __post_init__(self):
        if self.dynamics.space != self.theory.representation.codomain:
            raise DeclarationError(
                f"component over theory {self.theory.id!r}: dynamics"
                f" {self.dynamics.id!r} do not act on the represented values"
            )


@dataclass(frozen=True)
class JointSystem:
    """A product device with a joint representation and joint dynamics."""

    id: str
    left: Component
    right: Component
    joint_space: PhysicalTupleSpace
    joint_representation: RepresentationRelation
    joint_dynamics: AbstractDynamics
    provenance: str  # composed-parallel | composed-sequential | declared

    def __post_init__(self):
        expected = (
            self.left.theory.representation.domain,
            self.right.theory.representation.domain,
        )
        if self.joint_space.components != expected:
            raise NotProductSpace(
                f"joint {self.id!r}: joint space is not the ordered product of the"
                " component spaces"
            )
        if self.joint_representation.domain != self.joint_space:
            raise NotProductSpace(
                f"joint {self.id!r}: joint representation does not read the product"
            )
        if self.joint_dynamics.space != self.joint_representation.codomain:
            raise NotProductSpace(
                f"joint {self.id!r}: joint dynamics do not act on the joint codomain"
            )
        if self.provenance not in ("composed-parallel", "composed-sequential", "declared"):
            raise NotProductSpace(f"joint {self.id!r}: unknown provenance")


@dataclass(frozen=True)
class FactorizationWitness:
    """Component maps that reproduce the joint representation and dynamics.

    Factor tables are keyed by component values; when present they reproduce
    the joint maps exactly on every enumerable state.
    """

    representation_factors: tuple[dict, dict] | None
    dynamics_factors: tuple[dict, dict] | None


@dataclass(frozen=True)
class CompositionClass:
    value: str  # Hybrid | Heterotic
    witness: FactorizationWitness


def componentwise_joint(
    joint_id: str, a: Component, b: Component, provenance: str
) -> JointSystem:
    """Product space, paired representation, coordinate-wise dynamics."""
    rep_a, rep_b = a.theory.representation, b.theory.representation
    space = PhysicalTupleSpace(f"{joint_id}.space", (rep_a.domain, rep_b.domain))
    codomain = TupleSpace(f"{joint_id}.values", (rep_a.codomain, rep_b.codomain))
    joint_rep = RepresentationRelation(
        f"{joint_id}.representation", space, codomain, TupleWiseRule((rep_a, rep_b))
    )
    entries = {}
    for va in enumerate_values(rep_a.codomain):
        fa = evolve_abstract(a.dynamics, AbstractState(rep_a.codomain, va)).value
        for vb in enumerate_values(rep_b.codomain):
            fb = evolve_abstract(b.dynamics, AbstractState(rep_b.codomain, vb)).value
            entries[(va, vb)] = (fa, fb)
    joint_dyn = AbstractDynamics(f"{joint_id}.dynamics", codomain, TableRule(entries))
    return JointSystem(joint_id, a, b, space, joint_rep, joint_dyn, provenance)


def _require_validated(joint_id: str, *components: Component) -> None:
    for comp in components:
        if not comp.theory.is_valid:
            raise TheoryNotValidated(
                f"joint {joint_id!r}: component theory {comp.theory.id!r} is not"
                " validated"
            )


def compose_parallel(a: Component, b: Component, joint_id: str = "parallel") -> JointSystem:
    """Run both computations side by side on the composed input."""
    _require_validated(joint_id, a, b)
    return componentwise_joint(joint_id, a, b, "composed-parallel")


def compose_sequential(a: Component, b: Component, joint_id: str = "sequential") -> JointSystem:
    """Run both computations on separate machines, then combine the outputs.

    The joint action on the product is still coordinate-wise; the provenance
    records that the runs are independent and composed afterwards.
    """
    _require_validated(joint_id, a, b)
    return componentwise_joint(joint_id, a, b, "composed-sequential")


def _product_states(space: PhysicalTupleSpace) -> tuple[list[PhysicalState], list[PhysicalState]]:
    if len(space.components) != 2:
        raise NotProductSpace(f"space {space.id!r} is not a two-part product")
    left, right = space.components
    if not (is_finite(left) and is_finite(right)):
        raise NotEnumerable(f"space {space.id!r} has a continuous component")
    return enumerate_states(left), enumerate_states(right)


def factorize_representation(j: JointSystem) -> tuple[dict, dict] | None:
    """Split the joint representation into independent per-half readings.

    Succeeds exactly when the codomain is a two-part product whose first
    coordinate ignores the right half and whose second ignores the left.
    Returns value-keyed maps onto component abstract states, or None.
    """
    lefts, rights = _product_states(j.joint_space)
    codomain = j.joint_representation.codomain
    if not (isinstance(codomain, TupleSpace) and len(codomain.components) == 2):
        return None
    space_x, space_y = codomain.components
    fmap: dict[Value, AbstractState] = {}
    gmap: dict[Value, AbstractState] = {}
    for p in lefts:
        firsts = {
            represent(
                j.joint_representation, PhysicalState(j.joint_space, (p.value, q.value))
            ).value[0]
            for q in rights
        }
        if len(firsts) != 1:
            return None
        fmap[p.value] = AbstractState(space_x, firsts.pop())
    for q in rights:
        seconds = {
            represent(
                j.joint_representation, PhysicalState(j.joint_space, (p.value, q.value))
            ).value[1]
            for p in lefts
        }
        if len(seconds) != 1:
            return None
        gmap[q.value] = AbstractState(space_y, seconds.pop())
    return fmap, gmap


def factorize_dynamics(d: AbstractDynamics) -> tuple[dict, dict] | None:
    """Split dynamics on a two-part product into independent actions.

    Returns value-keyed endomap tables (f, g) with d(a, b) = (f(a), g(b)) on
    every state, or None when the coordinates are coupled.
    """
    space = d.space
    if not (isinstance(space, TupleSpace) and len(space.components) == 2):
        raise NotProductSpace(f"dynamics {d.id!r} do not act on a two-part product")
    if not is_finite(space):
        raise NotEnumerable(f"space {space.id!r} has an infinite component")
    space_a, space_b = space.components
    avals = list(enumerate_values(space_a))
    bvals = list(enumerate_values(space_b))
    fmap: dict[Value, Value] = {}
    gmap: dict[Value, Value] = {}
    for a in avals:
        firsts = {
            evolve_abstract(d, AbstractState(space, (a, b))).value[0] for b in bvals
        }
        if len(firsts) != 1:
            return None
        fmap[a] = firsts.pop()
    for b in bvals:
        seconds = {
            evolve_abstract(d, AbstractState(space, (a, b))).value[1] for a in avals
        }
        if len(seconds) != 1:
            return None
        gmap[b] = seconds.pop()
    return fmap, gmap


def _factors_match_declared(j: JointSystem, factors: tuple[dict, dict]) -> bool:
    fmap, gmap = factors
    for p in enumerate_states(j.left.theory.representation.domain):
        if fmap[p.value] != represent(j.left.theory.representation, p):
            return False
    for q in enumerate_states(j.right.theory.representation.domain):
        if gmap[q.value] != represent(j.right.theory.representation, q):
            return False
    return True


def classify(j: JointSystem) -> CompositionClass:
    """Decide whether the joint system is its parts composed, or more.

    Hybrid requires the joint representation to factor into exactly the
    declared component representations and the joint dynamics to factor into
    some pair of independent component actions. Anything else is heterotic.
    """
    rep_factors = factorize_representation(j)
    try:
        dyn_factors = factorize_dynamics(j.joint_dynamics)
    except NotProductSpace:
        dyn_factors = None
    hybrid = (
        rep_factors is not None
        and dyn_factors is not None
        and _factors_match_declared(j, rep_factors)
    )
    witness = FactorizationWitness(rep_factors, dyn_factors)
    return CompositionClass(HYBRID if hybrid else HETEROTIC, witness)


def _all_maps(keys: list[Value], outputs: list[Value]):
    """Every total map from keys to outputs, in canonical order."""
    for image in itertools.product(outputs, repeat=len(keys)):
        yield dict(zip(keys, image))


def _search_reproducing_pair(
    akeys: list[Value],
    bkeys: list[Value],
    aouts: list[Value],
    bouts: list[Value],
    observed: dict[tuple[Value, Value], tuple[Value, Value]],
) -> tuple[dict, dict] | None:
    """Exhaustively find (f, g) with observed[(a, b)] == (f[a], g[b]).

    Small searches materialize every pair outright; larger ones search each
    side exhaustively on its own, which finds a pair exactly when pairwise
    enumeration would (each coordinate of the observed table constrains only
    its own factor).
    """
    f_count = len(aouts) ** len(akeys)
    g_count = len(bouts) ** len(bkeys)
    if f_count * g_count <= _PAIR_ENUMERATION_CAP:
        for f in _all_maps(akeys, aouts):
            for g in _all_maps(bkeys, bouts):
                if all(
                    observed[(a, b)] == (f[a], g[b]) for a in akeys for b in bkeys
                ):
                    return f, g
        return None
    found_f = None
    for f in _all_maps(akeys, aouts):
        if all(observed[(a, b)][0] == f[a] for a in akeys for b in bkeys):
            found_f = f
            break
    if found_f is None:
        return None
    for g in _all_maps(bkeys, bouts):
        if all(observed[(a, b)][1] == g[b] for a in akeys for b in bkeys):
            return found_f, g
    return None


def brute_force_classify(j: JointSystem) -> CompositionClass:
    """Oracle classifier: search candidate factor functions exhaustively.

    Hybrid iff some pair of candidate representation maps reproduces the
    joint representation and equals the declared component representations,
    and some pair of candidate component actions reproduces the joint
    dynamics. Only usable on small component spaces.
    """
    left_size = cardinality(j.left.theory.representation.codomain)
    right_size = cardinality(j.right.theory.representation.codomain)
    if left_size > _ORACLE_SIZE_BOUND or right_size > _ORACLE_SIZE_BOUND:
        raise TooLarge(
            f"joint {j.id!r}: component abstract spaces exceed the oracle bound"
            f" of {_ORACLE_SIZE_BOUND}"
        )
    lefts, rights = _product_states(j.joint_space)
    codomain = j.joint_representation.codomain

    rep_factors = None
    if isinstance(codomain, TupleSpace) and len(codomain.components) == 2:
        space_x, space_y = codomain.components
        if cardinality(space_x) > _ORACLE_SIZE_BOUND or cardinality(space_y) > _ORACLE_SIZE_BOUND:
            raise TooLarge(
                f"joint {j.id!r}: joint codomain halves exceed the oracle bound"
            )
        for keys, outs in ((lefts, space_x), (rights, space_y)):
            if cardinality(outs) ** len(keys) > _CANDIDATE_CAP:
                raise TooLarge(
                    f"joint {j.id!r}: too many candidate representation maps to"
                    " enumerate"
                )
        observed_rep = {
            (p.value, q.value): represent(
                j.joint_representation, PhysicalState(j.joint_space, (p.value, q.value))
            ).value
            for p in lefts
            for q in rights
        }
        pair = _search_reproducing_pair(
            [p.value for p in lefts],
            [q.value for q in rights],
            list(enumerate_values(space_x)),
            list(enumerate_values(space_y)),
            observed_rep,
        )
        if pair is not None:
            rep_factors = (
                {k: AbstractState(space_x, v) for k, v in pair[0].items()},
                {k: AbstractState(space_y, v) for k, v in pair[1].items()},
            )

    dyn_factors = None
    dspace = j.joint_dynamics.space
    if isinstance(dspace, TupleSpace) and len(dspace.components) == 2:
        space_a, space_b = dspace.components
        avals = list(enumerate_values(space_a))
        bvals = list(enumerate_values(space_b))
        observed_dyn = {
            (a, b): evolve_abstract(j.joint_dynamics, AbstractState(dspace, (a, b))).value
            for a in avals
            for b in bvals
        }
        dyn_factors = _search_reproducing_pair(avals, bvals, avals, bvals, observed_dyn)

    hybrid = (
        rep_factors is not None
        and dyn_factors is not None
        and _factors_match_declared(j, rep_factors)
    )
    return CompositionClass(
        HYBRID if hybrid else HETEROTIC,
        FactorizationWitness(rep_factors, dyn_factors),
    )
