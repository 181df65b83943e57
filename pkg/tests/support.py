"""Seeded random model generators shared by property and acceptance tests."""

from __future__ import annotations

import random

from abrep import (
    AbstractDynamics,
    BitSpace,
    Component,
    InstantiationProcedure,
    JointSystem,
    LabelSpace,
    LookupRule,
    PhysicalDynamics,
    PhysicalLabelSpace,
    PhysicalState,
    PhysicalTupleSpace,
    Prediction,
    RepresentationRelation,
    TableRule,
    Theory,
    TupleSpace,
    TupleWiseRule,
    enumerate_values,
    identity_dynamics,
)


def random_deterministic_theory(rng: random.Random, tag: str) -> Theory:
    """A random noise-free device theory over a bitstring codomain.

    Hamming distances between the two diagram paths range over 0..width,
    which exercises fractional tolerance thresholds.
    """
    width = rng.choice((2, 3))
    bits = BitSpace(f"{tag}.bits", width)
    n_states = rng.randrange(3, 7)
    labels = tuple(f"s{i}" for i in range(n_states))
    cells = PhysicalLabelSpace(f"{tag}.cells", labels)

    def random_word() -> str:
        return format(rng.randrange(2 ** width), f"0{width}b")

    read = RepresentationRelation(
        f"{tag}.read", cells, bits, LookupRule({l: random_word() for l in labels})
    )
    program = AbstractDynamics(
        f"{tag}.program",
        bits,
        TableRule({w: random_word() for w in enumerate_values(bits)}),
    )
    device = PhysicalDynamics(
        f"{tag}.device", cells, TableRule({l: rng.choice(labels) for l in labels})
    )
    states = tuple(PhysicalState(cells, l) for l in labels)
    return Theory(
        id=f"{tag}.theory",
        representation=read,
        domain=states,
        predictions=(Prediction("step", program, device),),
        instantiation=InstantiationProcedure(states, identity_dynamics(f"{tag}.hold", cells)),
    )


def _random_component(rng: random.Random, tag: str) -> Component:
    n_phys = rng.randrange(2, 5)
    n_abs = rng.randrange(2, 5)
    cells = PhysicalLabelSpace(f"{tag}.cells", tuple(f"c{i}" for i in range(n_phys)))
    values = LabelSpace(f"{tag}.values", tuple(f"v{i}" for i in range(n_abs)))
    read = RepresentationRelation(
        f"{tag}.read",
        cells,
        values,
        LookupRule({c: rng.choice(values.labels) for c in cells.labels}),
    )
    dynamics = AbstractDynamics(
        f"{tag}.step",
        values,
        TableRule({v: rng.choice(values.labels) for v in values.labels}),
    )
    states = tuple(PhysicalState(cells, c) for c in cells.labels)
    theory = Theory(
        id=f"{tag}.theory",
        representation=read,
        domain=states,
        predictions=(Prediction("step", dynamics, identity_dynamics(f"{tag}.settle", cells)),),
        instantiation=InstantiationProcedure(states, identity_dynamics(f"{tag}.hold", cells)),
    )
    return Component(theory, dynamics)


def random_joint_system(rng: random.Random, tag: str) -> JointSystem:
    """A random declared joint over small components.

    Representation and dynamics are drawn from a mix of factorable,
    mismatched-but-factorable, coupled, and non-product shapes so both
    classifier outcomes and the declared-representation anchor get
    exercised.
    """
    left = _random_component(rng, f"{tag}.left")
    right = _random_component(rng, f"{tag}.right")
    rep_l = left.theory.representation
    rep_r = right.theory.representation
    space = PhysicalTupleSpace(f"{tag}.floor", (rep_l.domain, rep_r.domain))

    rep_mode = rng.choice(("declared", "mismatched", "coupled", "non-product"))
    if rep_mode == "declared":
        codomain = TupleSpace(f"{tag}.pairs", (rep_l.codomain, rep_r.codomain))
        joint_rep = RepresentationRelation(
            f"{tag}.read", space, codomain, TupleWiseRule((rep_l, rep_r))
        )
    elif rep_mode == "mismatched":
        codomain = TupleSpace(f"{tag}.pairs", (rep_l.codomain, rep_r.codomain))
        fprime = {c: rng.choice(rep_l.codomain.labels) for c in rep_l.domain.labels}
        gprime = {c: rng.choice(rep_r.codomain.labels) for c in rep_r.domain.labels}
        joint_rep = RepresentationRelation(
            f"{tag}.read",
            space,
            codomain,
            LookupRule({(p, q): (fprime[p], gprime[q]) for (p, q) in enumerate_values(space)}),
        )
    elif rep_mode == "coupled":
        codomain = TupleSpace(f"{tag}.pairs", (rep_l.codomain, rep_r.codomain))
        joint_rep = RepresentationRelation(
            f"{tag}.read",
            space,
            codomain,
            LookupRule(
                {
                    (p, q): (
                        rng.choice(rep_l.codomain.labels),
                        rng.choice(rep_r.codomain.labels),
                    )
                    for (p, q) in enumerate_values(space)
                }
            ),
        )
    else:
        codomain = LabelSpace(f"{tag}.verdicts", tuple(f"k{i}" for i in range(rng.randrange(2, 5))))
        joint_rep = RepresentationRelation(
            f"{tag}.read",
            space,
            codomain,
            LookupRule(
                {(p, q): rng.choice(codomain.labels) for (p, q) in enumerate_values(space)}
            ),
        )

    if rep_mode == "non-product":
        joint_dyn = AbstractDynamics(
            f"{tag}.act",
            codomain,
            TableRule({v: rng.choice(codomain.labels) for v in codomain.labels}),
        )
    else:
        dyn_mode = rng.choice(("componentwise", "random"))
        if dyn_mode == "componentwise":
            f = {v: rng.choice(rep_l.codomain.labels) for v in rep_l.codomain.labels}
            g = {v: rng.choice(rep_r.codomain.labels) for v in rep_r.codomain.labels}
            entries = {(a, b): (f[a], g[b]) for (a, b) in enumerate_values(codomain)}
        else:
            entries = {
                (a, b): (
                    rng.choice(rep_l.codomain.labels),
                    rng.choice(rep_r.codomain.labels),
                )
                for (a, b) in enumerate_values(codomain)
            }
        joint_dyn = AbstractDynamics(f"{tag}.act", codomain, TableRule(entries))

    return JointSystem(
        id=f"{tag}.joint",
        left=left,
        right=right,
        joint_space=space,
        joint_representation=joint_rep,
        joint_dynamics=joint_dyn,
        provenance="declared",
    )
