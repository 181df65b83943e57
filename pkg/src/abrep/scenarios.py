"""Built-in, fully specified example systems.

Each builder returns a self-contained bundle: spaces, relations, dynamics,
theories, and the checks the bundle is expected to satisfy. The builders are
pure, so building twice yields structurally identical bundles, and every
bundle can be emitted as a scenario document, which makes these systems
double as format documentation.
"""

from __future__ import annotations

from dataclasses import dataclass

from .composition import Component, JointSystem, componentwise_joint
from .dynamics import (
    AbstractDynamics,
    BinarySumUpdate,
    BuiltinRule,
    ConstantUpdate,
    CoordinateFlipNoise,
    CoordinateUpdateRule,
    PhysicalDynamics,
    TableRule,
    identity_dynamics,
)
from .refinement import RefinementLayer, RefinementStack, SimulationRelation
from .relations import (
    InstantiationProcedure,
    LookupRule,
    Prediction,
    RepresentationRelation,
    Theory,
    ThresholdRule,
    TupleWiseRule,
)
from .spaces import (
    BitSpace,
    IntSpace,
    LabelSpace,
    PhysicalLabelSpace,
    PhysicalState,
    PhysicalTupleSpace,
    RealVectorSpace,
    TupleSpace,
    Value,
    enumerate_values,
)
from .verification import ProblemEmbedding

FORMAT_VERSION = "1"


@dataclass(frozen=True)
class CheckSpec:
    """One declared check; unset tolerances fall back to the strict defaults."""

    name: str
    kind: str
    theory: str | None = None
    prediction: str | None = None
    state: Value | None = None
    input: Value | None = None
    expect: Value | None = None
    physical_metric: str | None = None
    stack: str | None = None
    relation: str | None = None
    joint: str | None = None
    expect_class: str | None = None
    oracle: bool = False
    epsilon: float = 0.0
    metric: str = "discrete"
    trials: int = 1
    required_success: float = 1.0


CHECK_KINDS = (
    "commutation",
    "experiment",
    "history",
    "validate-theory",
    "compute",
    "layer",
    "stack",
    "classify",
)


@dataclass(frozen=True)
class ScenarioBundle:
    """Everything needed to run verification with no further input."""

    format_version: str
    abstract_spaces: tuple
    physical_spaces: tuple
    relations: tuple
    abstract_dynamics: tuple
    physical_dynamics: tuple
    theories: tuple
    embeddings: tuple
    stacks: tuple
    joints: tuple
    checks: tuple

    def __post_init__(self):
        for section in (
            list(self.abstract_spaces) + list(self.physical_spaces),
            self.relations,
            list(self.abstract_dynamics) + list(self.physical_dynamics),
            self.theories,
            self.embeddings,
            self.stacks,
            self.joints,
        ):
            ids = [obj.id for obj in section]
            if len(set(ids)) != len(ids):
                raise ValueError(f"duplicate identifiers in bundle section: {ids}")
        names = [c.name for c in self.checks]
        if len(set(names)) != len(names):
            raise ValueError("duplicate check names in bundle")

    def _find(self, section, wanted: str):
        for obj in section:
            if obj.id == wanted:
                return obj
        raise KeyError(wanted)

    def theory(self, theory_id: str) -> Theory:
        return self._find(self.theories, theory_id)

    def stack(self, stack_id: str) -> RefinementStack:
        return self._find(self.stacks, stack_id)

    def joint(self, joint_id: str) -> JointSystem:
        return self._find(self.joints, joint_id)

    def embedding(self, embedding_id: str) -> ProblemEmbedding:
        return self._find(self.embeddings, embedding_id)


def _bits(n: int, width: int) -> str:
    return format(n, f"0{width}b")


def _volts(bits: str) -> tuple[float, ...]:
    return tuple(5.0 if c == "1" else 0.0 for c in bits)


def build_voltage_adder(flip_probability: float = 0.0, faulted: bool = False) -> ScenarioBundle:
    """A seven-line voltage device that adds two 2-bit registers.

    Lines 0-1 and 2-3 carry the addends, lines 4-6 the sum; a high line reads
    as 1 at the 2.5 V threshold. The third register is one bit wider than the
    inputs so no sum is truncated. With ``flip_probability`` > 0 each output
    line flips across the threshold independently after the update. With
    ``faulted`` the least significant output line is stuck at 0 V, so the
    declared checks fail on every input pair whose sum is odd; the zero-sum
    check still passes.
    """
    lines = RealVectorSpace("adder.lines", ((0.0, 5.0),) * 7)
    register = BitSpace("adder.register", 2)
    out_register = BitSpace("adder.out-register", 3)
    machine = TupleSpace("adder.machine", (register, register, out_register))
    digit = IntSpace("adder.digit", 0, 3)
    problem = TupleSpace("adder.problem", (digit, digit))

    read = RepresentationRelation(
        "adder.read", lines, machine, ThresholdRule((2.5,) * 7)
    )
    add = AbstractDynamics("adder.add", machine, BuiltinRule("ripple-add"))

    assignments: tuple = (
        BinarySumUpdate((0, 1), (2, 3), (4, 5, 6), 2.5, 0.0, 5.0),
    )
    if faulted:
        assignments += (ConstantUpdate((6,), (0.0,)),)
    noise = None
    if flip_probability > 0:
        noise = CoordinateFlipNoise(flip_probability, (4, 5, 6), 2.5, 0.0, 5.0)
    volts = PhysicalDynamics(
        "adder.volts", lines, CoordinateUpdateRule(assignments), noise
    )
    hold = identity_dynamics("adder.hold", lines)

    domain = tuple(
        PhysicalState(lines, _volts(_bits(a, 2) + _bits(b, 2) + "000"))
        for a in range(4)
        for b in range(4)
    )
    seeds = tuple(PhysicalState(lines, _volts(_bits(i, 7))) for i in range(128))
    theory = Theory(
        id="adder",
        representation=read,
        domain=domain,
        predictions=(Prediction("add", add, volts),),
        instantiation=InstantiationProcedure(seeds, hold),
    )

    encode_decimal = ProblemEmbedding(
        "adder.encode-decimal",
        problem,
        machine,
        {(a, b): (_bits(a, 2), _bits(b, 2), "000") for a in range(4) for b in range(4)},
    )

    if flip_probability > 0:
        checks = (
            CheckSpec(
                name="validate",
                kind="validate-theory",
                theory="adder",
                trials=400,
                required_success=0.6,
            ),
            CheckSpec(
                name="estimate-success",
                kind="experiment",
                theory="adder",
                prediction="add",
                input=("01", "10", "000"),
                trials=1000,
                required_success=0.5,
            ),
        )
    elif faulted:
        checks = (
            CheckSpec(name="validate", kind="validate-theory", theory="adder"),
            CheckSpec(
                name="add-01-10",
                kind="commutation",
                theory="adder",
                prediction="add",
                input=("01", "10", "000"),
            ),
            CheckSpec(
                name="add-00-00",
                kind="commutation",
                theory="adder",
                prediction="add",
                input=("00", "00", "000"),
            ),
        )
    else:
        checks = (
            CheckSpec(name="validate", kind="validate-theory", theory="adder"),
            CheckSpec(
                name="add-01-10",
                kind="commutation",
                theory="adder",
                prediction="add",
                input=("01", "10", "000"),
            ),
            CheckSpec(
                name="cycle-01-10",
                kind="compute",
                theory="adder",
                prediction="add",
                input=("01", "10", "000"),
                expect=("01", "10", "011"),
            ),
            CheckSpec(
                name="cycle-11-11",
                kind="compute",
                theory="adder",
                prediction="add",
                input=("11", "11", "000"),
                expect=("11", "11", "110"),
            ),
            CheckSpec(
                name="history-01-10",
                kind="history",
                theory="adder",
                prediction="add",
                input=("01", "10", "000"),
                physical_metric="max-coordinate",
            ),
        )

    return ScenarioBundle(
        format_version=FORMAT_VERSION,
        abstract_spaces=(register, out_register, machine, digit, problem),
        physical_spaces=(lines,),
        relations=(read,),
        abstract_dynamics=(add,),
        physical_dynamics=(volts, hold),
        theories=(theory,),
        embeddings=(encode_decimal,),
        stacks=(),
        joints=(),
        checks=checks,
    )


def build_refinement_stack(mis_declared: bool = False) -> ScenarioBundle:
    """Decimal addition refined to binary, to a flat machine word, to volts.

    The top layer adds small decimals in a (digit, digit, sum) register file;
    the middle layer is the binary register machine; the bottom layer is the
    same machine state flattened into one 7-bit word, which is what the
    device theory reads directly off the voltage lines. With ``mis_declared``
    the decimal-to-binary map encodes 1 and 2 swapped in the first register,
    which breaks exactly that layer check.
    """
    digit = IntSpace("stack.digit", 0, 3)
    total = IntSpace("stack.sum", 0, 6)
    dec_space = TupleSpace("stack.dec", (digit, digit, total))
    register = BitSpace("stack.register", 2)
    out_register = BitSpace("stack.out-register", 3)
    bin_space = TupleSpace("stack.bin", (register, register, out_register))
    word = BitSpace("stack.word", 7)
    lines = RealVectorSpace("stack.lines", ((0.0, 5.0),) * 7)

    dec_add = AbstractDynamics(
        "stack.dec-add",
        dec_space,
        TableRule({(a, b, s): (a, b, a + b) for (a, b, s) in enumerate_values(dec_space)}),
    )
    bin_add = AbstractDynamics("stack.bin-add", bin_space, BuiltinRule("ripple-add"))
    asm_add = AbstractDynamics(
        "stack.asm-add",
        word,
        TableRule(
            {
                w: w[:4] + _bits(int(w[0:2], 2) + int(w[2:4], 2), 3)
                for w in enumerate_values(word)
            }
        ),
    )

    volts = PhysicalDynamics(
        "stack.volts",
        lines,
        CoordinateUpdateRule((BinarySumUpdate((0, 1), (2, 3), (4, 5, 6), 2.5, 0.0, 5.0),)),
    )
    hold = identity_dynamics("stack.hold", lines)

    read_word = RepresentationRelation(
        "stack.read-word", lines, word, ThresholdRule((2.5,) * 7)
    )
    grid = tuple(PhysicalState(lines, _volts(_bits(i, 7))) for i in range(128))
    device_theory = Theory(
        id="stack.device-theory",
        representation=read_word,
        domain=grid,
        predictions=(Prediction("asm-add", asm_add, volts),),
        instantiation=InstantiationProcedure(grid, hold),
    )

    dec_layer = RefinementLayer("stack.dec-layer", dec_space, dec_add)
    bin_layer = RefinementLayer("stack.bin-layer", bin_space, bin_add)
    asm_layer = RefinementLayer("stack.asm-layer", word, asm_add)

    def encode_first(a: int) -> str:
        if mis_declared and a in (1, 2):
            return _bits(3 - a, 2)
        return _bits(a, 2)

    dec_to_bin = SimulationRelation(
        "stack.dec-to-bin",
        dec_layer,
        bin_layer,
        {
            (a, b, s): (encode_first(a), _bits(b, 2), _bits(s, 3))
            for (a, b, s) in enumerate_values(dec_space)
        },
    )
    bin_to_asm = SimulationRelation(
        "stack.bin-to-asm",
        bin_layer,
        asm_layer,
        {(x, y, z): x + y + z for (x, y, z) in enumerate_values(bin_space)},
    )
    stack = RefinementStack(
        "stack.adder",
        (dec_layer, bin_layer, asm_layer),
        (dec_to_bin, bin_to_asm),
        device_theory,
        volts,
    )

    checks = (
        CheckSpec(name="layer-dec-bin", kind="layer", stack="stack.adder", relation="stack.dec-to-bin"),
        CheckSpec(name="layer-bin-asm", kind="layer", stack="stack.adder", relation="stack.bin-to-asm"),
        CheckSpec(name="end-to-end", kind="stack", stack="stack.adder"),
    )

    return ScenarioBundle(
        format_version=FORMAT_VERSION,
        abstract_spaces=(digit, total, dec_space, register, out_register, bin_space, word),
        physical_spaces=(lines,),
        relations=(read_word,),
        abstract_dynamics=(dec_add, bin_add, asm_add),
        physical_dynamics=(volts, hold),
        theories=(device_theory,),
        embeddings=(),
        stacks=(stack,),
        joints=(),
        checks=checks,
    )


def build_swap_device() -> ScenarioBundle:
    """Two labeled registers whose contents are exchanged in one step."""
    digits = PhysicalLabelSpace("swap.digits", tuple(str(d) for d in range(10)))
    registers = PhysicalTupleSpace("swap.registers", (digits, digits))
    number = IntSpace("swap.number", 0, 9)
    pair = TupleSpace("swap.pair", (number, number))

    read_digit = RepresentationRelation(
        "swap.read-digit",
        digits,
        number,
        LookupRule({str(d): d for d in range(10)}),
    )
    read = RepresentationRelation(
        "swap.read", registers, pair, TupleWiseRule((read_digit, read_digit))
    )
    exchange = PhysicalDynamics(
        "swap.exchange",
        registers,
        TableRule({(a, b): (b, a) for (a, b) in enumerate_values(registers)}),
    )
    hold = identity_dynamics("swap.hold", registers)
    swap = AbstractDynamics("swap.swap", pair, BuiltinRule("swap-pair"))

    states = tuple(PhysicalState(registers, v) for v in enumerate_values(registers))
    theory = Theory(
        id="swap",
        representation=read,
        domain=states,
        predictions=(Prediction("swap", swap, exchange),),
        instantiation=InstantiationProcedure(states, hold),
    )

    checks = (
        CheckSpec(name="validate", kind="validate-theory", theory="swap"),
        CheckSpec(
            name="cycle-7-9",
            kind="compute",
            theory="swap",
            prediction="swap",
            input=(7, 9),
            expect=(9, 7),
        ),
        CheckSpec(
            name="swap-3-3",
            kind="commutation",
            theory="swap",
            prediction="swap",
            input=(3, 3),
        ),
    )

    return ScenarioBundle(
        format_version=FORMAT_VERSION,
        abstract_spaces=(number, pair),
        physical_spaces=(digits, registers),
        relations=(read_digit, read),
        abstract_dynamics=(swap,),
        physical_dynamics=(exchange, hold),
        theories=(theory,),
        embeddings=(),
        stacks=(),
        joints=(),
        checks=checks,
    )


def build_social_machine() -> ScenarioBundle:
    """A crowd classifier: a human tagger and an aggregating machine.

    Individually, the human reads pictures as shape tags and the machine
    reads its memory as tally levels, and both satisfy their own theories.
    The catalogue the pair produces is read off the *joint* state by a
    relation into a plain label space that is not a product of the component
    codomains, so the joint system declines to factor: neither part alone
    maps pictures to galaxy classes.
    """
    pictures = PhysicalLabelSpace(
        "social.pictures",
        ("whirl-1", "whirl-2", "whirl-3", "haze-1", "haze-2", "haze-3"),
    )
    memory = PhysicalLabelSpace("social.memory", ("mem0", "mem1", "mem2", "mem3"))
    floor = PhysicalTupleSpace("social.floor", (pictures, memory))
    tags = LabelSpace("social.tags", ("round", "square", "fuzzy"))
    tallies = LabelSpace("social.tallies", ("none", "few", "many"))
    classes = LabelSpace("social.classes", ("spiral", "elliptical"))

    human_read = RepresentationRelation(
        "social.human-read",
        pictures,
        tags,
        LookupRule(
            {
                "whirl-1": "round",
                "whirl-2": "round",
                "whirl-3": "fuzzy",
                "haze-1": "square",
                "haze-2": "square",
                "haze-3": "fuzzy",
            }
        ),
    )
    machine_read = RepresentationRelation(
        "social.machine-read",
        memory,
        tallies,
        LookupRule({"mem0": "none", "mem1": "few", "mem2": "few", "mem3": "many"}),
    )

    def catalogue(pic: str, mem: str) -> str:
        crowd_agrees = mem in ("mem2", "mem3")
        if pic.startswith("whirl") and crowd_agrees:
            return "spiral"
        if pic == "haze-3" and mem == "mem3":
            return "spiral"
        return "elliptical"

    catalogue_read = RepresentationRelation(
        "social.catalogue-read",
        floor,
        classes,
        LookupRule({(p, m): catalogue(p, m) for (p, m) in enumerate_values(floor)}),
    )

    human_settle = identity_dynamics("social.human-settle", pictures)
    machine_settle = identity_dynamics("social.machine-settle", memory)
    hold_tags = AbstractDynamics("social.hold-tags", tags, BuiltinRule("identity"))
    hold_tallies = AbstractDynamics("social.hold-tallies", tallies, BuiltinRule("identity"))
    publish = AbstractDynamics("social.publish", classes, BuiltinRule("identity"))

    picture_states = tuple(PhysicalState(pictures, v) for v in pictures.labels)
    memory_states = tuple(PhysicalState(memory, v) for v in memory.labels)
    human = Theory(
        id="social.human",
        representation=human_read,
        domain=picture_states,
        predictions=(Prediction("tag", hold_tags, human_settle),),
        instantiation=InstantiationProcedure(picture_states, human_settle),
    )
    machine = Theory(
        id="social.machine",
        representation=machine_read,
        domain=memory_states,
        predictions=(Prediction("tally", hold_tallies, machine_settle),),
        instantiation=InstantiationProcedure(memory_states, machine_settle),
    )

    galaxy_zoo = JointSystem(
        id="social.galaxy-zoo",
        left=Component(human, hold_tags),
        right=Component(machine, hold_tallies),
        joint_space=floor,
        joint_representation=catalogue_read,
        joint_dynamics=publish,
        provenance="declared",
    )
    side_by_side = componentwise_joint(
        "social.side-by-side",
        Component(human, hold_tags),
        Component(machine, hold_tallies),
        "composed-parallel",
    )

    checks = (
        CheckSpec(name="validate-human", kind="validate-theory", theory="social.human"),
        CheckSpec(name="validate-machine", kind="validate-theory", theory="social.machine"),
        CheckSpec(
            name="classify-galaxy-zoo",
            kind="classify",
            joint="social.galaxy-zoo",
            expect_class="Heterotic",
            oracle=True,
        ),
        CheckSpec(
            name="classify-side-by-side",
            kind="classify",
            joint="social.side-by-side",
            expect_class="Hybrid",
            oracle=True,
        ),
    )

    return ScenarioBundle(
        format_version=FORMAT_VERSION,
        abstract_spaces=(tags, tallies, classes),
        physical_spaces=(pictures, memory, floor),
        relations=(human_read, machine_read, catalogue_read),
        abstract_dynamics=(hold_tags, hold_tallies, publish),
        physical_dynamics=(human_settle, machine_settle),
        theories=(human, machine),
        embeddings=(),
        stacks=(),
        joints=(galaxy_zoo, side_by_side),
        checks=checks,
    )


def build_xor_joint(joint_rule: str = "xor") -> ScenarioBundle:
    """Two one-bit cells whose joint dynamics may couple the halves.

    The joint representation reads the cells independently, so the class is
    decided entirely by the dynamics: ``xor`` writes the parity of both bits
    into the first cell and cannot be split into per-cell actions, while the
    ``not-first`` and ``identity`` variants factor and classify as hybrid.
    """
    if joint_rule not in ("xor", "not-first", "identity"):
        raise ValueError(f"unknown joint rule {joint_rule!r}")
    left_cell = PhysicalLabelSpace("xor.left.cell", ("off", "on"))
    right_cell = PhysicalLabelSpace("xor.right.cell", ("off", "on"))
    cells = PhysicalTupleSpace("xor.cells", (left_cell, right_cell))
    bit = BitSpace("xor.bit", 1)
    pair = TupleSpace("xor.pair", (bit, bit))

    left_read = RepresentationRelation(
        "xor.left.read", left_cell, bit, LookupRule({"off": "0", "on": "1"})
    )
    right_read = RepresentationRelation(
        "xor.right.read", right_cell, bit, LookupRule({"off": "0", "on": "1"})
    )
    read_pair = RepresentationRelation(
        "xor.read-pair", cells, pair, TupleWiseRule((left_read, right_read))
    )

    left_hold = identity_dynamics("xor.left.hold", left_cell)
    right_hold = identity_dynamics("xor.right.hold", right_cell)
    keep_bit = AbstractDynamics("xor.keep-bit", bit, BuiltinRule("identity"))

    if joint_rule == "xor":
        joint_dyn = AbstractDynamics("xor.couple", pair, BuiltinRule("xor"))
    elif joint_rule == "not-first":
        flip = {"0": "1", "1": "0"}
        joint_dyn = AbstractDynamics(
            "xor.flip-first",
            pair,
            TableRule({(a, b): (flip[a], b) for (a, b) in enumerate_values(pair)}),
        )
    else:
        joint_dyn = AbstractDynamics("xor.keep-pair", pair, BuiltinRule("identity"))

    left_states = tuple(PhysicalState(left_cell, v) for v in left_cell.labels)
    right_states = tuple(PhysicalState(right_cell, v) for v in right_cell.labels)
    left_theory = Theory(
        id="xor.left",
        representation=left_read,
        domain=left_states,
        predictions=(Prediction("hold", keep_bit, left_hold),),
        instantiation=InstantiationProcedure(left_states, left_hold),
    )
    right_theory = Theory(
        id="xor.right",
        representation=right_read,
        domain=right_states,
        predictions=(Prediction("hold", keep_bit, right_hold),),
        instantiation=InstantiationProcedure(right_states, right_hold),
    )

    joint = JointSystem(
        id="xor.joint",
        left=Component(left_theory, keep_bit),
        right=Component(right_theory, keep_bit),
        joint_space=cells,
        joint_representation=read_pair,
        joint_dynamics=joint_dyn,
        provenance="declared",
    )

    expected = "Heterotic" if joint_rule == "xor" else "Hybrid"
    checks = (
        CheckSpec(name="validate-left", kind="validate-theory", theory="xor.left"),
        CheckSpec(name="validate-right", kind="validate-theory", theory="xor.right"),
        CheckSpec(
            name="classify-joint",
            kind="classify",
            joint="xor.joint",
            expect_class=expected,
            oracle=True,
        ),
    )

    return ScenarioBundle(
        format_version=FORMAT_VERSION,
        abstract_spaces=(bit, pair),
        physical_spaces=(left_cell, right_cell, cells),
        relations=(left_read, right_read, read_pair),
        abstract_dynamics=(keep_bit, joint_dyn),
        physical_dynamics=(left_hold, right_hold),
        theories=(left_theory, right_theory),
        embeddings=(),
        stacks=(),
        joints=(joint,),
        checks=checks,
    )


BUILTIN_SCENARIOS = {
    "voltage-adder": build_voltage_adder,
    "voltage-adder-noisy": lambda: build_voltage_adder(0.1),
    "voltage-adder-faulted": lambda: build_voltage_adder(faulted=True),
    "refinement-stack": build_refinement_stack,
    "refinement-stack-miswired": lambda: build_refinement_stack(mis_declared=True),
    "swap-device": build_swap_device,
    "social-machine": build_social_machine,
    "xor-joint": build_xor_joint,
}
