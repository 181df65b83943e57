import itertools

import pytest
from hypothesis import given, settings, strategies as st

from abrep import (
    AbstractDynamics,
    AbstractState,
    BinarySumUpdate,
    BitSpace,
    BuiltinRule,
    ConstantUpdate,
    CoordinateFlipNoise,
    CoordinateUpdateRule,
    IntSpace,
    LabelFlipNoise,
    OutOfDomain,
    PhysicalDynamics,
    PhysicalLabelSpace,
    PhysicalState,
    RealVectorSpace,
    SpaceMismatch,
    TableRule,
    TrialSeed,
    TupleSpace,
    compose_dynamics,
    derive_seed,
    enumerate_states,
    enumerate_values,
    evolve_abstract,
    evolve_physical,
    identity_dynamics,
)
from abrep.errors import DeclarationError


def machine_space(width: int) -> TupleSpace:
    reg = BitSpace(f"reg{width}", width)
    out = BitSpace(f"out{width + 1}", width + 1)
    return TupleSpace(f"m{width}", (reg, reg, out))


def test_ripple_add_worked_example():
    add = AbstractDynamics("add", machine_space(2), BuiltinRule("ripple-add"))
    state = AbstractState(add.space, ("01", "10", "000"))
    assert evolve_abstract(add, state).value == ("01", "10", "011")


@pytest.mark.parametrize("width", [1, 2, 3, 4])
def test_ripple_add_agrees_with_integer_addition(width):
    add = AbstractDynamics("add", machine_space(width), BuiltinRule("ripple-add"))
    for state in enumerate_states(add.space):
        x, y, _ = state.value
        out = evolve_abstract(add, state).value
        # independent oracle: plain integer arithmetic
        assert int(out[2], 2) == int(x, 2) + int(y, 2)
        assert out[:2] == (x, y)


def test_identity_and_swap_builtins():
    bits = BitSpace("b2", 2)
    ident = AbstractDynamics("i", bits, BuiltinRule("identity"))
    m = AbstractState(bits, "10")
    assert evolve_abstract(ident, m) == m

    pair = TupleSpace("pp", (IntSpace("d", 0, 9), IntSpace("d", 0, 9)))
    swap = AbstractDynamics("s", pair, BuiltinRule("swap-pair"))
    assert evolve_abstract(swap, AbstractState(pair, (7, 9))).value == (9, 7)
    assert evolve_abstract(swap, AbstractState(pair, (4, 4))).value == (4, 4)


def test_and_xor_builtins_match_bit_arithmetic():
    bit = BitSpace("b1", 1)
    pair = TupleSpace("bp", (bit, bit))
    conj = AbstractDynamics("conj", pair, BuiltinRule("and"))
    parity = AbstractDynamics("parity", pair, BuiltinRule("xor"))
    for a, b in itertools.product("01", repeat=2):
        state = AbstractState(pair, (a, b))
        assert evolve_abstract(conj, state).value == (str(int(a) & int(b)), b)
        assert evolve_abstract(parity, state).value == (str(int(a) ^ int(b)), b)


def test_bit_not_is_an_involution():
    bits = BitSpace("b3", 3)
    flip = AbstractDynamics("f", bits, BuiltinRule("bit-not"))
    chained = compose_dynamics(flip, flip)
    for state in enumerate_states(bits):
        assert evolve_abstract(chained, state) == state


def test_compose_identity_is_neutral():
    bits = BitSpace("b2", 2)
    ident = AbstractDynamics("i", bits, BuiltinRule("identity"))
    flip = AbstractDynamics("f", bits, BuiltinRule("bit-not"))
    composed = compose_dynamics(ident, flip)
    for state in enumerate_states(bits):
        assert evolve_abstract(composed, state) == evolve_abstract(flip, state)


def test_staged_ripple_add_chain_equals_direct_table():
    space = machine_space(2)
    # stage 1 parks the first register in the output; stage 2 adds the second
    stage1 = AbstractDynamics(
        "park",
        space,
        TableRule({(x, y, z): (x, y, "0" + x) for (x, y, z) in enumerate_values(space)}),
    )
    stage2 = AbstractDynamics(
        "accumulate",
        space,
        TableRule(
            {
                (x, y, z): (x, y, format((int(z, 2) + int(y, 2)) % 8, "03b"))
                for (x, y, z) in enumerate_values(space)
            }
        ),
    )
    chained = compose_dynamics(stage1, stage2)
    direct = AbstractDynamics("add", space, BuiltinRule("ripple-add"))
    for state in enumerate_states(space):
        assert evolve_abstract(chained, state) == evolve_abstract(direct, state)


def test_compose_rejects_space_mismatch():
    a = AbstractDynamics("a", BitSpace("b1", 1), BuiltinRule("identity"))
    b = AbstractDynamics("b", BitSpace("b2", 2), BuiltinRule("identity"))
    with pytest.raises(SpaceMismatch):
        compose_dynamics(a, b)


def test_builtin_shape_validation():
    with pytest.raises(DeclarationError):
        AbstractDynamics("bad", BitSpace("b2", 2), BuiltinRule("swap-pair"))
    with pytest.raises(DeclarationError):
        AbstractDynamics("bad", machine_space(2), BuiltinRule("bit-not"))
    uneven = TupleSpace("u", (BitSpace("x", 2), BitSpace("y", 2), BitSpace("z", 2)))
    with pytest.raises(DeclarationError):
        AbstractDynamics("bad", uneven, BuiltinRule("ripple-add"))


def test_table_rule_must_be_total_without_extras():
    bits = BitSpace("b1", 1)
    with pytest.raises(DeclarationError):
        AbstractDynamics("partial", bits, TableRule({"0": "1"}))
    with pytest.raises(DeclarationError):
        AbstractDynamics("extra", bits, TableRule({"0": "1", "1": "0", "x": "0"}))


VOLTS = RealVectorSpace("v7", ((0.0, 5.0),) * 7)
ADDER_RULE = CoordinateUpdateRule((BinarySumUpdate((0, 1), (2, 3), (4, 5, 6), 2.5, 0.0, 5.0),))


def encode(bits: str) -> tuple[float, ...]:
    return tuple(5.0 if c == "1" else 0.0 for c in bits)


def test_binary_sum_update_writes_voltage_sum():
    device = PhysicalDynamics("adder", VOLTS, ADDER_RULE)
    start = PhysicalState(VOLTS, encode("01" + "10" + "000"))
    out = evolve_physical(device, start, TrialSeed(0))
    assert out.value == encode("01" + "10" + "011")


def test_constant_update_overrides_in_order():
    device = PhysicalDynamics(
        "stuck",
        VOLTS,
        CoordinateUpdateRule(
            (
                BinarySumUpdate((0, 1), (2, 3), (4, 5, 6), 2.5, 0.0, 5.0),
                ConstantUpdate((6,), (0.0,)),
            )
        ),
    )
    start = PhysicalState(VOLTS, encode("01" + "10" + "000"))
    out = evolve_physical(device, start, TrialSeed(0))
    assert out.value == encode("01" + "10" + "010")


def test_identity_rule_with_no_noise_returns_input():
    device = identity_dynamics("hold", VOLTS)
    p = PhysicalState(VOLTS, (1.0, 2.0, 3.0, 4.0, 5.0, 0.0, 2.5))
    assert evolve_physical(device, p, TrialSeed(9)) == p


def test_full_flip_probability_always_flips():
    noisy = PhysicalDynamics(
        "noisy",
        VOLTS,
        CoordinateUpdateRule(()),
        CoordinateFlipNoise(1.0, (0,), 2.5, 0.0, 5.0),
    )
    low = PhysicalState(VOLTS, (0.0,) * 7)
    high = PhysicalState(VOLTS, (5.0,) + (0.0,) * 6)
    for seed in range(20):
        assert evolve_physical(noisy, low, TrialSeed(seed)).value[0] == 5.0
        assert evolve_physical(noisy, high, TrialSeed(seed)).value[0] == 0.0


def test_zero_flip_probability_never_flips():
    noisy = PhysicalDynamics(
        "quiet",
        VOLTS,
        CoordinateUpdateRule(()),
        CoordinateFlipNoise(0.0, (0, 1, 2), 2.5, 0.0, 5.0),
    )
    p = PhysicalState(VOLTS, (5.0, 0.0, 5.0, 0.0, 0.0, 0.0, 0.0))
    for seed in range(20):
        assert evolve_physical(noisy, p, TrialSeed(seed)) == p


def test_evolution_is_deterministic_per_seed_and_varies_across_trials():
    noisy = PhysicalDynamics(
        "noisy",
        VOLTS,
        CoordinateUpdateRule(()),
        CoordinateFlipNoise(0.5, tuple(range(7)), 2.5, 0.0, 5.0),
    )
    p = PhysicalState(VOLTS, (0.0,) * 7)
    base = TrialSeed(42)
    outputs = [evolve_physical(noisy, p, derive_seed(base, k)) for k in range(32)]
    again = [evolve_physical(noisy, p, derive_seed(base, k)) for k in range(32)]
    assert outputs == again
    assert len({o.value for o in outputs}) > 1


@settings(max_examples=40)
@given(seed_a=st.integers(0, 2**32), seed_b=st.integers(0, 2**32))
def test_noise_free_dynamics_ignore_the_seed(seed_a, seed_b):
    device = PhysicalDynamics("adder", VOLTS, ADDER_RULE)
    p = PhysicalState(VOLTS, encode("1101000"))
    assert evolve_physical(device, p, TrialSeed(seed_a)) == evolve_physical(
        device, p, TrialSeed(seed_b)
    )


def test_label_noise_requires_total_partner_map():
    cells = PhysicalLabelSpace("c", ("a", "b", "c"))
    with pytest.raises(DeclarationError):
        PhysicalDynamics(
            "noisy",
            cells,
            TableRule({l: l for l in cells.labels}),
            LabelFlipNoise(0.5, {"a": "b"}),
        )


def test_label_noise_flips_to_partner():
    cells = PhysicalLabelSpace("c", ("a", "b"))
    noisy = PhysicalDynamics(
        "noisy",
        cells,
        TableRule({"a": "a", "b": "b"}),
        LabelFlipNoise(1.0, {"a": "b", "b": "a"}),
    )
    assert evolve_physical(noisy, PhysicalState(cells, "a"), TrialSeed(0)).value == "b"


def test_noise_on_tuple_space_is_rejected():
    cells = PhysicalLabelSpace("c", ("a", "b"))
    from abrep import PhysicalTupleSpace

    pair = PhysicalTupleSpace("cc", (cells, cells))
    with pytest.raises(DeclarationError):
        PhysicalDynamics(
            "noisy",
            pair,
            TableRule({v: v for v in enumerate_values(pair)}),
            CoordinateFlipNoise(0.5, (0,), 0.5, 0.0, 1.0),
        )


def test_evolve_rejects_foreign_states():
    device = PhysicalDynamics("adder", VOLTS, ADDER_RULE)
    other = RealVectorSpace("v2", ((0.0, 5.0),) * 2)
    with pytest.raises(OutOfDomain):
        evolve_physical(device, PhysicalState(other, (0.0, 0.0)), TrialSeed(0))
    add = AbstractDynamics("add", machine_space(2), BuiltinRule("ripple-add"))
    with pytest.raises(OutOfDomain):
        evolve_abstract(add, AbstractState(BitSpace("b", 2), "01"))


def test_update_levels_validated_against_bounds():
    with pytest.raises(DeclarationError):
        PhysicalDynamics(
            "bad",
            VOLTS,
            CoordinateUpdateRule((ConstantUpdate((0,), (9.0,)),)),
        )
    with pytest.raises(DeclarationError):
        PhysicalDynamics(
            "bad",
            VOLTS,
            CoordinateUpdateRule((BinarySumUpdate((0, 9), (2, 3), (4, 5, 6), 2.5, 0.0, 5.0),)),
        )
