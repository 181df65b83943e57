import itertools

import pytest
from hypothesis import given, strategies as st

from abrep import (
    ABSOLUTE_DIFFERENCE,
    AbstractState,
    BitSpace,
    DISCRETE,
    HAMMING,
    IntSpace,
    LabelSpace,
    MAX_COORDINATE,
    MetricMismatch,
    NotEnumerable,
    OutOfDomain,
    PhysicalLabelSpace,
    PhysicalState,
    RealVectorSpace,
    TupleSpace,
    cardinality,
    contains,
    distance,
    enumerate_states,
    enumerate_values,
)
from abrep.errors import DeclarationError

BITS2 = BitSpace("b2", 2)
UPDOWN = LabelSpace("switch", ("up", "down"))
SMALL_INT = IntSpace("n", 0, 5)
PAIR = TupleSpace("pair", (BITS2, SMALL_INT))
VOLTS = RealVectorSpace("v3", ((0.0, 5.0),) * 3)


def test_contains_bitstring_membership():
    assert contains(BITS2, "01")
    assert not contains(BITS2, "011")
    assert not contains(BITS2, "0x")


def test_contains_label_lookup():
    assert contains(UPDOWN, "up")
    assert not contains(UPDOWN, "sideways")


def test_contains_checks_space_reference():
    other = BitSpace("b3", 3)
    state = AbstractState(other, "011")
    assert not contains(BITS2, state)
    assert contains(other, state)


def test_state_construction_rejects_non_members():
    with pytest.raises(OutOfDomain):
        AbstractState(BITS2, "011")
    with pytest.raises(OutOfDomain):
        PhysicalState(VOLTS, (6.0, 0.0, 0.0))
    with pytest.raises(OutOfDomain):
        AbstractState(SMALL_INT, True)


def test_space_declaration_invariants():
    with pytest.raises(DeclarationError):
        LabelSpace("empty", ())
    with pytest.raises(DeclarationError):
        LabelSpace("dup", ("a", "a"))
    with pytest.raises(DeclarationError):
        BitSpace("w0", 0)
    with pytest.raises(DeclarationError):
        IntSpace("bad", 3, 1)
    with pytest.raises(DeclarationError):
        RealVectorSpace("bad", ((1.0, 0.0),))


def test_distance_examples():
    a = AbstractState(BITS2, "01")
    assert distance(HAMMING, a, AbstractState(BITS2, "01")) == 0
    assert distance(HAMMING, a, AbstractState(BITS2, "11")) == 1
    three = AbstractState(SMALL_INT, 3)
    one = AbstractState(SMALL_INT, 1)
    assert distance(ABSOLUTE_DIFFERENCE, three, one) == 2


def test_distance_rejects_cross_space_comparison():
    with pytest.raises(MetricMismatch):
        distance(DISCRETE, AbstractState(BITS2, "01"), AbstractState(SMALL_INT, 1))


def test_distance_rejects_inapplicable_metric():
    with pytest.raises(MetricMismatch):
        distance(HAMMING, AbstractState(SMALL_INT, 1), AbstractState(SMALL_INT, 2))
    with pytest.raises(MetricMismatch):
        distance(MAX_COORDINATE, AbstractState(BITS2, "01"), AbstractState(BITS2, "10"))


def test_max_coordinate_on_vectors_and_tuples():
    a = PhysicalState(VOLTS, (5.0, 0.0, 2.5))
    b = PhysicalState(VOLTS, (0.0, 0.0, 3.0))
    assert distance(MAX_COORDINATE, a, b) == 5.0
    pair_a = AbstractState(PAIR, ("01", 2))
    pair_b = AbstractState(PAIR, ("10", 5))
    assert distance(MAX_COORDINATE, pair_a, pair_b) == 3.0


def test_enumerate_examples():
    assert list(enumerate_values(BITS2)) == ["00", "01", "10", "11"]
    assert list(enumerate_values(UPDOWN)) == ["up", "down"]
    assert list(enumerate_values(SMALL_INT)) == [0, 1, 2, 3, 4, 5]
    with pytest.raises(NotEnumerable):
        list(enumerate_values(VOLTS))


def test_enumerate_tuple_row_major():
    small = TupleSpace("t", (LabelSpace("ab", ("a", "b")), BitSpace("b1", 1)))
    assert list(enumerate_values(small)) == [
        ("a", "0"),
        ("a", "1"),
        ("b", "0"),
        ("b", "1"),
    ]


FINITE_SPACES = [BITS2, UPDOWN, SMALL_INT, PAIR, PhysicalLabelSpace("p", ("x", "y", "z"))]


@pytest.mark.parametrize("space", FINITE_SPACES, ids=lambda s: s.id)
def test_enumeration_matches_cardinality_and_membership(space):
    states = enumerate_states(space)
    assert len(states) == cardinality(space)
    assert len({s.value for s in states}) == len(states)
    for s in states:
        assert contains(space, s)


@pytest.mark.parametrize("space", FINITE_SPACES, ids=lambda s: s.id)
def test_enumeration_is_stable(space):
    assert list(enumerate_values(space)) == list(enumerate_values(space))


def _applicable_metrics(space):
    metrics = [DISCRETE]
    if isinstance(space, BitSpace):
        metrics.append(HAMMING)
    if isinstance(space, IntSpace):
        metrics.append(ABSOLUTE_DIFFERENCE)
    if isinstance(space, TupleSpace):
        metrics.append(MAX_COORDINATE)
    return metrics


@pytest.mark.parametrize("space", [BITS2, SMALL_INT, PAIR], ids=lambda s: s.id)
def test_metric_axioms_on_all_pairs(space):
    states = enumerate_states(space)
    for metric in _applicable_metrics(space):
        for a, b in itertools.product(states, states):
            d = distance(metric, a, b)
            assert d >= 0
            assert d == distance(metric, b, a)
            if a == b:
                assert d == 0
        if metric in (DISCRETE, HAMMING):
            for a, b in itertools.product(states, states):
                if distance(metric, a, b) == 0:
                    assert a == b


@given(
    width=st.integers(min_value=1, max_value=4),
    data=st.data(),
)
def test_hamming_identity_of_indiscernibles(width, data):
    space = BitSpace("b", width)
    values = list(enumerate_values(space))
    a = data.draw(st.sampled_from(values))
    b = data.draw(st.sampled_from(values))
    d = distance(HAMMING, AbstractState(space, a), AbstractState(space, b))
    assert (d == 0) == (a == b)
    assert d <= width
