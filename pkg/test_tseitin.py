"""
Tests for the CNF builder and its gate definitions
"""
import itertools

import pytest

import sys
import os
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from src.core import Literal
from src.errors import ArityError
from src.tseitin import CnfBuilder, GateKind


def x(variable: int, polarity: bool = True) -> Literal:
    return Literal(variable, polarity)


def holds(clauses, assignment) -> bool:
    return all(any(literal.value(assignment) for literal in clause) for clause in clauses)


def gate_values(builder: CnfBuilder, inputs, z: Literal, assignment):
    """Values of z that extend `assignment` to a model of the builder's clauses"""
    values = []
    for value in (False, True):
        extended = dict(assignment)
        extended[z.variable] = value == z.polarity
        if holds(builder.clauses, extended):
            values.append(value)
    return values


def test_or_gate_clauses():
    builder = CnfBuilder(first_var=3)
    z = builder.define_gate(GateKind.OR, [x(1), x(2)])
    assert z == x(3)
    assert list(builder.clauses) == [(-z, x(1), x(2)), (z, x(1, False)), (z, x(2, False))]


def test_and_gate_clauses():
    builder = CnfBuilder(first_var=3)
    z = builder.define_gate(GateKind.AND, [x(1), x(2)])
    assert list(builder.clauses) == [(-z, x(1)), (-z, x(2)), (z, x(1, False), x(2, False))]


def test_not_gate_clauses():
    builder = CnfBuilder(first_var=2)
    z = builder.define_gate(GateKind.NOT, [x(1)])
    assert list(builder.clauses) == [(-z, x(1, False)), (z, x(1))]


def test_unary_gates_return_their_input():
    builder = CnfBuilder(first_var=2)
    assert builder.define_gate(GateKind.AND, [x(1)]) == x(1)
    assert builder.define_gate(GateKind.OR, [x(1, False)]) == x(1, False)
    assert len(builder.clauses) == 0
    assert builder.next_var == 2


def test_gate_arity_errors():
    builder = CnfBuilder(first_var=3)
    with pytest.raises(ArityError):
        builder.define_gate(GateKind.NOT, [x(1), x(2)])
    with pytest.raises(ArityError):
        builder.define_gate(GateKind.AND, [])


@pytest.mark.parametrize("kind", [GateKind.AND, GateKind.OR])
@pytest.mark.parametrize("width", [1, 2, 3, 5])
def test_gate_defines_exactly_its_function(kind, width):
    builder = CnfBuilder(first_var=width + 1)
    inputs = [x(i + 1, i % 2 == 0) for i in range(width)]
    z = builder.define_gate(kind, inputs)
    for values in itertools.product((False, True), repeat=width):
        assignment = dict(zip(range(1, width + 1), values))
        truth = [literal.value(assignment) for literal in inputs]
        expected = all(truth) if kind is GateKind.AND else any(truth)
        if z.variable <= width:
            assert z.value(assignment) == expected
        else:
            assert gate_values(builder, inputs, z, assignment) == [expected]


def test_ite_defines_exactly_its_function():
    builder = CnfBuilder(first_var=4)
    z = builder.define_ite(x(1), x(2), x(3, False))
    assert len(builder.clauses) == 5
    for values in itertools.product((False, True), repeat=3):
        assignment = dict(zip((1, 2, 3), values))
        expected = values[1] if values[0] else not values[2]
        assert gate_values(builder, None, z, assignment) == [expected]


def test_constant_folding():
    builder = CnfBuilder(first_var=3)
    assert builder.define_gate(GateKind.AND, [x(1), builder.true]) == x(1)
    assert builder.define_gate(GateKind.OR, [x(1), builder.true]) == builder.true
    assert builder.define_gate(GateKind.AND, [x(1), x(1, False)]) == builder.false
    assert builder.define_gate(GateKind.OR, [x(1), x(1, False)]) == builder.true
    assert builder.define_gate(GateKind.NOT, [builder.true]) == builder.false
    assert builder.define_ite(x(1), builder.true, builder.false) == x(1)
    assert builder.define_ite(x(1), builder.false, builder.true) == x(1, False)
    assert builder.define_ite(x(1), x(2), x(2)) == x(2)
    # only the unit clause of the constant variable
    assert list(builder.clauses) == [(builder.true,)]


def test_constants_allocated_lazily_once():
    builder = CnfBuilder(first_var=5)
    assert builder.next_var == 5
    true = builder.true
    assert builder.true == true
    assert builder.false == -true
    assert builder.next_var == 6
    assert list(builder.clauses) == [(true,)]


def test_add_clause_simplifies_constants():
    builder = CnfBuilder(first_var=3)
    builder.add_clause([x(1), builder.true])
    builder.add_clause([x(1), builder.false])
    builder.add_clause([builder.false])
    assert list(builder.clauses)[1:] == [(x(1),), (builder.false,)]


def test_conjunction_root():
    builder = CnfBuilder(first_var=6)
    parts = [x(2), x(3), x(5)]
    v = builder.define_conjunction_root(parts)
    assert len(builder.clauses) == 4
    assert (v, x(2, False), x(3, False), x(5, False)) in list(builder.clauses)
    assert builder.define_conjunction_root([x(4)]) == x(4)
    empty = builder.define_conjunction_root([])
    assert builder.is_true(empty)


def test_exactly_one():
    builder = CnfBuilder(first_var=4)
    literals = [x(1), x(2), x(3)]
    builder.exactly_one(literals)
    for values in itertools.product((False, True), repeat=3):
        assignment = dict(zip((1, 2, 3), values))
        assert holds(builder.clauses, assignment) == (sum(values) == 1)


def test_stage_records_allocated_range_and_ids_never_repeat():
    builder = CnfBuilder.for_variables([1, 4, 2])
    assert builder.first_var == 5
    with builder.stage("gates"):
        first = builder.new_var()
        second = builder.new_var()
    with builder.stage("empty"):
        pass
    assert (first, second) == (5, 6)
    assert builder.stages == [("gates", 5, 6)]
    t = builder.translation(x(6), [1, 2, 4])
    assert t.aux_vars == frozenset({5, 6})
    assert t.input_vars == frozenset({1, 2, 4})
