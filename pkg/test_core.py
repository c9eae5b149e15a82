"""
Tests for literals, constraints, evaluation and normalization
"""
import itertools
import random

import pytest

import sys
import os
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from src.core import (
    ClauseSet, Literal, NormalizedPB, NormalStatus, PBConstraint, PBModConstraint, Relation,
    Translation, evaluate_normalized, evaluate_pb, evaluate_pbmod, normalize, satisfies,
)
from src.errors import BadModulus, DuplicateVariable, UnassignedVariable


def x(variable: int, polarity: bool = True) -> Literal:
    return Literal(variable, polarity)


EXAMPLE_ONE = PBConstraint([(1, x(1)), (2, x(2)), (3, x(3)), (4, x(4)), (5, x(5))], Relation.EQ, 7)


def random_constraint(rng: random.Random, max_vars: int = 5, max_coefficient: int = 20) -> PBConstraint:
    n = rng.randint(1, max_vars)
    terms = [(rng.randint(-max_coefficient, max_coefficient), x(i + 1, rng.random() < 0.7)) for i in range(n)]
    bound = rng.randint(-max_coefficient, max_coefficient * n // 2)
    return PBConstraint(terms, rng.choice(list(Relation)), bound)


def test_literal_negation_is_involution():
    literal = x(3)
    assert -literal == x(3, False)
    assert -(-literal) == literal
    assert (-literal).to_dimacs() == -3
    assert Literal.from_dimacs(-3) == -literal
    assert str(-literal) == "~x3"


def test_literal_rejects_nonpositive_variable():
    with pytest.raises(ValueError):
        Literal(0)


def test_duplicate_variable_rejected():
    with pytest.raises(DuplicateVariable):
        PBConstraint([(1, x(1)), (2, x(1, False))], Relation.EQ, 1)


def test_evaluate_pb_examples():
    q = PBConstraint([(2, x(1)), (4, x(2, False))], Relation.EQ, 3)
    assert evaluate_pb(q, {1: True, 2: True}) is False
    assert evaluate_pb(PBConstraint([], Relation.EQ, 0), {}) is True
    solution = {1: False, 2: True, 3: False, 4: False, 5: True}
    assert evaluate_pb(EXAMPLE_ONE, solution) is True


def test_evaluate_pb_requires_total_assignment():
    with pytest.raises(UnassignedVariable):
        evaluate_pb(EXAMPLE_ONE, {1: True})


def test_evaluate_pbmod_examples():
    assert evaluate_pbmod(PBModConstraint([(1, x(1)), (2, x(2))], 0, 3), {1: True, 2: True})
    assert evaluate_pbmod(PBModConstraint([(4, x(1)), (2, x(2))], 0, 3), {1: False, 2: False})
    mod_two = PBModConstraint([(1, x(1)), (0, x(2)), (1, x(3)), (0, x(4)), (1, x(5))], 1, 2)
    assert evaluate_pbmod(mod_two, {1: False, 2: True, 3: False, 4: False, 5: True})


def test_pbmod_reduces_coefficients_and_bound():
    qm = PBModConstraint([(7, x(1)), (-1, x(2))], 8, 3)
    assert qm.terms == ((1, x(1)), (2, x(2)))
    assert qm.bound == 2
    assert qm.nonzero_terms() == qm.terms
    with pytest.raises(BadModulus):
        PBModConstraint([(1, x(1))], 0, 1)


def test_normalize_greater_equal_with_negative_coefficient():
    q = normalize(PBConstraint([(3, x(1)), (-2, x(2))], Relation.GE, 1))
    assert q.status is NormalStatus.PROPER
    assert q.terms == ((3, x(1, False)), (2, x(2)), (1, x(3)), (2, x(4)))
    assert q.bound == 2
    assert q.slack_vars == (3, 4)
    assert q.input_vars == (1, 2)
    assert q.encoded_vars == (1, 2, 3, 4)


def test_normalize_passes_proper_equality_through():
    source = PBConstraint([(2, x(1)), (4, x(2, False))], Relation.EQ, 3)
    q = normalize(source)
    assert q.is_proper
    assert q.terms == source.terms
    assert q.bound == 3
    assert q.slack_vars == ()


def test_normalize_strict_less_than_one_forces_all_false():
    q = normalize(PBConstraint([(1, x(1)), (1, x(2))], Relation.LT, 1))
    assert q.is_proper
    assert q.terms == ((1, x(1)), (1, x(2)))
    assert q.bound == 0


def test_normalize_constant_outcomes():
    assert normalize(PBConstraint([(1, x(1)), (1, x(2))], Relation.LE, 5)).status is NormalStatus.CONST_TRUE
    assert normalize(PBConstraint([(1, x(1)), (1, x(2))], Relation.GE, 3)).status is NormalStatus.CONST_FALSE
    assert normalize(PBConstraint([(2, x(1))], Relation.EQ, 3)).status is NormalStatus.CONST_FALSE
    assert normalize(PBConstraint([(2, x(1))], Relation.EQ, -1)).status is NormalStatus.CONST_FALSE
    constant = normalize(PBConstraint([(1, x(1)), (1, x(2))], Relation.GE, 3))
    assert constant.input_vars == (1, 2)


def test_normalize_equality_flips_negative_coefficients():
    q = normalize(PBConstraint([(-3, x(1)), (2, x(2))], Relation.EQ, -1))
    assert q.terms == ((3, x(1, False)), (2, x(2)))
    assert q.bound == 2


@pytest.mark.parametrize("seed", range(4))
def test_normalize_preserves_projected_solutions(seed):
    rng = random.Random(seed)
    for _ in range(100):
        source = random_constraint(rng)
        q = normalize(source)
        if q.is_proper:
            assert all(coefficient >= 1 for coefficient, _ in q.terms)
            assert 0 <= q.bound <= q.total
        variables = source.variables
        for values in itertools.product((False, True), repeat=len(variables)):
            assignment = dict(zip(variables, values))
            expected = evaluate_pb(source, assignment)
            assert evaluate_normalized(q, assignment) == expected
            if q.slack_vars:
                extended = any(
                    evaluate_normalized(q, {**assignment, **dict(zip(q.slack_vars, slack))})
                    for slack in itertools.product((False, True), repeat=len(q.slack_vars))
                )
                assert extended == expected


def test_greater_equal_agrees_with_greater_than_bound_minus_one():
    rng = random.Random(7)
    for _ in range(50):
        source = random_constraint(rng)
        ge = PBConstraint(source.terms, Relation.GE, source.bound)
        gt = PBConstraint(source.terms, Relation.GT, source.bound - 1)
        for values in itertools.product((False, True), repeat=len(source.terms)):
            assignment = dict(zip(source.variables, values))
            assert evaluate_pb(ge, assignment) == evaluate_pb(gt, assignment)


def test_partially_assigned_slack_is_rejected():
    q = normalize(PBConstraint([(3, x(1)), (-2, x(2))], Relation.GE, 1))
    with pytest.raises(UnassignedVariable):
        evaluate_normalized(q, {1: True, 2: False, 3: True})


def test_satisfies_dispatches_on_constraint_type():
    assignment = {1: False, 2: True, 3: False, 4: False, 5: True}
    assert satisfies(EXAMPLE_ONE, assignment)
    assert satisfies(normalize(EXAMPLE_ONE), assignment)
    assert satisfies(PBModConstraint(EXAMPLE_ONE.terms, 7, 5), assignment)


def test_clause_set_drops_tautologies_and_merges_duplicates():
    clauses = ClauseSet()
    assert clauses.add([x(1), x(1, False)]) is None
    assert clauses.add([x(2), x(2), x(5, False)]) == (x(2), x(5, False))
    assert len(clauses) == 1
    assert clauses.max_var == 5
    assert clauses.literal_count == 2
    assert clauses.variables() == frozenset({2, 5})
    assert len(clauses.without(0)) == 0


def test_translation_rejects_overlapping_partition():
    with pytest.raises(ValueError):
        Translation(x(3), ClauseSet(), frozenset({1, 3}), frozenset({3}))


def test_normalized_constructor_validates_proper_form():
    with pytest.raises(ValueError):
        NormalizedPB(((0, x(1)),), 0)
    with pytest.raises(ValueError):
        NormalizedPB(((2, x(1)),), 3)
