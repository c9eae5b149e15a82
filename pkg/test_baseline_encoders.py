"""
Tests for the BDD, adder and sorting-network encoders
"""
import itertools
import random

import pytest

import sys
import os
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from config import settings
from src.baseline_encoders import PB_ENCODERS, encode_adder, encode_bdd, encode_constant, encode_sortnet
from src.core import Literal, NormalStatus, NormalizedPB, PBConstraint, Relation, normalize
from src.modular import encode_modular
from src.tseitin import CnfBuilder
from src.up_engine import (
    check_arc_consistency, check_valid_translation, enumerate_pb_solutions, translation_solutions,
    unit_propagate,
)


def x(variable: int, polarity: bool = True) -> Literal:
    return Literal(variable, polarity)


EXAMPLE_ONE = PBConstraint([(1, x(1)), (2, x(2)), (3, x(3)), (4, x(4)), (5, x(5))], Relation.EQ, 7)
Q1 = PBConstraint([(3, x(1)), (3, x(2)), (4, x(3))], Relation.EQ, 7)


def encode(pb: PBConstraint, encoder, **kwargs):
    builder = CnfBuilder.for_variables(pb.variables)
    q = normalize(pb, fresh=builder.new_var)
    return q, encoder(q, builder, **kwargs)


def true_sets(solutions):
    return [sorted(v for v, value in s.items() if value) for s in solutions]


def test_bdd_examples():
    q, t = encode(PBConstraint([(1, x(1)), (2, x(2))], Relation.EQ, 2), encode_bdd)
    assert translation_solutions(t) == [{1: False, 2: True}]
    q, t = encode(PBConstraint([(2, x(1)), (4, x(2, False))], Relation.EQ, 3), encode_bdd)
    assert q.is_proper
    result = unit_propagate(t.clauses)
    assert t.root.value(result.implied) is False


def test_bdd_short_circuits_unreachable_bound():
    q, t = encode(PBConstraint([(1, x(1)), (2, x(2))], Relation.EQ, 4), encode_bdd)
    assert q.status is NormalStatus.CONST_FALSE
    assert list(t.clauses) == [(-t.root,)]


def test_constant_true_translation():
    builder = CnfBuilder(first_var=3)
    q = NormalizedPB((), 0, status=NormalStatus.CONST_TRUE, input_vars=(1, 2))
    t = encode_constant(q, builder)
    assert builder.is_true(t.root)
    assert check_valid_translation(q, t).passed


def test_adder_q1_solutions():
    q, t = encode(Q1, encode_adder)
    assert true_sets(translation_solutions(t)) == [[2, 3], [1, 3]]
    assert check_valid_translation(q, t).passed


def test_adder_single_term_and_zero_bound():
    q, t = encode(PBConstraint([(5, x(1))], Relation.EQ, 5), encode_adder)
    assert translation_solutions(t) == [{1: True}]
    q, t = encode(PBConstraint([(2, x(1)), (3, x(2)), (1, x(3))], Relation.EQ, 0), encode_adder)
    assert translation_solutions(t) == [{1: False, 2: False, 3: False}]


def test_adder_size_is_linear_in_bits():
    rng = random.Random(3)
    for n in (4, 8, 12):
        terms = [(rng.randint(1, 1000), x(i + 1)) for i in range(n)]
        q, t = encode(PBConstraint(terms, Relation.EQ, 1000), encode_adder)
        assert t.num_clauses <= 50 * n * q.total.bit_length()


def test_sortnet_cardinality_is_a_single_sorter():
    q, t = encode(PBConstraint([(1, x(i)) for i in range(1, 5)], Relation.EQ, 2), encode_sortnet)
    assert [name for name, _, _ in t.stages] == ["sortnet"]
    assert [sum(s.values()) for s in translation_solutions(t)] == [2] * 6


def test_sortnet_agrees_with_bdd_on_q1():
    _, sortnet = encode(Q1, encode_sortnet, radix=4)
    _, bdd = encode(Q1, encode_bdd)
    assert translation_solutions(sortnet) == translation_solutions(bdd)


def test_sortnet_agrees_with_modular_on_example_one():
    _, sortnet = encode(EXAMPLE_ONE, encode_sortnet)
    builder = CnfBuilder.for_variables(EXAMPLE_ONE.variables)
    modular = encode_modular(normalize(EXAMPLE_ONE, fresh=builder.new_var), [2, 3, 5], "dp", builder)
    assert translation_solutions(sortnet) == translation_solutions(modular)


@pytest.mark.parametrize("radix", [2, 3, 4, 7])
def test_sortnet_radix_choices(radix):
    pb = PBConstraint([(9, x(1)), (6, x(2)), (5, x(3)), (4, x(4))], Relation.EQ, 15)
    q, t = encode(pb, encode_sortnet, radix=radix)
    assert check_valid_translation(q, t).passed


def test_sortnet_rejects_small_radix():
    with pytest.raises(ValueError):
        encode(Q1, encode_sortnet, radix=1)


def random_constraint(rng: random.Random, max_vars: int) -> PBConstraint:
    n = rng.randint(1, max_vars)
    terms = [(rng.randint(-8, 8), x(i + 1, rng.random() < 0.7)) for i in range(n)]
    return PBConstraint(terms, rng.choice(list(Relation)), rng.randint(-8, 4 * n))


def projected_solutions(t, variables):
    """Source assignments that some slack assignment extends to an accepted input"""
    variables = sorted(variables)
    accepted = {tuple(s[v] for v in variables) for s in translation_solutions(t)}
    return [
        dict(zip(variables, values))
        for values in itertools.product((False, True), repeat=len(variables))
        if values in accepted
    ]


@pytest.mark.parametrize("name", sorted(PB_ENCODERS))
def test_random_constraints_are_valid(name):
    rng = random.Random(17)
    for _ in range(20):
        pb = random_constraint(rng, 4)
        q, t = encode(pb, PB_ENCODERS[name])
        report = check_valid_translation(q, t)
        assert report.passed, (str(pb), report.reason, report.witness)


def test_baselines_agree_pairwise():
    rng = random.Random(18)
    for _ in range(20):
        pb = random_constraint(rng, 4)
        expected = enumerate_pb_solutions(pb)
        for name, encoder in PB_ENCODERS.items():
            _, t = encode(pb, encoder)
            assert projected_solutions(t, pb.variables) == expected, (name, str(pb))


def test_bdd_detects_every_dead_end():
    rng = random.Random(4)
    for _ in range(60):
        n = rng.randint(1, 5)
        pb = PBConstraint([(rng.randint(1, 7), x(i + 1)) for i in range(n)], Relation.EQ, rng.randint(0, 4 * n))
        q, t = encode(pb, encode_bdd)
        report = check_arc_consistency(q, t)
        assert report.up_detectable, str(pb)
        assert report.sound, str(pb)


def test_bdd_misses_a_forced_literal():
    q, t = encode(PBConstraint([(1, x(1)), (2, x(2)), (2, x(3))], Relation.EQ, 3), encode_bdd)
    report = check_arc_consistency(q, t)
    assert report.up_detectable
    assert not report.up_inferable


def random_normalized(rng: random.Random, max_vars: int = 8, max_coefficient: int = 20) -> NormalizedPB:
    n = rng.randint(1, max_vars)
    terms = [(rng.randint(1, max_coefficient), x(i + 1, rng.random() < 0.7)) for i in range(n)]
    return NormalizedPB(terms, rng.randint(0, sum(a for a, _ in terms)))


@pytest.mark.slow
def test_seeded_normalized_suite_is_valid_and_agrees():
    rng = random.Random(1000)
    for _ in range(settings.validation_instances):
        q = random_normalized(rng)
        expected = enumerate_pb_solutions(q)
        for name, encoder in PB_ENCODERS.items():
            t = encoder(q, CnfBuilder.for_variables(q.input_vars))
            report = check_valid_translation(q, t)
            assert report.passed, (name, str(q), report.reason, report.witness)
            assert translation_solutions(t) == expected, (name, str(q))


@pytest.mark.slow
def test_bdd_detects_every_dead_end_exhaustively():
    # coefficient multisets up to n = 5, a_i <= 7, every reachable bound
    for n in range(1, 6):
        for coefficients in itertools.combinations_with_replacement(range(1, 8), n):
            terms = [(a, x(i + 1)) for i, a in enumerate(coefficients)]
            for bound in range(sum(coefficients) + 1):
                pb = PBConstraint(terms, Relation.EQ, bound)
                q, t = encode(pb, encode_bdd)
                report = check_arc_consistency(q, t)
                assert report.up_detectable, str(pb)
                assert report.sound, str(pb)


def test_bdd_grows_with_the_bound_and_adder_with_bits():
    rng = random.Random(1024)
    adder_ratios = []
    for n in range(4, 13):
        terms = [(rng.randint(1, 1023), x(i + 1)) for i in range(n)]
        total = sum(a for a, _ in terms)
        _, adder = encode(PBConstraint(terms, Relation.EQ, total // 2), encode_adder)
        largest = max(a for a, _ in terms)
        adder_ratios.append(adder.num_clauses / (n * largest.bit_length()))
        if n < 10:
            continue
        sizes = []
        for bound in (total // 8, total // 4, total // 2):
            _, bdd = encode(PBConstraint(terms, Relation.EQ, bound), encode_bdd)
            sizes.append(bdd.num_clauses)
        assert sizes[1] * 2 >= sizes[0] and sizes[2] * 2 >= sizes[1], (n, sizes)
        assert sizes[2] >= 2 * sizes[0], (n, sizes)
    assert max(adder_ratios) <= 2 * min(adder_ratios), adder_ratios
