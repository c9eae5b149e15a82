"""
Whole-constraint encoders used as baselines: BDD, binary adder network and
a uniform-radix network of sorters
"""
from typing import Callable, Dict, List, Optional, Sequence

from loguru import logger

import sys
import os
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from config import settings
from src.core import Literal, NormalizedPB, NormalStatus, Translation
from src.pbmod_encoders import build_sorter, exact_count_selectors
from src.tseitin import CnfBuilder, GateKind


PBEncoder = Callable[[NormalizedPB, CnfBuilder], Translation]


def encode_constant(q: NormalizedPB, builder: CnfBuilder) -> Translation:
    """<true> for ConstTrue, <v, {~v}> for ConstFalse"""
    if q.status is NormalStatus.CONST_TRUE:
        root = builder.true
    else:
        root = builder.new_literal()
        builder.add_clause([-root])
    return builder.translation(root, q.encoded_vars)


def encode_bdd(q: NormalizedPB, builder: CnfBuilder) -> Translation:
    """
    D[i][j] holds iff the first i terms sum to exactly j. Nodes are built
    top-down from D[n][b]; partial sums below zero or above the prefix
    capacity fold to false.
    """
    if not q.is_proper:
        return encode_constant(q, builder)
    terms = q.terms
    count = len(terms)
    prefix = [0]
    for coefficient, _ in terms:
        prefix.append(prefix[-1] + coefficient)

    reachable = [set() for _ in range(count + 1)]
    if 0 <= q.bound <= prefix[count]:
        reachable[count].add(q.bound)
    for index in range(count, 0, -1):
        coefficient = terms[index - 1][0]
        for partial_sum in reachable[index]:
            for below in (partial_sum - coefficient, partial_sum):
                if 0 <= below <= prefix[index - 1]:
                    reachable[index - 1].add(below)

    with builder.stage("bdd"):
        nodes: Dict[int, Literal] = {j: builder.constant(j == 0) for j in reachable[0]}
        for index in range(1, count + 1):
            coefficient, literal = terms[index - 1]
            layer = {}
            for partial_sum in sorted(reachable[index]):
                then = nodes.get(partial_sum - coefficient)
                otherwise = nodes.get(partial_sum)
                layer[partial_sum] = builder.define_ite(
                    literal,
                    then if then is not None else builder.false,
                    otherwise if otherwise is not None else builder.false,
                )
            nodes = layer
        root = nodes.get(q.bound)
        if root is None:
            root = builder.false
    logger.debug(f"BDD: {sum(len(layer) for layer in reachable)} nodes for {q}")
    return builder.translation(root, q.encoded_vars)


def _xor(builder: CnfBuilder, a: Literal, b: Literal) -> Literal:
    return builder.define_gate(GateKind.OR, [
        builder.define_gate(GateKind.AND, [a, -b]),
        builder.define_gate(GateKind.AND, [-a, b]),
    ])


def _majority(builder: CnfBuilder, a: Literal, b: Literal, c: Literal) -> Literal:
    return builder.define_gate(GateKind.OR, [
        builder.define_gate(GateKind.AND, [a, b]),
        builder.define_gate(GateKind.AND, [a, c]),
        builder.define_gate(GateKind.AND, [b, c]),
    ])


def _ripple_add(builder: CnfBuilder, left: Sequence[Literal], right: Sequence[Literal],
                overflow: List[Literal]) -> List[Literal]:
    """Equal-width ripple-carry sum; the final carry goes to overflow"""
    carry = builder.false
    total = []
    for a, b in zip(left, right):
        total.append(_xor(builder, _xor(builder, a, b), carry))
        carry = _majority(builder, a, b, carry)
    overflow.append(carry)
    return total


def encode_adder(q: NormalizedPB, builder: CnfBuilder) -> Translation:
    """Sum the gated binary coefficients with a tree of ripple-carry adders and compare to b"""
    if not q.is_proper:
        return encode_constant(q, builder)
    width = max(1, q.total.bit_length())
    with builder.stage("adder"):
        # bit k of a_i gated by l_i is l_i itself or false
        vectors = [
            [literal if (coefficient >> bit) & 1 else builder.false for bit in range(width)]
            for coefficient, literal in q.terms
        ]
        overflow: List[Literal] = []
        while len(vectors) > 1:
            merged = [
                _ripple_add(builder, vectors[i], vectors[i + 1], overflow)
                for i in range(0, len(vectors) - 1, 2)
            ]
            if len(vectors) % 2:
                merged.append(vectors[-1])
            vectors = merged
        total = vectors[0] if vectors else [builder.false] * width

        checks = [bit if (q.bound >> position) & 1 else -bit for position, bit in enumerate(total)]
        checks.extend(-carry for carry in overflow)
        root = builder.define_gate(GateKind.AND, checks)
    logger.debug(f"Adder: width {width}, {len(q.terms)} vectors")
    return builder.translation(root, q.encoded_vars)


def encode_sortnet(q: NormalizedPB, builder: CnfBuilder, radix: Optional[int] = None) -> Translation:
    """
    Digit j of every coefficient in base `radix` feeds sorter j together with
    every radix-th output of sorter j-1 as carries. Lower digits compare the
    sorter count against b's digit modulo radix; the top digit compares exactly.
    """
    radix = radix or settings.sortnet_radix
    if radix < 2:
        raise ValueError(f"Sorting-network radix must be at least 2, got {radix}")
    if not q.is_proper:
        return encode_constant(q, builder)

    largest = max((coefficient for coefficient, _ in q.terms), default=0)
    digits = 1
    while radix ** digits <= largest:
        digits += 1

    with builder.stage("sortnet"):
        carries: List[Literal] = []
        checks = []
        for digit in range(digits):
            weight = radix ** digit
            inputs = [
                literal
                for coefficient, literal in q.terms
                for _ in range((coefficient // weight) % radix)
            ] + carries
            outputs = build_sorter(builder, inputs)
            if digit < digits - 1:
                wanted = range((q.bound // weight) % radix, len(outputs) + 1, radix)
                carries = [outputs[position - 1] for position in range(radix, len(outputs) + 1, radix)]
            else:
                wanted = [q.bound // weight]
            selectors = exact_count_selectors(builder, outputs, wanted)
            if selectors:
                checks.append(builder.define_gate(GateKind.OR, list(selectors.values())))
            else:
                checks.append(builder.false)
        root = builder.define_gate(GateKind.AND, checks)
    logger.debug(f"Sorting network: radix {radix}, {digits} digits")
    return builder.translation(root, q.encoded_vars)


PB_ENCODERS: Dict[str, PBEncoder] = {
    "bdd": encode_bdd,
    "adder": encode_adder,
    "sortnet": encode_sortnet,
}
