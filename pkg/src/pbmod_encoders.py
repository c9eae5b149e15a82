"""
Translations of a single PBMod-constraint into CNF: layered DP, divide and
conquer, unary sorter and residue-class cardinality encodings
"""
from typing import Callable, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from loguru import logger

from src.core import Literal, PBModConstraint, Term, Translation
from src.tseitin import CnfBuilder, GateKind


PBModEncoder = Callable[[PBModConstraint, CnfBuilder], Translation]


def _log_size(name: str, qm: PBModConstraint, before: Tuple[int, int], builder: CnfBuilder) -> None:
    variables = builder.next_var - before[0]
    clauses = len(builder.clauses) - before[1]
    logger.debug(f"{name} mod {qm.modulus}: {variables} variables, {clauses} clauses")


def encode_dp(qm: PBModConstraint, strong: bool, builder: CnfBuilder) -> Translation:
    """
    D[l][m] holds iff the first l terms sum to m (mod M). Strong mode
    materializes every residue of every layer and adds per-layer one-hot
    clauses; lean mode builds only the keys reachable from D[n][b].
    """
    before = (builder.next_var, len(builder.clauses))
    terms = qm.nonzero_terms()
    with builder.stage(f"dp-mod{qm.modulus}"):
        if not terms:
            root = builder.constant(qm.bound == 0)
        elif strong:
            root = _dp_strong(terms, qm.bound, qm.modulus, builder)
        else:
            root = _dp_lean(terms, qm.bound, qm.modulus, builder)
    _log_size("strong DP" if strong else "lean DP", qm, before, builder)
    return builder.translation(root, qm.variables)


def _dp_strong(terms: Sequence[Term], bound: int, modulus: int, builder: CnfBuilder) -> Literal:
    previous = [builder.new_literal() for _ in range(modulus)]
    builder.add_clause([previous[0]])
    for residue in range(1, modulus):
        builder.add_clause([-previous[residue]])
    builder.exactly_one(previous)

    for coefficient, literal in terms:
        layer = [builder.new_literal() for _ in range(modulus)]
        for residue in range(modulus):
            builder.assert_ite(layer[residue], literal,
                               previous[(residue - coefficient) % modulus], previous[residue])
        builder.exactly_one(layer)
        previous = layer
    return previous[bound]


def _dp_lean(terms: Sequence[Term], bound: int, modulus: int, builder: CnfBuilder) -> Literal:
    count = len(terms)
    reachable = [set() for _ in range(count + 1)]
    reachable[count] = {bound}
    for layer in range(count, 0, -1):
        coefficient = terms[layer - 1][0]
        reachable[layer - 1] = {(m - coefficient) % modulus for m in reachable[layer]} | reachable[layer]

    nodes = {residue: builder.constant(residue == 0) for residue in sorted(reachable[0])}
    for layer in range(1, count + 1):
        coefficient, literal = terms[layer - 1]
        nodes = {
            residue: builder.define_ite(literal, nodes[(residue - coefficient) % modulus], nodes[residue])
            for residue in sorted(reachable[layer])
        }
    return nodes[bound]


def encode_dc(qm: PBModConstraint, builder: CnfBuilder) -> Translation:
    """
    D[s, l][m] holds iff terms s..s+l-1 sum to m (mod M); a segment splits
    into ceil(l/2) and floor(l/2). Every internal segment materializes its
    whole residue family, which then gets one-hot clauses.
    """
    before = (builder.next_var, len(builder.clauses))
    modulus = qm.modulus
    terms = qm.terms
    memo: Dict[Tuple[int, int, int], Literal] = {}
    families: Dict[Tuple[int, int], Dict[int, Literal]] = {}

    def node(start: int, length: int, residue: int) -> Literal:
        key = (start, length, residue)
        if key in memo:
            return memo[key]
        if length == 0:
            literal = builder.constant(residue == 0)
        elif length == 1:
            coefficient, x = terms[start]
            if residue != 0:
                literal = x if coefficient == residue else builder.false
            else:
                literal = -x if coefficient != 0 else builder.true
        else:
            left = (length + 1) // 2
            right = length - left
            options = [
                builder.define_gate(GateKind.AND, [
                    node(start, left, (residue - split) % modulus),
                    node(start + left, right, split),
                ])
                for split in range(modulus)
            ]
            literal = builder.define_gate(GateKind.OR, options)
            families.setdefault((start, length), {})[residue] = literal
        memo[key] = literal
        return literal

    with builder.stage(f"dc-mod{modulus}"):
        root = node(0, len(terms), qm.bound)
        for segment in sorted(families):
            family = families[segment]
            if len(family) == modulus:
                builder.exactly_one([family[residue] for residue in range(modulus)])
    _log_size("DC", qm, before, builder)
    return builder.translation(root, qm.variables)


def _sort_network(indices: List[int]) -> Iterator[Tuple[int, int]]:
    if len(indices) < 2:
        return
    if len(indices) == 2:
        yield indices[0], indices[1]
        return
    middle = len(indices) // 2
    yield from _sort_network(indices[:middle])
    yield from _sort_network(indices[middle:])
    yield from _merge_network(indices)


def _merge_network(indices: List[int]) -> Iterator[Tuple[int, int]]:
    if len(indices) < 2:
        return
    if len(indices) == 2:
        yield indices[0], indices[1]
        return
    yield from _merge_network(indices[0::2])
    yield from _merge_network(indices[1::2])
    yield from zip(indices[1::2], indices[2::2])


def batcher_comparators(width: int) -> List[Tuple[int, int]]:
    """Comparators of Batcher's odd-even mergesort over `width` wires rounded up to a power of two"""
    if width < 2:
        return []
    size = 1 << (width - 1).bit_length()
    return list(_sort_network(list(range(size))))


def build_sorter(builder: CnfBuilder, inputs: Sequence[Literal]) -> List[Literal]:
    """
    Unary sorter: output j (1-based) holds iff at least j inputs hold.
    Inputs are padded with false to a power of two; each comparator puts
    the OR on the lower wire and the AND on the upper one.
    """
    width = len(inputs)
    if width < 2:
        return list(inputs)
    size = 1 << (width - 1).bit_length()
    wires = list(inputs)
    if size > width:
        wires.extend([builder.false] * (size - width))
    for high, low in batcher_comparators(width):
        upper = builder.define_gate(GateKind.OR, [wires[high], wires[low]])
        lower = builder.define_gate(GateKind.AND, [wires[high], wires[low]])
        wires[high], wires[low] = upper, lower
    return wires[:width]


def exact_count_selectors(builder: CnfBuilder, outputs: Sequence[Literal],
                          counts: Iterable[int]) -> Dict[int, Literal]:
    """e_k <=> y_k and ~y_{k+1} with y_0 = true and y_{W+1} = false"""
    width = len(outputs)
    selectors: Dict[int, Literal] = {}
    for count in counts:
        if not 0 <= count <= width:
            continue
        if width == 0:
            selectors[count] = builder.true
        elif count == 0:
            selectors[count] = -outputs[0]
        elif count == width:
            selectors[count] = outputs[-1]
        else:
            selectors[count] = builder.define_gate(GateKind.AND, [outputs[count - 1], -outputs[count]])
    return selectors


def encode_sorter(qm: PBModConstraint, builder: CnfBuilder) -> Translation:
    """Each literal repeated a_i times is sorted; the root selects counts congruent to b"""
    before = (builder.next_var, len(builder.clauses))
    vector = [literal for coefficient, literal in qm.nonzero_terms() for _ in range(coefficient)]
    with builder.stage(f"sorter-mod{qm.modulus}"):
        outputs = build_sorter(builder, vector)
        selectors = exact_count_selectors(builder, outputs, range(qm.bound, len(vector) + 1, qm.modulus))
        if selectors:
            root = builder.define_gate(GateKind.OR, list(selectors.values()))
        else:
            root = builder.false
    _log_size("sorter", qm, before, builder)
    return builder.translation(root, qm.variables)


def encode_card(qm: PBModConstraint, builder: CnfBuilder) -> Translation:
    """
    Literals are grouped by coefficient residue; each group is counted by a
    sorter and a DP over the groups tracks sum(i * count_i) mod M.
    """
    before = (builder.next_var, len(builder.clauses))
    modulus = qm.modulus
    classes: Dict[int, List[Literal]] = {}
    for coefficient, literal in qm.nonzero_terms():
        classes.setdefault(coefficient, []).append(literal)

    with builder.stage(f"card-mod{modulus}"):
        previous: Optional[List[Literal]] = None
        for residue in sorted(classes):
            members = classes[residue]
            selectors = exact_count_selectors(builder, build_sorter(builder, members),
                                              range(len(members) + 1))
            layer = []
            for target in range(modulus):
                options = []
                for count, selector in selectors.items():
                    source = (target - residue * count) % modulus
                    if previous is None:
                        if source == 0:
                            options.append(selector)
                    else:
                        options.append(builder.define_gate(GateKind.AND, [previous[source], selector]))
                layer.append(builder.define_gate(GateKind.OR, options) if options else builder.false)
            builder.exactly_one(layer)
            previous = layer
        root = builder.constant(qm.bound == 0) if previous is None else previous[qm.bound]
    _log_size("cardinality", qm, before, builder)
    return builder.translation(root, qm.variables)


PBMOD_ENCODERS: Dict[str, PBModEncoder] = {
    "dp": lambda qm, builder: encode_dp(qm, True, builder),
    "dp-lean": lambda qm, builder: encode_dp(qm, False, builder),
    "dc": encode_dc,
    "sorter": encode_sorter,
    "card": encode_card,
}
