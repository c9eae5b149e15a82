"""
CNF builder with fresh-variable allocation and Tseitin gate definitions
"""
from contextlib import contextmanager
from enum import Enum
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple

from loguru import logger

from src.core import ClauseSet, Literal, Translation
from src.errors import ArityError


class GateKind(str, Enum):
    AND = "and"
    OR = "or"
    NOT = "not"


class CnfBuilder:
    """
    Owns the variable counter and the clause set of one encoding job.

    The constants are a single reserved variable T, asserted by the unit
    clause {T} the first time either constant is requested; false is ~T.
    """

    def __init__(self, first_var: int = 1):
        if first_var < 1:
            raise ValueError(f"first_var must be positive, got {first_var}")
        self.first_var = first_var
        self.next_var = first_var
        self.clauses = ClauseSet()
        self.stages: List[Tuple[str, int, int]] = []
        self._true_var: Optional[int] = None

    @classmethod
    def for_variables(cls, variables: Iterable[int]) -> "CnfBuilder":
        """Builder whose fresh variables start after every given input"""
        return cls(first_var=max(variables, default=0) + 1)

    def new_var(self) -> int:
        """Allocate the next unused variable"""
        variable = self.next_var
        self.next_var += 1
        return variable

    def new_literal(self) -> Literal:
        return Literal(self.new_var())

    @property
    def true(self) -> Literal:
        if self._true_var is None:
            self._true_var = self.new_var()
            self.clauses.add([Literal(self._true_var)])
        return Literal(self._true_var)

    @property
    def false(self) -> Literal:
        return -self.true

    def constant(self, value: bool) -> Literal:
        return self.true if value else self.false

    def is_true(self, literal: Literal) -> bool:
        return self._true_var is not None and literal == Literal(self._true_var)

    def is_false(self, literal: Literal) -> bool:
        return self._true_var is not None and literal == Literal(self._true_var, False)

    def is_constant(self, literal: Literal) -> bool:
        return self._true_var is not None and literal.variable == self._true_var

    @property
    def allocated(self) -> range:
        return range(self.first_var, self.next_var)

    def add_clause(self, literals: Iterable[Literal]) -> None:
        """Add a clause after removing false constants; clauses with a true constant are skipped"""
        kept = []
        for literal in literals:
            if self.is_true(literal):
                return
            if not self.is_false(literal):
                kept.append(literal)
        if not kept:
            # Unsatisfiable clause, kept DIMACS-friendly as {~T}
            kept = [self.false]
        self.clauses.add(kept)

    def define_gate(self, kind: GateKind, inputs: Sequence[Literal]) -> Literal:
        """Return z with clauses asserting z <=> kind(inputs), folding constants first"""
        kind = GateKind(kind)
        if kind is GateKind.NOT:
            if len(inputs) != 1:
                raise ArityError(f"NOT takes exactly one input, got {len(inputs)}")
            x = inputs[0]
            if self.is_constant(x):
                return -x
            z = self.new_literal()
            self.add_clause([-z, -x])
            self.add_clause([z, x])
            return z

        if not inputs:
            raise ArityError(f"{kind.value.upper()} needs at least one input")
        # OR is handled as the dual of AND
        dual = kind is GateKind.OR
        operands = [-literal for literal in inputs] if dual else list(inputs)

        kept: List[Literal] = []
        seen = set()
        for literal in operands:
            if self.is_true(literal) or literal in seen:
                continue
            if self.is_false(literal) or -literal in seen:
                result = self.false
                return -result if dual else result
            seen.add(literal)
            kept.append(literal)
        if not kept:
            result = self.true
        elif len(kept) == 1:
            result = kept[0]
        else:
            z = self.new_literal()
            if dual:
                # z <=> OR(inputs):  {~z, i_1, ..., i_k} then {z, ~i_j}
                self.add_clause([-z] + [-literal for literal in kept])
                for literal in kept:
                    self.add_clause([z, literal])
            else:
                for literal in kept:
                    self.add_clause([-z, literal])
                self.add_clause([z] + [-literal for literal in kept])
            return z
        return -result if dual else result

    def define_conjunction_root(self, parts: Sequence[Literal]) -> Literal:
        """v <=> (v_1 and ... and v_m); empty parts give the true constant"""
        if not parts:
            return self.true
        return self.define_gate(GateKind.AND, parts)

    def define_ite(self, selector: Literal, then: Literal, otherwise: Literal) -> Literal:
        """
        z <=> (selector and then) or (~selector and otherwise), with the five
        clauses {~P,~s,z} {~Q,s,z} {~z,P,Q} {~z,P,~s} {~z,Q,s}
        """
        if then == otherwise:
            return then
        if self.is_false(then) and self.is_false(otherwise):
            return self.false
        if self.is_true(then) and self.is_true(otherwise):
            return self.true
        if self.is_true(then) and self.is_false(otherwise):
            return selector
        if self.is_false(then) and self.is_true(otherwise):
            return -selector
        z = self.new_literal()
        self.assert_ite(z, selector, then, otherwise)
        return z

    def assert_ite(self, z: Literal, selector: Literal, then: Literal, otherwise: Literal) -> None:
        """Emit the five ITE clauses for an already allocated z"""
        self.add_clause([-then, -selector, z])
        self.add_clause([-otherwise, selector, z])
        self.add_clause([-z, then, otherwise])
        self.add_clause([-z, then, -selector])
        self.add_clause([-z, otherwise, selector])

    def at_most_one(self, literals: Sequence[Literal]) -> None:
        """Pairwise exclusion clauses"""
        for i in range(len(literals)):
            for j in range(i + 1, len(literals)):
                self.add_clause([-literals[i], -literals[j]])

    def at_least_one(self, literals: Sequence[Literal]) -> None:
        self.add_clause(literals)

    def exactly_one(self, literals: Sequence[Literal]) -> None:
        """Pairwise at-most-one plus one covering clause"""
        self.at_most_one(literals)
        self.at_least_one(literals)

    @contextmanager
    def stage(self, name: str) -> Iterator[None]:
        """Record the auxiliary variable range allocated inside the block"""
        first = self.next_var
        yield
        if self.next_var > first:
            self.stages.append((name, first, self.next_var - 1))
            logger.debug(f"Stage {name}: variables {first}..{self.next_var - 1}")

    def translation(self, root: Literal, input_vars: Iterable[int],
                    components: Sequence[Tuple[int, Literal]] = ()) -> Translation:
        """Snapshot the current clause set as a translation rooted at `root`"""
        inputs = frozenset(input_vars)
        aux = frozenset(variable for variable in self.allocated if variable not in inputs)
        return Translation(
            root=root,
            clauses=self.clauses.copy(),
            input_vars=inputs,
            aux_vars=aux,
            components=tuple(components),
            stages=tuple(self.stages),
        )
