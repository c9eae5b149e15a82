"""
Domain types for pseudo-Boolean constraints, literals, assignments and CNF,
plus the normalization pipeline to the canonical equality form
"""
import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Tuple, Union

from loguru import logger

from src.errors import BadModulus, DuplicateVariable, UnassignedVariable


# Partial or total truth map; a missing key means unassigned
Assignment = Mapping[int, bool]


@dataclass(frozen=True, order=True)
class Literal:
    """Signed reference to a propositional variable"""
    variable: int
    polarity: bool = True

    def __post_init__(self):
        if self.variable < 1:
            raise ValueError(f"Variable identifiers start at 1, got {self.variable}")

    def __neg__(self) -> "Literal":
        return Literal(self.variable, not self.polarity)

    def to_dimacs(self) -> int:
        return self.variable if self.polarity else -self.variable

    @classmethod
    def from_dimacs(cls, value: int) -> "Literal":
        if value == 0:
            raise ValueError("0 is not a DIMACS literal")
        return cls(abs(value), value > 0)

    def value(self, assignment: Assignment) -> Optional[bool]:
        """Truth value under the assignment, None when unassigned"""
        current = assignment.get(self.variable)
        if current is None:
            return None
        return current == self.polarity

    def __str__(self) -> str:
        return f"x{self.variable}" if self.polarity else f"~x{self.variable}"


Term = Tuple[int, Literal]


class Relation(str, Enum):
    LT = "<"
    LE = "<="
    EQ = "="
    GE = ">="
    GT = ">"

    def holds(self, lhs: int, rhs: int) -> bool:
        if self is Relation.LT:
            return lhs < rhs
        if self is Relation.LE:
            return lhs <= rhs
        if self is Relation.EQ:
            return lhs == rhs
        if self is Relation.GE:
            return lhs >= rhs
        return lhs > rhs


def _coerce_terms(terms: Iterable[Term]) -> Tuple[Term, ...]:
    result = tuple((int(coefficient), literal) for coefficient, literal in terms)
    seen = set()
    for _, literal in result:
        if literal.variable in seen:
            raise DuplicateVariable(literal.variable)
        seen.add(literal.variable)
    return result


def _format_terms(terms: Tuple[Term, ...]) -> str:
    if not terms:
        return "0"
    return " + ".join(f"{coefficient}{literal}" for coefficient, literal in terms)


@dataclass(frozen=True)
class PBConstraint:
    """sum(a_i * l_i) <op> bound"""
    terms: Tuple[Term, ...]
    op: Relation
    bound: int

    def __post_init__(self):
        object.__setattr__(self, "terms", _coerce_terms(self.terms))
        object.__setattr__(self, "op", Relation(self.op))
        object.__setattr__(self, "bound", int(self.bound))

    @property
    def variables(self) -> Tuple[int, ...]:
        return tuple(literal.variable for _, literal in self.terms)

    def renamed(self, mapping: Mapping[int, int]) -> "PBConstraint":
        """The same constraint over variables renamed through mapping"""
        terms = [(coefficient, Literal(mapping[literal.variable], literal.polarity))
                 for coefficient, literal in self.terms]
        return PBConstraint(terms, self.op, self.bound)

    def __str__(self) -> str:
        return f"{_format_terms(self.terms)} {self.op.value} {self.bound}"


class NormalStatus(str, Enum):
    PROPER = "proper"
    CONST_TRUE = "const_true"
    CONST_FALSE = "const_false"


@dataclass(frozen=True)
class NormalizedPB:
    """
    Canonical equality sum(a_i * l_i) = bound with a_i >= 1 and 0 <= bound <= S.

    `input_vars` are the variables of the source constraint (zero-coefficient
    ones included); `slack_vars` were introduced by normalization and are
    existentially quantified.
    """
    terms: Tuple[Term, ...]
    bound: int
    slack_vars: Tuple[int, ...] = ()
    status: NormalStatus = NormalStatus.PROPER
    input_vars: Tuple[int, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "terms", _coerce_terms(self.terms))
        object.__setattr__(self, "slack_vars", tuple(self.slack_vars))
        object.__setattr__(self, "status", NormalStatus(self.status))
        if not self.input_vars:
            slack = set(self.slack_vars)
            object.__setattr__(
                self, "input_vars",
                tuple(literal.variable for _, literal in self.terms if literal.variable not in slack)
            )
        else:
            object.__setattr__(self, "input_vars", tuple(self.input_vars))
        if self.status is NormalStatus.PROPER:
            if any(coefficient < 1 for coefficient, _ in self.terms):
                raise ValueError(f"Normalized constraint has a non-positive coefficient: {self}")
            if not 0 <= self.bound <= self.total:
                raise ValueError(f"Normalized bound {self.bound} outside [0, {self.total}]")

    @property
    def total(self) -> int:
        """S, the sum of all coefficients"""
        return sum(coefficient for coefficient, _ in self.terms)

    @property
    def is_proper(self) -> bool:
        return self.status is NormalStatus.PROPER

    @property
    def encoded_vars(self) -> Tuple[int, ...]:
        """Inputs of a translation of the canonical form: source variables, then slack"""
        return self.input_vars + tuple(v for v in self.slack_vars if v not in self.input_vars)

    def __str__(self) -> str:
        if self.status is NormalStatus.CONST_TRUE:
            return "true"
        if self.status is NormalStatus.CONST_FALSE:
            return "false"
        return f"{_format_terms(self.terms)} = {self.bound}"


@dataclass(frozen=True)
class PBModConstraint:
    """sum(a_i * l_i) == bound (mod modulus); coefficients and bound are reduced on construction"""
    terms: Tuple[Term, ...]
    bound: int
    modulus: int

    def __post_init__(self):
        if self.modulus < 2:
            raise BadModulus(f"Modulus must be at least 2, got {self.modulus}")
        reduced = tuple((coefficient % self.modulus, literal) for coefficient, literal in self.terms)
        object.__setattr__(self, "terms", _coerce_terms(reduced))
        object.__setattr__(self, "bound", int(self.bound) % self.modulus)

    @property
    def variables(self) -> Tuple[int, ...]:
        return tuple(literal.variable for _, literal in self.terms)

    def nonzero_terms(self) -> Tuple[Term, ...]:
        return tuple(term for term in self.terms if term[0] != 0)

    def __str__(self) -> str:
        return f"{_format_terms(self.terms)} = {self.bound} (mod {self.modulus})"


Constraint = Union[PBConstraint, NormalizedPB, PBModConstraint]


def constraint_inputs(q: Constraint) -> Tuple[int, ...]:
    """Variables a translation of q must treat as inputs"""
    if isinstance(q, NormalizedPB):
        return q.encoded_vars
    return q.variables


def lhs_value(terms: Iterable[Term], assignment: Assignment) -> int:
    """Sum of the coefficients whose literal is true; every variable must be assigned"""
    total = 0
    for coefficient, literal in terms:
        value = literal.value(assignment)
        if value is None:
            raise UnassignedVariable(literal.variable)
        if value:
            total += coefficient
    return total


def evaluate_pb(q: PBConstraint, assignment: Assignment) -> bool:
    """Whether the full assignment satisfies the relation"""
    return q.op.holds(lhs_value(q.terms, assignment), q.bound)


def evaluate_pbmod(qm: PBModConstraint, assignment: Assignment) -> bool:
    """Whether the left-hand side is congruent to the bound"""
    return lhs_value(qm.terms, assignment) % qm.modulus == qm.bound


def evaluate_normalized(q: NormalizedPB, assignment: Assignment) -> bool:
    """
    Evaluate the canonical form. When no slack variable is assigned they are
    treated existentially; slack coefficients are 1, 2, ..., 2^B so every
    remainder in [0, sum(slack)] is representable.
    """
    if q.status is NormalStatus.CONST_TRUE:
        return True
    if q.status is NormalStatus.CONST_FALSE:
        return False
    slack = set(q.slack_vars)
    if not slack or all(variable in assignment for variable in slack):
        return lhs_value(q.terms, assignment) == q.bound
    if any(variable in assignment for variable in slack):
        missing = next(variable for variable in q.slack_vars if variable not in assignment)
        raise UnassignedVariable(missing)
    visible = [term for term in q.terms if term[1].variable not in slack]
    capacity = sum(coefficient for coefficient, literal in q.terms if literal.variable in slack)
    remainder = q.bound - lhs_value(visible, assignment)
    return 0 <= remainder <= capacity


def satisfies(q: Constraint, assignment: Assignment) -> bool:
    """Evaluate any constraint kind"""
    if isinstance(q, PBConstraint):
        return evaluate_pb(q, assignment)
    if isinstance(q, NormalizedPB):
        return evaluate_normalized(q, assignment)
    return evaluate_pbmod(q, assignment)


def _flip_negative(terms: Iterable[Term], bound: int) -> Tuple[List[Term], int]:
    """a*l with a < 0 becomes a - a*~l; zero coefficients are dropped"""
    flipped = []
    for coefficient, literal in terms:
        if coefficient > 0:
            flipped.append((coefficient, literal))
        elif coefficient < 0:
            flipped.append((-coefficient, -literal))
            bound -= coefficient
    return flipped, bound


def _as_strict_less(q: PBConstraint) -> Tuple[List[Term], int]:
    """Terms and bound of an equivalent sum < bound"""
    terms = list(q.terms)
    negated = [(-coefficient, literal) for coefficient, literal in terms]
    if q.op is Relation.LT:
        return terms, q.bound
    if q.op is Relation.LE:
        return terms, q.bound + 1
    if q.op is Relation.GE:
        return negated, 1 - q.bound
    return negated, -q.bound


def normalize(q: PBConstraint, fresh: Optional[Callable[[], int]] = None) -> NormalizedPB:
    """
    Rewrite q into the canonical form sum(a_i * l_i) = b.

    `fresh` allocates slack variables; by default identifiers continue after
    the largest variable of q.
    """
    inputs = q.variables
    if fresh is None:
        counter = itertools.count(max(inputs, default=0) + 1)
        fresh = lambda: next(counter)

    def constant(status: NormalStatus) -> NormalizedPB:
        logger.debug(f"Normalized {q} to constant {status.value}")
        return NormalizedPB((), 0, status=status, input_vars=inputs)

    if q.op is Relation.EQ:
        terms, bound = _flip_negative(q.terms, q.bound)
        if not 0 <= bound <= sum(coefficient for coefficient, _ in terms):
            return constant(NormalStatus.CONST_FALSE)
        return NormalizedPB(tuple(terms), bound, input_vars=inputs)

    terms, bound = _flip_negative(*_as_strict_less(q))
    total = sum(coefficient for coefficient, _ in terms)
    if bound <= 0:
        return constant(NormalStatus.CONST_FALSE)
    if bound > total:
        return constant(NormalStatus.CONST_TRUE)
    if bound == 1:
        return NormalizedPB(tuple(terms), 0, input_vars=inputs)

    # sum < b  <=>  sum + s = b - 1 for some 0 <= s < 2^(floor(log2 b) + 1)
    slack = [fresh() for _ in range(bound.bit_length())]
    terms.extend((1 << i, Literal(variable)) for i, variable in enumerate(slack))
    return NormalizedPB(tuple(terms), bound - 1, slack_vars=tuple(slack), input_vars=inputs)


Clause = Tuple[Literal, ...]


class ClauseSet:
    """Insertion-ordered clause storage; tautologies are dropped, repeated literals merged"""

    def __init__(self, clauses: Iterable[Iterable[Literal]] = ()):
        self._clauses: List[Clause] = []
        self.max_var = 0
        for clause in clauses:
            self.add(clause)

    def add(self, literals: Iterable[Literal]) -> Optional[Clause]:
        polarity: Dict[int, bool] = {}
        kept = []
        for literal in literals:
            previous = polarity.get(literal.variable)
            if previous is None:
                polarity[literal.variable] = literal.polarity
                kept.append(literal)
            elif previous != literal.polarity:
                return None
        clause = tuple(kept)
        self._clauses.append(clause)
        if polarity:
            self.max_var = max(self.max_var, max(polarity))
        return clause

    def copy(self) -> "ClauseSet":
        duplicate = ClauseSet()
        duplicate._clauses = list(self._clauses)
        duplicate.max_var = self.max_var
        return duplicate

    def without(self, index: int) -> "ClauseSet":
        """Copy with one clause removed"""
        return ClauseSet(clause for position, clause in enumerate(self._clauses) if position != index)

    def variables(self) -> FrozenSet[int]:
        return frozenset(literal.variable for clause in self._clauses for literal in clause)

    @property
    def literal_count(self) -> int:
        return sum(len(clause) for clause in self._clauses)

    def __len__(self) -> int:
        return len(self._clauses)

    def __iter__(self) -> Iterator[Clause]:
        return iter(self._clauses)

    def __getitem__(self, index: int) -> Clause:
        return self._clauses[index]


@dataclass(frozen=True)
class Translation:
    """
    The pair <root, clauses> plus the input/auxiliary partition of its variables.
    `components` lists (modulus, component root) for modular translations;
    `stages` lists (name, first, last) auxiliary ranges.
    """
    root: Literal
    clauses: ClauseSet
    input_vars: FrozenSet[int]
    aux_vars: FrozenSet[int]
    components: Tuple[Tuple[int, Literal], ...] = ()
    stages: Tuple[Tuple[str, int, int], ...] = ()

    def __post_init__(self):
        if self.input_vars & self.aux_vars:
            raise ValueError("Input and auxiliary variables overlap")

    @property
    def num_vars(self) -> int:
        return len(self.input_vars | self.aux_vars)

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)

    @property
    def num_literals(self) -> int:
        return self.clauses.literal_count
