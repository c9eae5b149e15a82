"""
Unit propagation, a small complete DPLL solver, brute-force enumeration and
the property checkers for valid and arc-consistent translations
"""
import itertools
import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, List, Mapping, Optional, Tuple, Union

from loguru import logger

import sys
import os
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from config import settings
from src.core import Assignment, ClauseSet, Constraint, Literal, Translation, constraint_inputs, satisfies
from src.errors import InconsistentAssumptions, ResourceLimit, TooManyVariables


class Outcome(str, Enum):
    CONFLICT = "conflict"
    FIXPOINT = "fixpoint"


@dataclass
class PropagationResult:
    """Outcome of unit propagation; `implied` includes the assumptions"""
    outcome: Outcome
    implied: Dict[int, bool]
    conflict_clause: Optional[int] = None

    @property
    def conflict(self) -> bool:
        return self.outcome is Outcome.CONFLICT


@dataclass
class SolveResult:
    satisfiable: bool
    model: Optional[Dict[int, bool]] = None
    decisions: int = 0


def _as_assignment(assumptions: Union[Assignment, Iterable[Literal]]) -> Dict[int, bool]:
    if isinstance(assumptions, Mapping):
        return {int(variable): bool(value) for variable, value in assumptions.items()}
    values: Dict[int, bool] = {}
    for literal in assumptions:
        previous = values.get(literal.variable)
        if previous is not None and previous != literal.polarity:
            raise InconsistentAssumptions(f"Assumptions contain both {literal} and {-literal}")
        values[literal.variable] = literal.polarity
    return values


class UnitPropagator:
    """
    A clause set compiled once into signed integers with occurrence lists,
    reused across many propagation and solving calls.
    """

    def __init__(self, clauses: ClauseSet):
        self.clauses: List[Tuple[int, ...]] = [
            tuple(literal.to_dimacs() for literal in clause) for clause in clauses
        ]
        self.occurrences: Dict[int, List[int]] = {}
        self.units: List[int] = []
        self.empty_clause: Optional[int] = None
        for index, clause in enumerate(self.clauses):
            if not clause and self.empty_clause is None:
                self.empty_clause = index
            elif len(clause) == 1:
                self.units.append(index)
            for literal in clause:
                self.occurrences.setdefault(literal, []).append(index)
        self.variables = sorted({abs(literal) for clause in self.clauses for literal in clause})

    def _propagate(self, values: Dict[int, bool], trail: List[int], queue: List[int],
                   rng: Optional[random.Random] = None) -> Optional[int]:
        while queue:
            if rng is not None:
                pick = rng.randrange(len(queue))
                queue[pick], queue[-1] = queue[-1], queue[pick]
            literal = queue.pop()
            for index in self.occurrences.get(-literal, ()):
                open_literal = 0
                open_count = 0
                satisfied = False
                for other in self.clauses[index]:
                    value = values.get(abs(other))
                    if value is None:
                        open_count += 1
                        open_literal = other
                    elif value == (other > 0):
                        satisfied = True
                        break
                if satisfied or open_count > 1:
                    continue
                if open_count == 0:
                    return index
                values[abs(open_literal)] = open_literal > 0
                trail.append(abs(open_literal))
                queue.append(open_literal)
        return None

    def _start(self, values: Dict[int, bool], trail: List[int],
               rng: Optional[random.Random] = None) -> Optional[int]:
        if self.empty_clause is not None:
            return self.empty_clause
        queue = [variable if value else -variable for variable, value in values.items()]
        units = list(self.units)
        if rng is not None:
            rng.shuffle(units)
        for index in units:
            literal = self.clauses[index][0]
            value = values.get(abs(literal))
            if value is None:
                values[abs(literal)] = literal > 0
                trail.append(abs(literal))
                queue.append(literal)
            elif value != (literal > 0):
                return index
        return self._propagate(values, trail, queue, rng)

    def propagate(self, assumptions: Union[Assignment, Iterable[Literal]] = (),
                  rng: Optional[random.Random] = None) -> PropagationResult:
        values = _as_assignment(assumptions)
        conflict = self._start(values, [], rng)
        if conflict is not None:
            return PropagationResult(Outcome.CONFLICT, values, conflict)
        return PropagationResult(Outcome.FIXPOINT, values)

    def solve(self, assumptions: Union[Assignment, Iterable[Literal]] = (),
              budget: Optional[int] = None) -> SolveResult:
        """DPLL branching on the lowest unassigned variable, false first"""
        budget = settings.solver_decision_budget if budget is None else budget
        values = _as_assignment(assumptions)
        trail: List[int] = []
        if self._start(values, trail) is not None:
            return SolveResult(False)

        # (trail length before the decision, variable, true branch already taken)
        decisions: List[Tuple[int, int, bool]] = []
        count = 0
        while True:
            variable = next((v for v in self.variables if v not in values), None)
            if variable is None:
                return SolveResult(True, dict(sorted(values.items())), count)
            count += 1
            if count > budget:
                raise ResourceLimit(f"Decision budget of {budget} exhausted")
            decisions.append((len(trail), variable, False))
            values[variable] = False
            trail.append(variable)
            conflict = self._propagate(values, trail, [-variable])

            while conflict is not None:
                while decisions and decisions[-1][2]:
                    position, _, _ = decisions.pop()
                    self._undo(values, trail, position)
                if not decisions:
                    return SolveResult(False, decisions=count)
                position, variable, _ = decisions.pop()
                self._undo(values, trail, position)
                decisions.append((position, variable, True))
                values[variable] = True
                trail.append(variable)
                conflict = self._propagate(values, trail, [variable])

    @staticmethod
    def _undo(values: Dict[int, bool], trail: List[int], position: int) -> None:
        for variable in trail[position:]:
            del values[variable]
        del trail[position:]


def unit_propagate(clauses: ClauseSet, assumptions: Union[Assignment, Iterable[Literal]] = (),
                   rng: Optional[random.Random] = None) -> PropagationResult:
    """Least fixpoint of the unit rule; `rng` randomizes the propagation order"""
    return UnitPropagator(clauses).propagate(assumptions, rng)


def solve(clauses: ClauseSet, assumptions: Union[Assignment, Iterable[Literal]] = (),
          budget: Optional[int] = None) -> SolveResult:
    return UnitPropagator(clauses).solve(assumptions, budget)


def _ordered_inputs(q: Constraint, t: Optional[Translation] = None) -> List[int]:
    variables = set(constraint_inputs(q))
    if t is not None:
        variables |= t.input_vars
    return sorted(variables)


def enumerate_pb_solutions(q: Constraint, limit: Optional[int] = None) -> List[Dict[int, bool]]:
    """All total assignments over vars(q) satisfying q, in lexicographic order (False < True)"""
    limit = settings.enumeration_limit_vars if limit is None else limit
    variables = sorted(set(constraint_inputs(q)))
    if len(variables) > limit:
        raise TooManyVariables(f"Enumeration over {len(variables)} variables exceeds the limit of {limit}")
    solutions = []
    for values in itertools.product((False, True), repeat=len(variables)):
        assignment = dict(zip(variables, values))
        if satisfies(q, assignment):
            solutions.append(assignment)
    return solutions


def _with_root(assignment: Mapping[int, bool], root: Literal, value: bool) -> Optional[Dict[int, bool]]:
    """assignment plus root=value, or None when the root is an input set the other way"""
    wanted = value == root.polarity
    current = assignment.get(root.variable)
    if current is not None and current != wanted:
        return None
    extended = dict(assignment)
    extended[root.variable] = wanted
    return extended


def translation_solutions(t: Translation, variables: Optional[Iterable[int]] = None,
                          limit: Optional[int] = None) -> List[Dict[int, bool]]:
    """Input assignments A, in lexicographic order, for which C + A + (v = true) is satisfiable"""
    limit = settings.enumeration_limit_vars if limit is None else limit
    variables = sorted(t.input_vars if variables is None else set(variables))
    if len(variables) > limit:
        raise TooManyVariables(f"Enumeration over {len(variables)} variables exceeds the limit of {limit}")
    propagator = UnitPropagator(t.clauses)
    solutions = []
    for values in itertools.product((False, True), repeat=len(variables)):
        assignment = dict(zip(variables, values))
        query = _with_root(assignment, t.root, True)
        if query is not None and propagator.solve(query).satisfiable:
            solutions.append(assignment)
    return solutions


@dataclass
class ValidityReport:
    passed: bool
    reason: str = ""
    witness: Optional[Dict[int, bool]] = None
    assignments_checked: int = 0


def check_valid_translation(q: Constraint, t: Translation, limit: Optional[int] = None) -> ValidityReport:
    """
    C must be satisfiable, and for every total input assignment A the queries
    C + A + (v = q(A)) and C + A + (v != q(A)) must be SAT and UNSAT.
    """
    limit = settings.valid_check_limit_vars if limit is None else limit
    variables = _ordered_inputs(q, t)
    if len(variables) > limit:
        raise TooManyVariables(f"Validity check over {len(variables)} inputs exceeds the limit of {limit}")

    propagator = UnitPropagator(t.clauses)
    if not propagator.solve().satisfiable:
        return ValidityReport(False, "clause set is unsatisfiable")

    checked = 0
    for values in itertools.product((False, True), repeat=len(variables)):
        assignment = dict(zip(variables, values))
        checked += 1
        failure = _check_assignment(propagator, t.root, assignment, satisfies(q, assignment))
        if failure:
            return ValidityReport(False, failure, assignment, checked)
    return ValidityReport(True, assignments_checked=checked)


def _check_assignment(propagator: UnitPropagator, root: Literal,
                      assignment: Dict[int, bool], expected: bool) -> Optional[str]:
    # Circuit encodings usually propagate to a full model from the inputs alone
    propagated = propagator.propagate(assignment)
    if propagated.conflict:
        return "input assignment has no model"
    derived = root.value(propagated.implied)
    if derived is not None and derived != expected:
        return f"root is forced to {derived}"
    if derived is None:
        opposite = _with_root(assignment, root, not expected)
        if opposite is not None and propagator.solve(opposite).satisfiable:
            return f"root can take value {not expected}"
    complete = all(variable in propagated.implied for variable in propagator.variables)
    if derived is None or not complete:
        agreeing = _with_root(assignment, root, expected)
        if agreeing is None or not propagator.solve(agreeing).satisfiable:
            return f"root cannot take value {expected}"
    return None


class CaseKind(str, Enum):
    DETECT = "detect"
    INFER = "infer"
    UNIQUE = "unique"
    UNSOUND = "unsound"


@dataclass
class ArcWitness:
    kind: CaseKind
    partial: Dict[int, bool]
    expected: str
    outcome: Outcome


@dataclass
class ArcReport:
    """
    UP behaviour of C + (v = true) over partial input assignments.
    The empty_* flags read the definitions for the constraint alone, the
    up_* flags over every checked partial assignment.
    """
    up_detectable: bool = True
    up_inferable: bool = True
    empty_detectable: bool = True
    empty_inferable: bool = True
    up_solves_unique: bool = True
    sound: bool = True
    cases_checked: int = 0
    exhaustive: bool = True
    witnesses: List[ArcWitness] = field(default_factory=list)

    @property
    def arc_consistent(self) -> bool:
        return self.up_detectable and self.up_inferable


class _ExtensionTable:
    """(count, and-mask, or-mask) of the solutions extending a partial assignment"""

    def __init__(self, width: int, solutions: Iterable[int]):
        self.full = (1 << width) - 1
        self.solutions = set(solutions)
        self._cache: Dict[Tuple[int, int], Tuple[int, int, int]] = {}

    def lookup(self, assigned: int, values: int) -> Tuple[int, int, int]:
        key = (assigned, values)
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        if assigned == self.full:
            result = (1, values, values) if values in self.solutions else (0, self.full, 0)
        else:
            bit = (~assigned & self.full) & -(~assigned & self.full)
            low = self.lookup(assigned | bit, values)
            high = self.lookup(assigned | bit, values | bit)
            result = (low[0] + high[0], low[1] & high[1], low[2] | high[2])
        self._cache[key] = result
        return result


def _partials(width: int, exhaustive: bool, samples: int, rng: random.Random) -> Iterable[Tuple[int, int]]:
    if exhaustive:
        for states in itertools.product((None, False, True), repeat=width):
            assigned = values = 0
            for position, state in enumerate(states):
                if state is not None:
                    assigned |= 1 << position
                    if state:
                        values |= 1 << position
            yield assigned, values
        return
    yield 0, 0
    for _ in range(samples):
        assigned = values = 0
        for position in range(width):
            state = rng.randrange(3)
            if state:
                assigned |= 1 << position
                if state == 2:
                    values |= 1 << position
        yield assigned, values


def check_arc_consistency(q: Constraint, t: Translation, limit: Optional[int] = None,
                          samples: Optional[int] = None, seed: Optional[int] = None) -> ArcReport:
    """
    For each partial input assignment, run UP on C + (v = true) and compare
    with the extensions of the partial assignment to solutions of q.
    """
    limit = settings.arc_limit_vars if limit is None else limit
    samples = settings.arc_samples if samples is None else samples
    seed = settings.arc_seed if seed is None else seed
    variables = _ordered_inputs(q, t)
    width = len(variables)
    if width > limit:
        raise TooManyVariables(f"Arc-consistency check over {width} inputs exceeds the limit of {limit}")

    solutions = []
    for mask in range(1 << width):
        assignment = {variable: bool(mask >> position & 1) for position, variable in enumerate(variables)}
        if satisfies(q, assignment):
            solutions.append(mask)
    table = _ExtensionTable(width, solutions)

    exhaustive = width <= settings.arc_exhaustive_max_vars
    if not exhaustive:
        logger.warning(f"Arc-consistency over {width} inputs: sampling {samples} partial assignments")
    report = ArcReport(exhaustive=exhaustive)
    kept: Dict[CaseKind, int] = {kind: 0 for kind in CaseKind}
    propagator = UnitPropagator(t.clauses)

    def record(kind: CaseKind, partial: Dict[int, bool], expected: str, outcome: Outcome) -> None:
        if kept[kind] < settings.arc_witness_cap:
            kept[kind] += 1
            report.witnesses.append(ArcWitness(kind, partial, expected, outcome))

    for assigned, values in _partials(width, exhaustive, samples, random.Random(seed)):
        report.cases_checked += 1
        empty = assigned == 0
        partial = {
            variable: bool(values >> position & 1)
            for position, variable in enumerate(variables) if assigned >> position & 1
        }
        assumptions = _with_root(partial, t.root, True)
        if assumptions is None:
            result = PropagationResult(Outcome.CONFLICT, dict(partial))
        else:
            result = propagator.propagate(assumptions)
        count, forced_true, possible_true = table.lookup(assigned, values)

        if count == 0:
            if not result.conflict:
                report.up_detectable = False
                report.empty_detectable = report.empty_detectable and not empty
                record(CaseKind.DETECT, partial, "conflict", result.outcome)
            continue
        if result.conflict:
            report.sound = False
            record(CaseKind.UNSOUND, partial, "no conflict", result.outcome)
            continue

        missed = False
        for position, variable in enumerate(variables):
            if assigned >> position & 1:
                continue
            derived = result.implied.get(variable)
            if forced_true >> position & 1:
                forced: Optional[bool] = True
            elif not possible_true >> position & 1:
                forced = False
            else:
                forced = None
            if derived is not None and derived != forced:
                report.sound = False
                record(CaseKind.UNSOUND, partial, f"x{variable} free or opposite", result.outcome)
            if forced is not None and derived != forced:
                missed = True
                report.up_inferable = False
                report.empty_inferable = report.empty_inferable and not empty
                record(CaseKind.INFER, partial, str(Literal(variable, forced)), result.outcome)
        if count == 1 and missed:
            report.up_solves_unique = False
            record(CaseKind.UNIQUE, partial, "all inputs assigned", result.outcome)

    logger.debug(
        f"Arc check of {q}: {report.cases_checked} cases, detectable={report.up_detectable}, "
        f"inferable={report.up_inferable}, sound={report.sound}"
    )
    return report
