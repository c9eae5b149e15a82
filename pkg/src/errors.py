"""
Exception hierarchy for constraint encoding and verification
"""
from typing import Optional


class PBModError(Exception):
    """Base class for all encoder errors"""


class UnassignedVariable(PBModError, KeyError):
    """A constraint was evaluated under an assignment that misses one of its variables"""

    def __init__(self, variable: int):
        self.variable = variable
        super().__init__(f"Variable x{variable} is unassigned")

    def __str__(self) -> str:
        return self.args[0]


class DuplicateVariable(PBModError, ValueError):
    """Two terms of one constraint refer to the same variable"""

    def __init__(self, variable: int, line: Optional[int] = None):
        self.variable = variable
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"Variable x{variable} occurs more than once in a constraint{where}")


class ArityError(PBModError, ValueError):
    """A gate was requested with the wrong number of inputs"""


class BadModulus(PBModError, ValueError):
    """A modulus below 2, or an explicit moduli list with repeated members"""


class InsufficientModuli(PBModError):
    """The lcm of the moduli does not exceed the coefficient sum"""

    def __init__(self, moduli, lcm: int, total: int):
        self.moduli = list(moduli)
        self.lcm = lcm
        self.total = total
        super().__init__(f"lcm{tuple(self.moduli)} = {lcm} does not exceed S = {total}")


class InconsistentAssumptions(PBModError, ValueError):
    """Assumptions assign a variable both ways"""


class ResourceLimit(PBModError):
    """A verification routine exceeded its configured budget"""


class TooManyVariables(ResourceLimit):
    """Brute-force enumeration was asked for too many variables"""


class ParseError(PBModError, ValueError):
    """Malformed OPB or DIMACS input"""

    def __init__(self, message: str, line: int, column: int = 1):
        self.line = line
        self.column = column
        super().__init__(f"{message} (line {line}, column {column})")
