"""
OPB constraint parsing and printing, DIMACS CNF emission and re-parsing,
and the JSON variable map written next to every CNF
"""
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from loguru import logger
from pydantic import BaseModel, Field

from src.core import Literal, PBConstraint, Relation, Translation
from src.errors import DuplicateVariable, ParseError


_TOKEN = re.compile(
    r"(?P<integer>[+-]?\d+)"
    r"|(?P<name>~?x\d+)"
    r"|(?P<op>>=|<=|=|>|<)"
    r"|(?P<end>;)"
    r"|(?P<other>\S+)"
)
_HEADER = re.compile(r"^\*\s*#variable=\s*(\d+)\s+#constraint=\s*(\d+)")


@dataclass
class _Token:
    kind: str
    text: str
    column: int


def _tokenize(line: str, number: int) -> List[_Token]:
    tokens = []
    position = 0
    while position < len(line):
        if line[position].isspace():
            position += 1
            continue
        match = _TOKEN.match(line, position)
        tokens.append(_Token(match.lastgroup, match.group(), position + 1))
        position = match.end()
    return tokens


def _parse_constraint(tokens: List[_Token], number: int, line_length: int) -> PBConstraint:
    terms: List[Tuple[int, Literal]] = []
    index = 0

    def expect(kind: str, what: str) -> _Token:
        nonlocal index
        if index >= len(tokens):
            raise ParseError(f"Expected {what} at end of line", number, line_length + 1)
        token = tokens[index]
        if token.kind != kind:
            raise ParseError(f"Expected {what}, found {token.text!r}", number, token.column)
        index += 1
        return token

    while index < len(tokens) and tokens[index].kind == "integer":
        coefficient = expect("integer", "coefficient")
        name = expect("name", "variable name")
        if index < len(tokens) and tokens[index].kind == "name":
            raise ParseError("Non-linear terms are not supported", number, tokens[index].column)
        variable = int(name.text.lstrip("~")[1:])
        if variable < 1:
            raise ParseError(f"Variable index must be positive in {name.text!r}", number, name.column)
        terms.append((int(coefficient.text), Literal(variable, not name.text.startswith("~"))))

    if index < len(tokens) and tokens[index].kind == "name":
        raise ParseError(f"Missing coefficient before {tokens[index].text!r}", number, tokens[index].column)
    op = expect("op", "relational operator")
    bound = expect("integer", "integer right-hand side")
    expect("end", "';'")
    if index < len(tokens):
        raise ParseError(f"Unexpected {tokens[index].text!r} after ';'", number, tokens[index].column)

    try:
        return PBConstraint(tuple(terms), Relation(op.text), int(bound.text))
    except DuplicateVariable as error:
        raise DuplicateVariable(error.variable, line=number)


def parse_opb(text: str) -> List[PBConstraint]:
    """
    One constraint per line: term+ op integer ';' with term = integer name,
    name = x<digits> optionally prefixed by '~'. Lines starting with '*' are
    comments; a leading '* #variable= N #constraint= M' header is validated.
    """
    constraints = []
    header: Optional[Tuple[int, int, int]] = None
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("*"):
            match = _HEADER.match(line)
            if match and header is None and not constraints:
                header = (int(match.group(1)), int(match.group(2)), number)
            continue
        if line.lower().startswith("min:") or line.lower().startswith("max:"):
            raise ParseError("Objective functions are not supported", number, 1)
        tokens = _tokenize(line, number)
        for token in tokens:
            if token.kind == "other":
                raise ParseError(f"Unexpected {token.text!r}", number, token.column)
        constraints.append(_parse_constraint(tokens, number, len(line)))

    if header is not None:
        declared_vars, declared_constraints, number = header
        if declared_constraints != len(constraints):
            raise ParseError(
                f"Header declares {declared_constraints} constraints, found {len(constraints)}", number
            )
        largest = max((v for q in constraints for v in q.variables), default=0)
        if largest > declared_vars:
            raise ParseError(f"Header declares {declared_vars} variables, x{largest} is used", number)
    logger.info(f"Parsed {len(constraints)} constraints")
    return constraints


def parse_opb_file(file_path: str) -> List[PBConstraint]:
    """Read and parse an OPB file; undecodable bytes are reported as a ParseError"""
    path = Path(file_path)
    if not path.exists():
        raise FileNotFoundError(f"OPB file not found: {file_path}")
    data = path.read_bytes()
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as error:
        line = data.count(b"\n", 0, error.start) + 1
        column = error.start - (data.rfind(b"\n", 0, error.start) + 1) + 1
        raise ParseError(f"Invalid UTF-8 byte 0x{data[error.start]:02x}", line, column)
    return parse_opb(text)


def _format_literal(literal: Literal) -> str:
    return f"x{literal.variable}" if literal.polarity else f"~x{literal.variable}"


def format_opb(constraints: Sequence[PBConstraint], header: bool = True) -> str:
    """Canonical OPB text; parse_opb(format_opb(qs)) == qs"""
    lines = []
    if header:
        largest = max((v for q in constraints for v in q.variables), default=0)
        lines.append(f"* #variable= {largest} #constraint= {len(constraints)}")
    for q in constraints:
        parts = [f"{coefficient:+d} {_format_literal(literal)}" for coefficient, literal in q.terms]
        parts.extend([q.op.value, str(q.bound), ";"])
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


class AuxRange(BaseModel):
    stage: str
    first: int
    last: int


class RootRef(BaseModel):
    index: int
    polarity: bool


class ModulusComponent(BaseModel):
    modulus: int
    literal: int


class VarMap(BaseModel):
    """Sidecar mapping DIMACS indices back to the source constraint variables"""
    source_vars: Dict[str, int] = Field(default_factory=dict)
    aux_ranges: List[AuxRange] = Field(default_factory=list)
    root: RootRef
    modulus_components: List[ModulusComponent] = Field(default_factory=list)


def write_dimacs(t: Translation, assert_root: bool,
                 source_vars: Optional[Iterable[int]] = None,
                 names: Optional[Mapping[int, str]] = None) -> Tuple[bytes, VarMap]:
    """
    DIMACS text with header 'p cnf V C', clauses in insertion order and the
    root unit clause last when asserted. Variable ids are written unchanged;
    `names` gives the source name of an index when it is not x<index>.
    """
    names = names or {}
    sources = sorted(set(t.input_vars if source_vars is None else source_vars))
    clauses = [[literal.to_dimacs() for literal in clause] for clause in t.clauses]
    if assert_root:
        clauses.append([t.root.to_dimacs()])
    num_vars = max([t.clauses.max_var, t.root.variable] + sources)

    lines = [f"p cnf {num_vars} {len(clauses)}"]
    lines.extend(" ".join(str(literal) for literal in clause + [0]) for clause in clauses)
    data = ("\n".join(lines) + "\n").encode("utf-8")

    varmap = VarMap(
        source_vars={names.get(variable, f"x{variable}"): variable for variable in sources},
        aux_ranges=[AuxRange(stage=name, first=first, last=last) for name, first, last in t.stages],
        root=RootRef(index=t.root.variable, polarity=t.root.polarity),
        modulus_components=[
            ModulusComponent(modulus=modulus, literal=literal.to_dimacs())
            for modulus, literal in t.components
        ],
    )
    logger.debug(f"DIMACS: {num_vars} variables, {len(clauses)} clauses")
    return data, varmap


def write_varmap(varmap: VarMap, file_path: Union[str, Path]) -> None:
    path = Path(file_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(varmap.model_dump_json(indent=2) + "\n", encoding="utf-8")


@dataclass
class DimacsCnf:
    num_vars: int
    clauses: List[Tuple[int, ...]]


def parse_dimacs(data: Union[bytes, str]) -> DimacsCnf:
    """Read a DIMACS CNF, checking the header counts and literal range"""
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    header: Optional[Tuple[int, int]] = None
    clauses: List[Tuple[int, ...]] = []
    current: List[int] = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            fields = line.split()
            if header is not None or len(fields) != 4 or fields[1] != "cnf":
                raise ParseError(f"Malformed header {line!r}", number)
            header = (int(fields[2]), int(fields[3]))
            continue
        if header is None:
            raise ParseError("Clause before the 'p cnf' header", number)
        for token in line.split():
            try:
                literal = int(token)
            except ValueError:
                raise ParseError(f"Not an integer literal: {token!r}", number)
            if literal == 0:
                clauses.append(tuple(current))
                current = []
            elif abs(literal) > header[0]:
                raise ParseError(f"Literal {literal} exceeds the declared {header[0]} variables", number)
            else:
                current.append(literal)
    if header is None:
        raise ParseError("Missing 'p cnf' header", 1)
    if current:
        raise ParseError("Last clause is not terminated by 0", len(text.splitlines()))
    if len(clauses) != header[1]:
        raise ParseError(f"Header declares {header[1]} clauses, found {len(clauses)}", 1)
    return DimacsCnf(header[0], clauses)
