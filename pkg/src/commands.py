"""
The encode, verify and compare commands behind the command-line interface
"""
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from loguru import logger
from pydantic import BaseModel, TypeAdapter

import sys
import os
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from config import settings
from src.baseline_encoders import PB_ENCODERS, encode_constant, encode_sortnet
from src.core import NormalizedPB, PBConstraint, Translation, normalize
from src.errors import DuplicateVariable, ParseError, PBModError, ResourceLimit
from src.modular import ModuliStrategy, choose_moduli, encode_modular
from src.opb_io import parse_opb_file, write_dimacs, write_varmap
from src.tseitin import CnfBuilder
from src.up_engine import check_arc_consistency, check_valid_translation


EXIT_OK = 0
EXIT_FAILED = 1
EXIT_PARSE = 2
EXIT_ENCODING = 3
EXIT_RESOURCE = 4


class Family(str, Enum):
    MODULAR_DP = "modular-dp"
    MODULAR_DP_LEAN = "modular-dp-lean"
    MODULAR_DC = "modular-dc"
    MODULAR_SORTER = "modular-sorter"
    MODULAR_CARD = "modular-card"
    MODULAR_VIA_PB = "modular-via-pb"
    BDD = "bdd"
    ADDER = "adder"
    SORTNET = "sortnet"


ALL_FAMILIES: Tuple[str, ...] = tuple(family.value for family in Family)


@dataclass(frozen=True)
class EncoderSpec:
    """An encoder family with its options; moduli apply to modular families, radix to sortnet"""
    family: Family
    moduli: Optional[ModuliStrategy] = None
    radix: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if self.moduli is not None and not self.is_modular:
            raise ValueError(f"--moduli does not apply to the {self.family.value} encoder")
        if self.radix is not None and self.family is not Family.SORTNET:
            raise ValueError(f"--radix applies to the sortnet encoder only, not {self.family.value}")
        if self.radix is not None and self.radix < 2:
            raise ValueError(f"Radix must be at least 2, got {self.radix}")
        if self.is_modular and self.moduli is None:
            object.__setattr__(self, "moduli", ModuliStrategy.parse(settings.default_moduli))

    @classmethod
    def parse(cls, name: str, moduli: Optional[str] = None, radix: Optional[int] = None) -> "EncoderSpec":
        try:
            family = Family(name)
        except ValueError:
            raise ValueError(f"Unknown encoder {name!r}; choose from {', '.join(ALL_FAMILIES)}")
        strategy = ModuliStrategy.parse(moduli) if moduli is not None else None
        return cls(family, strategy, radix)

    @property
    def is_modular(self) -> bool:
        return self.family.value.startswith("modular-")

    @property
    def oracle(self) -> str:
        return self.family.value[len("modular-"):]

    def __str__(self) -> str:
        if self.is_modular:
            return f"{self.family.value}[{self.moduli}]"
        if self.radix is not None:
            return f"{self.family.value}[radix {self.radix}]"
        return self.family.value


def encode_constraint(q: NormalizedPB, spec: EncoderSpec, builder: CnfBuilder) -> Tuple[Translation, List[int]]:
    """Encode one normalized constraint; returns the translation and the moduli used"""
    if not q.is_proper:
        return encode_constant(q, builder), []
    if spec.is_modular:
        moduli = choose_moduli(max(1, q.total), spec.moduli)
        return encode_modular(q, moduli, spec.oracle, builder), moduli
    if spec.family is Family.SORTNET:
        return encode_sortnet(q, builder, spec.radix), []
    return PB_ENCODERS[spec.family.value](q, builder), []


def _load(file_path: str) -> Optional[List[PBConstraint]]:
    """Parsed constraints, or None after logging why the file is unusable"""
    try:
        return parse_opb_file(file_path)
    except (ParseError, DuplicateVariable, FileNotFoundError) as e:
        logger.error(f"Cannot read {file_path}: {e}")
        return None


def _spec_from(args) -> Optional[EncoderSpec]:
    try:
        return EncoderSpec.parse(args.encoder, getattr(args, "moduli", None), getattr(args, "radix", None))
    except (ValueError, PBModError) as e:
        logger.error(f"Invalid encoder options: {e}")
        return None


class ConstraintStats(BaseModel):
    constraint_index: int
    n: int
    S: int
    moduli: List[int]
    vars: int
    clauses: int
    literals: int


def cmd_encode(args) -> int:
    """Write the DIMACS CNF of every constraint in the file, conjoined under one root"""
    spec = _spec_from(args)
    if spec is None:
        return EXIT_PARSE
    constraints = _load(args.input)
    if constraints is None:
        return EXIT_PARSE

    # DIMACS indices 1..k follow the sorted source variables
    dense = {variable: index for index, variable in enumerate(
        sorted({v for q in constraints for v in q.variables}), start=1)}
    source_vars = list(dense.values())
    names = {index: f"x{variable}" for variable, index in dense.items()}
    builder = CnfBuilder.for_variables(source_vars)
    roots = []
    stats: List[ConstraintStats] = []
    try:
        for index, pb in enumerate(constraints):
            first_var = builder.next_var
            first_clause = len(builder.clauses)
            first_literal = builder.clauses.literal_count
            with builder.stage("slack"):
                q = normalize(pb.renamed(dense), fresh=builder.new_var)
            translation, moduli = encode_constraint(q, spec, builder)
            roots.append(translation.root)
            stats.append(ConstraintStats(
                constraint_index=index,
                n=len(pb.terms),
                S=q.total,
                moduli=moduli,
                vars=len(q.input_vars) + builder.next_var - first_var,
                clauses=len(builder.clauses) - first_clause,
                literals=builder.clauses.literal_count - first_literal,
            ))
            logger.info(f"Constraint {index}: {pb} -> {stats[-1].clauses} clauses, moduli {moduli}")
        components = translation.components if len(constraints) == 1 else ()
        root = builder.define_conjunction_root(roots)
        combined = builder.translation(root, source_vars, components)
    except PBModError as e:
        logger.error(f"Encoding failed: {e}")
        return EXIT_ENCODING

    data, varmap = write_dimacs(combined, args.assert_root, source_vars, names)
    output = Path(args.output)
    output.parent.mkdir(parents=True, exist_ok=True)
    output.write_bytes(data)
    write_varmap(varmap, f"{args.output}.map.json")
    if args.stats:
        Path(args.stats).write_bytes(TypeAdapter(List[ConstraintStats]).dump_json(stats, indent=2) + b"\n")
    logger.info(f"Wrote {combined.num_clauses} clauses to {output} with encoder {spec}")
    return EXIT_OK


@dataclass
class VerifyResult:
    constraint_index: int
    constraint: str
    passed: bool
    reason: str = ""


def cmd_verify(args) -> int:
    """Check every constraint's translation for validity by exhaustive solving"""
    spec = _spec_from(args)
    if spec is None:
        return EXIT_PARSE
    constraints = _load(args.input)
    if constraints is None:
        return EXIT_PARSE
    limit = args.limit_vars if args.limit_vars is not None else settings.verify_limit_vars

    results: List[VerifyResult] = []
    for index, pb in enumerate(constraints):
        builder = CnfBuilder.for_variables(pb.variables)
        try:
            q = normalize(pb, fresh=builder.new_var)
            translation, _ = encode_constraint(q, spec, builder)
            report = check_valid_translation(q, translation, limit=limit)
        except ResourceLimit as e:
            logger.error(f"Constraint {index}: {e}")
            return EXIT_RESOURCE
        except PBModError as e:
            logger.error(f"Constraint {index}: encoding failed: {e}")
            return EXIT_ENCODING
        reason = report.reason
        if report.witness is not None:
            reason += f" under {report.witness}"
        results.append(VerifyResult(index, str(pb), report.passed, reason))

    _print_verify_summary(spec, results)
    return EXIT_OK if all(result.passed for result in results) else EXIT_FAILED


def _print_verify_summary(spec: EncoderSpec, results: Sequence[VerifyResult]) -> None:
    logger.info("=" * 60)
    logger.info(f"VALIDITY CHECK: {spec}")
    logger.info("=" * 60)
    for result in results:
        status = "PASS" if result.passed else "FAIL"
        logger.info(f"  [{status}] #{result.constraint_index} {result.constraint}")
        if not result.passed:
            logger.info(f"    * {result.reason}")
    passed = sum(1 for result in results if result.passed)
    logger.info(f"Passed: {passed}/{len(results)}")
    logger.info("=" * 60)


class CompareRow(BaseModel):
    constraint_index: int
    encoder: str
    status: str = "ok"
    vars: Optional[int] = None
    clauses: Optional[int] = None
    literals: Optional[int] = None
    up_detectable: Optional[bool] = None
    up_inferable: Optional[bool] = None


def compare_constraint(index: int, pb: PBConstraint, encoders: Sequence[str]) -> List[CompareRow]:
    """One row per encoder, then the unavailable totalizer row"""
    rows = []
    for name in encoders:
        spec = EncoderSpec.parse(name)
        builder = CnfBuilder.for_variables(pb.variables)
        q = normalize(pb, fresh=builder.new_var)
        translation, _ = encode_constraint(q, spec, builder)
        row = CompareRow(
            constraint_index=index,
            encoder=name,
            vars=translation.num_vars,
            clauses=translation.num_clauses,
            literals=translation.num_literals,
        )
        if len(translation.input_vars) <= settings.compare_arc_max_vars:
            report = check_arc_consistency(q, translation)
            row.up_detectable = report.up_detectable
            row.up_inferable = report.up_inferable
        rows.append(row)
    rows.append(CompareRow(constraint_index=index, encoder="totalizer", status="unavailable"))
    return rows


def cmd_compare(args) -> int:
    """Size and UP-strength table of every encoder on every constraint"""
    constraints = _load(args.input)
    if constraints is None:
        return EXIT_PARSE
    encoders = [name.strip() for name in args.encoders.split(",")] if args.encoders else list(ALL_FAMILIES)
    for name in encoders:
        if name not in ALL_FAMILIES:
            logger.error(f"Unknown encoder {name!r}; choose from {', '.join(ALL_FAMILIES)}")
            return EXIT_PARSE

    rows: List[CompareRow] = []
    try:
        for index, pb in enumerate(constraints):
            rows.extend(compare_constraint(index, pb, encoders))
    except ResourceLimit as e:
        logger.error(f"Comparison aborted: {e}")
        return EXIT_RESOURCE
    except PBModError as e:
        logger.error(f"Encoding failed: {e}")
        return EXIT_ENCODING
    logger.warning("Totalizer encoding is unavailable; reported as such")

    report = Path(args.report)
    report.parent.mkdir(parents=True, exist_ok=True)
    report.write_bytes(TypeAdapter(List[CompareRow]).dump_json(rows, indent=2) + b"\n")
    _print_compare_summary(rows)
    return EXIT_OK


def _print_compare_summary(rows: Sequence[CompareRow]) -> None:
    logger.info("=" * 60)
    logger.info("ENCODER COMPARISON")
    logger.info("=" * 60)
    for row in rows:
        if row.status != "ok":
            logger.info(f"  #{row.constraint_index} {row.encoder:<16} {row.status}")
            continue
        flags = ""
        if row.up_detectable is not None:
            flags = f" detectable={row.up_detectable} inferable={row.up_inferable}"
        logger.info(
            f"  #{row.constraint_index} {row.encoder:<16} vars={row.vars} "
            f"clauses={row.clauses} literals={row.literals}{flags}"
        )
    logger.info("=" * 60)
