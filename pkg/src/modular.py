"""
Moduli selection, PB to PBMod conversion and the modular encoder that
conjoins one PBMod translation per modulus
"""
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, List, Sequence, Tuple, Union

from loguru import logger

import sys
import os
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from config import settings
from src.baseline_encoders import PB_ENCODERS, PBEncoder, encode_constant
from src.core import (
    Literal, NormalizedPB, PBConstraint, PBModConstraint, Relation, Translation, normalize,
)
from src.errors import BadModulus, InsufficientModuli
from src.pbmod_encoders import PBMOD_ENCODERS, PBModEncoder
from src.tseitin import CnfBuilder

__all__ = [
    "ModuliKind", "ModuliStrategy", "PBModConstraint", "Translation",
    "choose_moduli", "convert", "encode_modular", "encode_pbmod_via_pb",
    "resolve_oracle", "lcm_of",
]


class ModuliKind(str, Enum):
    NATURALS = "naturals"
    PRIMES = "primes"
    PRIME_POWERS = "primepowers"
    EXPLICIT = "list"


@dataclass(frozen=True)
class ModuliStrategy:
    """One of the three built-in moduli sets, or an explicit list"""
    kind: ModuliKind
    moduli: Tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "kind", ModuliKind(self.kind))
        if self.kind is not ModuliKind.EXPLICIT:
            if self.moduli:
                raise ValueError(f"Strategy {self.kind.value} takes no explicit moduli")
            return
        if not self.moduli:
            raise BadModulus("Explicit moduli list is empty")
        for modulus in self.moduli:
            if modulus < 2:
                raise BadModulus(f"Modulus must be at least 2, got {modulus}")
        object.__setattr__(self, "moduli", tuple(sorted(set(self.moduli))))

    @classmethod
    def parse(cls, text: str) -> "ModuliStrategy":
        """Parse 'primes', 'naturals', 'primepowers' or 'list:2,3,5'"""
        text = text.strip().lower()
        if text.startswith("list:"):
            try:
                moduli = tuple(int(item) for item in text[len("list:"):].split(",") if item.strip())
            except ValueError:
                raise BadModulus(f"Cannot read moduli list {text!r}")
            return cls(ModuliKind.EXPLICIT, moduli)
        try:
            kind = ModuliKind(text)
        except ValueError:
            raise ValueError(f"Unknown moduli strategy {text!r} (use primes, naturals, primepowers or list:...)")
        if kind is ModuliKind.EXPLICIT:
            raise ValueError("Explicit moduli are written as list:2,3,5")
        return cls(kind)

    def __str__(self) -> str:
        if self.kind is ModuliKind.EXPLICIT:
            return "list:" + ",".join(str(m) for m in self.moduli)
        return self.kind.value


def lcm_of(moduli: Sequence[int]) -> int:
    """lcm of the moduli; 1 for none"""
    return math.lcm(*moduli) if moduli else 1


def _primes() -> Iterator[int]:
    found: List[int] = []
    candidate = 2
    while True:
        if all(candidate % p for p in found if p * p <= candidate):
            found.append(candidate)
            yield candidate
        candidate += 1


@lru_cache(maxsize=None)
def _floor_exp(t: int) -> int:
    """floor(e^t) for integer t >= 0, from rational bounds on the exponential series"""
    if t == 0:
        return 1
    partial = Fraction(0)
    term = Fraction(1)
    k = 0
    while True:
        partial += term
        k += 1
        term = term * t / k
        # once k > 2t the tail is below twice its first term
        if k > 2 * t:
            low, high = math.floor(partial), math.floor(partial + 2 * term)
            if low == high:
                return low


def _power_reaches_log(power: int, s: int) -> bool:
    """power >= ln s, decided on integers"""
    if power >= s.bit_length():
        return True
    return s <= _floor_exp(power)


def choose_moduli(s: int, strategy: ModuliStrategy) -> List[int]:
    """
    Moduli whose lcm exceeds s. Naturals: {2..ceil(log2 s)+1}, grown while the
    lcm does not exceed s; Primes: 2, 3, 5, ... until the product exceeds s;
    PrimePowers: for successive primes P the least P^n >= ln s.
    """
    if s < 1:
        raise ValueError(f"choose_moduli needs s >= 1, got {s}")
    kind = strategy.kind

    if kind is ModuliKind.EXPLICIT:
        moduli = list(strategy.moduli)
        lcm = lcm_of(moduli)
        if lcm <= s:
            raise InsufficientModuli(moduli, lcm, s)
        return moduli

    if kind is ModuliKind.NATURALS:
        top = max(2, (s - 1).bit_length() + 1)
        moduli = list(range(2, top + 1))
        while lcm_of(moduli) <= s:
            moduli.append(moduli[-1] + 1)
        return moduli

    moduli = []
    product = 1
    for prime in _primes():
        if product > s:
            break
        modulus = prime
        if kind is ModuliKind.PRIME_POWERS:
            while not _power_reaches_log(modulus, s):
                modulus *= prime
        moduli.append(modulus)
        product *= modulus
    return moduli


def convert(q: NormalizedPB, modulus: int) -> PBModConstraint:
    """Reduce coefficients and bound mod M; term order and zero coefficients are kept"""
    if not q.is_proper:
        raise ValueError(f"Only proper constraints can be converted, got {q.status.value}")
    if modulus < 2:
        raise BadModulus(f"Modulus must be at least 2, got {modulus}")
    return PBModConstraint(q.terms, q.bound, modulus)


def _check_moduli(q: NormalizedPB, moduli: Sequence[int]) -> List[int]:
    """Distinct moduli in ascending order, each at least 2, with lcm above S"""
    moduli = sorted(set(moduli))
    for modulus in moduli:
        if modulus < 2:
            raise BadModulus(f"Modulus must be at least 2, got {modulus}")
    lcm = lcm_of(moduli)
    if lcm <= q.total:
        raise InsufficientModuli(moduli, lcm, q.total)
    return moduli


def encode_pbmod_via_pb(qm: PBModConstraint, pb_encoder: Union[str, PBEncoder],
                        builder: CnfBuilder) -> Translation:
    """
    Translate sum(a_i l_i) = b (mod M) through the PB equality
    sum(a_i l_i) - M * sum(2^i k_i) = b with fresh bits k_i.

    The k bits are pinned to floor(sum(a_i l_i) / M) by two asserted range
    constraints, so the root is a function of the inputs in both polarities.
    """
    encoder = PB_ENCODERS[pb_encoder] if isinstance(pb_encoder, str) else pb_encoder
    modulus = qm.modulus
    most = sum(coefficient for coefficient, _ in qm.terms) // modulus
    with builder.stage(f"via-pb-mod{modulus}"):
        carries = [builder.new_literal() for _ in range(most.bit_length())]
        terms = list(qm.terms) + [(-(modulus << i), k) for i, k in enumerate(carries)]
        if carries:
            for op, bound in ((Relation.GE, 0), (Relation.LT, modulus)):
                pinned = encode_normalized(normalize(PBConstraint(terms, op, bound), fresh=builder.new_var),
                                           encoder, builder)
                builder.add_clause([pinned.root])
        equality = normalize(PBConstraint(terms, Relation.EQ, qm.bound), fresh=builder.new_var)
        inner = encode_normalized(equality, encoder, builder)
    logger.debug(f"via-PB mod {modulus}: {len(carries)} carry bits")
    return builder.translation(inner.root, qm.variables)


def encode_normalized(q: NormalizedPB, encoder: PBEncoder, builder: CnfBuilder) -> Translation:
    """Run a PB encoder, or the constant encoding when q is decided by normalization"""
    if not q.is_proper:
        return encode_constant(q, builder)
    return encoder(q, builder)


def resolve_oracle(name: str) -> PBModEncoder:
    """PBMod encoder by name: dp, dp-lean, dc, sorter, card or via-pb"""
    if name == "via-pb":
        return lambda qm, builder: encode_pbmod_via_pb(qm, settings.via_pb_backend, builder)
    try:
        return PBMOD_ENCODERS[name]
    except KeyError:
        raise ValueError(f"Unknown PBMod encoder {name!r}")


def encode_modular(q: NormalizedPB, moduli: Sequence[int], oracle: Union[str, PBModEncoder],
                   builder: CnfBuilder) -> Translation:
    """
    Encode every conversion of q through the oracle and glue the component
    roots with v <=> (v_1 and ... and v_m).
    """
    if not q.is_proper:
        return encode_constant(q, builder)
    moduli = _check_moduli(q, moduli)
    encoder = resolve_oracle(oracle) if isinstance(oracle, str) else oracle

    components: List[Tuple[int, Literal]] = []
    for modulus in moduli:
        component = encoder(convert(q, modulus), builder)
        components.append((modulus, component.root))
    root = builder.define_conjunction_root([root for _, root in components])
    logger.debug(f"Modular encoding of {q} over moduli {moduli}: {len(builder.clauses)} clauses so far")
    return builder.translation(root, q.encoded_vars, components)
