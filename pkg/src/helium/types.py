"""Value types of the IR and the operand promotion rules of the built-in operators."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .errors import TypeCheckError


class Secrecy(Enum):
    CONST = 0   # compile-time integer
    PLAIN = 1   # runtime plaintext
    CIPHER = 2  # ciphertext under some key label

    def __str__(self) -> str:
        return {Secrecy.CONST: "const", Secrecy.PLAIN: "pt", Secrecy.CIPHER: "ct"}[self]


@dataclass(frozen=True)
class ValueType:
    secrecy: Secrecy
    length: int | None = None  # None for scalars
    # derived flags, stored because the passes query them constantly
    is_vector: bool = field(init=False, repr=False, compare=False)
    is_cipher: bool = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.length is not None and self.length < 1:
            raise TypeCheckError(f"vector length must be positive, got {self.length}")
        object.__setattr__(self, "is_vector", self.length is not None)
        object.__setattr__(self, "is_cipher", self.secrecy is Secrecy.CIPHER)

    def with_secrecy(self, secrecy: Secrecy) -> "ValueType":
        return ValueType(secrecy, self.length)

    def __str__(self) -> str:
        shape = "int" if self.length is None else f"int[{self.length}]"
        return f"{self.secrecy} {shape}"


ARITH_OPS = ("+", "-", "*")
ROTATIONS = ("<<", ">>")


def join_secrecy(*secrecies: Secrecy) -> Secrecy:
    return max(secrecies, key=lambda s: s.value)


def promote(lhs: ValueType, rhs: ValueType, op: str, exponent: int | None = None) -> ValueType:
    """Result type of ``lhs op rhs``; raises :class:`TypeCheckError` on invalid operands.

    Scalars broadcast against vectors; vectors must agree in length. Rotations
    need a vector on the left and a constant amount; ``**`` needs a
    non-negative constant exponent (pass its value as ``exponent``).
    """
    secrecy = join_secrecy(lhs.secrecy, rhs.secrecy)
    if op in ROTATIONS:
        if not lhs.is_vector:
            raise TypeCheckError(f"rotation {op!r} needs a vector operand, got {lhs}")
        if rhs.secrecy is not Secrecy.CONST or rhs.is_vector:
            raise TypeCheckError(f"rotation amount must be a constant scalar, got {rhs}")
        return lhs
    if op == "**":
        if rhs.secrecy is not Secrecy.CONST or rhs.is_vector:
            raise TypeCheckError(f"exponent must be a constant scalar, got {rhs}")
        if exponent is not None and exponent < 0:
            raise TypeCheckError(f"exponent must be non-negative, got {exponent}")
        return lhs
    if op not in ARITH_OPS:
        raise TypeCheckError(f"unknown operator {op!r}")
    if lhs.is_vector and rhs.is_vector and lhs.length != rhs.length:
        raise TypeCheckError(f"vector length mismatch: {lhs} {op} {rhs}")
    return ValueType(secrecy, lhs.length if lhs.is_vector else rhs.length)
