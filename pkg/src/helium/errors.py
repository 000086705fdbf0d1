"""Exception hierarchy shared by the compiler and the simulated runtime."""
from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Span:
    line: int
    column: int
    offset: int  # byte offset into the UTF-8 source

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


class HeliumError(Exception):
    """Base class for every error raised by this package."""


class CompileError(HeliumError):
    """A user-facing compile error, optionally located in the source."""

    def __init__(self, message: str, span: Span | None = None):
        super().__init__(message)
        self.message = message
        self.span = span

    def format(self, filename: str = "<input>") -> str:
        if self.span is None:
            return f"{filename}: error: {self.message}"
        return f"{filename}:{self.span.line}:{self.span.column}: error: {self.message}"


class LexError(CompileError):
    pass


@dataclass(frozen=True)
class Diagnostic:
    span: Span
    expected: str
    found: str

    @property
    def message(self) -> str:
        return f"expected {self.expected}, found {self.found}"


class ParseError(CompileError):
    """One or more syntax errors. ``errors`` holds every recovered diagnostic."""

    def __init__(self, errors: list[Diagnostic]):
        first = errors[0]
        super().__init__(first.message, first.span)
        self.errors = errors
        self.expected = first.expected
        self.found = first.found

    def format(self, filename: str = "<input>") -> str:
        return "\n".join(
            f"{filename}:{d.span.line}:{d.span.column}: error: {d.message}"
            for d in self.errors
        )


class NameResolutionError(CompileError, NameError):
    pass


class TypeCheckError(CompileError, TypeError):
    pass


class ArityError(CompileError):
    pass


class LoopBoundError(CompileError):
    pass


class RecursiveCallError(CompileError, RecursionError):
    pass


class FoldOverflowError(CompileError, OverflowError):
    pass


class KeyResolutionError(CompileError):
    pass


class InternalError(HeliumError):
    """An internal invariant was violated; indicates a compiler bug."""


class VerifyError(InternalError):
    pass


class CycleError(InternalError):
    pass


class KeyMismatchError(InternalError):
    """A ciphertext-ciphertext operation saw operands under different keys."""


class DepthExceededError(InternalError):
    pass


class RuntimeInputError(HeliumError):
    pass


class MissingInputError(RuntimeInputError):
    pass


class PayloadOverflowError(HeliumError, OverflowError):
    pass


class ConfigError(HeliumError, ValueError):
    pass


class CircuitFormatError(HeliumError, ValueError):
    """A circuit file is not a well-formed circuit document."""
