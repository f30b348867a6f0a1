"""Exception types and diagnostics."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional


@dataclass(frozen=True)
class Diagnostic:
    kind: str
    message: str
    line: int = 0
    col: int = 0

    def format(self, filename: str = "<input>") -> str:
        return f"{filename}:{self.line}:{self.col}: {self.message}"


class FlcError(Exception):
    kind = "Error"

    def __init__(self, message: str, pos: Optional[tuple[int, int]] = None):
        super().__init__(message)
        self.message = message
        self.pos = pos

    def diagnostic(self) -> Diagnostic:
        line, col = self.pos or (0, 0)
        return Diagnostic(self.kind, self.message, line, col)


class ParseError(FlcError):
    kind = "SyntaxError"

    def __init__(self, message: str, pos: tuple[int, int], expected: tuple[str, ...] = ()):
        super().__init__(message, pos)
        self.expected = expected


class DuplicateName(FlcError):
    kind = "DuplicateName"


class UnknownConstructor(FlcError):
    kind = "UnknownConstructor"


class MixedTypeBranches(FlcError):
    kind = "MixedTypeBranches"


class StaticError(FlcError):
    """Raised by the loader when validation reports diagnostics."""

    kind = "StaticError"

    def __init__(self, diagnostics: list[Diagnostic]):
        super().__init__("; ".join(d.message for d in diagnostics))
        self.diagnostics = diagnostics


class DynamicTypeError(FlcError):
    kind = "DynamicTypeError"


class NarrowUnsupported(DynamicTypeError):
    kind = "NarrowUnsupported"


class CounterExhausted(FlcError):
    kind = "CounterExhausted"


class AlreadyBound(FlcError):
    kind = "AlreadyBound"


class InternalDetError(FlcError):
    """The deterministic fast path reached a non-deterministic construct."""

    kind = "InternalDetError"


class OracleTimeout(FlcError):
    kind = "OracleTimeout"


class OracleUnsupported(FlcError):
    kind = "OracleUnsupported"
