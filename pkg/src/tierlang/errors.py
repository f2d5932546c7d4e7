"""Errors and diagnostics shared across the analysis pipeline."""

from dataclasses import dataclass, field


@dataclass
class Diagnostic:
    """A located analysis message, serializable as JSON."""

    file: str
    line: int
    col: int
    code: str
    message: str

    def to_json(self) -> dict:
        return {
            "file": self.file,
            "line": self.line,
            "col": self.col,
            "code": self.code,
            "message": self.message,
        }

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.col}: [{self.code}] {self.message}"


class AooError(Exception):
    """Base class for all analyzer errors."""


class ParseError(AooError):
    """Raised on malformed source; carries a diagnostic."""

    def __init__(self, diagnostic: Diagnostic):
        super().__init__(str(diagnostic))
        self.diagnostic = diagnostic


class WellFormednessError(AooError):
    """Raised when a program violates a structural precondition."""

    def __init__(self, diagnostics):
        super().__init__("; ".join(str(d) for d in diagnostics))
        self.diagnostics = list(diagnostics)


class TypeIssue(AooError):
    """Raised by the tier-free type check on an untypable construct."""

    def __init__(self, diagnostic: Diagnostic):
        super().__init__(str(diagnostic))
        self.diagnostic = diagnostic


class StuckError(AooError):
    """Raised when no semantics rule applies to the current instruction."""


class BudgetExhausted(AooError):
    """Raised when an execution exceeds its step budget."""


@dataclass
class DiagnosticSink:
    """Accumulates diagnostics during a pipeline stage."""

    file: str = "<input>"
    items: list = field(default_factory=list)

    def add(self, line: int, col: int, code: str, message: str) -> Diagnostic:
        d = Diagnostic(self.file, line, col, code, message)
        self.items.append(d)
        return d

    def extend(self, other: "DiagnosticSink"):
        self.items.extend(other.items)

    def __bool__(self) -> bool:
        return bool(self.items)
