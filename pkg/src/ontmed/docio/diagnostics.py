"""Parse diagnostics shared by all document formats."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class Severity(Enum):
    ERROR = "Error"
    WARNING = "Warning"


@dataclass(frozen=True)
class ParseDiagnostic:
    file: str
    line: int
    column: int
    message: str
    severity: Severity = Severity.ERROR

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}: {self.severity.value.lower()}: {self.message}"


class ParseError(Exception):
    """Raised when a document cannot be parsed; carries every diagnostic found."""

    def __init__(self, diagnostics: list[ParseDiagnostic]):
        self.diagnostics = list(dict.fromkeys(diagnostics))
        first = self.diagnostics[0]
        extra = f" (+{len(self.diagnostics) - 1} more)" if len(self.diagnostics) > 1 else ""
        super().__init__(f"{first}{extra}")


def fail(file: str, line: int, column: int, message: str) -> ParseError:
    return ParseError([ParseDiagnostic(file, line, column, message)])
