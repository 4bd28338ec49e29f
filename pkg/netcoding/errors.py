"""
Exception types shared by the library and the CLI.

Probabilistic failures (a singular decoding matrix, a stalled peeling
decoder) are returned as values and never raised.
"""

from dataclasses import dataclass
from typing import List


class NetcodingError(Exception):
    pass


class UsageError(NetcodingError, ValueError):
    """A library call was made with arguments that break its preconditions"""


class FieldDomainError(UsageError):
    pass


class InvariantViolation(NetcodingError):
    """A property that must always hold was observed to fail"""


@dataclass(frozen=True)
class Diagnostic:
    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.path}: {self.message}"


class ConfigError(NetcodingError):
    def __init__(self, diagnostics: List[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))
