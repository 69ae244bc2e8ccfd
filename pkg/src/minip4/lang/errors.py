from __future__ import annotations

from typing import Optional

from .ast import Loc


class MiniP4Error(Exception):
    """A diagnostic attached to a source location."""

    severity = "error"

    def __init__(self, message: str, loc: Optional[Loc] = None):
        super().__init__(message)
        self.message = message
        self.loc = loc

    def format(self, filename: str = "<input>") -> str:
        line, col = (self.loc.line, self.loc.col) if self.loc else (0, 0)
        return f"{filename}:{line}:{col}: {self.severity}: {self.message}"

    def __str__(self) -> str:
        if self.loc is None:
            return self.message
        return f"{self.loc}: {self.message}"


class ParseError(MiniP4Error):
    pass


class TypeCheckError(MiniP4Error):
    pass


class ShiftWidthError(TypeCheckError):
    """Shift of an integer literal whose width cannot be known at compile time."""
