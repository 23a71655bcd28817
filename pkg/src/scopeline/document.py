"""Immutable document snapshots and cursor positions.

Lines are 0-indexed and split on ``\\n``; columns are 0-based code-point
offsets within a line.  Every other module keys off these two types.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum


class LanguageFamily(Enum):
    """Grammar family used for scope detection."""

    INDENT = "indent"
    BRACE = "brace"


_FAMILY_ALIASES = {
    "indent": LanguageFamily.INDENT,
    "indentscoped": LanguageFamily.INDENT,
    "python": LanguageFamily.INDENT,
    "brace": LanguageFamily.BRACE,
    "bracescoped": LanguageFamily.BRACE,
}


def parse_family(name: str) -> LanguageFamily:
    """Resolve a family name from config or the wire.

    Unknown families are rejected up front rather than guessed.
    """
    try:
        return _FAMILY_ALIASES[name.strip().lower()]
    except KeyError:
        raise ValueError(f"unsupported language family: {name!r}") from None


@dataclass(frozen=True)
class Cursor:
    """A caret position: 0-based line, 0-based code-point column."""

    line: int
    column: int


@dataclass(frozen=True)
class Document:
    """One immutable snapshot of a file's text.

    ``version`` strictly increases with every edit applied to the same
    document identity; consumers use it to detect stale derived state.
    """

    text: str
    family: LanguageFamily = LanguageFamily.INDENT
    version: int = 0
    uri: str = ""
    lines: tuple[str, ...] = field(init=False, repr=False, compare=False)
    line_starts: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        lines = tuple(self.text.split("\n"))
        starts = []
        pos = 0
        for line in lines:
            starts.append(pos)
            pos += len(line) + 1
        object.__setattr__(self, "lines", lines)
        object.__setattr__(self, "line_starts", tuple(starts))

    @property
    def line_count(self) -> int:
        return len(self.lines)

    def line_text(self, line: int) -> str:
        return self.lines[line]

    def offset_of(self, cursor: Cursor) -> int:
        """Absolute code-point offset of a cursor into ``text``."""
        self.validate_cursor(cursor)
        return self.line_starts[cursor.line] + cursor.column

    def cursor_at(self, offset: int) -> Cursor:
        """Inverse of :meth:`offset_of`."""
        if not 0 <= offset <= len(self.text):
            raise ValueError(f"offset {offset} out of range")
        lo, hi = 0, len(self.line_starts) - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if self.line_starts[mid] <= offset:
                lo = mid
            else:
                hi = mid - 1
        return Cursor(lo, offset - self.line_starts[lo])

    def validate_cursor(self, cursor: Cursor) -> None:
        if not 0 <= cursor.line < self.line_count:
            raise ValueError(f"cursor line {cursor.line} outside document")
        if not 0 <= cursor.column <= len(self.lines[cursor.line]):
            raise ValueError(
                f"cursor column {cursor.column} outside line {cursor.line}"
            )

    def insert(self, cursor: Cursor, inserted: str, version: int | None = None) -> "Document":
        """Pure insertion at ``cursor``; every existing character is preserved."""
        off = self.offset_of(cursor)
        return Document(
            text=self.text[:off] + inserted + self.text[off:],
            family=self.family,
            version=self.version + 1 if version is None else version,
            uri=self.uri,
        )

    def end_cursor(self) -> Cursor:
        """Cursor at the very end of the document."""
        return Cursor(self.line_count - 1, len(self.lines[-1]))


def insertion_end(cursor: Cursor, inserted: str) -> Cursor:
    """Cursor position at the end of ``inserted`` text placed at ``cursor``."""
    if "\n" not in inserted:
        return Cursor(cursor.line, cursor.column + len(inserted))
    parts = inserted.split("\n")
    return Cursor(cursor.line + len(parts) - 1, len(parts[-1]))
