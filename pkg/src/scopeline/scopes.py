"""Tolerant scope detection for two grammar families.

A single linear scan of the document's lines produces a tree of nested
scopes: an indentation stack keyed on colon-terminated header keywords
for indent-scoped sources, a brace-depth stack with header detection on
the line containing the opening brace for brace-scoped sources.

The scanner never fails: unclosed scopes extend to the end of the
document, unbalanced closers are ignored, and anything unrecognizable
degrades to a flat module tree.  Scope-character counting is skipped
inside line comments and single-line string literals; lines inside
multi-line string literals are treated as opaque.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum

from .document import Cursor, Document, LanguageFamily

# Characters that may trail the cursor without counting as content.
DEFAULT_CLOSER_CHARS = frozenset("})]")


class ScopeError(Exception):
    pass


class StaleTreeError(ScopeError):
    """The tree was built from an older document version; re-parse."""


class ScopeKind(Enum):
    MODULE = "module"
    FUNCTION = "function"
    CLASS = "class"
    CONDITIONAL = "conditional"
    LOOP = "loop"
    BLOCK = "block"
    NOTEBOOK_CELL = "notebook_cell"
    OTHER = "other"


_INDENT_HEADER_KINDS = {
    "def": ScopeKind.FUNCTION,
    "class": ScopeKind.CLASS,
    "if": ScopeKind.CONDITIONAL,
    "elif": ScopeKind.CONDITIONAL,
    "else": ScopeKind.CONDITIONAL,
    "for": ScopeKind.LOOP,
    "while": ScopeKind.LOOP,
    "try": ScopeKind.BLOCK,
    "except": ScopeKind.BLOCK,
    "finally": ScopeKind.BLOCK,
    "with": ScopeKind.BLOCK,
}

_BRACE_KIND_PATTERNS = (
    (re.compile(r"\b(if|else|elif|switch|case|match)\b"), ScopeKind.CONDITIONAL),
    (re.compile(r"\b(for|while|do|loop)\b"), ScopeKind.LOOP),
    (re.compile(r"\b(class|struct|enum|interface|trait|impl|union)\b"), ScopeKind.CLASS),
    (re.compile(r"\b(fn|func|function|def|fun)\b"), ScopeKind.FUNCTION),
    (re.compile(r"[A-Za-z_]\w*\s*\([^()]*\)\s*$"), ScopeKind.FUNCTION),
)


@dataclass
class ScopeConfig:
    """Knobs for the tolerant scanner."""

    tab_width: int = 1
    extra_header_keywords: tuple[str, ...] = ()
    indent_unit: int = 4

    def header_kind(self, keyword: str) -> ScopeKind | None:
        if keyword in _INDENT_HEADER_KINDS:
            return _INDENT_HEADER_KINDS[keyword]
        if keyword in self.extra_header_keywords:
            return ScopeKind.OTHER
        return None


DEFAULT_SCOPE_CONFIG = ScopeConfig()


@dataclass
class ScopeNode:
    """One nested scope.

    ``body_start``/``body_end`` are absolute code-point offsets into the
    document; children are disjoint, ordered, and contained in the body.
    ``indent`` is the header line's indentation width (indent family).
    A node that was never explicitly closed (dedent/closer missing)
    extends to the end of the document and also owns the final offset.
    """

    kind: ScopeKind
    header_line: int
    body_start: int
    body_end: int = -1
    indent: int = 0
    closed: bool = False
    children: list["ScopeNode"] = field(default_factory=list)
    parent: "ScopeNode | None" = field(default=None, repr=False)

    def contains(self, offset: int) -> bool:
        if offset < self.body_start:
            return False
        if offset < self.body_end:
            return True
        return not self.closed and offset == self.body_end

    def walk(self):
        yield self
        for child in self.children:
            yield from child.walk()


@dataclass
class ScopeTree:
    """Scope structure of one document snapshot plus per-line facts."""

    root: ScopeNode
    doc_version: int
    family: LanguageFamily
    line_blank: tuple[bool, ...]
    line_owner: tuple[ScopeNode, ...]
    line_starts: tuple[int, ...]
    # multi-line string state at each line's start (indent family)
    line_triple: tuple[str | None, ...] = ()

    def check_version(self, doc: Document) -> None:
        if doc.version != self.doc_version:
            raise StaleTreeError(
                f"tree built for version {self.doc_version}, document is at {doc.version}"
            )


@dataclass(frozen=True)
class LineContext:
    """Cursor-relative facts about a single line."""

    text_before_cursor: str
    text_after_cursor: str
    after_is_closers_only: bool
    defines_new_scope: bool


# ---------------------------------------------------------------------------
# line scanning
# ---------------------------------------------------------------------------

def indent_width(line: str, tab_width: int = 1) -> int:
    width = 0
    for ch in line:
        if ch == "\t":
            width += tab_width
        elif ch.isspace():
            width += 1
        else:
            break
    return width


def scan_indent_line(line: str, in_triple: str | None) -> tuple[str | None, str | None]:
    """Advance multi-line string state across ``line``.

    Returns ``(new_state, effective)`` where ``effective`` is the line's
    code content with comments and string bodies removed, or ``None``
    when the line started inside a multi-line string (opaque line).
    """
    opaque = in_triple is not None
    effective: list[str] = []
    i = 0
    n = len(line)
    while i < n:
        if in_triple is not None:
            end = line.find(in_triple, i)
            if end == -1:
                return in_triple, None if opaque else "".join(effective)
            in_triple = None
            i = end + 3
            continue
        ch = line[i]
        if ch == "#":
            break
        if line.startswith('"""', i) or line.startswith("'''", i):
            in_triple = ch * 3
            i += 3
            continue
        if ch in "\"'":
            j = i + 1
            while j < n:
                if line[j] == "\\":
                    j += 2
                    continue
                if line[j] == ch:
                    break
                j += 1
            if j >= n:
                break  # unterminated; rest of line is string
            i = j + 1
            continue
        effective.append(ch)
        i += 1
    return in_triple, None if opaque else "".join(effective)


def indent_prefix_state(prefix: str, in_triple: str | None) -> tuple[str | None, bool]:
    """State after the text left of a cursor on an indent-family line.

    Returns ``(triple_state, rest_is_inert)``: the multi-line string
    state at the cursor, and whether everything generated on the rest of
    this physical line is inert (a trailing comment or an unterminated
    single-line string runs to the end of the line).
    """
    i = 0
    n = len(prefix)
    while i < n:
        if in_triple is not None:
            end = prefix.find(in_triple, i)
            if end == -1:
                return in_triple, False  # still inside; closable in raw
            in_triple = None
            i = end + 3
            continue
        ch = prefix[i]
        if ch == "#":
            return None, True
        if prefix.startswith('"""', i) or prefix.startswith("'''", i):
            in_triple = ch * 3
            i += 3
            continue
        if ch in "\"'":
            j = i + 1
            while j < n:
                if prefix[j] == "\\":
                    j += 2
                    continue
                if prefix[j] == ch:
                    break
                j += 1
            if j >= n:
                return None, True  # unterminated string swallows the line
            i = j + 1
            continue
        i += 1
    return in_triple, False


def brace_prefix_inert(prefix: str) -> bool:
    """True when the cursor sits inside a // comment or a string literal."""
    i = 0
    n = len(prefix)
    while i < n:
        ch = prefix[i]
        if ch == "/" and i + 1 < n and prefix[i + 1] == "/":
            return True
        if ch in "\"'":
            j = i + 1
            while j < n:
                if prefix[j] == "\\":
                    j += 2
                    continue
                if prefix[j] == ch:
                    break
                j += 1
            if j >= n:
                return True
            i = j + 1
            continue
        i += 1
    return False


def scan_brace_line(line: str) -> list[tuple[int, str]]:
    """Brace events on one line: ``(column, "{" | "}")`` outside strings/comments."""
    events: list[tuple[int, str]] = []
    i = 0
    n = len(line)
    while i < n:
        ch = line[i]
        if ch == "/" and i + 1 < n and line[i + 1] == "/":
            break
        if ch in "\"'":
            j = i + 1
            while j < n:
                if line[j] == "\\":
                    j += 2
                    continue
                if line[j] == ch:
                    break
                j += 1
            if j >= n:
                break
            i = j + 1
            continue
        if ch in "{}":
            events.append((i, ch))
        i += 1
    return events


_HEADER_WORD_RE = re.compile(r"^\s*(?:async\s+)?([A-Za-z_]\w*)")


def indent_header_kind(effective: str, config: ScopeConfig = DEFAULT_SCOPE_CONFIG) -> ScopeKind | None:
    """Kind of scope a colon-terminated header line opens, if any."""
    stripped = effective.strip()
    if not stripped.endswith(":"):
        return None
    m = _HEADER_WORD_RE.match(stripped)
    if m is None:
        return None
    return config.header_kind(m.group(1))


def brace_header_kind(effective_before_brace: str) -> ScopeKind:
    text = effective_before_brace.strip()
    if not text:
        return ScopeKind.BLOCK
    for pattern, kind in _BRACE_KIND_PATTERNS:
        if pattern.search(text):
            return kind
    return ScopeKind.BLOCK


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

def parse_document(doc: Document, config: ScopeConfig = DEFAULT_SCOPE_CONFIG) -> ScopeTree:
    """Build the scope tree for a snapshot.  Never raises on bad input."""
    if doc.family is LanguageFamily.INDENT:
        return _parse_indent(doc, config)
    return _parse_brace(doc, config)


def _parse_indent(doc: Document, config: ScopeConfig) -> ScopeTree:
    text = doc.text
    root = ScopeNode(ScopeKind.MODULE, header_line=0, body_start=0, indent=-1)
    stack = [root]
    owners: list[ScopeNode] = []
    blanks: list[bool] = []
    triples: list[str | None] = []
    in_triple: str | None = None

    for i, line in enumerate(doc.lines):
        triples.append(in_triple)
        blank = line.strip() == ""
        blanks.append(blank)
        if blank:
            owners.append(stack[-1])
            continue
        in_triple, effective = scan_indent_line(line, in_triple)
        if effective is None:
            # opaque continuation of a multi-line string
            owners.append(stack[-1])
            continue
        ind = indent_width(line, config.tab_width)
        while len(stack) > 1 and ind <= stack[-1].indent:
            _close(stack, body_end=doc.line_starts[i], closed=True)
        kind = indent_header_kind(effective, config)
        if kind is not None:
            body_start = doc.line_starts[i + 1] if i + 1 < doc.line_count else len(text)
            node = ScopeNode(kind, header_line=i, body_start=body_start, indent=ind)
            stack.append(node)
        owners.append(stack[-1])

    while len(stack) > 1:
        _close(stack, body_end=len(text), closed=False)
    root.body_end = len(text)
    return ScopeTree(root, doc.version, doc.family, tuple(blanks), tuple(owners),
                     doc.line_starts, tuple(triples))


def _parse_brace(doc: Document, config: ScopeConfig) -> ScopeTree:
    text = doc.text
    root = ScopeNode(ScopeKind.MODULE, header_line=0, body_start=0, indent=-1)
    stack = [root]
    owners: list[ScopeNode] = []
    blanks: list[bool] = []

    for i, line in enumerate(doc.lines):
        blanks.append(line.strip() == "")
        line_start = doc.line_starts[i]
        consumed = 0
        for col, ch in scan_brace_line(line):
            if ch == "{":
                kind = brace_header_kind(line[consumed:col])
                node = ScopeNode(
                    kind,
                    header_line=i,
                    body_start=line_start + col + 1,
                    indent=indent_width(line, config.tab_width),
                )
                stack.append(node)
                consumed = col + 1
            elif len(stack) > 1:
                _close(stack, body_end=line_start + col + 1, closed=True)
                consumed = col + 1
        owners.append(stack[-1])

    while len(stack) > 1:
        _close(stack, body_end=len(text), closed=False)
    root.body_end = len(text)
    return ScopeTree(root, doc.version, doc.family, tuple(blanks), tuple(owners),
                     doc.line_starts, tuple(None for _ in doc.lines))


def _close(stack: list[ScopeNode], body_end: int, closed: bool) -> None:
    node = stack.pop()
    node.body_end = max(body_end, node.body_start)
    node.closed = closed
    node.parent = stack[-1]
    stack[-1].children.append(node)


# ---------------------------------------------------------------------------
# cursor queries
# ---------------------------------------------------------------------------

def innermost_scope(tree: ScopeTree, cursor: Cursor, doc: Document | None = None) -> ScopeNode:
    """Deepest scope owning the cursor; the module node if none deeper.

    A cursor on a whitespace-only line (indent family) is owned by the
    scope state after the nearest preceding non-blank line, capped by
    the cursor's own column: scopes whose header indentation is at or
    beyond the column are treated as closed at the cursor.
    """
    if doc is not None:
        tree.check_version(doc)
    return scope_chain(tree, cursor)[-1]


def scope_chain(tree: ScopeTree, cursor: Cursor) -> list[ScopeNode]:
    """Scope path root -> ... -> innermost for a cursor."""
    if not 0 <= cursor.line < len(tree.line_blank):
        raise ScopeError(f"cursor line {cursor.line} outside parsed document")

    if tree.family is LanguageFamily.INDENT and tree.line_blank[cursor.line]:
        return _blank_line_chain(tree, cursor)

    offset = _cursor_offset(tree, cursor)
    chain = [tree.root]
    node = tree.root
    while True:
        for child in node.children:
            if child.contains(offset):
                chain.append(child)
                node = child
                break
        else:
            return chain


def _blank_line_chain(tree: ScopeTree, cursor: Cursor) -> list[ScopeNode]:
    prev = cursor.line - 1
    while prev >= 0 and tree.line_blank[prev]:
        prev -= 1
    if prev < 0:
        return [tree.root]
    chain = [tree.root]
    node = tree.line_owner[prev]
    path: list[ScopeNode] = []
    while node is not tree.root:
        path.append(node)
        assert node.parent is not None
        node = node.parent
    for scope in reversed(path):
        if scope.indent >= cursor.column:
            break
        chain.append(scope)
    return chain


def _cursor_offset(tree: ScopeTree, cursor: Cursor) -> int:
    return tree.line_starts[cursor.line] + cursor.column


def is_at_end_of_scope(
    tree: ScopeTree,
    doc: Document,
    cursor: Cursor,
    closers: frozenset[str] = DEFAULT_CLOSER_CHARS,
) -> bool:
    """True when no content of the cursor's scope lies beyond the cursor.

    Closer-set characters trailing on the cursor line are not content
    for brace-scoped sources, and a scope's own terminating brace never
    counts.
    """
    tree.check_version(doc)
    scope = innermost_scope(tree, cursor)
    offset = doc.offset_of(cursor)
    start = max(offset, scope.body_start)
    end = scope.body_end
    brace = doc.family is LanguageFamily.BRACE
    if brace and scope.closed and scope is not tree.root:
        end -= 1  # the scope's own closing brace
    tail = doc.text[start:end]
    line_end = tail.find("\n")
    if line_end == -1:
        line_end = len(tail)
    for idx, ch in enumerate(tail):
        if ch.isspace():
            continue
        if brace and idx < line_end and ch in closers:
            continue
        return False
    return True


def line_context(
    doc: Document,
    cursor: Cursor,
    closers: frozenset[str] = DEFAULT_CLOSER_CHARS,
    config: ScopeConfig = DEFAULT_SCOPE_CONFIG,
) -> LineContext:
    """Split the cursor line and classify what surrounds the caret."""
    doc.validate_cursor(cursor)
    line = doc.line_text(cursor.line)
    before = line[: cursor.column]
    after = line[cursor.column :]
    closers_only = all(ch in closers or ch.isspace() for ch in after)

    if doc.family is LanguageFamily.INDENT:
        _, effective = scan_indent_line(before, None)
        defines = effective is not None and indent_header_kind(effective, config) is not None
    else:
        events = scan_brace_line(before)
        defines = (
            bool(events)
            and events[-1][1] == "{"
            and before[events[-1][0] + 1 :].strip() == ""
        )
    return LineContext(before, after, closers_only, defines)


def expected_body_indent(tree: ScopeTree, doc: Document, scope: ScopeNode,
                         config: ScopeConfig = DEFAULT_SCOPE_CONFIG) -> int:
    """Indentation a new line inside ``scope`` is expected to carry."""
    if scope.kind is ScopeKind.MODULE:
        return 0
    if doc.family is LanguageFamily.BRACE:
        return scope.indent + config.indent_unit
    start_line = doc.cursor_at(min(scope.body_start, len(doc.text))).line
    end_line = doc.cursor_at(max(scope.body_start, scope.body_end - 1)).line
    for i in range(start_line, min(end_line + 1, doc.line_count)):
        line = doc.line_text(i)
        if line.strip():
            return indent_width(line, config.tab_width)
    return scope.indent + config.indent_unit
