"""Post-processing of raw model output.

Generated text must never extend past, or overlap, the scope that owns
the cursor.  The cut point is found by an incremental scanner so a
streaming consumer can cancel generation the moment the scope closes;
whole-text truncation feeds the same scanner, which makes the streaming
and batch cut offsets equal by construction.

Cut granularity is the line for indent-scoped sources (cut before the
first non-blank generated line at or left of the scope header's indent)
and the character for brace-scoped sources (cut immediately after the
closer that returns the cursor's scope to its closing level).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .document import Cursor, Document, LanguageFamily
from .scopes import (
    DEFAULT_SCOPE_CONFIG,
    ScopeConfig,
    ScopeKind,
    ScopeTree,
    brace_prefix_inert,
    expected_body_indent,
    indent_prefix_state,
    indent_width,
    innermost_scope,
    line_context,
    scan_brace_line,
    scan_indent_line,
)
from .trigger import TriggerKind


class CutReason(Enum):
    SCOPE_CLOSED = "scope_closed"
    OVERLAP_WITH_EXISTING = "overlap_with_existing"
    STOP_CONDITION = "stop_condition"
    NONE = "none"


@dataclass(frozen=True)
class TruncatedSuggestion:
    """A suggestion after scope-bounded truncation.

    ``text`` is always an exact prefix of the raw generation.
    ``cut_offset`` is the code-point offset into the raw output where
    the cut occurred, ``None`` when nothing was cut.
    """

    text: str
    cut_offset: int | None
    cut_reason: CutReason
    kind: TriggerKind


class MonitorProtocolError(Exception):
    """The monitor was fed after it already reported a cut."""


def _cut_bounds(tree: ScopeTree, doc: Document, cursor: Cursor,
                config: ScopeConfig) -> tuple[int, bool]:
    """Indent level that closes the generated region, and whether the
    region is the whole module.

    A cursor at the end of a scope-opening header generates the body of
    that new scope, so the boundary is the header's own indentation, not
    the enclosing scope's.  (Brace sources need no special case: the
    cursor already sits inside the freshly opened brace.)
    """
    if doc.family is LanguageFamily.INDENT:
        ctx = line_context(doc, cursor, config=config)
        if ctx.defines_new_scope:
            return indent_width(doc.line_text(cursor.line), config.tab_width), False
    scope = innermost_scope(tree, cursor)
    return scope.indent, scope.kind is ScopeKind.MODULE


def _expected_insert_indent(tree: ScopeTree, doc: Document, cursor: Cursor,
                            config: ScopeConfig) -> int:
    if doc.family is LanguageFamily.INDENT:
        ctx = line_context(doc, cursor, config=config)
        if ctx.defines_new_scope:
            header_indent = indent_width(doc.line_text(cursor.line), config.tab_width)
            return header_indent + config.indent_unit
    scope = innermost_scope(tree, cursor)
    return expected_body_indent(tree, doc, scope, config)


# Overlap dedup never looks further than this many lines below the cursor.
OVERLAP_WINDOW_LINES = 20


@dataclass
class ScopeCutMonitor:
    """Incremental scope-cut scanner over a stream of generated text.

    Seed it with the cursor's scope context, feed chunks as they arrive,
    and call :meth:`finish` once the stream ends so a final partial line
    can be judged.  ``feed``/``finish`` return the absolute cut offset
    into the generation, or ``None`` to continue.

    Single-owner mutable state; do not share across threads.
    """

    kind: TriggerKind
    family: LanguageFamily
    scope_indent: int
    scope_is_module: bool = False
    tab_width: int = 1
    # string state carried into the generation from the cursor line, and
    # whether the rest of the cursor's physical line is dead territory
    # (trailing comment or unterminated string literal)
    initial_triple: str | None = None
    first_line_inert: bool = False

    _pos: int = field(default=0, init=False)
    _line_start: int = field(default=0, init=False)
    _line_buf: str = field(default="", init=False)
    _first_line: bool = field(default=True, init=False)
    _in_triple: str | None = field(default=None, init=False)
    _depth: int = field(default=0, init=False)
    _cut: int | None = field(default=None, init=False)
    _done: bool = field(default=False, init=False)

    def __post_init__(self) -> None:
        self._in_triple = self.initial_triple

    @classmethod
    def for_cursor(
        cls,
        tree: ScopeTree,
        doc: Document,
        cursor: Cursor,
        kind: TriggerKind,
        config: ScopeConfig = DEFAULT_SCOPE_CONFIG,
    ) -> "ScopeCutMonitor":
        tree.check_version(doc)
        indent, is_module = _cut_bounds(tree, doc, cursor, config)
        before = doc.line_text(cursor.line)[: cursor.column]
        if doc.family is LanguageFamily.INDENT:
            line_state = tree.line_triple[cursor.line] if tree.line_triple else None
            triple, inert = indent_prefix_state(before, line_state)
        else:
            triple, inert = None, brace_prefix_inert(before)
        return cls(
            kind=kind,
            family=doc.family,
            scope_indent=indent,
            scope_is_module=is_module,
            tab_width=config.tab_width,
            initial_triple=triple,
            first_line_inert=inert,
        )

    @property
    def cut_offset(self) -> int | None:
        return self._cut

    def feed(self, chunk: str) -> int | None:
        if self._done:
            raise MonitorProtocolError("monitor already reported a cut")
        for ch in chunk:
            if self.kind is TriggerKind.SINGLE_LINE:
                if ch == "\n":
                    return self._cut_at(self._pos)
                self._pos += 1
                continue
            if ch == "\n":
                cut = self._end_line()
                self._pos += 1
                self._line_start = self._pos
                self._line_buf = ""
                self._first_line = False
                if cut is not None:
                    return cut
            else:
                self._line_buf += ch
                self._pos += 1
        return None

    def finish(self) -> int | None:
        """Judge the final (unterminated) line of the stream."""
        if self._done:
            return self._cut
        cut = self._end_line()
        if cut is not None:
            return cut
        self._done = True
        return None

    def _end_line(self) -> int | None:
        line = self._line_buf
        if self._first_line and self.first_line_inert:
            return None  # comment/string territory until the first newline
        if self.family is LanguageFamily.INDENT:
            in_triple = self._in_triple
            self._in_triple, effective = scan_indent_line(line, in_triple)
            if self._first_line or effective is None or line.strip() == "":
                return None
            if not self.scope_is_module and indent_width(line, self.tab_width) <= self.scope_indent:
                return self._cut_at(self._line_start)
            return None
        # brace family: depth-relative closer scan
        for col, brace in scan_brace_line(line):
            if brace == "{":
                self._depth += 1
            elif self._depth > 0:
                self._depth -= 1
            elif not self.scope_is_module:
                return self._cut_at(self._line_start + col + 1)
        return None

    def _cut_at(self, offset: int) -> int:
        self._cut = offset
        self._done = True
        return offset


def truncate_to_scope(
    raw: str,
    tree: ScopeTree,
    doc: Document,
    cursor: Cursor,
    kind: TriggerKind,
    config: ScopeConfig = DEFAULT_SCOPE_CONFIG,
) -> TruncatedSuggestion:
    """Longest prefix of ``raw`` that stays inside the cursor's scope.

    Single-line output is cut at the first newline.  If the retained
    text ends with lines identical to the lines immediately below the
    cursor (regenerated outer-scope code), those duplicates are removed
    and the cut is reported as an overlap.
    """
    if raw.strip() == "":
        return TruncatedSuggestion("", None, CutReason.NONE, kind)

    monitor = ScopeCutMonitor.for_cursor(tree, doc, cursor, kind, config)
    cut = monitor.feed(raw)
    if cut is None:
        cut = monitor.finish()

    if cut is not None:
        text = raw[:cut]
        reason = (
            CutReason.STOP_CONDITION
            if kind is TriggerKind.SINGLE_LINE
            else CutReason.SCOPE_CLOSED
        )
    else:
        text = raw
        reason = CutReason.NONE

    if kind is TriggerKind.MULTI_LINE:
        deduped, overlap_cut = _strip_suffix_overlap(text, doc, cursor)
        if overlap_cut is not None:
            text = deduped
            cut = overlap_cut
            reason = CutReason.OVERLAP_WITH_EXISTING

    text = text.rstrip()
    if not text:
        return TruncatedSuggestion("", cut, reason, kind)
    return TruncatedSuggestion(text, cut, reason, kind)


def _strip_suffix_overlap(text: str, doc: Document, cursor: Cursor) -> tuple[str, int | None]:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()  # a trailing newline is not a line of content
    below = [
        doc.line_text(i)
        for i in range(cursor.line + 1, min(cursor.line + 1 + OVERLAP_WINDOW_LINES, doc.line_count))
    ]
    # The first generated line continues the cursor line and is never a
    # candidate for removal; blank-only matches dedup nothing real.
    max_k = min(len(lines) - 1, len(below))
    for k in range(max_k, 0, -1):
        if lines[-k:] != below[:k] or not any(l.strip() for l in lines[-k:]):
            continue
        kept = "\n".join(lines[:-k])
        if doc.family is LanguageFamily.BRACE and _net_depth(kept) > 0:
            # the matched closers still close braces opened by the kept
            # text itself; removing them would break the suggestion
            continue
        return kept, len(kept)
    return text, None


def _net_depth(text: str) -> int:
    depth = 0
    for line in text.split("\n"):
        for _, brace in scan_brace_line(line):
            depth += 1 if brace == "{" else -1
    return depth


def realign_indentation(
    raw: str,
    cursor: Cursor,
    doc: Document,
    tree: ScopeTree | None = None,
    config: ScopeConfig = DEFAULT_SCOPE_CONFIG,
) -> str:
    """Shift a generated block so it sits at the scope's body indentation.

    The first line is spliced at the cursor column and left alone;
    continuation lines move by a constant delta so the block's minimum
    indentation matches the expected body indentation.  Only whitespace
    is ever touched; trailing whitespace is trimmed per line.
    """
    if "\n" not in raw:
        return raw
    if tree is None:
        from .scopes import parse_document

        tree = parse_document(doc, config)
    tree.check_version(doc)
    expected = _expected_insert_indent(tree, doc, cursor, config)

    lines = raw.split("\n")
    continuation = [l for l in lines[1:] if l.strip()]
    if continuation:
        minimum = min(indent_width(l, config.tab_width) for l in continuation)
        delta = expected - minimum
    else:
        delta = 0

    adjusted = [lines[0].rstrip()]
    for line in lines[1:]:
        if not line.strip():
            adjusted.append("")
            continue
        if delta > 0:
            line = " " * delta + line
        elif delta < 0:
            strip = -delta
            prefix_len = len(line) - len(line.lstrip())
            line = line[min(strip, prefix_len):]
        adjusted.append(line.rstrip())
    return "\n".join(adjusted)
