"""Pre-processing: decide whether a completion request should be
suppressed, served as a single-line suggestion, or as a multi-line one.

The cascade is total and deterministic.  Suppression comes first: no
suggestion may ever appear while non-closer characters sit to the right
of the cursor, because inline rendering would shift them.  Explicit user
intent beats the scope heuristics.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .document import Cursor, Document
from .scopes import (
    DEFAULT_CLOSER_CHARS,
    ScopeConfig,
    DEFAULT_SCOPE_CONFIG,
    ScopeKind,
    ScopeTree,
    innermost_scope,
    is_at_end_of_scope,
    line_context,
)


class TriggerKind(Enum):
    SUPPRESS = "suppress"
    SINGLE_LINE = "single_line"
    MULTI_LINE = "multi_line"


class MultiLineReason(Enum):
    END_OF_INNER_SCOPE = "end_of_inner_scope"
    NEW_SCOPE_DEFINITION = "new_scope_definition"
    NOTEBOOK_CELL_END = "notebook_cell_end"
    EXPLICIT_REQUEST = "explicit_request"


@dataclass(frozen=True)
class TriggerDecision:
    kind: TriggerKind
    reason: MultiLineReason | None = None

    def __post_init__(self) -> None:
        if (self.reason is not None) != (self.kind is TriggerKind.MULTI_LINE):
            raise ValueError("reason is present iff the decision is multi-line")


SUPPRESS = TriggerDecision(TriggerKind.SUPPRESS)
SINGLE_LINE = TriggerDecision(TriggerKind.SINGLE_LINE)


def multi_line(reason: MultiLineReason) -> TriggerDecision:
    return TriggerDecision(TriggerKind.MULTI_LINE, reason)


@dataclass(frozen=True)
class NotebookCell:
    """Cell boundary metadata supplied by a notebook client."""

    cursor_at_cell_end: bool


@dataclass(frozen=True)
class RequestOrigin:
    explicit_shortcut: bool = False
    notebook_cell: NotebookCell | None = None


@dataclass(frozen=True)
class CloserSet:
    """Characters allowed to the right of the cursor.

    Whitespace is always permitted in addition to these.
    """

    characters: frozenset[str] = DEFAULT_CLOSER_CHARS

    def __post_init__(self) -> None:
        if not self.characters:
            raise ValueError("closer set must not be empty")
        if any(ch.isalnum() for ch in self.characters):
            raise ValueError("closer set must not contain alphanumerics")

    @classmethod
    def with_extras(cls, extras: str = "") -> "CloserSet":
        return cls(DEFAULT_CLOSER_CHARS | frozenset(extras))


@dataclass(frozen=True)
class TriggerConfig:
    closers: CloserSet = field(default_factory=CloserSet)
    multi_line_enabled: bool = True
    # End-of-file is not an invitation to write a whole new top-level
    # block, so the module scope does not trigger by default.
    allow_module_scope: bool = False
    scope: ScopeConfig = field(default_factory=lambda: DEFAULT_SCOPE_CONFIG)


DEFAULT_TRIGGER_CONFIG = TriggerConfig()


def decide_trigger(
    doc: Document,
    cursor: Cursor,
    origin: RequestOrigin,
    tree: ScopeTree,
    config: TriggerConfig = DEFAULT_TRIGGER_CONFIG,
) -> TriggerDecision:
    """Classify a completion request for one cursor position."""
    tree.check_version(doc)
    closers = config.closers.characters
    ctx = line_context(doc, cursor, closers, config.scope)
    if not ctx.after_is_closers_only:
        return SUPPRESS
    if not config.multi_line_enabled:
        return SINGLE_LINE
    if origin.explicit_shortcut:
        return multi_line(MultiLineReason.EXPLICIT_REQUEST)
    if origin.notebook_cell is not None and origin.notebook_cell.cursor_at_cell_end:
        return multi_line(MultiLineReason.NOTEBOOK_CELL_END)
    if ctx.defines_new_scope:
        return multi_line(MultiLineReason.NEW_SCOPE_DEFINITION)
    if is_at_end_of_scope(tree, doc, cursor, closers):
        scope = innermost_scope(tree, cursor)
        if scope.kind is not ScopeKind.MODULE or config.allow_module_scope:
            return multi_line(MultiLineReason.END_OF_INNER_SCOPE)
    return SINGLE_LINE


@dataclass(frozen=True)
class GenerationParams:
    max_tokens: int
    stop_at_newline: bool
    extra: tuple[tuple[str, object], ...] = ()

    def __post_init__(self) -> None:
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be >= 1")

    def fingerprint(self) -> str:
        return f"mt={self.max_tokens};nl={int(self.stop_at_newline)};{self.extra!r}"


@dataclass(frozen=True)
class GenerationLimits:
    single_max_tokens: int = 25
    multi_max_tokens: int = 120


DEFAULT_LIMITS = GenerationLimits()


def generation_params_for(
    decision: TriggerDecision,
    limits: GenerationLimits = DEFAULT_LIMITS,
    extra: dict[str, object] | None = None,
) -> GenerationParams:
    """Sampling limits for a non-suppressed decision.

    Single-line generation stops at the first newline or 25 tokens;
    multi-line runs to 120 tokens by default.
    """
    extras = tuple(sorted((extra or {}).items()))
    if decision.kind is TriggerKind.SINGLE_LINE:
        return GenerationParams(limits.single_max_tokens, True, extras)
    if decision.kind is TriggerKind.MULTI_LINE:
        return GenerationParams(limits.multi_max_tokens, False, extras)
    raise ValueError("suppressed decisions have no generation parameters")
