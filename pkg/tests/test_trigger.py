"""Trigger policy: the paper-figure cases and the jarring-safety rules."""

from __future__ import annotations

import random

import pytest

from genprograms import gen_brace_program, gen_indent_program, random_cursor
from scopeline import (
    CloserSet,
    Cursor,
    Document,
    GenerationLimits,
    LanguageFamily,
    MultiLineReason,
    NotebookCell,
    RequestOrigin,
    ScopeKind,
    TriggerConfig,
    TriggerKind,
    decide_trigger,
    generation_params_for,
    innermost_scope,
    parse_document,
    scope_chain,
)
from scopeline.trigger import SINGLE_LINE, SUPPRESS, TriggerDecision, multi_line

ORIGIN = RequestOrigin()


def decide(text: str, line: int, col: int,
           family: LanguageFamily = LanguageFamily.INDENT,
           origin: RequestOrigin = ORIGIN,
           config: TriggerConfig = TriggerConfig()):
    doc = Document(text=text, family=family)
    tree = parse_document(doc)
    return decide_trigger(doc, Cursor(line, col), origin, tree, config)


# ---------------------------------------------------------------------------
# figure-level cases
# ---------------------------------------------------------------------------

def test_end_of_empty_function_triggers_multiline():
    # cursor on the auto-indented blank body line of a new function
    decision = decide("def quicksort(arr):\n    \n", 1, 4)
    assert decision.kind is TriggerKind.MULTI_LINE
    assert decision.reason is MultiLineReason.END_OF_INNER_SCOPE


def test_end_of_nonempty_function_triggers_multiline():
    text = "def f(arr):\n    left = []\n    return left\n"
    decision = decide(text, 2, 15)
    assert decision == multi_line(MultiLineReason.END_OF_INNER_SCOPE)


def test_end_of_inner_if_triggers_multiline():
    text = "def f(x):\n    if x > 0:\n        x += 1\n"
    decision = decide(text, 2, 14)
    assert decision == multi_line(MultiLineReason.END_OF_INNER_SCOPE)


def test_newly_defined_function_header_triggers_multiline():
    decision = decide("def quicksort(arr):\n", 0, 19)
    assert decision == multi_line(MultiLineReason.NEW_SCOPE_DEFINITION)


def test_newly_defined_if_header_triggers_multiline():
    text = "def f(x):\n    if x > 0:\n"
    decision = decide(text, 1, 13)
    assert decision == multi_line(MultiLineReason.NEW_SCOPE_DEFINITION)


def test_mid_scope_with_content_below_is_single_line():
    text = "def f(x):\n    x += 1\n    return x\n"
    decision = decide(text, 1, 10)
    assert decision == SINGLE_LINE


def test_characters_after_cursor_suppress_everything():
    text = "def f(x):\n    x += offset\n"
    decision = decide(text, 1, 9)  # cursor inside "x += offset"
    assert decision == SUPPRESS


def test_cursor_between_def_and_name_suppresses():
    # the single-line jarring case: cursor between "def" and the name
    decision = decide("def quicksort(arr):\n", 0, 4)
    assert decision == SUPPRESS


def test_statement_pushed_down_case_suppresses():
    # cursor one line above "test1 = 1", mid line, with code to the right
    text = "def add_test():\ntest1 = 1\n"
    assert decide(text, 1, 0) == SUPPRESS


def test_trailing_closers_do_not_suppress():
    text = "def f(x):\n    y = run(x)\n"
    decision = decide(text, 1, 13)  # before ")"
    assert decision.kind is not TriggerKind.SUPPRESS


def test_notebook_cell_end_triggers_multiline():
    origin = RequestOrigin(notebook_cell=NotebookCell(cursor_at_cell_end=True))
    decision = decide("x = 1\n", 0, 5, origin=origin)
    assert decision == multi_line(MultiLineReason.NOTEBOOK_CELL_END)


def test_notebook_cell_not_at_end_falls_through():
    origin = RequestOrigin(notebook_cell=NotebookCell(cursor_at_cell_end=False))
    decision = decide("x = 1\n", 0, 5, origin=origin)
    assert decision == SINGLE_LINE


def test_explicit_shortcut_beats_scope_position():
    origin = RequestOrigin(explicit_shortcut=True)
    decision = decide("x = 1\n", 0, 5, origin=origin)
    assert decision == multi_line(MultiLineReason.EXPLICIT_REQUEST)


def test_explicit_shortcut_still_suppressed_by_right_hand_code():
    origin = RequestOrigin(explicit_shortcut=True)
    decision = decide("test1 = 1\n", 0, 0, origin=origin)
    assert decision == SUPPRESS


def test_module_scope_end_does_not_trigger_multiline():
    decision = decide("x = 1\n", 0, 5)
    assert decision == SINGLE_LINE


def test_module_scope_trigger_can_be_enabled():
    config = TriggerConfig(allow_module_scope=True)
    decision = decide("x = 1\n", 0, 5, config=config)
    assert decision == multi_line(MultiLineReason.END_OF_INNER_SCOPE)


def test_multi_line_disabled_demotes_to_single():
    config = TriggerConfig(multi_line_enabled=False)
    decision = decide("def f():\n    \n", 1, 4, config=config)
    assert decision == SINGLE_LINE


def test_brace_family_cases():
    text = "fn f(x) {\n  x += 1;\n}\n"
    assert decide(text, 1, 9, family=LanguageFamily.BRACE) == multi_line(
        MultiLineReason.END_OF_INNER_SCOPE)
    assert decide("fn f(x) {\n", 0, 9, family=LanguageFamily.BRACE) == multi_line(
        MultiLineReason.NEW_SCOPE_DEFINITION)


# ---------------------------------------------------------------------------
# decision/params plumbing
# ---------------------------------------------------------------------------

def test_decision_reason_invariant():
    with pytest.raises(ValueError):
        TriggerDecision(TriggerKind.SINGLE_LINE, MultiLineReason.EXPLICIT_REQUEST)
    with pytest.raises(ValueError):
        TriggerDecision(TriggerKind.MULTI_LINE)


def test_closer_set_validation():
    with pytest.raises(ValueError):
        CloserSet(frozenset())
    with pytest.raises(ValueError):
        CloserSet(frozenset("a}"))
    extended = CloserSet.with_extras(";")
    assert ";" in extended.characters and "}" in extended.characters


def test_generation_params_defaults():
    single = generation_params_for(SINGLE_LINE)
    assert single.max_tokens == 25 and single.stop_at_newline is True
    multi = generation_params_for(multi_line(MultiLineReason.END_OF_INNER_SCOPE))
    assert multi.max_tokens == 120 and multi.stop_at_newline is False


def test_generation_params_config_override():
    limits = GenerationLimits(multi_max_tokens=256)
    multi = generation_params_for(multi_line(MultiLineReason.EXPLICIT_REQUEST), limits)
    assert multi.max_tokens == 256


def test_generation_params_reject_suppress():
    with pytest.raises(ValueError):
        generation_params_for(SUPPRESS)


# ---------------------------------------------------------------------------
# jarring-safety properties
# ---------------------------------------------------------------------------

def _positions(rng, text, count=20):
    for _ in range(count):
        yield random_cursor(rng, text)


def test_right_shift_safety_on_random_programs():
    rng = random.Random(42)
    closers = CloserSet().characters
    for gen, family in ((gen_indent_program, LanguageFamily.INDENT),
                        (gen_brace_program, LanguageFamily.BRACE)):
        for _ in range(25):
            text = gen(rng)
            doc = Document(text=text, family=family)
            tree = parse_document(doc)
            for line, col in _positions(rng, text):
                decision = decide_trigger(doc, Cursor(line, col), ORIGIN, tree)
                after = doc.line_text(line)[col:]
                blocked = any(not (c.isspace() or c in closers) for c in after)
                if blocked:
                    assert decision.kind is TriggerKind.SUPPRESS
                else:
                    assert decision.kind is not TriggerKind.SUPPRESS


def test_push_down_safety_for_end_of_scope_triggers():
    rng = random.Random(43)
    closers = CloserSet().characters
    for gen, family in ((gen_indent_program, LanguageFamily.INDENT),
                        (gen_brace_program, LanguageFamily.BRACE)):
        for _ in range(25):
            text = gen(rng)
            doc = Document(text=text, family=family)
            tree = parse_document(doc)
            for line, col in _positions(rng, text):
                cursor = Cursor(line, col)
                decision = decide_trigger(doc, cursor, ORIGIN, tree)
                if decision.reason is not MultiLineReason.END_OF_INNER_SCOPE:
                    continue
                inner = innermost_scope(tree, cursor)
                assert inner.kind is not ScopeKind.MODULE
                for below in range(line + 1, doc.line_count):
                    content = doc.line_text(below).strip()
                    if not content or all(c in closers for c in content):
                        continue
                    chain = scope_chain(tree, Cursor(below, 0))
                    assert inner not in chain, (
                        f"line {below} still inside triggered scope:\n{text}"
                    )


def test_cascade_is_deterministic():
    rng = random.Random(44)
    text = gen_indent_program(rng)
    doc = Document(text=text, family=LanguageFamily.INDENT)
    tree = parse_document(doc)
    for line, col in _positions(rng, text, 40):
        first = decide_trigger(doc, Cursor(line, col), ORIGIN, tree)
        second = decide_trigger(doc, Cursor(line, col), ORIGIN, tree)
        assert first == second
