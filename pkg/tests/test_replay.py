"""Replay harness: oracle soundness, determinism, funnel directions."""

from __future__ import annotations

import glob
import os

import pytest

from scopeline import (
    EngineConfig,
    LanguageFamily,
    MockCorpus,
    TelemetryKind,
    aggregate,
)
from scopeline.replay import (
    ExplicitTrigger,
    Pause,
    SessionScript,
    TypeChar,
    derive_script,
    make_corpus_for_file,
    replay_session,
)

CORPUS_DIR = os.path.join(os.path.dirname(__file__), "..", "corpus")
FILES = sorted(glob.glob(os.path.join(CORPUS_DIR, "*.py")))


def read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def config(multi: bool = True, scale: float = 1.0) -> EngineConfig:
    cfg = EngineConfig()
    cfg.trigger.multi_line_enabled = multi
    cfg.latency.scale = scale
    return cfg


def test_bundled_corpus_exists():
    assert len(FILES) >= 3


def test_oracle_soundness_final_text_equals_ground_truth():
    for i, path in enumerate(FILES):
        text = read(path)
        corpus = make_corpus_for_file(text, LanguageFamily.INDENT)
        session = replay_session(text, config(), corpus, seed=11 + i)
        assert session.final_text == text, path
        assert session.chars_typed + session.chars_accepted == len(text)


def test_replay_is_deterministic_per_seed():
    text = read(FILES[0])
    corpus = make_corpus_for_file(text, LanguageFamily.INDENT)
    first = replay_session(text, config(), corpus, seed=3)
    second = replay_session(text, config(), corpus, seed=3)
    assert [e.to_record() for e in first.events] == [e.to_record() for e in second.events]
    other = replay_session(text, config(), corpus, seed=4)
    assert first.chars_typed + first.chars_accepted == other.chars_typed + other.chars_accepted


def test_empty_corpus_without_fallback_displays_nothing():
    text = read(FILES[0])
    session = replay_session(text, config(), MockCorpus(), seed=5)
    assert session.displayed == 0
    assert session.chars_accepted == 0
    assert session.final_text == text
    report = aggregate(session.events)
    assert report.percent_keystrokes_saved == 0.0


def test_typing_without_acceptance_reproduces_file_exactly():
    text = read(FILES[1])
    script = derive_script(text, LanguageFamily.INDENT, seed=9)
    typed = "".join(e.char for e in script.events if isinstance(e, TypeChar))
    assert typed == text


def test_perfect_corpus_zero_latency_hits_coverage_bound():
    # hand-enumerated: one trigger opportunity at the header's colon covers
    # the 17-char body; the remaining 15 chars must be typed
    text = "def add(a, b):\n    return a + b\n"
    derived = make_corpus_for_file(text, LanguageFamily.INDENT)
    assert derived.records["def add(a, b):"] == "\n    return a + b"
    corpus = MockCorpus({"def add(a, b):": "\n    return a + b"})
    session = replay_session(text, config(scale=0.01), corpus, seed=2)
    assert session.sound
    assert session.chars_accepted == 17
    assert session.chars_typed == 15
    report = aggregate(session.events)
    assert report.percent_keystrokes_saved == pytest.approx(17 / 32)


def test_multiline_enabled_increases_chars_accepted_and_saved():
    on_events, off_events = [], []
    for i, path in enumerate(FILES):
        text = read(path)
        corpus = make_corpus_for_file(text, LanguageFamily.INDENT)
        on_events.extend(replay_session(text, config(True), corpus, seed=7 + i).events)
        off_events.extend(replay_session(text, config(False), corpus, seed=7 + i).events)
    on = aggregate(on_events)
    off = aggregate(off_events)
    assert on.total.chars_accepted > off.total.chars_accepted
    assert on.percent_keystrokes_saved > off.percent_keystrokes_saved
    assert off.by_kind["multi_line"].displayed == 0


def test_multi_share_of_accepted_chars_exceeds_display_share():
    events = []
    for i, path in enumerate(FILES):
        text = read(path)
        corpus = make_corpus_for_file(text, LanguageFamily.INDENT)
        events.extend(replay_session(text, config(), corpus, seed=7 + i).events)
    report = aggregate(events)
    assert report.by_kind["multi_line"].displayed > 0
    assert (report.share_of_accepted_chars("multi_line")
            > report.share_of_displays("multi_line"))


def test_raising_latency_never_increases_displays():
    def displays(scale: float) -> int:
        events = []
        for i, path in enumerate(FILES):
            text = read(path)
            corpus = make_corpus_for_file(text, LanguageFamily.INDENT)
            events.extend(
                replay_session(text, config(scale=scale), corpus, seed=7 + i).events)
        return aggregate(events).total.displayed

    ladder = [displays(s) for s in (1.0, 2.0, 4.0, 8.0)]
    assert ladder[0] > 0
    assert all(a >= b for a, b in zip(ladder, ladder[1:])), ladder


def test_session_event_carries_typed_chars():
    text = read(FILES[2])
    corpus = make_corpus_for_file(text, LanguageFamily.INDENT)
    session = replay_session(text, config(), corpus, seed=1)
    session_events = [e for e in session.events if e.kind is TelemetryKind.SESSION]
    assert len(session_events) == 1
    assert session_events[0].char_count == session.chars_typed


def test_explicit_trigger_event_requests_completion():
    text = "x = 1\n"
    script = SessionScript(text, LanguageFamily.INDENT, [
        Pause(50.0), TypeChar("x", 0),
        Pause(50.0), TypeChar(" ", 1),
        Pause(50.0), TypeChar("=", 2),
        Pause(50.0), TypeChar(" ", 3),
        Pause(50.0), TypeChar("1", 4),
        Pause(2000.0), ExplicitTrigger(),
        Pause(50.0), TypeChar("\n", 5),
    ])
    corpus = MockCorpus({"x = 1": "\ny = 2"})
    session = replay_session(text, config(), corpus, seed=6, script=script)
    assert session.sound
    requested = [e for e in session.events if e.kind is TelemetryKind.REQUESTED]
    assert len(requested) >= 6


def test_dwell_feeds_acceptance_rate_denominator():
    text = read(FILES[0])
    corpus = make_corpus_for_file(text, LanguageFamily.INDENT)
    session = replay_session(text, config(), corpus, seed=8)
    report = aggregate(session.events)
    if report.total.accepted:
        assert report.total.accepted_over_threshold <= report.total.accepted
        assert report.total.displayed_over_threshold <= report.total.displayed
