"""Replay typing sessions against the completion engine.

A session script types a ground-truth file character by character with
sampled pauses.  At every keystroke boundary the engine is asked for a
completion; whether the suggestion is ever displayed depends on its
simulated latency versus the time until the next keystroke, and a
deterministic oracle accepts a displayed suggestion only when its text
is an exact prefix of the remaining ground truth.  Accepted text is
inserted instead of typed, so a finished session always reproduces the
ground-truth file byte for byte.

Everything is a pure function of the seed: the engine runs on a virtual
clock and the deterministic mock backend.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Union

from .backend import MockBackend, MockCorpus, token_count
from .config import EngineConfig
from .document import LanguageFamily
from .postprocess import truncate_to_scope
from .server import CompletionEngine
from .telemetry import TelemetryEvent, TelemetryKind, TelemetrySink
from .trigger import TriggerKind


@dataclass(frozen=True)
class TypeChar:
    char: str
    position: int  # index into the ground-truth text


@dataclass(frozen=True)
class MoveCursor:
    line: int
    column: int


@dataclass(frozen=True)
class Pause:
    ms: float


@dataclass(frozen=True)
class ExplicitTrigger:
    pass


SessionEvent = Union[TypeChar, MoveCursor, Pause, ExplicitTrigger]


@dataclass
class SessionScript:
    ground_truth: str
    family: LanguageFamily
    events: list[SessionEvent]


def derive_script(
    ground_truth: str,
    family: LanguageFamily,
    seed: int,
    pause_median_ms: float = 180.0,
    pause_sigma: float = 0.8,
    think_pause_ms: float = 1500.0,
) -> SessionScript:
    """Simulate typing the file: a pause then a keystroke per character.

    Line starts get a longer think pause; replaying every TypeChar with
    no acceptances reproduces the ground truth exactly.
    """
    rng = random.Random(seed)
    mu = math.log(pause_median_ms)
    events: list[SessionEvent] = []
    for position, char in enumerate(ground_truth):
        if position == 0 or ground_truth[position - 1] == "\n":
            pause = think_pause_ms
        else:
            pause = rng.lognormvariate(mu, pause_sigma)
        events.append(Pause(pause))
        events.append(TypeChar(char, position))
    return SessionScript(ground_truth, family, events)


@dataclass
class SessionMetrics:
    """Raw outcome of one replayed session."""

    ground_truth: str
    final_text: str
    chars_typed: int
    chars_accepted: int
    displayed: int
    accepted: int
    events: list[TelemetryEvent] = field(default_factory=list)

    @property
    def sound(self) -> bool:
        return self.final_text == self.ground_truth


class _Replayer:
    def __init__(self, script: SessionScript, config: EngineConfig,
                 corpus: MockCorpus, seed: int, uri: str) -> None:
        self.script = script
        self.config = config
        self.uri = uri
        self.rng = random.Random(seed ^ 0x5EED)
        self.now_ms = 0.0
        self.backend = MockBackend(corpus, fallback=config.backend.fallback,
                                   chunk_size=config.backend.chunk_size)
        self.sink = TelemetrySink()
        self.engine = CompletionEngine(config, backend=self.backend,
                                       clock_ms=lambda: self.now_ms, sink=self.sink)
        self.latency_model = config.latency.model()
        self.latency_scale = config.latency.scale
        self.typed = ""
        self.version = 0
        self.position = 0  # next ground-truth index to enter
        self.chars_typed = 0
        self.chars_accepted = 0
        self.displayed = 0
        self.accepted = 0
        self.next_request_id = 0

    # ------------------------------------------------------------------

    def run(self) -> SessionMetrics:
        self.engine.handle_message({
            "jsonrpc": "2.0", "method": "textDocument/didOpen",
            "params": {"textDocument": {
                "uri": self.uri, "version": 0, "text": "",
                "languageId": self.script.family.value,
            }},
        })
        pending_pause = 0.0
        for event in self.script.events:
            if isinstance(event, Pause):
                pending_pause += event.ms
            elif isinstance(event, ExplicitTrigger):
                self._opportunity(pending_pause, explicit=True)
            elif isinstance(event, TypeChar):
                if event.position < self.position:
                    continue  # entered via an acceptance
                consumed = self._opportunity(pending_pause, explicit=False)
                if not consumed:
                    self._type_char(event.char, pending_pause)
                pending_pause = 0.0
            # MoveCursor: scripts derived here type linearly at the end,
            # so an explicit move only matters as an invalidation, which
            # the next request performs anyway.
        self.sink.emit(TelemetryEvent(
            kind=TelemetryKind.SESSION, request_id="session",
            timestamp_ms=self.now_ms, char_count=self.chars_typed,
        ))
        self.engine.close()
        self.engine.drain_outbox()
        return SessionMetrics(
            ground_truth=self.script.ground_truth,
            final_text=self.typed,
            chars_typed=self.chars_typed,
            chars_accepted=self.chars_accepted,
            displayed=self.displayed,
            accepted=self.accepted,
            events=list(self.sink.events),
        )

    # ------------------------------------------------------------------

    def _request(self, explicit: bool) -> tuple[int, dict | None]:
        doc = self.engine._docs[self.uri]
        cursor = doc.end_cursor()
        rid = self.next_request_id
        self.next_request_id += 1
        self.engine.handle_message({
            "jsonrpc": "2.0", "id": rid,
            "method": "textDocument/inlineCompletions",
            "params": {
                "textDocument": {"uri": self.uri, "version": self.version},
                "position": {"line": cursor.line, "character": cursor.column},
                "origin": {"explicitShortcut": explicit},
            },
        })
        return rid, self._take_response(rid)

    def _take_response(self, rid: int) -> dict | None:
        for msg in self.engine.drain_outbox():
            if msg.get("id") == rid:
                return msg.get("result")
        return None

    def _opportunity(self, pause_ms: float, explicit: bool) -> bool:
        """One display opportunity; returns True when text was accepted."""
        rid, immediate = self._request(explicit)
        active = self.engine._active.get(self.uri)

        if active is None:
            # suppressed, stale, or served from cache without generation
            return self._handle_response(rid, immediate, pause_ms, latency_ms=0.0)

        raw = self.backend.continuation_for(active.prompt, active.params)
        truncated = truncate_to_scope(raw, active.tree, active.doc, active.cursor,
                                      active.decision.kind, self.engine.scope_config)
        useful = raw[: truncated.cut_offset] if truncated.cut_offset is not None else raw
        tokens = max(1, token_count(useful))
        latency = self.latency_model.end_to_end(tokens) * self.latency_scale
        budget = active.budget_ms

        if pause_ms <= latency:
            # the next keystroke lands first; generation gets invalidated
            # by the edit that follows
            return False
        if latency > budget:
            self.now_ms += budget + 1.0
            self.engine.pump_until_idle()
            self._take_response(rid)
            return False
        self.now_ms += latency
        self.engine.pump_until_idle()
        response = self._take_response(rid)
        return self._handle_response(rid, response, pause_ms - latency, latency)

    def _handle_response(self, rid: int, response: dict | None,
                         remaining_pause_ms: float, latency_ms: float) -> bool:
        if not response or not response.get("suggestion"):
            return False
        text = response["suggestion"]["text"]
        self.engine.handle_message({
            "jsonrpc": "2.0", "method": "completion/displayed",
            "params": {"requestId": rid},
        })
        self.displayed += 1
        remaining = self.script.ground_truth[self.position :]
        if text and remaining.startswith(text):
            dwell = self.rng.lognormvariate(
                math.log(self.config.replay.accept_dwell_median_ms),
                self.config.replay.accept_dwell_sigma,
            )
            self.now_ms += dwell
            self.engine.handle_message({
                "jsonrpc": "2.0", "id": f"accept-{rid}",
                "method": "completion/accepted",
                "params": {"requestId": rid},
            })
            self.engine.drain_outbox()
            self.accepted += 1
            self.chars_accepted += len(text)
            self.typed += text
            self.position += len(text)
            self._sync()
            return True
        # not accepted: it dwells until the keystroke dismisses it
        self.now_ms += max(0.0, remaining_pause_ms)
        return False

    def _type_char(self, char: str, pause_ms: float) -> None:
        self.now_ms += pause_ms if pause_ms > 0 else 0.0
        self.typed += char
        self.position += 1
        self.chars_typed += 1
        self._sync()

    def _sync(self) -> None:
        self.version += 1
        self.engine.handle_message({
            "jsonrpc": "2.0", "method": "textDocument/didChange",
            "params": {
                "textDocument": {"uri": self.uri, "version": self.version},
                "contentChanges": [{"text": self.typed}],
            },
        })
        self.engine.drain_outbox()


def replay_session(
    ground_truth: str,
    config: EngineConfig,
    corpus: MockCorpus,
    seed: int,
    family: LanguageFamily | None = None,
    uri: str = "replay://session",
    script: SessionScript | None = None,
) -> SessionMetrics:
    """Replay one ground-truth file; deterministic per seed."""
    if family is None:
        family = LanguageFamily(config.language_family) if config.language_family in (
            "indent", "brace") else LanguageFamily.INDENT
    if script is None:
        script = derive_script(
            ground_truth, family, seed,
            pause_median_ms=config.replay.pause_median_ms,
            pause_sigma=config.replay.pause_sigma,
            think_pause_ms=config.replay.think_pause_ms,
        )
    return _Replayer(script, config, corpus, seed, uri).run()


def make_corpus_for_file(ground_truth: str, family: LanguageFamily) -> MockCorpus:
    """Derive a mock corpus that continues a file at its trigger points.

    Scope headers map to their body (the multi-line case) and each body
    line maps to the rest of its scope, so a typing replay of the same
    file finds prefix-exact continuations wherever the trigger policy
    fires.  Half-line prefixes feed single-line completions.
    """
    from .document import Document
    from .scopes import parse_document

    doc = Document(text=ground_truth, family=family)
    tree = parse_document(doc)
    corpus = MockCorpus()

    for node in tree.root.walk():
        if node.parent is None:
            continue
        header = doc.line_text(node.header_line)
        body = ground_truth[node.body_start : node.body_end]
        if header.strip() and body.strip():
            continuation = ground_truth[
                doc.line_starts[node.header_line] + len(header) : node.body_end
            ].rstrip()
            if continuation:
                corpus.add(header.strip(), continuation)

    for i, line in enumerate(doc.lines):
        stripped = line.strip()
        if not stripped or len(stripped) < 6:
            continue
        head = line[: len(line) - len(line.lstrip()) + (len(stripped) + 1) // 2]
        rest = line[len(head):]
        if head.strip() and rest:
            corpus.add(head.strip(), rest)
    return corpus
