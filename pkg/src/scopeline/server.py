"""JSON-RPC completion server.

``CompletionEngine`` is transport-free: messages go in, responses and
notifications come out through an outbox, and in-flight generations
advance one chunk per ``pump`` call.  That makes every interleaving of
edits, requests, and generation progress a deterministic sequence of
method calls, which is how the protocol invariants are tested.
``StdioServer`` wraps the engine with Content-Length framing over
stdin/stdout.

Serving pipeline per request: re-parse (or reuse the cached scope tree)
-> trigger decision -> cache lookup -> on miss stream from the backend
through a scope-cut monitor, cancelling generation at the cut or on
invalidation -> post-process -> respond, cache, and emit telemetry.
"""

from __future__ import annotations

import json
import queue
import sys
import threading
import time
from dataclasses import dataclass, field
from typing import Any, Callable, IO

from .backend import (
    CancelToken,
    FimPrompt,
    GenerationStream,
    MockBackend,
    MockCorpus,
    StreamStatus,
    build_fim_prompt,
)
from .cache import SuggestionCache, make_cache_key
from .config import EngineConfig
from .document import Cursor, Document, insertion_end, parse_family
from .postprocess import ScopeCutMonitor, realign_indentation, truncate_to_scope
from .scopes import ScopeConfig, ScopeTree, parse_document
from .telemetry import TelemetryEvent, TelemetryKind, TelemetrySink
from .trigger import (
    CloserSet,
    GenerationLimits,
    GenerationParams,
    NotebookCell,
    RequestOrigin,
    TriggerConfig,
    TriggerDecision,
    TriggerKind,
    decide_trigger,
    generation_params_for,
)

FETCHING_MULTILINE = "completion/fetchingMultiline"


class ProtocolError(Exception):
    pass


def _now_ms() -> float:
    return time.monotonic() * 1000.0


@dataclass
class _ActiveGeneration:
    request_id: Any
    uri: str
    doc: Document
    tree: ScopeTree
    cursor: Cursor
    decision: TriggerDecision
    params: GenerationParams
    prompt: FimPrompt
    cache_key: tuple
    stream: GenerationStream
    cancel: CancelToken
    monitor: ScopeCutMonitor
    started_ms: float
    budget_ms: float
    indicator_started: bool
    chunks: list[str] = field(default_factory=list)


@dataclass
class _DisplayRecord:
    request_id: Any
    uri: str
    doc_version: int
    cursor: Cursor
    text: str
    kind: TriggerKind
    responded_ms: float
    latency_ms: float | None = None
    displayed_ms: float | None = None


class CompletionEngine:
    """Protocol state machine behind the completion server."""

    def __init__(
        self,
        config: EngineConfig | None = None,
        backend: Any | None = None,
        clock_ms: Callable[[], float] = _now_ms,
        sink: TelemetrySink | None = None,
    ) -> None:
        self.config = config or EngineConfig()
        cfg = self.config
        if backend is None:
            corpus = MockCorpus.load(cfg.backend.corpus_path) if cfg.backend.corpus_path else MockCorpus()
            backend = MockBackend(corpus, fallback=cfg.backend.fallback,
                                  chunk_size=cfg.backend.chunk_size)
        self.backend = backend
        self.clock_ms = clock_ms
        self.sink = sink or TelemetrySink(cfg.telemetry.sink_path or None)
        self.scope_config = ScopeConfig(
            tab_width=cfg.scope.tab_width,
            extra_header_keywords=tuple(cfg.scope.extra_header_keywords),
            indent_unit=cfg.scope.indent_unit,
        )
        self.trigger_config = TriggerConfig(
            closers=CloserSet.with_extras(cfg.trigger.closer_extras),
            multi_line_enabled=cfg.trigger.multi_line_enabled,
            allow_module_scope=cfg.trigger.allow_module_scope,
            scope=self.scope_config,
        )
        self.limits = GenerationLimits(cfg.generation.single_max_tokens,
                                       cfg.generation.multi_max_tokens)
        self.cache = SuggestionCache(cfg.cache.max_entries, cfg.cache.ttl_s,
                                     clock=lambda: self.clock_ms() / 1000.0)
        self._docs: dict[str, Document] = {}
        self._trees: dict[str, ScopeTree] = {}
        self._active: dict[str, _ActiveGeneration] = {}
        self._pending: dict[Any, _DisplayRecord] = {}
        self.outbox: list[dict] = []
        self.shutdown_requested = False

    # ------------------------------------------------------------------
    # message routing
    # ------------------------------------------------------------------

    def handle_message(self, msg: dict) -> None:
        method = msg.get("method")
        msg_id = msg.get("id")
        params = msg.get("params") or {}
        if method == "initialize":
            self._respond(msg_id, {
                "capabilities": {"textDocumentSync": {"openClose": True, "change": 1}},
                "serverInfo": {"name": "scopeline", "version": "0.1.0"},
            })
        elif method == "initialized":
            pass
        elif method == "shutdown":
            self.shutdown_requested = True
            self._respond(msg_id, None)
        elif method == "textDocument/didOpen":
            self._did_open(params)
        elif method == "textDocument/didChange":
            self._did_change(params)
        elif method == "textDocument/inlineCompletions":
            self._inline_completions(msg_id, params)
        elif method == "completion/displayed":
            self._displayed(params)
        elif method == "completion/accepted":
            self._accepted(msg_id, params)
        elif method == "completion/rejected":
            self._rejected(params)
        elif msg_id is not None:
            self._respond(msg_id, None)

    # ------------------------------------------------------------------
    # document sync
    # ------------------------------------------------------------------

    def _did_open(self, params: dict) -> None:
        td = params["textDocument"]
        family = parse_family(td.get("languageId", "indent"))
        doc = Document(text=td.get("text", ""), family=family,
                       version=int(td.get("version", 0)), uri=td["uri"])
        self._docs[td["uri"]] = doc
        self._trees.pop(td["uri"], None)

    def _did_change(self, params: dict) -> None:
        td = params["textDocument"]
        changes = params.get("contentChanges") or [{}]
        self.apply_document_edit(td["uri"], int(td["version"]), changes[-1].get("text", ""))

    def apply_document_edit(self, uri: str, new_version: int, text: str) -> None:
        """Replace a document snapshot; cancels in-flight work for it."""
        old = self._docs.get(uri)
        if old is None:
            raise ProtocolError(f"didChange for unopened document {uri}")
        if new_version <= old.version:
            raise ProtocolError(
                f"document version regression for {uri}: {old.version} -> {new_version}"
            )
        self._docs[uri] = Document(text=text, family=old.family,
                                   version=new_version, uri=uri)
        self._trees.pop(uri, None)
        self._cancel_active(uri, reason="edit")
        self._invalidate_pending(uri, edited=True)

    # ------------------------------------------------------------------
    # completion pipeline
    # ------------------------------------------------------------------

    def _inline_completions(self, msg_id: Any, params: dict) -> None:
        received = self.clock_ms()
        self._telemetry(TelemetryKind.REQUESTED, msg_id)
        td = params.get("textDocument") or {}
        uri = td.get("uri", "")
        doc = self._docs.get(uri)
        if doc is None:
            self._error(msg_id, -32602, f"document not open: {uri}")
            self._telemetry(TelemetryKind.INVALIDATED, msg_id, detail="unknown_document")
            return
        if int(td.get("version", -1)) != doc.version:
            self._respond_completion(msg_id, None, False, received, invalidated=True)
            self._telemetry(TelemetryKind.INVALIDATED, msg_id, detail="stale_version")
            return
        pos = params.get("position") or {}
        cursor = Cursor(int(pos.get("line", 0)), int(pos.get("character", 0)))
        try:
            doc.validate_cursor(cursor)
        except ValueError as exc:
            self._error(msg_id, -32602, str(exc))
            self._telemetry(TelemetryKind.INVALIDATED, msg_id, detail="bad_cursor")
            return
        origin_params = params.get("origin") or {}
        origin = RequestOrigin(
            explicit_shortcut=bool(origin_params.get("explicitShortcut")),
            notebook_cell=(
                NotebookCell(bool(origin_params.get("notebookCellEnd")))
                if "notebookCellEnd" in origin_params
                else None
            ),
        )

        # a newer request supersedes the in-flight one for this document
        self._cancel_active(uri, reason="superseded")
        self._invalidate_pending(uri, edited=False)

        tree = self._tree_for(uri, doc)
        decision = decide_trigger(doc, cursor, origin, tree, self.trigger_config)
        if decision.kind is TriggerKind.SUPPRESS:
            self._respond_completion(msg_id, None, False, received, decision=decision)
            self._telemetry(TelemetryKind.SUPPRESSED, msg_id, detail="trigger_suppressed")
            return

        gen_params = generation_params_for(decision, self.limits)
        prompt = build_fim_prompt(
            doc, cursor, decision.kind is TriggerKind.MULTI_LINE,
            self.config.generation.prefix_window, self.config.generation.suffix_window,
        )
        key = make_cache_key(prompt, decision.kind, gen_params)
        cached = self.cache.get(key)
        if cached is not None:
            self._finish_with_text(msg_id, uri, doc, cursor, decision, cached,
                                   received, served_from_cache=True)
            return

        multi = decision.kind is TriggerKind.MULTI_LINE
        if multi:
            self._notify(FETCHING_MULTILINE, {"requestId": msg_id, "state": "started"})
        cancel = CancelToken()
        stream = self.backend.generate(prompt, gen_params, cancel)
        budget = (self.config.server.multi_timeout_ms if multi
                  else self.config.server.single_timeout_ms)
        self._active[uri] = _ActiveGeneration(
            request_id=msg_id, uri=uri, doc=doc, tree=tree, cursor=cursor,
            decision=decision, params=gen_params, prompt=prompt, cache_key=key,
            stream=stream, cancel=cancel,
            monitor=ScopeCutMonitor.for_cursor(tree, doc, cursor, decision.kind,
                                               self.scope_config),
            started_ms=received, budget_ms=budget, indicator_started=multi,
        )

    def pump(self) -> bool:
        """Advance every in-flight generation by at most one chunk."""
        advanced = False
        for uri in list(self._active):
            gen = self._active.get(uri)
            if gen is None:
                continue
            advanced = True
            if self.clock_ms() - gen.started_ms > gen.budget_ms:
                self._finish_timeout(gen)
                continue
            try:
                chunk = next(gen.stream)
            except StopIteration:
                self._finish_stream_end(gen)
                continue
            gen.chunks.append(chunk)
            cut = gen.monitor.feed(chunk)
            if cut is not None:
                # the suggestion is already complete; stop paying for tokens
                gen.cancel.cancel()
                gen.stream.drain()
                self._finish_generation(gen)
        return advanced

    def pump_until_idle(self, max_steps: int = 100_000) -> None:
        for _ in range(max_steps):
            if not self.pump():
                return
        raise RuntimeError("generation did not settle")

    # ------------------------------------------------------------------
    # generation finalization
    # ------------------------------------------------------------------

    def _finish_stream_end(self, gen: _ActiveGeneration) -> None:
        status = gen.stream.status or StreamStatus.COMPLETED
        if status is StreamStatus.COMPLETED:
            self._finish_generation(gen)
        elif status is StreamStatus.TIMED_OUT:
            self._finish_timeout(gen)
        elif status is StreamStatus.CANCELLED:
            self._finalize_cancelled(gen, detail="backend_cancelled")
        else:
            self._drop_active(gen)
            self._indicator_finished(gen)
            self._respond_completion(gen.request_id, None, False, gen.started_ms,
                                     decision=gen.decision,
                                     diagnostic=gen.stream.error or "backend failed")
            self._telemetry(TelemetryKind.INVALIDATED, gen.request_id,
                            kind=gen.decision.kind, detail="backend_failed")

    def _finish_generation(self, gen: _ActiveGeneration) -> None:
        self._drop_active(gen)
        raw = "".join(gen.chunks)
        truncated = truncate_to_scope(raw, gen.tree, gen.doc, gen.cursor,
                                      gen.decision.kind, self.scope_config)
        text = truncated.text
        if text and self.config.server.realign:
            text = realign_indentation(text, gen.cursor, gen.doc, gen.tree,
                                       self.scope_config)
        self.cache.put(gen.cache_key, text)
        self._indicator_finished(gen)
        self._finish_with_text(gen.request_id, gen.uri, gen.doc, gen.cursor,
                               gen.decision, text, gen.started_ms,
                               served_from_cache=False)

    def _finish_with_text(self, msg_id: Any, uri: str, doc: Document, cursor: Cursor,
                          decision: TriggerDecision, text: str, received_ms: float,
                          served_from_cache: bool) -> None:
        if not text:
            self._respond_completion(msg_id, None, served_from_cache, received_ms,
                                     decision=decision)
            self._telemetry(TelemetryKind.SUPPRESSED, msg_id, kind=decision.kind,
                            detail="post_process_empty")
            return
        latency = self.clock_ms() - received_ms
        self._respond_completion(msg_id, {
            "text": text,
            "kind": decision.kind.value,
            "insertAt": {"line": cursor.line, "character": cursor.column},
        }, served_from_cache, received_ms, decision=decision)
        self._pending[msg_id] = _DisplayRecord(
            request_id=msg_id, uri=uri, doc_version=doc.version, cursor=cursor,
            text=text, kind=decision.kind, responded_ms=self.clock_ms(),
            latency_ms=latency,
        )

    def _finish_timeout(self, gen: _ActiveGeneration) -> None:
        gen.cancel.cancel()
        gen.stream.drain()
        self._drop_active(gen)
        self._indicator_finished(gen)
        self._respond_completion(gen.request_id, None, False, gen.started_ms,
                                 decision=gen.decision, timed_out=True)
        self._telemetry(TelemetryKind.TIMED_OUT, gen.request_id, kind=gen.decision.kind)

    def _finalize_cancelled(self, gen: _ActiveGeneration, detail: str) -> None:
        gen.cancel.cancel()
        gen.stream.drain()
        self._drop_active(gen)
        self._indicator_finished(gen)
        self._respond_completion(gen.request_id, None, False, gen.started_ms,
                                 decision=gen.decision, invalidated=True)
        self._telemetry(TelemetryKind.INVALIDATED, gen.request_id,
                        kind=gen.decision.kind, detail=detail)

    def _cancel_active(self, uri: str, reason: str) -> None:
        gen = self._active.get(uri)
        if gen is not None:
            self._finalize_cancelled(gen, detail=reason)

    def _drop_active(self, gen: _ActiveGeneration) -> None:
        current = self._active.get(gen.uri)
        if current is gen:
            del self._active[gen.uri]

    def _indicator_finished(self, gen: _ActiveGeneration) -> None:
        if gen.indicator_started:
            gen.indicator_started = False
            self._notify(FETCHING_MULTILINE,
                         {"requestId": gen.request_id, "state": "finished"})

    def _invalidate_pending(self, uri: str, edited: bool) -> None:
        for rid in [r for r, rec in self._pending.items() if rec.uri == uri]:
            record = self._pending.pop(rid)
            if record.displayed_ms is not None:
                dwell = self.clock_ms() - record.displayed_ms
                self._telemetry(TelemetryKind.REJECTED, rid, kind=record.kind,
                                chars=len(record.text), duration=dwell,
                                detail="edited" if edited else "superseded")
            else:
                self._telemetry(TelemetryKind.INVALIDATED, rid, kind=record.kind,
                                detail="undisplayed_" + ("edit" if edited else "supersede"))

    # ------------------------------------------------------------------
    # display lifecycle
    # ------------------------------------------------------------------

    def _displayed(self, params: dict) -> None:
        record = self._pending.get(params.get("requestId"))
        if record is None or record.displayed_ms is not None:
            return
        record.displayed_ms = self.clock_ms()
        self._telemetry(TelemetryKind.DISPLAYED, record.request_id, kind=record.kind,
                        chars=len(record.text), latency=record.latency_ms)

    def _accepted(self, msg_id: Any, params: dict) -> None:
        rid = params.get("requestId")
        record = self._pending.get(rid)
        if record is None:
            if msg_id is not None:
                self._error(msg_id, -32602, f"unknown or finished suggestion: {rid}")
            return
        if record.displayed_ms is None:
            if msg_id is not None:
                self._error(msg_id, -32602, "suggestion was never displayed")
            return
        doc = self._docs.get(record.uri)
        if doc is None or doc.version != record.doc_version:
            del self._pending[rid]
            self._telemetry(TelemetryKind.INVALIDATED, rid, kind=record.kind,
                            detail="accept_after_edit")
            if msg_id is not None:
                self._error(msg_id, -32602, "document changed since display")
            return
        del self._pending[rid]
        dwell = self.clock_ms() - record.displayed_ms
        self._telemetry(TelemetryKind.ACCEPTED, rid, kind=record.kind,
                        chars=len(record.text), duration=dwell)
        end = self.accept_position(record.cursor, record.text)
        if msg_id is not None:
            self._respond(msg_id, {"position": {"line": end.line, "character": end.column}})

    @staticmethod
    def accept_position(cursor: Cursor, text: str) -> Cursor:
        """Cursor position after inserting an accepted suggestion."""
        return insertion_end(cursor, text)

    def _rejected(self, params: dict) -> None:
        rid = params.get("requestId")
        record = self._pending.pop(rid, None)
        if record is None:
            return
        if record.displayed_ms is not None:
            dwell = self.clock_ms() - record.displayed_ms
            self._telemetry(TelemetryKind.REJECTED, rid, kind=record.kind,
                            chars=len(record.text), duration=dwell, detail="explicit")
        else:
            self._telemetry(TelemetryKind.INVALIDATED, rid, kind=record.kind,
                            detail="rejected_undisplayed")

    # ------------------------------------------------------------------
    # plumbing
    # ------------------------------------------------------------------

    def _tree_for(self, uri: str, doc: Document) -> ScopeTree:
        tree = self._trees.get(uri)
        if tree is None or tree.doc_version != doc.version:
            tree = parse_document(doc, self.scope_config)
            self._trees[uri] = tree
        return tree

    def _respond(self, msg_id: Any, result: Any) -> None:
        if msg_id is not None:
            self.outbox.append({"jsonrpc": "2.0", "id": msg_id, "result": result})

    def _error(self, msg_id: Any, code: int, message: str) -> None:
        if msg_id is not None:
            self.outbox.append({"jsonrpc": "2.0", "id": msg_id,
                                "error": {"code": code, "message": message}})

    def _notify(self, method: str, params: dict) -> None:
        self.outbox.append({"jsonrpc": "2.0", "method": method, "params": params})

    def _respond_completion(self, msg_id: Any, suggestion: dict | None,
                            served_from_cache: bool, received_ms: float,
                            decision: TriggerDecision | None = None,
                            invalidated: bool = False, timed_out: bool = False,
                            diagnostic: str | None = None) -> None:
        self._respond(msg_id, {
            "suggestion": suggestion,
            "servedFromCache": served_from_cache,
            "generationLatencyMs": self.clock_ms() - received_ms,
            "invalidated": invalidated,
            "timedOut": timed_out,
            "decision": {
                "kind": decision.kind.value if decision else None,
                "reason": decision.reason.value if decision and decision.reason else None,
            },
            "diagnostic": diagnostic,
        })

    def _telemetry(self, event: TelemetryKind, request_id: Any,
                   kind: TriggerKind | None = None, chars: int = 0,
                   latency: float | None = None, duration: float | None = None,
                   detail: str = "") -> None:
        self.sink.emit(TelemetryEvent(
            kind=event,
            request_id=str(request_id),
            suggestion_kind=kind.value if kind else "",
            timestamp_ms=self.clock_ms(),
            char_count=chars,
            latency_ms=latency,
            display_duration_ms=duration,
            detail=detail,
        ))

    def drain_outbox(self) -> list[dict]:
        out, self.outbox = self.outbox, []
        return out

    def close(self) -> None:
        """Terminate in-flight and pending state, pairing every indicator."""
        for uri in list(self._active):
            self._cancel_active(uri, reason="session_closed")
        for rid in list(self._pending):
            record = self._pending.pop(rid)
            self._telemetry(TelemetryKind.INVALIDATED, rid, kind=record.kind,
                            detail="session_closed")
        self.sink.close()


# ---------------------------------------------------------------------------
# stdio transport
# ---------------------------------------------------------------------------

def read_framed(stream: IO[bytes]) -> dict | None:
    """Read one Content-Length framed JSON-RPC message; None at EOF."""
    headers: dict[str, str] = {}
    while True:
        line = stream.readline()
        if not line:
            return None
        decoded = line.decode("utf-8", "replace").strip()
        if decoded == "":
            break
        if ":" in decoded:
            key, value = decoded.split(":", 1)
            headers[key.strip().lower()] = value.strip()
    length = int(headers.get("content-length", 0))
    if length <= 0:
        raise ProtocolError("missing Content-Length header")
    body = stream.read(length)
    if body is None or len(body) < length:
        return None
    return json.loads(body.decode("utf-8"))


def write_framed(stream: IO[bytes], message: dict) -> None:
    body = json.dumps(message, separators=(",", ":")).encode("utf-8")
    stream.write(f"Content-Length: {len(body)}\r\n\r\n".encode("ascii") + body)
    stream.flush()


class StdioServer:
    """Runs a CompletionEngine over LSP-framed stdio."""

    def __init__(self, engine: CompletionEngine,
                 stdin: IO[bytes] | None = None,
                 stdout: IO[bytes] | None = None) -> None:
        self.engine = engine
        self.stdin = stdin if stdin is not None else sys.stdin.buffer
        self.stdout = stdout if stdout is not None else sys.stdout.buffer
        self._inbox: "queue.Queue[dict | None]" = queue.Queue()

    def _reader(self) -> None:
        try:
            while True:
                msg = read_framed(self.stdin)
                self._inbox.put(msg)
                if msg is None:
                    return
        except (OSError, ValueError, json.JSONDecodeError):
            self._inbox.put(None)

    def run(self) -> int:
        thread = threading.Thread(target=self._reader, daemon=True)
        thread.start()
        eof = False
        while not eof:
            busy = bool(self.engine._active)
            try:
                msg = self._inbox.get(timeout=0.002 if busy else 0.2)
                if msg is None:
                    eof = True
                elif msg.get("method") == "exit":
                    break
                else:
                    try:
                        self.engine.handle_message(msg)
                    except ProtocolError as exc:
                        print(f"protocol error: {exc}", file=sys.stderr)
            except queue.Empty:
                pass
            self.engine.pump()
            self._flush()
        self.engine.close()
        self._flush()
        return 0

    def _flush(self) -> None:
        for message in self.engine.drain_outbox():
            write_framed(self.stdout, message)
