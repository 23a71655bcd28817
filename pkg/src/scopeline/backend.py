"""Pluggable generation backends.

A backend turns a fill-in-the-middle prompt into a stream of text
chunks.  The deterministic mock backend replays continuations from a
corpus file keyed on a context fingerprint (tests, replay); the HTTP
backend adapts any FIM-capable endpoint via a thin mapping layer.
Cancellation is cooperative and observed between chunks.
"""

from __future__ import annotations

import hashlib
import json
import re
import threading
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Iterator

import httpx

from .document import Cursor, Document, LanguageFamily
from .trigger import GenerationParams

# Cheap deterministic tokenizer: word pieces plus single punctuation
# marks; whitespace separates and is never counted.
_TOKEN_RE = re.compile(r"\w+|[^\w\s]")

DEFAULT_PREFIX_WINDOW = 6000
DEFAULT_SUFFIX_WINDOW = 2000
DEFAULT_CHUNK_SIZE = 8
MULTI_LINE_CHAR_CAP = 2000


def token_count(text: str) -> int:
    return len(_TOKEN_RE.findall(text))


def truncate_to_tokens(text: str, max_tokens: int) -> str:
    """Prefix of ``text`` containing at most ``max_tokens`` tokens."""
    if max_tokens < 1:
        return ""
    for i, match in enumerate(_TOKEN_RE.finditer(text)):
        if i == max_tokens - 1:
            return text[: match.end()]
    return text


@dataclass(frozen=True)
class FimPrompt:
    """Window-limited context around the cursor."""

    prefix: str
    suffix: str
    family: LanguageFamily
    multi_line: bool


def build_fim_prompt(
    doc: Document,
    cursor: Cursor,
    multi_line: bool,
    prefix_window: int = DEFAULT_PREFIX_WINDOW,
    suffix_window: int = DEFAULT_SUFFIX_WINDOW,
) -> FimPrompt:
    offset = doc.offset_of(cursor)
    prefix = doc.text[:offset]
    suffix = doc.text[offset:]
    if len(prefix) > prefix_window:
        prefix = prefix[-prefix_window:]
    if len(suffix) > suffix_window:
        suffix = suffix[:suffix_window]
    return FimPrompt(prefix, suffix, doc.family, multi_line)


class CancelToken:
    """Thread-safe cooperative cancellation signal."""

    def __init__(self) -> None:
        self._event = threading.Event()

    def cancel(self) -> None:
        self._event.set()

    @property
    def cancelled(self) -> bool:
        return self._event.is_set()


class StreamStatus(Enum):
    COMPLETED = "completed"
    CANCELLED = "cancelled"
    TIMED_OUT = "timed_out"
    FAILED = "failed"


class GenerationStream:
    """Ordered chunks of generated text plus a terminal status.

    No chunks are delivered after the terminal status; a cancellation
    requested by the consumer terminates the stream within one chunk
    boundary.
    """

    def __init__(self, producer: Iterator[str]) -> None:
        self._producer = producer
        self.status: StreamStatus | None = None
        self.error: str | None = None

    def __iter__(self) -> "GenerationStream":
        return self

    def __next__(self) -> str:
        if self.status is not None:
            raise StopIteration
        try:
            return next(self._producer)
        except StopIteration as stop:
            value = stop.value or StreamStatus.COMPLETED
            if isinstance(value, tuple):
                self.status, self.error = value
            else:
                self.status = value
            raise StopIteration from None

    def drain(self) -> str:
        """Consume the remaining chunks and return their concatenation."""
        return "".join(self)


# ---------------------------------------------------------------------------
# deterministic mock backend
# ---------------------------------------------------------------------------

def context_fingerprint(prefix: str) -> str:
    """Lookup key for a prompt: the last non-blank line of the prefix."""
    for line in reversed(prefix.split("\n")):
        if line.strip():
            return line.strip()
    return ""


CORPUS_FORMAT = "mock-corpus"
CORPUS_VERSION = 1


class MockCorpus:
    """Map from context fingerprints to canned continuations."""

    def __init__(self, records: dict[str, str] | None = None) -> None:
        self.records = dict(records or {})

    def add(self, fingerprint: str, continuation: str) -> None:
        # first writer wins so derived corpora stay deterministic
        self.records.setdefault(fingerprint, continuation)

    def lookup(self, prefix: str) -> str | None:
        return self.records.get(context_fingerprint(prefix))

    @classmethod
    def load(cls, path: str) -> "MockCorpus":
        corpus = cls()
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                record = json.loads(line)
                if record.get("format") == CORPUS_FORMAT:
                    continue  # version header
                corpus.add(record["context_fingerprint"], record["continuation"])
        return corpus

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(json.dumps({"format": CORPUS_FORMAT, "version": CORPUS_VERSION}) + "\n")
            for fingerprint, continuation in self.records.items():
                fh.write(
                    json.dumps(
                        {"context_fingerprint": fingerprint, "continuation": continuation}
                    )
                    + "\n"
                )


def _fallback_continuation(prompt: FimPrompt) -> str:
    """Deterministic templated block for an unknown context."""
    last = ""
    for line in reversed(prompt.prefix.split("\n")):
        if line.strip():
            last = line
            break
    indent = len(last) - len(last.lstrip())
    if prompt.family is LanguageFamily.BRACE:
        body = " " * (indent + 4)
        return f"\n{body}return;\n{' ' * indent}}}"
    return "\n" + " " * (indent + 4) + "pass"


@dataclass
class MockBackend:
    """Streams corpus continuations in fixed-size chunks.

    Identical (prompt, params, corpus) always produce identical stream
    contents and chunking.  ``calls`` counts generate() invocations for
    cache assertions; concurrent stream lifetimes are tracked so tests
    can verify single-flight serving.
    """

    corpus: MockCorpus = field(default_factory=MockCorpus)
    fallback: bool = False
    chunk_size: int = DEFAULT_CHUNK_SIZE
    calls: int = 0
    active_streams: int = 0
    max_active_streams: int = 0
    chunks_after_cancel: int = 0

    def continuation_for(self, prompt: FimPrompt, params: GenerationParams) -> str:
        text = self.corpus.lookup(prompt.prefix)
        if text is None:
            text = _fallback_continuation(prompt) if self.fallback else ""
        if params.stop_at_newline:
            newline = text.find("\n")
            if newline != -1:
                text = text[:newline]
        return truncate_to_tokens(text, params.max_tokens)

    def generate(self, prompt: FimPrompt, params: GenerationParams,
                 cancel: CancelToken) -> GenerationStream:
        self.calls += 1
        text = self.continuation_for(prompt, params)
        return GenerationStream(self._produce(text, cancel))

    def _produce(self, text: str, cancel: CancelToken):
        self.active_streams += 1
        self.max_active_streams = max(self.max_active_streams, self.active_streams)
        try:
            cancelled_seen = cancel.cancelled
            for start in range(0, len(text), self.chunk_size):
                if cancel.cancelled:
                    return StreamStatus.CANCELLED
                if cancelled_seen:
                    self.chunks_after_cancel += 1
                yield text[start : start + self.chunk_size]
                cancelled_seen = cancel.cancelled
            if cancel.cancelled:
                return StreamStatus.CANCELLED
            return StreamStatus.COMPLETED
        finally:
            self.active_streams -= 1


# ---------------------------------------------------------------------------
# HTTP client backend
# ---------------------------------------------------------------------------

def default_request_builder(prompt: FimPrompt, params: GenerationParams) -> dict[str, Any]:
    return {
        "prefix": prompt.prefix,
        "suffix": prompt.suffix,
        "multi_line": prompt.multi_line,
        "max_tokens": params.max_tokens,
        "stop": ["\n"] if params.stop_at_newline else [],
        "stream": True,
    }


def default_chunk_parser(line: str) -> str | None:
    """Parse one response line into a text chunk (JSON lines by default)."""
    line = line.strip()
    if not line or line == "[DONE]":
        return None
    payload = json.loads(line)
    return payload.get("text", "")


class HttpBackend:
    """Streams completions from a FIM endpoint over HTTP.

    The wire shape is endpoint-specific; swap ``request_builder`` and
    ``chunk_parser`` to adapt.  The server is trusted to enforce token
    limits; a character cap guards runaway multi-line responses.
    """

    def __init__(
        self,
        endpoint: str,
        timeout_ms: float = 10_000.0,
        headers: dict[str, str] | None = None,
        request_builder: Callable[[FimPrompt, GenerationParams], dict[str, Any]] = default_request_builder,
        chunk_parser: Callable[[str], str | None] = default_chunk_parser,
        char_cap: int = MULTI_LINE_CHAR_CAP,
        transport: httpx.BaseTransport | None = None,
    ) -> None:
        self.endpoint = endpoint
        self.headers = headers or {}
        self.request_builder = request_builder
        self.chunk_parser = chunk_parser
        self.char_cap = char_cap
        self._client = httpx.Client(
            timeout=timeout_ms / 1000.0,
            transport=transport,
        )

    def close(self) -> None:
        self._client.close()

    def generate(self, prompt: FimPrompt, params: GenerationParams,
                 cancel: CancelToken) -> GenerationStream:
        return GenerationStream(self._produce(prompt, params, cancel))

    def _produce(self, prompt: FimPrompt, params: GenerationParams, cancel: CancelToken):
        payload = self.request_builder(prompt, params)
        emitted = 0
        try:
            with self._client.stream(
                "POST", self.endpoint, json=payload, headers=self.headers
            ) as response:
                response.raise_for_status()
                for line in response.iter_lines():
                    if cancel.cancelled:
                        return StreamStatus.CANCELLED
                    chunk = self.chunk_parser(line)
                    if not chunk:
                        continue
                    if prompt.multi_line and emitted + len(chunk) > self.char_cap:
                        chunk = chunk[: self.char_cap - emitted]
                        if chunk:
                            emitted += len(chunk)
                            yield chunk
                        return StreamStatus.COMPLETED
                    emitted += len(chunk)
                    yield chunk
        except httpx.TimeoutException as exc:
            return StreamStatus.TIMED_OUT, f"backend timeout: {exc}"
        except (httpx.HTTPError, json.JSONDecodeError) as exc:
            return StreamStatus.FAILED, f"backend error: {exc}"
        if cancel.cancelled:
            return StreamStatus.CANCELLED
        return StreamStatus.COMPLETED


def make_fingerprint(text: str) -> str:
    """Short stable digest used in cache keys."""
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]
