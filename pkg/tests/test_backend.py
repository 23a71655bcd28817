"""Model backends: prompts, token limits, streaming, cancellation."""

from __future__ import annotations

import json

import httpx
import pytest

from scopeline import (
    CancelToken,
    Cursor,
    Document,
    FimPrompt,
    GenerationParams,
    HttpBackend,
    LanguageFamily,
    MockBackend,
    MockCorpus,
    StreamStatus,
    build_fim_prompt,
    context_fingerprint,
    token_count,
)
from scopeline.backend import truncate_to_tokens


def prompt_for(prefix: str, suffix: str = "", multi: bool = True) -> FimPrompt:
    return FimPrompt(prefix, suffix, LanguageFamily.INDENT, multi)


MULTI_PARAMS = GenerationParams(max_tokens=120, stop_at_newline=False)
SINGLE_PARAMS = GenerationParams(max_tokens=25, stop_at_newline=True)


# ---------------------------------------------------------------------------
# tokenizer
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("text,count", [
    ("", 0),
    ("return x + 1", 4),
    ("foo(bar)", 4),
    ("x=1", 3),
    ("   ", 0),
])
def test_token_count(text, count):
    assert token_count(text) == count


def test_truncate_to_tokens():
    assert truncate_to_tokens("return x + 1", 2) == "return x"
    assert truncate_to_tokens("return x + 1", 99) == "return x + 1"
    assert truncate_to_tokens("a b", 0) == ""


# ---------------------------------------------------------------------------
# prompts
# ---------------------------------------------------------------------------

def test_prompt_windows_are_enforced():
    text = ("x" * 10_000) + "\n" + ("y" * 5_000)
    doc = Document(text=text, family=LanguageFamily.INDENT)
    cursor = Cursor(1, 0)
    prompt = build_fim_prompt(doc, cursor, multi_line=True)
    assert len(prompt.prefix) == 6000
    assert len(prompt.suffix) == 2000
    assert doc.text[doc.offset_of(cursor) - 6000 : doc.offset_of(cursor)] == prompt.prefix


def test_fingerprint_is_last_nonblank_line():
    assert context_fingerprint("def quicksort(arr):\n") == "def quicksort(arr):"
    assert context_fingerprint("a\nb\n\n  \n") == "b"
    assert context_fingerprint("") == ""


# ---------------------------------------------------------------------------
# mock backend
# ---------------------------------------------------------------------------

def quicksort_corpus() -> MockCorpus:
    body = "\n    return sorted(arr)\n"
    return MockCorpus({"def quicksort(arr):": body})


def test_mock_streams_corpus_continuation_in_chunks():
    backend = MockBackend(quicksort_corpus())
    stream = backend.generate(prompt_for("def quicksort(arr):\n"), MULTI_PARAMS,
                              CancelToken())
    chunks = list(stream)
    assert stream.status is StreamStatus.COMPLETED
    assert all(len(c) <= 8 for c in chunks)
    assert "".join(chunks) == "\n    return sorted(arr)\n"


def test_mock_is_deterministic():
    backend = MockBackend(quicksort_corpus())
    first = list(backend.generate(prompt_for("def quicksort(arr):\n"),
                                  MULTI_PARAMS, CancelToken()))
    second = list(backend.generate(prompt_for("def quicksort(arr):\n"),
                                   MULTI_PARAMS, CancelToken()))
    assert first == second


def test_cancel_stops_within_one_chunk():
    corpus = MockCorpus({"x": "a" * 100})
    backend = MockBackend(corpus)
    cancel = CancelToken()
    stream = backend.generate(prompt_for("x"), MULTI_PARAMS, cancel)
    first = next(stream)
    assert first == "a" * 8
    cancel.cancel()
    rest = list(stream)
    assert stream.status is StreamStatus.CANCELLED
    assert len(rest) == 0


def test_token_limit_enforced():
    corpus = MockCorpus({"x": "w1 w2 w3 w4 w5 w6"})
    backend = MockBackend(corpus)
    params = GenerationParams(max_tokens=3, stop_at_newline=False)
    stream = backend.generate(prompt_for("x"), params, CancelToken())
    assert "".join(stream) == "w1 w2 w3"
    assert stream.status is StreamStatus.COMPLETED


def test_stop_at_newline():
    corpus = MockCorpus({"x": "first line\nsecond line"})
    backend = MockBackend(corpus)
    stream = backend.generate(prompt_for("x", multi=False), SINGLE_PARAMS,
                              CancelToken())
    assert "".join(stream) == "first line"


def test_unknown_context_without_fallback_is_empty():
    backend = MockBackend(MockCorpus())
    stream = backend.generate(prompt_for("nothing here"), MULTI_PARAMS,
                              CancelToken())
    assert list(stream) == []
    assert stream.status is StreamStatus.COMPLETED


def test_fallback_produces_deterministic_block():
    backend = MockBackend(MockCorpus(), fallback=True)
    prompt = prompt_for("def f():\n")
    one = backend.continuation_for(prompt, MULTI_PARAMS)
    two = backend.continuation_for(prompt, MULTI_PARAMS)
    assert one == two
    assert one.strip()


def test_corpus_round_trip(tmp_path):
    corpus = MockCorpus({"a": "1", "b": "two\nlines"})
    path = str(tmp_path / "corpus.jsonl")
    corpus.save(path)
    loaded = MockCorpus.load(path)
    assert loaded.records == corpus.records
    with open(path) as fh:
        header = json.loads(fh.readline())
    assert header["format"] == "mock-corpus"


def test_call_counter():
    backend = MockBackend(quicksort_corpus())
    assert backend.calls == 0
    backend.generate(prompt_for("def quicksort(arr):\n"), MULTI_PARAMS, CancelToken())
    assert backend.calls == 1


# ---------------------------------------------------------------------------
# http backend
# ---------------------------------------------------------------------------

def _streaming_transport(lines: list[str], status_code: int = 200):
    def handler(request: httpx.Request) -> httpx.Response:
        body = "\n".join(lines).encode("utf-8")
        return httpx.Response(status_code, content=body)

    return httpx.MockTransport(handler)


def test_http_backend_streams_chunks():
    lines = [json.dumps({"text": "hel"}), json.dumps({"text": "lo"}), "[DONE]"]
    backend = HttpBackend("http://model/fim", transport=_streaming_transport(lines))
    stream = backend.generate(prompt_for("x"), MULTI_PARAMS, CancelToken())
    assert "".join(stream) == "hello"
    assert stream.status is StreamStatus.COMPLETED
    backend.close()


def test_http_backend_failure_is_diagnosed():
    backend = HttpBackend("http://model/fim",
                          transport=_streaming_transport([], status_code=500))
    stream = backend.generate(prompt_for("x"), MULTI_PARAMS, CancelToken())
    assert list(stream) == []
    assert stream.status is StreamStatus.FAILED
    assert "backend error" in (stream.error or "")
    backend.close()


def test_http_backend_respects_char_cap():
    lines = [json.dumps({"text": "a" * 60})]
    backend = HttpBackend("http://model/fim", char_cap=25,
                          transport=_streaming_transport(lines))
    stream = backend.generate(prompt_for("x"), MULTI_PARAMS, CancelToken())
    assert "".join(stream) == "a" * 25
    backend.close()


def test_http_backend_cancellation():
    lines = [json.dumps({"text": "abc"}), json.dumps({"text": "def"})]
    backend = HttpBackend("http://model/fim", transport=_streaming_transport(lines))
    cancel = CancelToken()
    cancel.cancel()
    stream = backend.generate(prompt_for("x"), MULTI_PARAMS, cancel)
    assert list(stream) == []
    assert stream.status is StreamStatus.CANCELLED
    backend.close()
