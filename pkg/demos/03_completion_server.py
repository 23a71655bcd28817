"""Walkthrough: the completion engine serving a typing session.

Drives the sans-IO engine directly: document sync, a multi-line request
with the progress indicator, a cache hit, and an invalidating keystroke.
The same engine runs over LSP-framed stdio via `scopeline serve`.
"""

from scopeline import CompletionEngine, EngineConfig, MockBackend, MockCorpus

URI = "file:///demo.py"


def show(messages):
    for msg in messages:
        if "method" in msg:
            print(f"  <- notification {msg['method']} {msg['params']}")
        else:
            result = msg.get("result") or {}
            suggestion = result.get("suggestion")
            text = repr(suggestion["text"]) if suggestion else None
            print(f"  <- response id={msg['id']} cache={result.get('servedFromCache')} "
                  f"suggestion={text}")


def main():
    corpus = MockCorpus({
        "def quicksort(arr):": (
            "\n    if len(arr) <= 1:"
            "\n        return arr"
            "\n    return sorted(arr)"
        ),
    })
    engine = CompletionEngine(EngineConfig(), backend=MockBackend(corpus))

    print("didOpen an empty buffer, then type the quicksort header:")
    engine.handle_message({"jsonrpc": "2.0", "method": "textDocument/didOpen",
                           "params": {"textDocument": {
                               "uri": URI, "version": 0,
                               "text": "def quicksort(arr):\n    \n",
                               "languageId": "indent"}}})

    print("\nrequest at the empty body line -> multi-line with indicator:")
    engine.handle_message({"jsonrpc": "2.0", "id": 1,
                           "method": "textDocument/inlineCompletions",
                           "params": {"textDocument": {"uri": URI, "version": 0},
                                      "position": {"line": 1, "character": 4},
                                      "origin": {}}})
    engine.pump_until_idle()
    show(engine.drain_outbox())

    print("\nsame request again -> served from cache, no indicator:")
    engine.handle_message({"jsonrpc": "2.0", "id": 2,
                           "method": "textDocument/inlineCompletions",
                           "params": {"textDocument": {"uri": URI, "version": 0},
                                      "position": {"line": 1, "character": 4},
                                      "origin": {}}})
    engine.pump_until_idle()
    show(engine.drain_outbox())

    print("\na keystroke lands mid-generation -> invalidated, indicator paired:")
    engine.cache.invalidate_all()  # force a real generation
    engine.handle_message({"jsonrpc": "2.0", "id": 3,
                           "method": "textDocument/inlineCompletions",
                           "params": {"textDocument": {"uri": URI, "version": 0},
                                      "position": {"line": 1, "character": 4},
                                      "origin": {}}})
    engine.pump()  # one chunk
    engine.handle_message({"jsonrpc": "2.0", "method": "textDocument/didChange",
                           "params": {"textDocument": {"uri": URI, "version": 1},
                                      "contentChanges": [
                                          {"text": "def quicksort(arr):\n    i\n"}]}})
    engine.pump_until_idle()
    show(engine.drain_outbox())

    print("\ntelemetry trail:")
    for event in engine.sink.events:
        print(f"  {event.kind.value:12s} request={event.request_id} "
              f"kind={event.suggestion_kind or '-'} detail={event.detail or '-'}")


if __name__ == "__main__":
    main()
