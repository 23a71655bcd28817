"""Walkthrough: scope-bounded truncation and streaming early cancellation.

A model response that wanders past the cursor's scope gets cut; the
incremental monitor finds the same cut point chunk by chunk, which is
what lets a server cancel generation the moment the scope closes.
"""

from scopeline import (
    Cursor,
    Document,
    LanguageFamily,
    ScopeCutMonitor,
    TriggerKind,
    parse_document,
    realign_indentation,
    truncate_to_scope,
)

SOURCE = """\
def foo(x):
    a = x + 1
    \n"""

RAW_GENERATION = """b = a * 2
    return b

def foo2(y):
    return y * 3
"""


def main():
    doc = Document(text=SOURCE, family=LanguageFamily.INDENT)
    tree = parse_document(doc)
    cursor = Cursor(2, 4)

    print("Raw model output (cursor inside foo's body):")
    for line in RAW_GENERATION.split("\n"):
        print(f"  | {line}")

    result = truncate_to_scope(RAW_GENERATION, tree, doc, cursor,
                               TriggerKind.MULTI_LINE)
    print(f"\nBatch truncation cut at offset {result.cut_offset} "
          f"({result.cut_reason.value}); foo2 is gone:")
    for line in result.text.split("\n"):
        print(f"  | {line}")

    print("\nStreaming the same text in 7-char chunks:")
    monitor = ScopeCutMonitor.for_cursor(tree, doc, cursor, TriggerKind.MULTI_LINE)
    fed = 0
    for start in range(0, len(RAW_GENERATION), 7):
        chunk = RAW_GENERATION[start:start + 7]
        cut = monitor.feed(chunk)
        fed += len(chunk)
        if cut is not None:
            wasted = len(RAW_GENERATION) - cut
            print(f"  cut detected at offset {cut} after feeding {fed} chars;")
            print(f"  a live stream would cancel here, saving {wasted} "
                  "characters of generation")
            break
    assert cut == result.cut_offset, "streaming and batch cuts agree"

    print("\nRealignment splices a mis-indented block at the body indent:")
    sloppy = "b = a * 2\nif b > 3:\n    b -= 1"
    fixed = realign_indentation(sloppy, cursor, doc, tree)
    for line in fixed.split("\n"):
        print(f"  | {line}")


if __name__ == "__main__":
    main()
