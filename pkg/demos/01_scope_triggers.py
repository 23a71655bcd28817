"""Walkthrough: scope detection and the trigger policy.

Shows how cursor position decides between suppressing, single-line, and
multi-line suggestions on a small source file.
"""

from scopeline import (
    Cursor,
    Document,
    LanguageFamily,
    RequestOrigin,
    decide_trigger,
    innermost_scope,
    is_at_end_of_scope,
    parse_document,
    scope_chain,
)

SOURCE = """\
def quicksort(arr):
    if len(arr) <= 1:
        return arr
    pivot = arr[0]
    return quicksort(left) + [pivot] + quicksort(right)

def partition(arr, pivot):
    \n"""


def label(doc, tree, cursor):
    decision = decide_trigger(doc, cursor, RequestOrigin(), tree)
    inner = innermost_scope(tree, cursor)
    chain = " > ".join(n.kind.value for n in scope_chain(tree, cursor))
    at_end = is_at_end_of_scope(tree, doc, cursor)
    reason = f" ({decision.reason.value})" if decision.reason else ""
    return f"{decision.kind.value}{reason:32s} scope={chain} end_of_scope={at_end}"


def main():
    doc = Document(text=SOURCE, family=LanguageFamily.INDENT)
    tree = parse_document(doc)

    print("Document under the cursor probes:")
    for i, line in enumerate(doc.lines):
        print(f"  {i:2d} | {line}")
    print()

    probes = [
        ("end of 'return arr' (inner if)", Cursor(2, 18)),
        ("end of the quicksort header", Cursor(0, 19)),
        ("middle of 'pivot = arr[0]'", Cursor(3, 9)),
        ("start of 'pivot = arr[0]' (code right of cursor)", Cursor(3, 4)),
        ("end of the file's last body line", Cursor(7, 4)),
        ("column 0 on the blank last line", Cursor(8, 0)),
    ]
    for name, cursor in probes:
        print(f"{name}:")
        print(f"  cursor {cursor.line}:{cursor.column} -> {label(doc, tree, cursor)}")
    print()
    print("Explicit shortcut always asks for multi-line (unless suppressed):")
    explicit = RequestOrigin(explicit_shortcut=True)
    decision = decide_trigger(doc, Cursor(3, 18), explicit, tree)
    print(f"  mid-scope with shortcut -> {decision.kind.value} ({decision.reason.value})")


if __name__ == "__main__":
    main()
