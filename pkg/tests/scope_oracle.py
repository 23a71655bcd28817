"""Brute-force scope oracles, independent of the library implementation.

Indent family: per-cursor recomputation of the indentation stack from
scratch.  Brace family: a per-character depth counter over the whole
text.  Both return plain tuples so agreement checks compare structure,
not object identity.
"""

from __future__ import annotations

HEADER_KEYWORDS = {
    "def": "function",
    "class": "class",
    "if": "conditional",
    "elif": "conditional",
    "else": "conditional",
    "for": "loop",
    "while": "loop",
    "try": "block",
    "except": "block",
    "finally": "block",
    "with": "block",
}

CLOSERS = set("})]")


def _line_starts(text: str) -> list[int]:
    starts = [0]
    for i, ch in enumerate(text):
        if ch == "\n":
            starts.append(i + 1)
    return starts


def _indent_of(line: str, tab_width: int = 1) -> int:
    width = 0
    for ch in line:
        if ch == "\t":
            width += tab_width
        elif ch.isspace():
            width += 1
        else:
            return width
    return width


def _strip_strings_and_comment(line: str, triple: str | None):
    """Returns (new_triple_state, effective_code or None if line is opaque)."""
    opaque = triple is not None
    out = []
    i = 0
    while i < len(line):
        if triple is not None:
            idx = line.find(triple, i)
            if idx < 0:
                return triple, None if opaque else "".join(out)
            triple = None
            i = idx + 3
            continue
        c = line[i]
        if c == "#":
            break
        if line[i : i + 3] in ('"""', "'''"):
            triple = line[i : i + 3]
            i += 3
            continue
        if c in "'\"":
            j = i + 1
            while j < len(line) and line[j] != c:
                j += 2 if line[j] == "\\" else 1
            if j >= len(line):
                break
            i = j + 1
            continue
        out.append(c)
        i += 1
    return triple, None if opaque else "".join(out)


def _header_kind(effective: str) -> str | None:
    stripped = effective.strip()
    if not stripped.endswith(":"):
        return None
    word = ""
    rest = stripped
    if rest.startswith("async "):
        rest = rest[len("async "):].lstrip()
    for ch in rest:
        if ch.isalnum() or ch == "_":
            word += ch
        else:
            break
    return HEADER_KEYWORDS.get(word)


def indent_line_facts(text: str, tab_width: int = 1):
    """Per-line (blank, opaque, indent, header_kind) via a fresh scan."""
    facts = []
    triple = None
    for line in text.split("\n"):
        blank = line.strip() == ""
        if blank:
            facts.append((True, False, 0, None))
            continue
        triple, effective = _strip_strings_and_comment(line, triple)
        if effective is None:
            facts.append((False, True, 0, None))
            continue
        facts.append((False, False, _indent_of(line, tab_width),
                      _header_kind(effective)))
    return facts


def indent_chain(text: str, line: int, column: int, tab_width: int = 1):
    """Scope chain (header_line, indent) outermost->innermost, module excluded."""
    facts = indent_line_facts(text, tab_width)
    lines = text.split("\n")
    stack: list[tuple[int, int]] = []

    def process(i: int, include_push: bool) -> None:
        blank, opaque, indent, header = facts[i]
        if blank or opaque:
            return
        while stack and indent <= stack[-1][1]:
            stack.pop()
        if include_push and header is not None:
            stack.append((i, indent))

    cursor_blank = facts[line][0]
    if cursor_blank:
        for i in range(line):
            process(i, include_push=True)
        while stack and stack[-1][1] >= column:
            stack.pop()
        return list(stack)

    for i in range(line):
        process(i, include_push=True)
    blank, opaque, indent, header = facts[line]
    if not opaque:
        while stack and indent <= stack[-1][1]:
            stack.pop()
        at_eof_end = (
            line == len(lines) - 1
            and column == len(lines[line])
            and not text.endswith("\n")
        )
        if header is not None and at_eof_end:
            stack.append((line, indent))
    return list(stack)


def indent_at_end_of_scope(text: str, line: int, column: int, tab_width: int = 1) -> bool:
    """No content of the cursor's scope occurs after the cursor."""
    facts = indent_line_facts(text, tab_width)
    lines = text.split("\n")
    chain = indent_chain(text, line, column, tab_width)
    scope_indent = chain[-1][1] if chain else None  # None = module

    if lines[line][column:].strip():
        return False
    for i in range(line + 1, len(lines)):
        blank, opaque, indent, _ = facts[i]
        if blank:
            continue
        if opaque:
            return False
        if scope_indent is not None and indent <= scope_indent:
            return True  # the scope closed with nothing after the cursor
        return False
    return True


# ---------------------------------------------------------------------------
# brace family
# ---------------------------------------------------------------------------

def brace_pairs(text: str):
    """All brace pairs as (open_offset, close_offset or None), skipping
    strings and // comments."""
    pairs = []
    stack = []
    i = 0
    n = len(text)
    in_string: str | None = None
    in_comment = False
    while i < n:
        c = text[i]
        if in_comment:
            if c == "\n":
                in_comment = False
            i += 1
            continue
        if in_string is not None:
            if c == "\\":
                i += 2
                continue
            if c == in_string or c == "\n":
                in_string = None
            i += 1
            continue
        if c == "/" and i + 1 < n and text[i + 1] == "/":
            in_comment = True
            i += 2
            continue
        if c in "'\"":
            in_string = c
            i += 1
            continue
        if c == "{":
            stack.append(len(pairs))
            pairs.append([i, None])
        elif c == "}" and stack:
            pairs[stack.pop()][1] = i
        i += 1
    return [(open_, close) for open_, close in pairs]


def brace_chain(text: str, offset: int):
    """Open braces containing the offset, outermost->innermost, as
    (open_offset, close_offset or None)."""
    chain = []
    for open_, close in brace_pairs(text):
        if open_ < offset and (close is None or offset <= close):
            chain.append((open_, close))
    chain.sort()
    return chain


def brace_at_end_of_scope(text: str, offset: int, line_end_offset: int) -> bool:
    chain = brace_chain(text, offset)
    end = chain[-1][1] if chain and chain[-1][1] is not None else len(text)
    for i in range(offset, end):
        c = text[i]
        if c.isspace():
            continue
        if i < line_end_offset and c in CLOSERS:
            continue
        return False
    return True
