"""Tokenizer for `.aoo` sources.

Comments are stripped, but lines whose comment text is exactly `Comp` (with
an optional trailing label, e.g. `Comp2`) are remembered: they split the
main body into its initialization and computation segments.
"""

import re
from dataclasses import dataclass

from .errors import Diagnostic, ParseError

KEYWORDS = {
    "extends",
    "while",
    "if",
    "else",
    "return",
    "new",
    "null",
    "this",
    "true",
    "false",
    "class",
    "public",
    "private",
}

_SYMBOLS = [
    ":=",
    "==",
    "!=",
    "<=",
    ">=",
    "&&",
    "||",
    "{",
    "}",
    "(",
    ")",
    ";",
    ",",
    ".",
    "?",
    ":",
    "=",
    "<",
    ">",
    "+",
    "-",
    "*",
    "/",
    "%",
    "!",
]

_COMP_MARKER = re.compile(r"^Comp\w*$")
# a leading $ lets flattened output (with its $fN temporaries) re-parse
_IDENT = re.compile(r"[A-Za-z_$][A-Za-z0-9_$]*")
_INT = re.compile(r"[0-9]+")


@dataclass(frozen=True)
class Token:
    kind: str  # 'id', 'int', 'char', 'sym', 'kw', 'eof'
    text: str
    line: int
    col: int


def tokenize(source: str, filename: str = "<input>"):
    """Returns (tokens, comp_marker_positions) with positions as (line, col)."""
    tokens = []
    markers = []
    i, line, col = 0, 1, 1
    n = len(source)

    def err(msg):
        raise ParseError(Diagnostic(filename, line, col, "E_LEX", msg))

    while i < n:
        c = source[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if source.startswith("//", i):
            j = source.find("\n", i)
            if j < 0:
                j = n
            text = source[i + 2 : j].strip()
            if _COMP_MARKER.match(text):
                markers.append((line, col))
            col += j - i
            i = j
            continue
        if source.startswith("/*", i):
            j = source.find("*/", i + 2)
            if j < 0:
                err("unterminated block comment")
            chunk = source[i : j + 2]
            line += chunk.count("\n")
            col = len(chunk) - chunk.rfind("\n") if "\n" in chunk else col + len(chunk)
            i = j + 2
            continue
        if c == "'":
            j = i + 1
            if j < n and source[j] == "\\":
                j += 1
            if j >= n or j + 1 >= n or source[j + 1] != "'":
                err("malformed char literal")
            ch = source[i + 1 : j + 1]
            ch = {"\\n": "\n", "\\t": "\t", "\\'": "'", "\\\\": "\\"}.get(ch, ch)
            tokens.append(Token("char", ch, line, col))
            col += j + 2 - i
            i = j + 2
            continue
        m = _INT.match(source, i)
        if m:
            tokens.append(Token("int", m.group(), line, col))
            col += len(m.group())
            i = m.end()
            continue
        m = _IDENT.match(source, i)
        if m:
            word = m.group()
            kind = "kw" if word in KEYWORDS else "id"
            tokens.append(Token(kind, word, line, col))
            col += len(word)
            i = m.end()
            continue
        for sym in _SYMBOLS:
            if source.startswith(sym, i):
                tokens.append(Token("sym", sym, line, col))
                col += len(sym)
                i += len(sym)
                break
        else:
            err(f"unexpected character {c!r}")

    tokens.append(Token("eof", "", line, col))
    return tokens, markers
