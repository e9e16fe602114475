"""Tokenizer shared by the DL parser and the assertion parser."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, List


class DiagnosticError(Exception):
    """Base for errors that carry a source position."""

    severity = "error"

    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(message)
        self.message = message
        self.line = line
        self.col = col

    def format(self, filename: str = "<input>") -> str:
        return f"{filename}:{self.line}:{self.col}: {self.severity}: {self.message}"


class DLSyntaxError(DiagnosticError):
    pass


@dataclass(frozen=True)
class Token:
    kind: str  # 'ident', 'int', 'real', 'op', 'kw', 'eof'
    text: str
    line: int
    col: int

    def key(self):
        return (self.kind, self.text)


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>//[^\n]*)
  | (?P<real>\d+\.\d+(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>==>|:=|==|!=|<=|>=|&&|\|\||[-+*/%!<>(){}\[\];,:])
    """,
    re.VERBOSE,
)

DL_KEYWORDS = frozenset(
    "class field init method var if else while for in return fail "
    "true false nan new int real bool".split()
)


def tokenize(source: str, keywords: Iterable[str] = DL_KEYWORDS) -> List[Token]:
    keywords = frozenset(keywords)
    out: List[Token] = []
    pos = 0
    line, line_start = 1, 0
    n = len(source)
    while pos < n:
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise DLSyntaxError(
                f"unexpected character {source[pos]!r}", line, pos - line_start + 1
            )
        kind = m.lastgroup
        text = m.group()
        col = pos - line_start + 1
        if kind not in ("ws", "comment"):
            if kind == "ident" and text in keywords:
                kind = "kw"
            out.append(Token(kind, text, line, col))
        nl = text.count("\n")
        if nl:
            line += nl
            line_start = pos + text.rfind("\n") + 1
        pos = m.end()
    out.append(Token("eof", "", line, pos - line_start + 1))
    return out


def token_keys(source: str, keywords: Iterable[str] = DL_KEYWORDS) -> List[tuple]:
    """Position-free token stream, used for round-trip and change detection."""
    return [t.key() for t in tokenize(source, keywords) if t.kind != "eof"]
