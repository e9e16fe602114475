"""Pretty-printer for DL units. Output re-parses to an equal AST."""

from __future__ import annotations

import math
from typing import List

from . import ast as A

_BIN_PREC = {
    "||": 1,
    "&&": 2,
    "==": 3,
    "!=": 3,
    "<": 4,
    "<=": 4,
    ">": 4,
    ">=": 4,
    "+": 5,
    "-": 5,
    "*": 6,
    "/": 6,
    "%": 6,
}
_UNARY_PREC = 7
_ATOM_PREC = 8


def format_real(v: float) -> str:
    if math.isnan(v):
        return "nan"
    s = repr(float(v))
    if "e" not in s and "." not in s:
        s += ".0"
    return s


def _prec(e: A.Expr) -> int:
    if isinstance(e, A.Binary):
        return _BIN_PREC[e.op]
    if isinstance(e, A.Unary):
        return _UNARY_PREC
    if isinstance(e, (A.IntLit, A.RealLit)) and _is_negative_literal(e):
        return _UNARY_PREC
    return _ATOM_PREC


def _is_negative_literal(e) -> bool:
    if isinstance(e, A.IntLit):
        return e.value < 0
    return not math.isnan(e.value) and math.copysign(1.0, e.value) < 0


def expr(e: A.Expr) -> str:
    if isinstance(e, A.IntLit):
        return str(e.value)
    if isinstance(e, A.RealLit):
        return format_real(e.value)
    if isinstance(e, A.BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, A.Name):
        return e.id
    if isinstance(e, A.Index):
        return f"{_wrap(e.array, _ATOM_PREC)}[{expr(e.index)}]"
    if isinstance(e, A.Call):
        return f"{e.fn}({', '.join(expr(a) for a in e.args)})"
    if isinstance(e, A.NewArray):
        return f"new {e.elem}[{expr(e.size)}]"
    if isinstance(e, A.Unary):
        inner = _wrap(e.operand, _UNARY_PREC)
        # keep '- -x' from lexing as a single token sequence ambiguity
        return f"{e.op}{inner}" if not inner.startswith(e.op) else f"{e.op}({inner})"
    if isinstance(e, A.Binary):
        p = _BIN_PREC[e.op]
        left = _wrap(e.left, p)
        right = _wrap(e.right, p + 1)
        return f"{left} {e.op} {right}"
    raise TypeError(f"not an expression: {e!r}")


def _wrap(e: A.Expr, min_prec: int) -> str:
    s = expr(e)
    return f"({s})" if _prec(e) < min_prec else s


def _stmts(body, indent: int, out: List[str]) -> None:
    for s in body:
        _stmt(s, indent, out)


def _stmt(s: A.Stmt, indent: int, out: List[str]) -> None:
    pad = "  " * indent
    if isinstance(s, A.VarDecl):
        out.append(f"{pad}var {s.name}: {s.type} := {expr(s.init)};")
    elif isinstance(s, A.Assign):
        out.append(f"{pad}{s.name} := {expr(s.value)};")
    elif isinstance(s, A.IndexAssign):
        out.append(f"{pad}{s.name}[{expr(s.index)}] := {expr(s.value)};")
    elif isinstance(s, A.If):
        out.append(f"{pad}if ({expr(s.cond)}) {{")
        _stmts(s.then, indent + 1, out)
        if s.orelse:
            out.append(f"{pad}}} else {{")
            _stmts(s.orelse, indent + 1, out)
        out.append(f"{pad}}}")
    elif isinstance(s, A.While):
        out.append(f"{pad}while ({expr(s.cond)}) {{")
        _stmts(s.body, indent + 1, out)
        out.append(f"{pad}}}")
    elif isinstance(s, A.For):
        out.append(f"{pad}for {s.var} in {expr(s.iterable)} {{")
        _stmts(s.body, indent + 1, out)
        out.append(f"{pad}}}")
    elif isinstance(s, A.Return):
        out.append(f"{pad}return;" if s.value is None else f"{pad}return {expr(s.value)};")
    elif isinstance(s, A.Fail):
        out.append(f"{pad}fail;")
    else:
        raise TypeError(f"not a statement: {s!r}")


def method_text(m: A.Method, indent: int = 1) -> str:
    pad = "  " * indent
    params = ", ".join(f"{p.name}: {p.type}" for p in m.params)
    if m.name == A.CTOR_NAME:
        head = f"{pad}init({params}) {{"
    else:
        ret = "" if m.ret == "void" else f": {m.ret}"
        head = f"{pad}method {m.name}({params}){ret} {{"
    out = [head]
    _stmts(m.body, indent + 1, out)
    out.append(f"{pad}}}")
    return "\n".join(out)


def body_text(body) -> str:
    out: List[str] = []
    _stmts(body, 0, out)
    return "\n".join(out)


def unit_text(u: A.Unit) -> str:
    lines = [f"class {u.name} {{"]
    for f in u.fields:
        lines.append(f"  field {f.name}: {f.type};")
    if not u.ctor_implicit:
        lines.append(method_text(u.ctor))
    for m in u.methods:
        lines.append(method_text(m))
    lines.append("}")
    return "\n".join(lines) + "\n"
