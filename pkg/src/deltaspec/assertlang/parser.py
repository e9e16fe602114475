"""Parser and scope checker for assertion text."""

from __future__ import annotations

import math
from typing import Dict, Optional

from ..minilang.lexer import DiagnosticError, DLSyntaxError, Token, tokenize
from ..minilang.points import INVARIANT, ProgramPoint
from . import ast as S

KEYWORDS = frozenset(
    "forall exists in old result isnan len sum sumabs max maxabs min true false nan implies".split()
)


class AssertionSyntaxError(DLSyntaxError):
    pass


class AssertionScopeError(DiagnosticError):
    pass


class _Parser:
    def __init__(self, text: str):
        try:
            self.toks = tokenize(text, KEYWORDS)
        except DLSyntaxError as exc:
            raise AssertionSyntaxError(exc.message, exc.line, exc.col) from exc
        self.i = 0
        self.bound: Optional[str] = None
        self.negating = False

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def at(self, text: str) -> bool:
        return self.tok.kind in ("op", "kw") and self.tok.text == text

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "eof":
            self.i += 1
        return t

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.error(f"expected {text!r}")
        return self.advance()

    def error(self, msg: str):
        t = self.tok
        found = "end of input" if t.kind == "eof" else repr(t.text)
        raise AssertionSyntaxError(f"{msg}, found {found}", t.line, t.col)

    def parse(self) -> S.Expr:
        e = self.formula()
        if self.tok.kind != "eof":
            self.error("unexpected trailing input")
        return e

    def formula(self) -> S.Expr:
        if self.at("forall") or self.at("exists"):
            kind = self.advance().text
            if self.bound is not None:
                self.error("nested quantifiers are not supported")
            if self.tok.kind != "ident":
                self.error("expected bound variable")
            var = self.advance().text
            self.expect("in")
            arr = self.array_ref()
            self.expect(":")
            self.bound = var
            try:
                body = self.formula()
            finally:
                self.bound = None
            return S.Quant(kind, var, arr, body)
        left = self.disjunction()
        if self.at("==>") or self.at("implies"):
            self.advance()
            return S.Implies(left, self.formula())
        return left

    def disjunction(self) -> S.Expr:
        e = self.conjunction()
        while self.at("||"):
            self.advance()
            e = S.Or(e, self.conjunction())
        return e

    def conjunction(self) -> S.Expr:
        e = self.comparison()
        while self.at("&&"):
            self.advance()
            e = S.And(e, self.comparison())
        return e

    def comparison(self) -> S.Expr:
        e = self.additive()
        if self.tok.kind == "op" and self.tok.text in S.CMP_OPS:
            op = self.advance().text
            e = S.Cmp(op, e, self.additive())
            if self.tok.kind == "op" and self.tok.text in S.CMP_OPS:
                self.error("chained comparison")
        return e

    def additive(self) -> S.Expr:
        e = self.multiplicative()
        while self.tok.kind == "op" and self.tok.text in ("+", "-"):
            op = self.advance().text
            e = S.Arith(op, e, self.multiplicative())
        return e

    def multiplicative(self) -> S.Expr:
        e = self.unary()
        while self.tok.kind == "op" and self.tok.text in ("*", "/", "%"):
            op = self.advance().text
            e = S.Arith(op, e, self.unary())
        return e

    def unary(self) -> S.Expr:
        if self.at("!"):
            self.advance()
            return S.Not(self.unary())
        if self.at("-"):
            self.advance()
            self.negating = self.tok.kind == "int"
            try:
                inner = self.unary()
            finally:
                self.negating = False
            if isinstance(inner, S.Lit) and inner.type in ("int", "real") and not inner.text.startswith("-"):
                if inner.type == "int":
                    return S.int_lit(-inner.value)
                if not math.isnan(inner.value):
                    return S.real_lit(-inner.value)
            return S.Neg(inner)
        return self.primary()

    def array_ref(self):
        if self.at("old"):
            self.advance()
            self.expect("(")
            if self.tok.kind != "ident":
                self.error("expected field name")
            name = self.advance().text
            self.expect(")")
            return S.Old(name)
        if self.tok.kind != "ident":
            self.error("expected array name")
        return S.Var(self.advance().text)

    def primary(self) -> S.Expr:
        t = self.tok
        if t.kind == "int":
            self.advance()
            v = int(t.text)
            if v > 2**63:
                raise AssertionSyntaxError("integer literal out of range", t.line, t.col)
            if v == 2**63 and not self.negating:
                raise AssertionSyntaxError("integer literal out of range", t.line, t.col)
            return S.int_lit(v)
        if t.kind == "real":
            self.advance()
            return S.real_lit(float(t.text))
        if self.at("nan"):
            self.advance()
            return S.real_lit(math.nan)
        if self.at("true") or self.at("false"):
            self.advance()
            return S.bool_lit(t.text == "true")
        if self.at("result"):
            self.advance()
            return S.Result()
        if self.at("old"):
            self.advance()
            self.expect("(")
            if self.tok.kind != "ident":
                self.error("expected field name")
            name = self.advance().text
            self.expect(")")
            return self._maybe_index(S.Old(name))
        if self.at("isnan"):
            self.advance()
            self.expect("(")
            e = self.formula()
            self.expect(")")
            return S.IsNaN(e)
        if t.kind == "kw" and (t.text == "len" or t.text in S.AGGREGATES):
            self.advance()
            self.expect("(")
            arr = self.array_ref()
            self.expect(")")
            return S.Len(arr) if t.text == "len" else S.Agg(t.text, arr)
        if self.at("("):
            self.advance()
            e = self.formula()
            self.expect(")")
            return e
        if t.kind == "ident":
            self.advance()
            if self.bound is not None and t.text == self.bound:
                return S.IndexVar(t.text)
            return self._maybe_index(S.Var(t.text))
        self.error("expected expression")

    def _maybe_index(self, ref):
        if not self.at("["):
            return ref
        t = self.advance()
        if self.bound is None:
            raise AssertionSyntaxError("array indexing is only allowed under a quantifier", t.line, t.col)
        if self.tok.kind != "ident" or self.tok.text != self.bound:
            self.error("index must be the quantified variable")
        self.advance()
        self.expect("]")
        return S.Elem(ref, self.bound)


def parse_expr(text: str) -> S.Expr:
    return _Parser(text).parse()


# --- scope & typing --------------------------------------------------------


def scope_for(point: ProgramPoint, field_types: Dict[str, str], params: Dict[str, str], ret: str,
              old_fields=None) -> Dict[str, str]:
    """Identifier -> type map for a point.

    Keys: field names, ``old:<field>`` (exit points only), parameter names and
    ``result`` (non-void exit points only).
    """
    scope = dict(field_types)
    if point.kind != INVARIANT:
        olds = field_types if old_fields is None else {k: field_types[k] for k in old_fields if k in field_types}
        for k, t in olds.items():
            scope["old:" + k] = t
        scope.update(params)
        if ret != "void":
            scope["result"] = ret
    return scope


def unit_scope(unit, point: ProgramPoint) -> Dict[str, str]:
    """Scope of ``point`` as seen by one version of the code (every field has an ``old`` form)."""
    ft = unit.field_types()
    if point.kind == INVARIANT:
        return scope_for(point, ft, {}, "void")
    m = unit.method(point.method_name)
    return scope_for(point, ft, {p.name: p.type for p in m.params}, m.ret)


def type_of(e: S.Expr, scope: Dict[str, str], quant: Optional[S.Quant] = None) -> str:
    """Static type of ``e``; raises AssertionScopeError on unknown names or bad types."""

    def fail(msg):
        raise AssertionScopeError(msg)

    def ref_type(a) -> str:
        key = a.name if isinstance(a, S.Var) else "old:" + a.name
        if key not in scope:
            fail(f"unknown identifier {S.to_text(a)!r}")
        return scope[key]

    if isinstance(e, (S.Var, S.Old)):
        t = ref_type(e)
        if t.endswith("[]"):
            fail(f"array {S.to_text(e)!r} used as a scalar")
        return t
    if isinstance(e, S.Result):
        if "result" not in scope:
            fail("'result' is not available at this point")
        return scope["result"]
    if isinstance(e, S.Lit):
        return e.type
    if isinstance(e, S.IndexVar):
        return "int"
    if isinstance(e, S.Elem):
        t = ref_type(e.array)
        if quant is None or e.array != quant.array:
            fail("element access must use the quantified array")
        return t[:-2]
    if isinstance(e, (S.Len, S.Agg)):
        t = ref_type(e.array)
        if not t.endswith("[]"):
            fail(f"{S.to_text(e.array)!r} is not an array")
        return "int" if isinstance(e, S.Len) else t[:-2]
    if isinstance(e, S.Quant):
        t = ref_type(e.array)
        if not t.endswith("[]"):
            fail("quantifier needs an array")
        if type_of(e.body, scope, e) != "bool":
            fail("quantifier body must be boolean")
        return "bool"
    if isinstance(e, S.IsNaN):
        if type_of(e.operand, scope, quant) not in ("int", "real"):
            fail("isnan needs a number")
        return "bool"
    if isinstance(e, S.Neg):
        t = type_of(e.operand, scope, quant)
        if t not in ("int", "real"):
            fail("unary '-' needs a number")
        return t
    if isinstance(e, S.Not):
        if type_of(e.operand, scope, quant) != "bool":
            fail("'!' needs a boolean")
        return "bool"
    if isinstance(e, (S.And, S.Or, S.Implies)):
        if type_of(e.left, scope, quant) != "bool" or type_of(e.right, scope, quant) != "bool":
            fail("logical operator needs booleans")
        return "bool"
    if isinstance(e, S.Arith):
        lt, rt = type_of(e.left, scope, quant), type_of(e.right, scope, quant)
        if lt not in ("int", "real") or rt not in ("int", "real"):
            fail(f"{e.op!r} needs numbers")
        return "int" if lt == rt == "int" else "real"
    if isinstance(e, S.Cmp):
        lt, rt = type_of(e.left, scope, quant), type_of(e.right, scope, quant)
        if lt == "bool" or rt == "bool":
            if lt != rt or e.op not in ("==", "!="):
                fail("booleans only support == and !=")
        return "bool"
    fail(f"unknown node {e!r}")


def parse_assertion(text: str, point: ProgramPoint, scope: Dict[str, str]) -> S.Assertion:
    """Parse ``text`` and check it is a boolean assertion over ``scope``."""
    e = parse_expr(text)
    if type_of(e, scope) != "bool":
        raise AssertionScopeError("assertion must be boolean")
    return S.Assertion(point, e)
