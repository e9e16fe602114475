"""Recursive-descent parser for DL source files."""

from __future__ import annotations

import math
from typing import List, Optional, Tuple

from . import ast as A
from .lexer import DLSyntaxError, Token, tokenize

# binary precedence, loosest first
_PRECEDENCE = [
    ("||",),
    ("&&",),
    ("==", "!="),
    ("<", "<=", ">", ">="),
    ("+", "-"),
    ("*", "/", "%"),
]


class Parser:
    def __init__(self, tokens: List[Token]):
        self.toks = tokens
        self.i = 0

    # -- token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("op", "kw") and t.text == text

    def advance(self) -> Token:
        t = self.toks[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.error(f"expected {text!r}")
        return self.advance()

    def expect_ident(self, what: str = "identifier") -> Token:
        if self.tok.kind != "ident":
            self.error(f"expected {what}")
        return self.advance()

    def error(self, msg: str):
        t = self.tok
        found = "end of input" if t.kind == "eof" else repr(t.text)
        raise DLSyntaxError(f"{msg}, found {found}", t.line, t.col)

    @staticmethod
    def pos(t: Token) -> A.Pos:
        return (t.line, t.col)

    # -- declarations
    def parse_unit(self) -> A.Unit:
        start = self.expect("class")
        name = self.expect_ident("class name").text
        self.expect("{")
        fields: List[A.Field] = []
        methods: List[A.Method] = []
        ctor: Optional[A.Method] = None
        while not self.at("}"):
            if self.tok.kind == "eof":
                self.error("expected '}'")
            if self.at("field"):
                t = self.advance()
                fname = self.expect_ident("field name").text
                self.expect(":")
                ftype = self.parse_type()
                self.expect(";")
                fields.append(A.Field(fname, ftype, self.pos(t)))
            elif self.at("init"):
                t = self.advance()
                if ctor is not None:
                    raise DLSyntaxError("duplicate constructor", t.line, t.col)
                params = self.parse_params()
                body = self.parse_block()
                ctor = A.Method(A.CTOR_NAME, params, "void", body, self.pos(t))
            elif self.at("method"):
                t = self.advance()
                mname = self.expect_ident("method name").text
                params = self.parse_params()
                ret = "void"
                if self.at(":"):
                    self.advance()
                    ret = self.parse_type()
                body = self.parse_block()
                methods.append(A.Method(mname, params, ret, body, self.pos(t)))
            else:
                self.error("expected 'field', 'init' or 'method'")
        self.expect("}")
        if self.tok.kind != "eof":
            self.error("expected end of input after class body")
        implicit = ctor is None
        if ctor is None:
            ctor = A.Method(A.CTOR_NAME, (), "void", ())
        return A.Unit(name, tuple(fields), ctor, tuple(methods), implicit, self.pos(start))

    def parse_type(self) -> str:
        t = self.tok
        if not (t.kind == "kw" and t.text in ("int", "real", "bool")):
            self.error("expected type")
        self.advance()
        base = t.text
        if self.at("["):
            self.advance()
            self.expect("]")
            if base == "bool":
                raise DLSyntaxError("bool arrays are not supported", t.line, t.col)
            return base + "[]"
        return base

    def parse_params(self) -> Tuple[A.Param, ...]:
        self.expect("(")
        params = []
        if not self.at(")"):
            while True:
                t = self.expect_ident("parameter name")
                self.expect(":")
                params.append(A.Param(t.text, self.parse_type(), self.pos(t)))
                if not self.at(","):
                    break
                self.advance()
        self.expect(")")
        return tuple(params)

    # -- statements
    def parse_block(self) -> Tuple[A.Stmt, ...]:
        self.expect("{")
        stmts = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                self.error("expected '}'")
            stmts.append(self.parse_stmt())
        self.expect("}")
        return tuple(stmts)

    def parse_stmt(self) -> A.Stmt:
        t = self.tok
        p = self.pos(t)
        if self.at("var"):
            self.advance()
            name = self.expect_ident("variable name").text
            self.expect(":")
            vtype = self.parse_type()
            self.expect(":=")
            init = self.parse_expr()
            self.expect(";")
            return A.VarDecl(name, vtype, init, p)
        if self.at("if"):
            self.advance()
            self.expect("(")
            cond = self.parse_expr()
            self.expect(")")
            then = self.parse_block()
            orelse: Tuple[A.Stmt, ...] = ()
            if self.at("else"):
                self.advance()
                if self.at("if"):
                    orelse = (self.parse_stmt(),)
                else:
                    orelse = self.parse_block()
            return A.If(cond, then, orelse, p)
        if self.at("while"):
            self.advance()
            self.expect("(")
            cond = self.parse_expr()
            self.expect(")")
            return A.While(cond, self.parse_block(), p)
        if self.at("for"):
            self.advance()
            var = self.expect_ident("loop variable").text
            self.expect("in")
            it = self.parse_expr()
            return A.For(var, it, self.parse_block(), p)
        if self.at("return"):
            self.advance()
            value = None
            if not self.at(";"):
                value = self.parse_expr()
            self.expect(";")
            return A.Return(value, p)
        if self.at("fail"):
            self.advance()
            self.expect(";")
            return A.Fail(p)
        if t.kind == "ident":
            name = self.advance().text
            if self.at("["):
                self.advance()
                idx = self.parse_expr()
                self.expect("]")
                self.expect(":=")
                value = self.parse_expr()
                self.expect(";")
                return A.IndexAssign(name, idx, value, p)
            self.expect(":=")
            value = self.parse_expr()
            self.expect(";")
            return A.Assign(name, value, p)
        self.error("expected statement")

    # -- expressions
    def parse_expr(self, level: int = 0) -> A.Expr:
        if level == len(_PRECEDENCE):
            return self.parse_unary()
        left = self.parse_expr(level + 1)
        ops = _PRECEDENCE[level]
        while self.tok.kind == "op" and self.tok.text in ops:
            t = self.advance()
            right = self.parse_expr(level + 1)
            left = A.Binary(t.text, left, right, self.pos(t))
        return left

    def parse_unary(self) -> A.Expr:
        t = self.tok
        if self.at("-") or self.at("!"):
            self.advance()
            operand = self.parse_unary()
            if t.text == "-" and isinstance(operand, A.IntLit) and operand.value >= 0:
                return A.IntLit(-operand.value, self.pos(t))
            if (
                t.text == "-"
                and isinstance(operand, A.RealLit)
                and not math.isnan(operand.value)
                and math.copysign(1.0, operand.value) > 0
            ):
                return A.RealLit(-operand.value, self.pos(t))
            return A.Unary(t.text, operand, self.pos(t))
        return self.parse_postfix()

    def parse_postfix(self) -> A.Expr:
        e = self.parse_primary()
        while self.at("["):
            t = self.advance()
            idx = self.parse_expr()
            self.expect("]")
            e = A.Index(e, idx, self.pos(t))
        return e

    def parse_primary(self) -> A.Expr:
        t = self.tok
        p = self.pos(t)
        if t.kind == "int":
            self.advance()
            return A.IntLit(int(t.text), p)
        if t.kind == "real":
            self.advance()
            return A.RealLit(float(t.text), p)
        if self.at("nan"):
            self.advance()
            return A.RealLit(math.nan, p)
        if self.at("true") or self.at("false"):
            self.advance()
            return A.BoolLit(t.text == "true", p)
        if self.at("new"):
            self.advance()
            et = self.tok
            if not (et.kind == "kw" and et.text in ("int", "real")):
                self.error("expected array element type")
            self.advance()
            self.expect("[")
            size = self.parse_expr()
            self.expect("]")
            return A.NewArray(et.text, size, p)
        if self.at("("):
            self.advance()
            e = self.parse_expr()
            self.expect(")")
            return e
        if t.kind == "ident":
            self.advance()
            if self.at("(") and t.text in A.BUILTINS:
                self.advance()
                args = []
                if not self.at(")"):
                    while True:
                        args.append(self.parse_expr())
                        if not self.at(","):
                            break
                        self.advance()
                self.expect(")")
                return A.Call(t.text, tuple(args), p)
            return A.Name(t.text, p)
        self.error("expected expression")


def parse_source(source: str) -> A.Unit:
    """Parse without type checking."""
    return Parser(tokenize(source)).parse_unit()
