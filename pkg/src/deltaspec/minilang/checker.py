"""Static checks for DL units: name resolution, typing, return paths."""

from __future__ import annotations

from typing import Dict, List, Optional

from . import ast as A
from .lexer import DiagnosticError

INT_MIN = -(2**63)
INT_MAX = 2**63 - 1


class DLTypeError(DiagnosticError):
    pass


class DuplicateName(DiagnosticError):
    pass


class _Scope:
    def __init__(self, parent: Optional["_Scope"] = None):
        self.parent = parent
        self.vars: Dict[str, str] = {}

    def lookup(self, name: str) -> Optional[str]:
        s = self
        while s is not None:
            if name in s.vars:
                return s.vars[name]
            s = s.parent
        return None


class Checker:
    def __init__(self, unit: A.Unit):
        self.unit = unit
        self.fields = {}
        self.method_ret = "void"
        self.params: Dict[str, str] = {}

    def fail(self, node, msg: str, cls=DLTypeError):
        line, col = getattr(node, "pos", (0, 0))
        raise cls(msg, line, col)

    def check(self) -> None:
        u = self.unit
        for f in u.fields:
            if f.name in self.fields:
                self.fail(f, f"duplicate field {f.name!r}", DuplicateName)
            self.fields[f.name] = f.type
        seen = set()
        for m in u.methods:
            if m.name in seen or m.name == A.CTOR_NAME:
                self.fail(m, f"duplicate method {m.name!r}", DuplicateName)
            seen.add(m.name)
        for m in u.callables():
            self.check_method(m)

    def check_method(self, m: A.Method) -> None:
        self.params = {}
        for p in m.params:
            if p.name in self.params:
                self.fail(p, f"duplicate parameter {p.name!r}", DuplicateName)
            if p.name in self.fields:
                self.fail(p, f"parameter {p.name!r} shadows a field", DuplicateName)
            self.params[p.name] = p.type
        self.method_ret = m.ret
        scope = _Scope()
        scope.vars.update(self.params)
        self.block(m.body, scope)
        if m.ret != "void" and not self.terminates(m.body):
            self.fail(m, f"method {m.name!r} may finish without returning a value")

    # -- statements
    def block(self, body, parent: _Scope) -> None:
        scope = _Scope(parent)
        for s in body:
            self.stmt(s, scope)

    def declare(self, node, name: str, t: str, scope: _Scope) -> None:
        if name in self.fields or scope.lookup(name) is not None:
            self.fail(node, f"duplicate name {name!r}", DuplicateName)
        scope.vars[name] = t

    def var_type(self, node, name: str, scope: _Scope) -> str:
        t = scope.lookup(name)
        if t is None:
            t = self.fields.get(name)
        if t is None:
            self.fail(node, f"unknown identifier {name!r}")
        return t

    def assignable(self, node, name: str, scope: _Scope) -> str:
        if name in self.params:
            self.fail(node, f"cannot assign to parameter {name!r}")
        return self.var_type(node, name, scope)

    def stmt(self, s: A.Stmt, scope: _Scope) -> None:
        if isinstance(s, A.VarDecl):
            if s.type not in A.ALL_TYPES:
                self.fail(s, f"bad type {s.type!r}")
            self.expect(s.init, s.type, scope)
            self.declare(s, s.name, s.type, scope)
        elif isinstance(s, A.Assign):
            t = self.assignable(s, s.name, scope)
            self.expect(s.value, t, scope)
        elif isinstance(s, A.IndexAssign):
            t = self.assignable(s, s.name, scope)
            if not A.is_array(t):
                self.fail(s, f"{s.name!r} is not an array")
            self.expect(s.index, "int", scope)
            self.expect(s.value, A.elem_type(t), scope)
        elif isinstance(s, A.If):
            self.expect(s.cond, "bool", scope)
            self.block(s.then, scope)
            self.block(s.orelse, scope)
        elif isinstance(s, A.While):
            self.expect(s.cond, "bool", scope)
            self.block(s.body, scope)
        elif isinstance(s, A.For):
            t = self.expr(s.iterable, scope)
            if not A.is_array(t):
                self.fail(s, "for-loop needs an array")
            inner = _Scope(scope)
            self.declare(s, s.var, A.elem_type(t), inner)
            self.block(s.body, inner)
        elif isinstance(s, A.Return):
            if self.method_ret == "void":
                if s.value is not None:
                    self.fail(s, "return with a value in a void method")
            else:
                if s.value is None:
                    self.fail(s, "missing return value")
                self.expect(s.value, self.method_ret, scope)
        elif isinstance(s, A.Fail):
            pass
        else:
            self.fail(s, f"unknown statement {type(s).__name__}")

    def terminates(self, body) -> bool:
        for s in body:
            if isinstance(s, (A.Return, A.Fail)):
                return True
            if isinstance(s, A.If) and s.orelse:
                if self.terminates(s.then) and self.terminates(s.orelse):
                    return True
        return False

    # -- expressions
    def expect(self, e: A.Expr, t: str, scope: _Scope) -> None:
        got = self.expr(e, scope)
        if got != t:
            self.fail(e, f"expected {t}, found {got}")

    def expr(self, e: A.Expr, scope: _Scope) -> str:
        if isinstance(e, A.IntLit):
            if not INT_MIN <= e.value <= INT_MAX:
                self.fail(e, "integer literal out of range")
            return "int"
        if isinstance(e, A.RealLit):
            return "real"
        if isinstance(e, A.BoolLit):
            return "bool"
        if isinstance(e, A.Name):
            return self.var_type(e, e.id, scope)
        if isinstance(e, A.Index):
            t = self.expr(e.array, scope)
            if not A.is_array(t):
                self.fail(e, "indexing a non-array")
            self.expect(e.index, "int", scope)
            return A.elem_type(t)
        if isinstance(e, A.NewArray):
            self.expect(e.size, "int", scope)
            return e.elem + "[]"
        if isinstance(e, A.Call):
            return self.call(e, scope)
        if isinstance(e, A.Unary):
            t = self.expr(e.operand, scope)
            if e.op == "!":
                if t != "bool":
                    self.fail(e, "'!' needs bool")
                return "bool"
            if t not in ("int", "real"):
                self.fail(e, "unary '-' needs a number")
            return t
        if isinstance(e, A.Binary):
            lt = self.expr(e.left, scope)
            rt = self.expr(e.right, scope)
            if e.op in A.LOGIC_OPS:
                if lt != "bool" or rt != "bool":
                    self.fail(e, f"{e.op!r} needs bool operands")
                return "bool"
            if lt != rt:
                self.fail(e, f"operand types differ: {lt} {e.op} {rt}")
            if e.op in ("==", "!="):
                if A.is_array(lt):
                    self.fail(e, "arrays cannot be compared")
                return "bool"
            if lt not in ("int", "real"):
                self.fail(e, f"{e.op!r} needs numeric operands")
            return "bool" if e.op in A.REL_OPS else lt
        self.fail(e, f"unknown expression {type(e).__name__}")

    def call(self, e: A.Call, scope: _Scope) -> str:
        ts = [self.expr(a, scope) for a in e.args]
        arity = {"len": 1, "abs": 1, "toReal": 1, "max": 2, "min": 2}[e.fn]
        if len(ts) != arity:
            self.fail(e, f"{e.fn} takes {arity} argument(s)")
        if e.fn == "len":
            if not A.is_array(ts[0]):
                self.fail(e, "len needs an array")
            return "int"
        if e.fn == "toReal":
            if ts[0] != "int":
                self.fail(e, "toReal needs an int")
            return "real"
        if any(t not in ("int", "real") for t in ts) or len(set(ts)) != 1:
            self.fail(e, f"{e.fn} needs numeric operands of one type")
        return ts[0]


def check_unit(unit: A.Unit) -> A.Unit:
    Checker(unit).check()
    return unit


def collect_errors(unit: A.Unit) -> List[DiagnosticError]:
    try:
        check_unit(unit)
    except DiagnosticError as exc:
        return [exc]
    return []
