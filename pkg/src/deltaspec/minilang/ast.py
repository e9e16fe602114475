"""Immutable AST for DL units.

Positions are carried for diagnostics only and excluded from equality.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from typing import Optional, Tuple, Union

Pos = Tuple[int, int]

SCALAR_TYPES = ("int", "real", "bool")
ARRAY_TYPES = ("int[]", "real[]")
ALL_TYPES = SCALAR_TYPES + ARRAY_TYPES


def elem_type(t: str) -> str:
    return t[:-2]


def is_array(t: str) -> bool:
    return t.endswith("[]")


def _pos():
    return field(default=(0, 0), compare=False, repr=False)


# --- expressions -----------------------------------------------------------


@dataclass(frozen=True)
class IntLit:
    value: int
    pos: Pos = _pos()


@dataclass(frozen=True)
class RealLit:
    value: float
    pos: Pos = _pos()

    def __eq__(self, other):
        # nan literals compare equal structurally
        if not isinstance(other, RealLit):
            return NotImplemented
        a, b = self.value, other.value
        return repr(a) == repr(b)

    def __hash__(self):
        return hash(("RealLit", repr(self.value)))


@dataclass(frozen=True)
class BoolLit:
    value: bool
    pos: Pos = _pos()


@dataclass(frozen=True)
class Name:
    id: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class Index:
    array: "Expr"
    index: "Expr"
    pos: Pos = _pos()


@dataclass(frozen=True)
class Call:
    fn: str  # len, abs, max, min, toReal
    args: Tuple["Expr", ...]
    pos: Pos = _pos()


@dataclass(frozen=True)
class Unary:
    op: str  # '-' or '!'
    operand: "Expr"
    pos: Pos = _pos()


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"
    pos: Pos = _pos()


@dataclass(frozen=True)
class NewArray:
    elem: str
    size: "Expr"
    pos: Pos = _pos()


Expr = Union[IntLit, RealLit, BoolLit, Name, Index, Call, Unary, Binary, NewArray]

ARITH_OPS = ("+", "-", "*", "/", "%")
REL_OPS = ("<", "<=", ">", ">=", "==", "!=")
LOGIC_OPS = ("&&", "||")
BUILTINS = ("len", "abs", "max", "min", "toReal")


# --- statements ------------------------------------------------------------


@dataclass(frozen=True)
class VarDecl:
    name: str
    type: str
    init: Expr
    pos: Pos = _pos()


@dataclass(frozen=True)
class Assign:
    name: str
    value: Expr
    pos: Pos = _pos()


@dataclass(frozen=True)
class IndexAssign:
    name: str
    index: Expr
    value: Expr
    pos: Pos = _pos()


@dataclass(frozen=True)
class If:
    cond: Expr
    then: Tuple["Stmt", ...]
    orelse: Tuple["Stmt", ...] = ()
    pos: Pos = _pos()


@dataclass(frozen=True)
class While:
    cond: Expr
    body: Tuple["Stmt", ...]
    pos: Pos = _pos()


@dataclass(frozen=True)
class For:
    var: str
    iterable: Expr
    body: Tuple["Stmt", ...]
    pos: Pos = _pos()


@dataclass(frozen=True)
class Return:
    value: Optional[Expr] = None
    pos: Pos = _pos()


@dataclass(frozen=True)
class Fail:
    pos: Pos = _pos()


Stmt = Union[VarDecl, Assign, IndexAssign, If, While, For, Return, Fail]


# --- declarations ----------------------------------------------------------


@dataclass(frozen=True)
class Field:
    name: str
    type: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class Param:
    name: str
    type: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class Method:
    name: str
    params: Tuple[Param, ...]
    ret: str  # 'void' for procedures
    body: Tuple[Stmt, ...]
    pos: Pos = _pos()

    @property
    def signature(self) -> tuple:
        return (self.name, tuple(p.type for p in self.params), self.ret)


CTOR_NAME = "init"


@dataclass(frozen=True)
class Unit:
    name: str
    fields: Tuple[Field, ...]
    ctor: Method
    methods: Tuple[Method, ...]
    ctor_implicit: bool = False
    pos: Pos = _pos()

    def field_types(self) -> dict:
        return {f.name: f.type for f in self.fields}

    def method(self, name: str) -> Method:
        if name == CTOR_NAME:
            return self.ctor
        for m in self.methods:
            if m.name == name:
                return m
        raise KeyError(name)

    def callables(self) -> Tuple[Method, ...]:
        """Constructor first, then methods in declaration order."""
        return (self.ctor,) + self.methods


def default_value(t: str):
    if t == "int":
        return 0
    if t == "real":
        return 0.0
    if t == "bool":
        return False
    return ()


_NODE_TYPES = (IntLit, RealLit, BoolLit, Name, Index, Call, Unary, Binary, NewArray,
               VarDecl, Assign, IndexAssign, If, While, For, Return, Fail)


def child_slots(node):
    """(field name, value) pairs of a node's sub-nodes, in source order.

    Tuple-valued slots (bodies, call args) are yielded as tuples.
    """
    for f in fields(node):
        if f.name == "pos":
            continue
        v = getattr(node, f.name)
        if isinstance(v, _NODE_TYPES) or (isinstance(v, tuple) and v and isinstance(v[0], _NODE_TYPES)):
            yield f.name, v


def iter_nodes(node):
    """Preorder walk over expression and statement nodes."""
    if isinstance(node, tuple):
        for x in node:
            yield from iter_nodes(x)
        return
    yield node
    for _, v in child_slots(node):
        yield from iter_nodes(v)
