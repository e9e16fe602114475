"""Candidate-assertion syntax trees.

Nodes are hashable and compare structurally. Literals keep their canonical
text so that ``nan`` literals compare equal to each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Tuple, Union

from ..minilang.points import ProgramPoint
from ..minilang.printer import format_real

AGGREGATES = ("sum", "sumabs", "max", "maxabs", "min")
CMP_OPS = ("<", "<=", ">", ">=", "==", "!=")
ARITH_OPS = ("+", "-", "*", "/", "%")


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Old:
    name: str


@dataclass(frozen=True)
class Result:
    pass


@dataclass(frozen=True)
class Lit:
    type: str  # int | real | bool
    text: str

    @property
    def value(self):
        if self.type == "int":
            return int(self.text)
        if self.type == "real":
            return float(self.text)
        return self.text == "true"


def int_lit(v: int) -> Lit:
    return Lit("int", str(int(v)))


def real_lit(v: float) -> Lit:
    return Lit("real", format_real(float(v)))


def bool_lit(v: bool) -> Lit:
    return Lit("bool", "true" if v else "false")


@dataclass(frozen=True)
class IndexVar:
    name: str


@dataclass(frozen=True)
class Elem:
    array: Union[Var, Old]
    index: str


@dataclass(frozen=True)
class Len:
    array: Union[Var, Old]


@dataclass(frozen=True)
class Agg:
    fn: str
    array: Union[Var, Old]


@dataclass(frozen=True)
class Arith:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class Cmp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Not:
    operand: "Expr"


@dataclass(frozen=True)
class And:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Or:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Implies:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class IsNaN:
    operand: "Expr"


@dataclass(frozen=True)
class Quant:
    kind: str  # forall | exists
    var: str
    array: Union[Var, Old]
    body: "Expr"


Expr = Union[Var, Old, Result, Lit, IndexVar, Elem, Len, Agg, Arith, Neg, Cmp, Not, And, Or, Implies, IsNaN, Quant]


@dataclass(frozen=True)
class Assertion:
    point: ProgramPoint
    body: Expr

    @property
    def text(self) -> str:
        return to_text(self.body)

    @property
    def key(self) -> str:
        return f"{self.point.id}: {self.text}"

    def size(self) -> int:
        return size(self.body)


# --- traversal -------------------------------------------------------------


def children(e: Expr) -> Tuple[Expr, ...]:
    if isinstance(e, (Arith, Cmp, And, Or, Implies)):
        return (e.left, e.right)
    if isinstance(e, (Neg, Not, IsNaN)):
        return (e.operand,)
    if isinstance(e, (Len, Agg, Elem)):
        return (e.array,)
    if isinstance(e, Quant):
        return (e.array, e.body)
    return ()


def walk(e: Expr) -> Iterator[Expr]:
    yield e
    for c in children(e):
        yield from walk(c)


def size(e: Expr) -> int:
    """Node count; ``old(x)``, ``len(a)`` and aggregates count two nodes."""
    if isinstance(e, Old):
        return 2
    if isinstance(e, (Len, Agg)):
        return 1 + size(e.array)
    if isinstance(e, Elem):
        return 1
    if isinstance(e, Quant):
        return 1 + size(e.body)
    return 1 + sum(size(c) for c in children(e))


def free_names(e: Expr) -> set:
    """Identifiers the expression reads: ``x``, ``old:x`` and ``result``."""
    out = set()
    for n in walk(e):
        if isinstance(n, Var):
            out.add(n.name)
        elif isinstance(n, Old):
            out.add("old:" + n.name)
        elif isinstance(n, Result):
            out.add("result")
    return out


def has_literal_only(e: Expr) -> bool:
    return not any(isinstance(n, (Var, Old, Result, IndexVar, Elem, Quant)) for n in walk(e))


# --- printing --------------------------------------------------------------

_PREC = {Implies: 1, Or: 2, And: 3, Cmp: 5, Not: 8, Neg: 8}
_ARITH_PREC = {"+": 6, "-": 6, "*": 7, "/": 7, "%": 7}
_ATOM = 10


def _prec(e: Expr) -> int:
    if isinstance(e, Quant):
        return 0
    if isinstance(e, Arith):
        return _ARITH_PREC[e.op]
    if isinstance(e, Lit) and e.text.startswith("-"):
        return 8
    return _PREC.get(type(e), _ATOM)


def _wrap(e: Expr, min_prec: int) -> str:
    s = to_text(e)
    return f"({s})" if _prec(e) < min_prec else s


def _ref(a) -> str:
    return a.name if isinstance(a, Var) else f"old({a.name})"


def to_text(e: Expr) -> str:
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Old):
        return f"old({e.name})"
    if isinstance(e, Result):
        return "result"
    if isinstance(e, Lit):
        return e.text
    if isinstance(e, IndexVar):
        return e.name
    if isinstance(e, Elem):
        return f"{_ref(e.array)}[{e.index}]"
    if isinstance(e, Len):
        return f"len({_ref(e.array)})"
    if isinstance(e, Agg):
        return f"{e.fn}({_ref(e.array)})"
    if isinstance(e, IsNaN):
        return f"isnan({to_text(e.operand)})"
    if isinstance(e, Neg):
        inner = _wrap(e.operand, 9)
        return f"-({inner})" if inner.startswith("-") else f"-{inner}"
    if isinstance(e, Not):
        inner = _wrap(e.operand, 9)
        return f"!({inner})" if inner.startswith("!") else f"!{inner}"
    if isinstance(e, Arith):
        p = _ARITH_PREC[e.op]
        return f"{_wrap(e.left, p)} {e.op} {_wrap(e.right, p + 1)}"
    if isinstance(e, Cmp):
        return f"{_wrap(e.left, 6)} {e.op} {_wrap(e.right, 6)}"
    if isinstance(e, And):
        return f"{_wrap(e.left, 3)} && {_wrap(e.right, 4)}"
    if isinstance(e, Or):
        return f"{_wrap(e.left, 2)} || {_wrap(e.right, 3)}"
    if isinstance(e, Implies):
        # right associative
        return f"{_wrap(e.left, 2)} ==> {_wrap(e.right, 1)}"
    if isinstance(e, Quant):
        return f"{e.kind} {e.var} in {_ref(e.array)}: {to_text(e.body)}"
    raise TypeError(f"not an assertion expression: {e!r}")


def is_nan_lit(e: Expr) -> bool:
    return isinstance(e, Lit) and e.type == "real" and math.isnan(e.value)
