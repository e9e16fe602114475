"""Canonical form for assertions.

Rewrites applied bottom-up:

* ``a > b`` and ``a >= b`` become ``b < a`` and ``b <= a``;
* operands of ``==``, ``!=``, ``+`` and ``*`` are ordered (non-literals first,
  then by printed text);
* ``!!x`` becomes ``x``; ``!(a == b)`` and ``!(a != b)`` swap operators;
* literal-only subtrees are folded when evaluation succeeds;
* the quantified variable is renamed to ``i`` (or the first free letter).

``&&``, ``||`` and ``==>`` keep their operand order because evaluation
short-circuits left to right and reordering can change which side errors.
"""

from __future__ import annotations

from . import ast as S
from .evaluate import fold_constant

_FLIP = {">": "<", ">=": "<="}
_NEG_EQ = {"==": "!=", "!=": "=="}
_BOUND_NAMES = ("i", "j", "k", "idx", "ix")


def _order_key(e: S.Expr):
    return (isinstance(e, S.Lit), S.to_text(e))


def _sorted_pair(left, right):
    if _order_key(right) < _order_key(left):
        return right, left
    return left, right


def _fold(e: S.Expr) -> S.Expr:
    if not isinstance(e, S.Lit) and S.has_literal_only(e):
        lit = fold_constant(e)
        if lit is not None:
            return lit
    return e


def _norm(e: S.Expr) -> S.Expr:
    if isinstance(e, S.Cmp):
        left, right, op = _norm(e.left), _norm(e.right), e.op
        if op in _FLIP:
            left, right, op = right, left, _FLIP[op]
        if op in ("==", "!="):
            left, right = _sorted_pair(left, right)
        return _fold(S.Cmp(op, left, right))
    if isinstance(e, S.Arith):
        left, right = _norm(e.left), _norm(e.right)
        if e.op in ("+", "*"):
            left, right = _sorted_pair(left, right)
        return _fold(S.Arith(e.op, left, right))
    if isinstance(e, S.Not):
        inner = _norm(e.operand)
        if isinstance(inner, S.Not):
            return inner.operand
        if isinstance(inner, S.Cmp) and inner.op in _NEG_EQ:
            return S.Cmp(_NEG_EQ[inner.op], inner.left, inner.right)
        return _fold(S.Not(inner))
    if isinstance(e, S.Neg):
        return _fold(S.Neg(_norm(e.operand)))
    if isinstance(e, (S.And, S.Or, S.Implies)):
        return _fold(type(e)(_norm(e.left), _norm(e.right)))
    if isinstance(e, S.IsNaN):
        return _fold(S.IsNaN(_norm(e.operand)))
    if isinstance(e, S.Quant):
        taken = {n.split(":", 1)[-1] for n in S.free_names(e)}
        name = next((c for c in _BOUND_NAMES if c not in taken), e.var)
        body = _norm(_rename(e.body, e.var, name))
        return S.Quant(e.kind, name, e.array, body)
    return e


def _rename(e: S.Expr, old: str, new: str) -> S.Expr:
    if old == new:
        return e
    if isinstance(e, S.IndexVar) and e.name == old:
        return S.IndexVar(new)
    if isinstance(e, S.Elem) and e.index == old:
        return S.Elem(e.array, new)
    if isinstance(e, (S.Arith, S.Cmp)):
        return type(e)(e.op, _rename(e.left, old, new), _rename(e.right, old, new))
    if isinstance(e, (S.And, S.Or, S.Implies)):
        return type(e)(_rename(e.left, old, new), _rename(e.right, old, new))
    if isinstance(e, (S.Not, S.Neg, S.IsNaN)):
        return type(e)(_rename(e.operand, old, new))
    return e


def normalize_expr(e: S.Expr) -> S.Expr:
    return _norm(e)


def normalize(a: S.Assertion) -> S.Assertion:
    return S.Assertion(a.point, _norm(a.body))


def is_trivial(e: S.Expr) -> bool:
    """A constant assertion: a folded boolean literal."""
    return isinstance(e, S.Lit) and e.type == "bool"
