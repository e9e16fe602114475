"""Candidate grammar for one program point of a commit.

The grammar is built once from both versions so that pre and post are
checked against the same candidate language. It is a finite, layered
description:

* terms: scalar identifiers, ``old(f)`` for fields the callable writes,
  ``len``/aggregates of array identifiers, and ``x + y``, ``x - y``,
  ``x + 1``, ``x - 1`` over scalar identifiers;
* atoms: comparisons between terms or against literals, ``isnan``, boolean
  identifiers, and single-quantifier element predicates;
* guards: comparisons against literals harvested from the code, length
  tests and boolean identifiers;
* shapes: ``atom``, ``guard ==> atom`` and ``guard || atom``.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

from ..minilang import ast as A
from ..minilang.points import INVARIANT, ProgramPoint, diff_common_points
from . import ast as S
from .parser import scope_for

DEFAULT_MAX_NODES = 13


class UnknownPoint(KeyError):
    pass


@dataclass
class Grammar:
    point: ProgramPoint
    scope: Dict[str, str]
    int_lits: Tuple[int, ...]
    real_lits: Tuple[float, ...]
    guard_specs: Tuple[Tuple[str, str, str], ...]  # (key, op, literal text)
    max_nodes: int = DEFAULT_MAX_NODES
    max_depth: int = 1
    terminals: List[str] = field(default_factory=list)

    def scalar_refs(self, t: str) -> List[S.Expr]:
        out = []
        for key in sorted(self.scope):
            if self.scope[key] == t:
                out.append(_ref(key))
        return out

    def array_refs(self) -> List[Tuple[S.Expr, str]]:
        return [(_ref(k), self.scope[k]) for k in sorted(self.scope) if self.scope[k].endswith("[]")]

    def literals(self, t: str) -> List[S.Lit]:
        if t == "int":
            return [S.int_lit(v) for v in self.int_lits]
        if t == "real":
            return [S.real_lit(v) for v in self.real_lits]
        return []

    def fingerprint(self) -> str:
        text = repr((self.point.id, sorted(self.scope.items()), self.int_lits,
                     [S.real_lit(v).text for v in self.real_lits], self.guard_specs, self.max_nodes))
        return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


def _ref(key: str) -> S.Expr:
    if key == "result":
        return S.Result()
    if key.startswith("old:"):
        return S.Old(key[4:])
    return S.Var(key)


def written_fields(unit: A.Unit, method: A.Method) -> set:
    fields = set(unit.field_types())
    out = set()
    for n in A.iter_nodes(method.body):
        if isinstance(n, (A.Assign, A.IndexAssign)) and n.name in fields:
            out.add(n.name)
    return out


def harvest_literals(unit: A.Unit) -> Tuple[set, set]:
    ints, reals = set(), set()
    for m in unit.callables():
        for n in A.iter_nodes(m.body):
            if isinstance(n, A.IntLit):
                ints.add(n.value)
            elif isinstance(n, A.RealLit):
                reals.add(n.value)
    return ints, reals


def _lit_text(e) -> Tuple[str, str]:
    if isinstance(e, A.IntLit):
        return "int", S.int_lit(e.value).text
    if isinstance(e, A.RealLit):
        return "real", S.real_lit(e.value).text
    if isinstance(e, A.BoolLit):
        return "bool", S.bool_lit(e.value).text
    return "", ""


def harvest_conditions(unit: A.Unit) -> set:
    """(identifier, literal type, literal text) from ``x op lit`` comparisons in code."""
    out = set()
    for m in unit.callables():
        for n in A.iter_nodes(m.body):
            if not (isinstance(n, A.Binary) and n.op in A.REL_OPS):
                continue
            for side, other in ((n.left, n.right), (n.right, n.left)):
                if isinstance(side, A.Name):
                    t, text = _lit_text(other)
                    if t:
                        out.add((side.id, t, text))
    return out


def instantiate_grammar(pre: A.Unit, post: A.Unit, point: ProgramPoint,
                        max_nodes: int = DEFAULT_MAX_NODES) -> Grammar:
    common = diff_common_points(pre, post)
    if point not in common.shared:
        raise UnknownPoint(point.id)
    field_types = dict(pre.field_types())
    field_types.update(post.field_types())
    if point.kind == INVARIANT:
        scope = scope_for(point, field_types, {}, "void")
    else:
        m_post = post.method(point.method_name)
        m_pre = pre.method(point.method_name)
        if point.method_name == A.CTOR_NAME:
            olds = set()
        else:
            olds = written_fields(pre, m_pre) | written_fields(post, m_post)
        params = {p.name: p.type for p in m_post.params}
        scope = scope_for(point, field_types, params, m_post.ret, old_fields=sorted(olds))

    ints, reals = {-1, 0, 1}, {0.0}
    conds = set()
    for u in (pre, post):
        i, r = harvest_literals(u)
        ints |= i
        reals |= r
        conds |= harvest_conditions(u)
    real_sorted = sorted((v for v in reals if not math.isnan(v)))
    if any(math.isnan(v) for v in reals):
        real_sorted.append(math.nan)

    guards = set()
    for name, t, text in conds:
        for key in (name, "old:" + name):
            if scope.get(key) == t and t != "bool":
                for op in S.CMP_OPS:
                    if text == "nan" and op not in ("==", "!="):
                        continue
                    guards.add((key, op, text))
    terminals = sorted(scope)
    return Grammar(point, scope, tuple(sorted(ints)), tuple(real_sorted),
                   tuple(sorted(guards)), max_nodes, 1, terminals)


# --- derivation ----------------------------------------------------------


def scalar_terms(g: Grammar) -> Dict[str, List[S.Expr]]:
    """Base terms by type, including lengths and aggregates."""
    terms: Dict[str, List[S.Expr]] = {"int": [], "real": [], "bool": []}
    for t in terms:
        terms[t].extend(g.scalar_refs(t))
    for ref, at in g.array_refs():
        terms["int"].append(S.Len(ref))
        et = at[:-2]
        if et in ("int", "real"):
            for fn in S.AGGREGATES:
                terms[et].append(S.Agg(fn, ref))
    return terms


def arith_terms(g: Grammar) -> Dict[str, List[S.Expr]]:
    out: Dict[str, List[S.Expr]] = {"int": [], "real": []}
    for t in ("int", "real"):
        refs = g.scalar_refs(t)
        for i, x in enumerate(refs):
            for y in refs[i + 1:]:
                out[t].append(S.Arith("+", x, y))
            for y in refs:
                if y != x:
                    out[t].append(S.Arith("-", x, y))
            if t == "int":
                out[t].append(S.Arith("+", x, S.int_lit(1)))
                out[t].append(S.Arith("-", x, S.int_lit(1)))
    return out


def _cmps(left: S.Expr, right: S.Expr, nan_only_eq: bool = False):
    ops = ("==", "!=") if nan_only_eq else ("<", "<=", ">", ">=", "==", "!=")
    for op in ops:
        yield S.Cmp(op, left, right)


def atoms(g: Grammar) -> List[S.Expr]:
    terms = scalar_terms(g)
    ariths = arith_terms(g)
    out: List[S.Expr] = []
    for t in ("int", "real"):
        base = terms[t]
        lits = g.literals(t)
        for i, x in enumerate(base):
            for y in base[i + 1:]:
                out.extend(_cmps(x, y))
            for lit in lits:
                out.extend(_cmps(x, lit, S.is_nan_lit(lit)))
            if t == "real":
                out.append(S.IsNaN(x))
        for a in ariths[t]:
            for x in g.scalar_refs(t):
                if x not in (a.left, a.right):
                    out.extend(_cmps(x, a))
    bools = terms["bool"]
    for i, b in enumerate(bools):
        out.append(b)
        out.append(S.Not(b))
        for c in bools[i + 1:]:
            out.append(S.Cmp("==", b, c))
            out.append(S.Cmp("!=", b, c))
    for ref, at in g.array_refs():
        et = at[:-2]
        if et == "bool":
            continue
        elem = S.Elem(ref, "i")
        rhs = list(g.literals(et)) + [x for x in g.scalar_refs(et)]
        for r in rhs:
            for kind in ("forall", "exists"):
                for c in _cmps(elem, r, S.is_nan_lit(r)):
                    out.append(S.Quant(kind, "i", ref, c))
            if et == "real" and r is rhs[0]:
                for kind in ("forall", "exists"):
                    out.append(S.Quant(kind, "i", ref, S.IsNaN(elem)))
    return out


def guards(g: Grammar) -> List[S.Expr]:
    out: List[S.Expr] = []
    for key, op, text in g.guard_specs:
        t = g.scope[key]
        lit = S.Lit(t, text)
        out.append(S.Cmp(op, _ref(key), lit))
    for ref, _ in g.array_refs():
        for op in ("==", "!=", ">"):
            out.append(S.Cmp(op, S.Len(ref), S.int_lit(0)))
    for b in g.scalar_refs("bool"):
        out.append(b)
        out.append(S.Not(b))
    return out
