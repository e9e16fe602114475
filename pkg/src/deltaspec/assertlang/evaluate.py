"""Vectorized three-valued evaluation of assertions over observation tables.

An :class:`ObsTable` holds one column per identifier visible at a point. Each
column stores the values from N observations. Evaluating an assertion yields
per-row outcome codes (FALSE, TRUE, ERROR) plus an error-kind array.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Iterable, Optional, Sequence, Tuple

import numpy as np

from . import ast as S

INT_MIN = np.iinfo(np.int64).min
INT_MAX = np.iinfo(np.int64).max

# outcome codes
FALSE, TRUE, ERROR = 0, 1, 2
OUTCOME_NAMES = {FALSE: "FALSE", TRUE: "TRUE", ERROR: "EVAL_ERROR"}

# error kinds
OK, ARITHMETIC, EMPTY_AGGREGATE, UNBOUND = 0, 1, 2, 3
ERROR_NAMES = {ARITHMETIC: "Arithmetic", EMPTY_AGGREGATE: "EmptyAggregate", UNBOUND: "UnboundIdentifier"}

_DTYPES = {"int": np.int64, "real": np.float64, "bool": np.bool_}


@dataclass
class Column:
    type: str
    values: np.ndarray  # (N,) for scalars, (N, L) padded for arrays
    lens: Optional[np.ndarray] = None

    @property
    def is_array(self) -> bool:
        return self.type.endswith("[]")


class ObsTable:
    """Column store for N observations of one program point."""

    def __init__(self, n: int, columns: Dict[str, Column]):
        self.n = n
        self.columns = columns

    @classmethod
    def from_rows(cls, rows: Sequence[Dict[str, object]], scope: Dict[str, str]) -> "ObsTable":
        """``rows`` map identifier keys (``x``, ``old:x``, ``result``) to values."""
        n = len(rows)
        cols = {}
        for key, t in scope.items():
            if not all(key in r for r in rows):
                continue
            vals = [r[key] for r in rows]
            cols[key] = make_column(t, vals)
        return cls(n, cols)

    @classmethod
    def from_observations(cls, observations: Sequence, scope: Dict[str, str]) -> "ObsTable":
        return cls.from_rows([observation_row(o) for o in observations], scope)

    @classmethod
    def concat(cls, tables: Sequence["ObsTable"]) -> "ObsTable":
        tables = list(tables)
        if not tables:
            return cls(0, {})
        keys = set(tables[0].columns)
        for t in tables[1:]:
            keys &= set(t.columns)
        cols = {}
        for k in sorted(keys):
            parts = [t.columns[k] for t in tables]
            c0 = parts[0]
            if c0.is_array:
                width = max(p.values.shape[1] for p in parts)
                vals = np.concatenate([_pad(p.values, width) for p in parts])
                cols[k] = Column(c0.type, vals, np.concatenate([p.lens for p in parts]))
            else:
                cols[k] = Column(c0.type, np.concatenate([p.values for p in parts]))
        return cls(sum(t.n for t in tables), cols)


def _pad(a: np.ndarray, width: int) -> np.ndarray:
    if a.shape[1] == width:
        return a
    out = np.zeros((a.shape[0], width), dtype=a.dtype)
    out[:, : a.shape[1]] = a
    return out


def observation_row(o) -> Dict[str, object]:
    row: Dict[str, object] = dict(o.post_state)
    row.update(o.params)
    for k, v in o.pre_state.items():
        row["old:" + k] = v
    if o.return_value is not None:
        row["result"] = o.return_value
    return row


def make_column(t: str, vals: Sequence) -> Column:
    if t.endswith("[]"):
        dt = _DTYPES[t[:-2]]
        lens = np.array([len(v) for v in vals], dtype=np.int64)
        width = int(lens.max()) if len(vals) else 0
        data = np.zeros((len(vals), width), dtype=dt)
        for r, v in enumerate(vals):
            if v:
                data[r, : len(v)] = v
        return Column(t, data, lens)
    return Column(t, np.array(vals, dtype=_DTYPES[t]).reshape(len(vals)))


# --- evaluation -------------------------------------------------------------


class _Quant:
    def __init__(self, col: Column):
        self.col = col
        self.width = col.values.shape[1]
        self.mask = np.arange(self.width)[None, :] < col.lens[:, None]


class _Eval:
    def __init__(self, table: ObsTable):
        self.t = table
        self.n = table.n
        self.q: Optional[_Quant] = None
        self.q_err: Optional[np.ndarray] = None

    def shape(self):
        return (self.n, 1) if self.q is not None else (self.n,)

    def unbound(self, kind: str):
        z = np.zeros(self.shape(), dtype=_DTYPES.get(kind, np.int64))
        return z, np.full(self.shape(), UNBOUND, dtype=np.int8)

    def ok(self, v):
        v = np.asarray(v)
        return v, np.zeros(v.shape, dtype=np.int8)

    def ref(self, node) -> Optional[Column]:
        key = node.name if isinstance(node, S.Var) else "old:" + node.name
        return self.t.columns.get(key)

    def scalar_col(self, c: Column):
        v = c.values
        if self.q is not None:
            v = v[:, None]
        return self.ok(v)

    def ev(self, e) -> Tuple[np.ndarray, np.ndarray]:
        if isinstance(e, (S.Var, S.Old)):
            c = self.ref(e)
            if c is None or c.is_array:
                return self.unbound("int")
            return self.scalar_col(c)
        if isinstance(e, S.Result):
            c = self.t.columns.get("result")
            if c is None:
                return self.unbound("int")
            return self.scalar_col(c)
        if isinstance(e, S.Lit):
            v = e.value
            return self.ok(np.full(self.shape(), v, dtype=_DTYPES[e.type]))
        if isinstance(e, S.IndexVar):
            if self.q is None:
                return self.unbound("int")
            return self.ok(np.broadcast_to(np.arange(self.q.width, dtype=np.int64)[None, :], (self.n, self.q.width)))
        if isinstance(e, S.Elem):
            c = self.ref(e.array)
            if self.q is None or c is None or c is not self.q.col:
                return self.unbound("int")
            return self.ok(c.values)
        if isinstance(e, S.Len):
            c = self.ref(e.array)
            if c is None or not c.is_array:
                return self.unbound("int")
            return self.scalar_col(Column("int", c.lens))
        if isinstance(e, S.Agg):
            return self.agg(e)
        if isinstance(e, S.Arith):
            return self.arith(e)
        if isinstance(e, S.Neg):
            v, err = self.ev(e.operand)
            if v.dtype == np.int64:
                bad = v == INT_MIN
                v = np.where(bad, 0, -np.where(bad, 0, v))
                return v, _merge(err, bad, ARITHMETIC)
            return -v, err
        if isinstance(e, S.Cmp):
            return self.cmp(e)
        if isinstance(e, S.Not):
            v, err = self.ev(e.operand)
            return ~v.astype(bool), err
        if isinstance(e, S.And):
            lv, le = self.ev(e.left)
            rv, re_ = self.ev(e.right)
            lv = lv.astype(bool)
            err = np.where(le != 0, le, np.where(lv, re_, 0)).astype(np.int8)
            return lv & rv.astype(bool), err
        if isinstance(e, S.Or):
            lv, le = self.ev(e.left)
            rv, re_ = self.ev(e.right)
            lv = lv.astype(bool)
            err = np.where(le != 0, le, np.where(lv, 0, re_)).astype(np.int8)
            return lv | rv.astype(bool), err
        if isinstance(e, S.Implies):
            lv, le = self.ev(e.left)
            rv, re_ = self.ev(e.right)
            lv = lv.astype(bool)
            err = np.where(le != 0, le, np.where(lv, re_, 0)).astype(np.int8)
            return ~lv | rv.astype(bool), err
        if isinstance(e, S.IsNaN):
            v, err = self.ev(e.operand)
            if v.dtype == np.float64:
                return np.isnan(v), err
            return np.zeros(v.shape, dtype=bool), err
        if isinstance(e, S.Quant):
            return self.quant(e)
        raise TypeError(f"cannot evaluate {e!r}")

    # -- pieces
    def arith(self, e: S.Arith):
        a, ea = self.ev(e.left)
        b, eb = self.ev(e.right)
        err = np.where(ea != 0, ea, eb).astype(np.int8)
        a, b = np.broadcast_arrays(a, b)
        if a.dtype == np.int64 and b.dtype == np.int64:
            r, bad = int_arith(e.op, a, b)
            return r, _merge(err, bad, ARITHMETIC)
        a = a.astype(np.float64)
        b = b.astype(np.float64)
        if e.op == "+":
            r = a + b
        elif e.op == "-":
            r = a - b
        elif e.op == "*":
            r = a * b
        elif e.op == "/":
            r = a / b
        else:
            r = np.fmod(a, b)
        return r, err

    def cmp(self, e: S.Cmp):
        a, ea = self.ev(e.left)
        b, eb = self.ev(e.right)
        err = np.where(ea != 0, ea, eb).astype(np.int8)
        a, b = np.broadcast_arrays(a, b)
        if a.dtype == np.bool_ or b.dtype == np.bool_:
            eq = a.astype(bool) == b.astype(bool)
            lt = gt = np.zeros(eq.shape, dtype=bool)
        elif a.dtype == np.int64 and b.dtype == np.int64:
            eq, lt, gt = a == b, a < b, a > b
        else:
            a = a.astype(np.float64)
            b = b.astype(np.float64)
            eq = (a == b) | (np.isnan(a) & np.isnan(b))
            lt, gt = a < b, a > b
        op = e.op
        if op == "==":
            r = eq
        elif op == "!=":
            r = ~eq
        elif op == "<":
            r = lt
        elif op == "<=":
            r = lt | eq
        elif op == ">":
            r = gt
        else:
            r = gt | eq
        return r, err

    def agg(self, e: S.Agg):
        c = self.ref(e.array)
        if c is None or not c.is_array:
            return self.unbound("int")
        data, lens = c.values, c.lens
        n, width = data.shape
        is_int = data.dtype == np.int64
        err = np.zeros(n, dtype=np.int8)
        if e.fn in ("sumabs", "maxabs"):
            if is_int:
                bad = ((data == INT_MIN) & (np.arange(width)[None, :] < lens[:, None])).any(axis=1)
                err = _merge(err, bad, ARITHMETIC)
                data = np.abs(np.where(data == INT_MIN, 0, data))
            else:
                data = np.abs(data)
        if e.fn in ("sum", "sumabs"):
            acc = np.zeros(n, dtype=data.dtype)
            for j in range(width):
                live = j < lens
                x = np.where(live, data[:, j], 0).astype(data.dtype)
                if is_int:
                    acc, bad = int_arith("+", acc, x)
                    err = _merge(err, bad & live, ARITHMETIC)
                else:
                    acc = acc + x
        else:
            acc = data[:, 0].copy() if width else np.zeros(n, dtype=data.dtype)
            for j in range(1, width):
                live = j < lens
                x = data[:, j]
                if e.fn == "min":
                    pick = x < acc
                else:
                    pick = x > acc
                if not is_int:
                    pick = pick | np.isnan(x)
                    pick &= ~np.isnan(acc)
                acc = np.where(live & pick, x, acc)
            err = _merge(err, lens == 0, EMPTY_AGGREGATE)
        if self.q is not None:
            return acc[:, None], err[:, None]
        return acc, err

    def quant(self, e: S.Quant):
        c = self.ref(e.array)
        if c is None or not c.is_array or self.q is not None:
            return self.unbound("bool")
        outer = self.q
        self.q = _Quant(c)
        try:
            v, err = self.ev(e.body)
        finally:
            q, self.q = self.q, outer
        v = np.broadcast_to(v.astype(bool), (self.n, q.width))
        err = np.broadcast_to(err, (self.n, q.width))
        in_err = np.where(q.mask, err, 0)
        row_err = in_err.max(axis=1, initial=0).astype(np.int8)
        if e.kind == "forall":
            r = (v | ~q.mask).all(axis=1)
        else:
            r = (v & q.mask).any(axis=1)
        return r, row_err


def _merge(err: np.ndarray, bad: np.ndarray, kind: int) -> np.ndarray:
    err, bad = np.broadcast_arrays(err, bad)
    return np.where((err == 0) & bad, kind, err).astype(np.int8)


def int_arith(op: str, a: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Checked 64-bit arithmetic. Returns (result, overflow-or-div-by-zero mask)."""
    with np.errstate(all="ignore"):
        if op == "+":
            r = a + b
            return r, ((a ^ r) & (b ^ r)) < 0
        if op == "-":
            r = a - b
            return r, ((a ^ b) & (a ^ r)) < 0
        if op == "*":
            r = a * b
            safe_a = np.where(a == 0, 1, a)
            bad = (a != 0) & ((r // safe_a != b) | ((a == -1) & (b == INT_MIN)))
            return r, bad
        zero = b == 0
        if op == "/":
            bad = zero | ((a == INT_MIN) & (b == -1))
            sb = np.where(bad, 1, b)
            sa = np.where(bad, 0, a)
            q = sa // sb
            fix = (sa % sb != 0) & ((sa < 0) != (sb < 0))
            return q + fix, bad
        sb = np.where(zero | (b == -1), 1, b)
        r = np.where(b == -1, 0, np.fmod(a, sb))
        return np.where(zero, 0, r), zero


def evaluate(body: S.Expr, table: ObsTable) -> Tuple[np.ndarray, np.ndarray]:
    """Outcome codes (FALSE/TRUE/ERROR) and error kinds, one per row."""
    if table.n == 0:
        return np.zeros(0, dtype=np.int8), np.zeros(0, dtype=np.int8)
    with np.errstate(all="ignore"):
        v, err = _Eval(table).ev(body)
    v = np.broadcast_to(v, (table.n,)).astype(bool)
    err = np.broadcast_to(err, (table.n,)).astype(np.int8)
    codes = np.where(err != 0, ERROR, np.where(v, TRUE, FALSE)).astype(np.int8)
    return codes, err


def support_mask(body: S.Expr, table: ObsTable, codes: np.ndarray) -> np.ndarray:
    """Rows that count as non-vacuous support: TRUE and, for ``g ==> b``, g held."""
    supported = codes == TRUE
    if isinstance(body, S.Implies) and table.n:
        g, _ = evaluate(body.left, table)
        supported &= g == TRUE
    return supported


def eval_value(e: S.Expr, table: ObsTable):
    """Raw value array of an expression (used for constant folding)."""
    with np.errstate(all="ignore"):
        v, err = _Eval(table).ev(e)
    return np.broadcast_to(v, (table.n,)), np.broadcast_to(err, (table.n,))


def eval_assertion(a: S.Assertion, obs, scope: Optional[Dict[str, str]] = None) -> str:
    """Evaluate one assertion on one observation: "TRUE", "FALSE" or "EVAL_ERROR".

    Without an explicit scope, column types are inferred from the values.
    """
    if scope is None:
        scope = infer_scope(observation_row(obs))
    codes, _ = evaluate(a.body, ObsTable.from_observations([obs], scope))
    return OUTCOME_NAMES[int(codes[0])]


def explain_error(a: S.Assertion, obs, scope: Optional[Dict[str, str]] = None) -> Optional[str]:
    if scope is None:
        scope = infer_scope(observation_row(obs))
    _, err = evaluate(a.body, ObsTable.from_observations([obs], scope))
    return ERROR_NAMES.get(int(err[0]))


def value_type(v) -> Optional[str]:
    if type(v) is bool:
        return "bool"
    if type(v) is int:
        return "int"
    if type(v) is float:
        return "real"
    if isinstance(v, tuple):
        inner = {value_type(x) for x in v}
        if len(inner) == 1:
            return inner.pop() + "[]"
        return None
    return None


def infer_scope(row: Dict[str, object]) -> Dict[str, str]:
    out = {}
    for k, v in row.items():
        t = value_type(v)
        if t is not None:
            out[k] = t
    return out


def fold_constant(e: S.Expr) -> Optional[S.Lit]:
    """Evaluate a literal-only expression; None if it errors or is not finite."""
    v, err = eval_value(e, ObsTable(1, {}))
    if err[0] != 0:
        return None
    x = v[0]
    if v.dtype == np.bool_:
        return S.bool_lit(bool(x))
    if v.dtype == np.int64:
        return S.int_lit(int(x))
    x = float(x)
    if math.isinf(x):
        return None
    return S.real_lit(x)


def outcome_counts(codes: Iterable[int]) -> Dict[str, int]:
    c = np.bincount(np.asarray(list(codes), dtype=np.int64), minlength=3)
    return {OUTCOME_NAMES[i]: int(c[i]) for i in range(3)}


__all__ = [
    "Column",
    "ERROR",
    "ERROR_NAMES",
    "FALSE",
    "ObsTable",
    "TRUE",
    "eval_assertion",
    "evaluate",
    "fold_constant",
    "int_arith",
    "outcome_counts",
    "support_mask",
]

