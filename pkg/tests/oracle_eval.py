"""Scalar reference evaluator for assertions, written independently of the
vectorized one. Works on a single environment dict and plain Python values."""

import math

from deltaspec.assertlang import ast as S

INT_MIN, INT_MAX = -(2**63), 2**63 - 1


class Err(Exception):
    pass


def _int(v):
    if not INT_MIN <= v <= INT_MAX:
        raise Err("overflow")
    return v


def _trunc_div(a, b):
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def _real(op, a, b):
    a, b = float(a), float(b)
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        if (math.isinf(a) and b == 0) or (math.isinf(b) and a == 0):
            return math.nan
        return a * b
    if op == "/":
        if b == 0:
            if a == 0 or math.isnan(a):
                return math.nan
            return math.copysign(math.inf, a) * math.copysign(1.0, b)
        return a / b
    if b == 0 or math.isinf(a) or math.isnan(a) or math.isnan(b):
        return math.nan
    return math.fmod(a, b)


def _is_int(v):
    return type(v) is int


def _eq(a, b):
    if isinstance(a, float) and isinstance(b, (int, float)) or isinstance(b, float) and isinstance(a, (int, float)):
        a, b = float(a), float(b)
        return a == b or (math.isnan(a) and math.isnan(b))
    return a == b


class Oracle:
    def __init__(self, env, scope=None):
        self.env = env
        self.scope = scope or {}
        self.q = None  # (var, array key, index)

    def lookup(self, node):
        key = node.name if isinstance(node, S.Var) else "old:" + node.name
        if key not in self.env:
            raise Err("unbound")
        return key, self.env[key]

    def ev(self, e):
        if isinstance(e, (S.Var, S.Old)):
            _, v = self.lookup(e)
            if isinstance(v, tuple):
                raise Err("unbound")
            return v
        if isinstance(e, S.Result):
            if "result" not in self.env:
                raise Err("unbound")
            return self.env["result"]
        if isinstance(e, S.Lit):
            return e.value
        if isinstance(e, S.IndexVar):
            if self.q is None:
                raise Err("unbound")
            return self.q[2]
        if isinstance(e, S.Elem):
            key, arr = self.lookup(e.array)
            if self.q is None or key != self.q[1]:
                raise Err("unbound")
            return arr[self.q[2]]
        if isinstance(e, S.Len):
            _, arr = self.lookup(e.array)
            if not isinstance(arr, tuple):
                raise Err("unbound")
            return len(arr)
        if isinstance(e, S.Agg):
            return self.agg(e)
        if isinstance(e, S.Neg):
            v = self.ev(e.operand)
            return _int(-v) if _is_int(v) else -v
        if isinstance(e, S.Arith):
            a, b = self.ev(e.left), self.ev(e.right)
            if _is_int(a) and _is_int(b):
                if e.op == "+":
                    return _int(a + b)
                if e.op == "-":
                    return _int(a - b)
                if e.op == "*":
                    return _int(a * b)
                if b == 0:
                    raise Err("div0")
                q = _trunc_div(a, b)
                if e.op == "/":
                    return _int(q)
                return a - b * q
            return _real(e.op, a, b)
        if isinstance(e, S.Cmp):
            a, b = self.ev(e.left), self.ev(e.right)
            if type(a) is bool or type(b) is bool:
                eq, lt, gt = bool(a) == bool(b), False, False
            else:
                if isinstance(a, float) or isinstance(b, float):
                    a, b = float(a), float(b)
                eq = _eq(a, b)
                lt, gt = a < b, a > b
            return {"==": eq, "!=": not eq, "<": lt, "<=": lt or eq, ">": gt, ">=": gt or eq}[e.op]
        if isinstance(e, S.Not):
            return not self.ev(e.operand)
        if isinstance(e, S.And):
            return bool(self.ev(e.left)) and bool(self.ev(e.right))
        if isinstance(e, S.Or):
            return bool(self.ev(e.left)) or bool(self.ev(e.right))
        if isinstance(e, S.Implies):
            return (not self.ev(e.left)) or bool(self.ev(e.right))
        if isinstance(e, S.IsNaN):
            v = self.ev(e.operand)
            return isinstance(v, float) and math.isnan(v)
        if isinstance(e, S.Quant):
            if self.q is not None:
                raise Err("unbound")
            key, arr = self.lookup(e.array)
            if not isinstance(arr, tuple):
                raise Err("unbound")
            vals = []
            for i in range(len(arr)):
                self.q = (e.var, key, i)
                try:
                    vals.append(bool(self.ev(e.body)))
                finally:
                    self.q = None
            return all(vals) if e.kind == "forall" else any(vals)
        raise TypeError(e)

    def agg(self, e):
        key, arr = self.lookup(e.array)
        if not isinstance(arr, tuple):
            raise Err("unbound")
        xs = list(arr)
        if e.fn in ("sumabs", "maxabs"):
            xs = [_int(abs(x)) if _is_int(x) else abs(x) for x in xs]
        if e.fn in ("sum", "sumabs"):
            acc = 0.0 if self.scope.get(key) == "real[]" else 0
            for x in xs:
                acc = _int(acc + x) if _is_int(acc) and _is_int(x) else float(acc) + float(x)
            return acc
        if not xs:
            raise Err("empty")
        if any(isinstance(x, float) and math.isnan(x) for x in xs):
            return math.nan
        return max(xs) if e.fn in ("max", "maxabs") else min(xs)

def outcome(e, env, scope=None):
    """'TRUE', 'FALSE' or 'EVAL_ERROR'. ``scope`` gives element types of empty arrays."""
    try:
        return "TRUE" if Oracle(env, scope).ev(e) else "FALSE"
    except Err:
        return "EVAL_ERROR"
