"""Deterministic tree-walking execution of DL test cases.

Every normally completed call yields two observations: one at the
callable's exit point and one at the class-invariant point. Calls that end
in a runtime error or run out of steps contribute nothing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from .minilang import ast as A
from .minilang.checker import INT_MAX, INT_MIN
from .minilang.points import ProgramPoint, invariant_point, post_point

DEFAULT_STEP_BUDGET = 100_000

COMPLETED = "COMPLETED"
RUNTIME_ERROR = "RUNTIME_ERROR"
BUDGET_EXHAUSTED = "BUDGET_EXHAUSTED"

# runtime error kinds
OVERFLOW = "overflow"
DIV_BY_ZERO = "div_by_zero"
INDEX_OUT_OF_BOUNDS = "index_out_of_bounds"
NEGATIVE_SIZE = "negative_array_size"
FAIL = "fail"

NONE = None  # absent return value


@dataclass(frozen=True)
class Call:
    method: str
    args: Tuple[Any, ...]


@dataclass(frozen=True)
class TestCase:
    __test__ = False  # not a pytest class

    seed_id: str
    calls: Tuple[Call, ...]


@dataclass(frozen=True)
class Observation:
    point: ProgramPoint
    pre_state: Dict[str, Any]
    post_state: Dict[str, Any]
    params: Dict[str, Any]
    return_value: Any
    call_index: int
    test_id: str = ""


@dataclass(frozen=True)
class Outcome:
    status: str
    kind: Optional[str] = None
    call_index: Optional[int] = None


@dataclass
class ExecutionRecord:
    observations: List[Observation]
    outcome: Outcome
    # per call: ('ok', return value) / ('error', kind) / ('budget', None)
    results: List[Tuple[str, Any]] = field(default_factory=list)
    final_state: Dict[str, Any] = field(default_factory=dict)
    field_order: Tuple[str, ...] = ()

    @property
    def completed_calls(self) -> int:
        return sum(1 for r in self.results if r[0] == "ok")


class DLRuntimeError(Exception):
    def __init__(self, kind: str):
        super().__init__(kind)
        self.kind = kind


class _BudgetExceeded(Exception):
    pass


class _Return(Exception):
    def __init__(self, value):
        self.value = value


def _check_int(v: int) -> int:
    if v < INT_MIN or v > INT_MAX:
        raise DLRuntimeError(OVERFLOW)
    return v


def _int_div(a: int, b: int) -> int:
    if b == 0:
        raise DLRuntimeError(DIV_BY_ZERO)
    q = abs(a) // abs(b)
    if (a < 0) != (b < 0):
        q = -q
    return _check_int(q)


def _int_mod(a: int, b: int) -> int:
    if b == 0:
        raise DLRuntimeError(DIV_BY_ZERO)
    return a - b * _int_div(a, b)


def _real_div(a: float, b: float) -> float:
    if b == 0.0:
        if a == 0.0 or math.isnan(a):
            return math.nan
        sign = math.copysign(1.0, a) * math.copysign(1.0, b)
        return math.copysign(math.inf, sign)
    return a / b


def _real_mod(a: float, b: float) -> float:
    if b == 0.0 or math.isinf(a) or math.isnan(a) or math.isnan(b):
        return math.nan
    if math.isinf(b):
        return a
    return math.fmod(a, b)


def _real_max(a: float, b: float) -> float:
    if math.isnan(a) or math.isnan(b):
        return math.nan
    if a == b == 0.0:
        return a if math.copysign(1.0, a) > 0 else b
    return a if a > b else b


def _real_min(a: float, b: float) -> float:
    if math.isnan(a) or math.isnan(b):
        return math.nan
    if a == b == 0.0:
        return a if math.copysign(1.0, a) < 0 else b
    return a if a < b else b


class Machine:
    """Executes callables of one unit against a mutable object state."""

    def __init__(self, unit: A.Unit, step_budget: int = DEFAULT_STEP_BUDGET):
        self.unit = unit
        self.step_budget = step_budget
        self.fields = {f.name: A.default_value(f.type) for f in unit.fields}
        self.field_names = set(self.fields)
        self.steps = 0

    def tick(self) -> None:
        self.steps += 1
        if self.steps > self.step_budget:
            raise _BudgetExceeded()

    def invoke(self, method: A.Method, args: Tuple[Any, ...]):
        self.steps = 0
        env = [dict(zip((p.name for p in method.params), args))]
        try:
            self.block(method.body, env)
        except _Return as r:
            return r.value
        return NONE

    # -- variables
    def load(self, name: str, env):
        for frame in reversed(env):
            if name in frame:
                return frame[name]
        return self.fields[name]

    def store(self, name: str, value, env) -> None:
        for frame in reversed(env):
            if name in frame:
                frame[name] = value
                return
        self.fields[name] = value

    # -- statements
    def block(self, body, env) -> None:
        env.append({})
        try:
            for s in body:
                self.stmt(s, env)
        finally:
            env.pop()

    def stmt(self, s, env) -> None:
        self.tick()
        t = type(s)
        if t is A.Assign:
            self.store(s.name, self.expr(s.value, env), env)
        elif t is A.VarDecl:
            env[-1][s.name] = self.expr(s.init, env)
        elif t is A.If:
            if self.expr(s.cond, env):
                self.block(s.then, env)
            elif s.orelse:
                self.block(s.orelse, env)
        elif t is A.Return:
            raise _Return(None if s.value is None else self.expr(s.value, env))
        elif t is A.IndexAssign:
            arr = self.load(s.name, env)
            i = self.expr(s.index, env)
            v = self.expr(s.value, env)
            if not 0 <= i < len(arr):
                raise DLRuntimeError(INDEX_OUT_OF_BOUNDS)
            self.store(s.name, arr[:i] + (v,) + arr[i + 1 :], env)
        elif t is A.While:
            while self.expr(s.cond, env):
                self.block(s.body, env)
                self.tick()
        elif t is A.For:
            for item in self.expr(s.iterable, env):
                env.append({s.var: item})
                try:
                    self.block(s.body, env)
                finally:
                    env.pop()
                self.tick()
        elif t is A.Fail:
            raise DLRuntimeError(FAIL)
        else:
            raise TypeError(f"unknown statement {s!r}")

    # -- expressions
    def expr(self, e, env):
        t = type(e)
        if t is A.Name:
            return self.load(e.id, env)
        if t is A.IntLit or t is A.RealLit or t is A.BoolLit:
            return e.value
        if t is A.Binary:
            return self.binary(e, env)
        if t is A.Unary:
            v = self.expr(e.operand, env)
            if e.op == "!":
                return not v
            return _check_int(-v) if type(v) is int else -v
        if t is A.Index:
            arr = self.expr(e.array, env)
            i = self.expr(e.index, env)
            if not 0 <= i < len(arr):
                raise DLRuntimeError(INDEX_OUT_OF_BOUNDS)
            return arr[i]
        if t is A.Call:
            return self.call(e, env)
        if t is A.NewArray:
            n = self.expr(e.size, env)
            if n < 0:
                raise DLRuntimeError(NEGATIVE_SIZE)
            if n > self.step_budget:
                raise _BudgetExceeded()
            return (0 if e.elem == "int" else 0.0,) * n
        raise TypeError(f"unknown expression {e!r}")

    def binary(self, e: A.Binary, env):
        op = e.op
        if op == "&&":
            return bool(self.expr(e.left, env)) and bool(self.expr(e.right, env))
        if op == "||":
            return bool(self.expr(e.left, env)) or bool(self.expr(e.right, env))
        a = self.expr(e.left, env)
        b = self.expr(e.right, env)
        if op == "==":
            return a == b
        if op == "!=":
            return a != b
        if op == "<":
            return a < b
        if op == "<=":
            return a <= b
        if op == ">":
            return a > b
        if op == ">=":
            return a >= b
        if type(a) is int:
            if op == "+":
                return _check_int(a + b)
            if op == "-":
                return _check_int(a - b)
            if op == "*":
                return _check_int(a * b)
            if op == "/":
                return _int_div(a, b)
            return _int_mod(a, b)
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op == "/":
            return _real_div(a, b)
        return _real_mod(a, b)

    def call(self, e: A.Call, env):
        args = [self.expr(a, env) for a in e.args]
        fn = e.fn
        if fn == "len":
            return len(args[0])
        if fn == "toReal":
            return float(args[0])
        if fn == "abs":
            v = args[0]
            return _check_int(abs(v)) if type(v) is int else abs(v)
        a, b = args
        if type(a) is int:
            return max(a, b) if fn == "max" else min(a, b)
        return _real_max(a, b) if fn == "max" else _real_min(a, b)


def exec_test(unit: A.Unit, test: TestCase, step_budget: int = DEFAULT_STEP_BUDGET) -> ExecutionRecord:
    if step_budget < 1:
        raise ValueError("step budget must be positive")
    machine = Machine(unit, step_budget)
    inv = invariant_point(unit)
    field_order = tuple(f.name for f in unit.fields)
    observations: List[Observation] = []
    results: List[Tuple[str, Any]] = []
    outcome = Outcome(COMPLETED)
    for idx, call in enumerate(test.calls):
        method = unit.method(call.method)
        pre_state = dict(machine.fields)
        try:
            ret = machine.invoke(method, call.args)
        except DLRuntimeError as exc:
            results.append(("error", exc.kind))
            outcome = Outcome(RUNTIME_ERROR, exc.kind, idx)
            break
        except _BudgetExceeded:
            results.append(("budget", None))
            outcome = Outcome(BUDGET_EXHAUSTED, None, idx)
            break
        except RecursionError:
            results.append(("budget", None))
            outcome = Outcome(BUDGET_EXHAUSTED, None, idx)
            break
        results.append(("ok", ret))
        post_state = dict(machine.fields)
        params = {p.name: v for p, v in zip(method.params, call.args)}
        observations.append(
            Observation(post_point(unit, method.name), pre_state, post_state, params, ret, idx, test.seed_id)
        )
        observations.append(Observation(inv, pre_state, post_state, {}, NONE, idx, test.seed_id))
    return ExecutionRecord(observations, outcome, results, dict(machine.fields), field_order)


# --- observable output -----------------------------------------------------


def format_value(v) -> str:
    if v is None:
        return "none"
    if v is True:
        return "true"
    if v is False:
        return "false"
    if type(v) is int:
        return str(v)
    if type(v) is float:
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".17g")
    if isinstance(v, tuple):
        return "[" + ",".join(format_value(x) for x in v) + "]"
    raise TypeError(f"unexpected value {v!r}")


def observable(rec: ExecutionRecord) -> bytes:
    """Canonical serialization of what a test can see: per-call results and final fields."""
    parts = []
    for i, (tag, v) in enumerate(rec.results):
        if tag == "ok":
            parts.append(f"{i}:ok:{format_value(v)}")
        elif tag == "error":
            parts.append(f"{i}:error:{v}")
        else:
            parts.append(f"{i}:budget")
    state = ";".join(f"{k}={format_value(rec.final_state[k])}" for k in rec.field_order)
    return ("|".join(parts) + "#" + state).encode("utf-8")
