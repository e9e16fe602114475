"""Feedback-directed random generation of call sequences for one unit."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Any, List, Sequence, Tuple

import numpy as np

from .interpreter import (
    COMPLETED,
    DEFAULT_STEP_BUDGET,
    Call,
    ExecutionRecord,
    TestCase,
    exec_test,
    format_value,
)
from .minilang import ast as A


class GenerationFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class GenConfig:
    seed: int = 1
    max_tests: int = 100
    max_calls_per_test: int = 6
    step_budget: int = DEFAULT_STEP_BUDGET
    int_pool: Tuple[int, ...] = (-2, -1, 0, 1, 2, 10)
    real_pool: Tuple[float, ...] = (-1.5, -1.0, 0.0, 1.0, 2.5, math.nan)
    array_len_range: Tuple[int, int] = (0, 4)

    def __post_init__(self):
        if self.max_tests < 1:
            raise ValueError("max_tests must be >= 1")
        if not self.int_pool or not self.real_pool:
            raise ValueError("value pools must be non-empty")
        lo, hi = self.array_len_range
        if lo < 0 or hi < lo:
            raise ValueError("bad array length range")

    def to_json(self) -> dict:
        d = asdict(self)
        d["real_pool"] = [format_value(v) for v in self.real_pool]
        d["int_pool"] = list(self.int_pool)
        d["array_len_range"] = list(self.array_len_range)
        return d


@dataclass
class TestSuite:
    __test__ = False  # not a pytest class

    unit_name: str
    config: GenConfig
    tests: List[TestCase]
    records: List[ExecutionRecord] = field(default_factory=list)

    def observations(self):
        for rec in self.records:
            yield from rec.observations

    def to_json(self) -> dict:
        body = {
            "unit": self.unit_name,
            "config": self.config.to_json(),
            "tests": [test_to_json(t) for t in self.tests],
        }
        body["hash"] = content_hash(body)
        return body


def content_hash(obj) -> str:
    text = json.dumps(obj, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def test_to_json(t: TestCase) -> dict:
    return {
        "id": t.seed_id,
        "calls": [{"method": c.method, "args": [value_to_json(a) for a in c.args]} for c in t.calls],
    }


def value_to_json(v):
    if isinstance(v, tuple):
        return [value_to_json(x) for x in v]
    if type(v) is float:
        return {"real": format_value(v)}
    return v


def value_from_json(v):
    if isinstance(v, list):
        return tuple(value_from_json(x) for x in v)
    if isinstance(v, dict):
        return float(v["real"])
    return v


def test_from_json(d: dict) -> TestCase:
    calls = tuple(Call(c["method"], tuple(value_from_json(a) for a in c["args"])) for c in d["calls"])
    return TestCase(d["id"], calls)


class _ArgSource:
    def __init__(self, cfg: GenConfig, rng: np.random.Generator):
        self.cfg = cfg
        self.rng = rng

    def scalar(self, t: str):
        rng = self.rng
        if t == "bool":
            return bool(rng.integers(2))
        if t == "int":
            v = int(self.cfg.int_pool[rng.integers(len(self.cfg.int_pool))])
            if rng.random() < 0.5:
                v += int(rng.choice((-1, 1)))
            return v
        v = float(self.cfg.real_pool[rng.integers(len(self.cfg.real_pool))])
        if rng.random() < 0.5:
            v *= float(rng.choice((0.5, 1.5)))
        return v

    def value(self, t: str):
        if A.is_array(t):
            lo, hi = self.cfg.array_len_range
            n = int(self.rng.integers(lo, hi + 1))
            return tuple(self.scalar(A.elem_type(t)) for _ in range(n))
        return self.scalar(t)

    def args(self, m: A.Method) -> Tuple[Any, ...]:
        return tuple(self.value(p.type) for p in m.params)


def generate_suite(unit: A.Unit, cfg: GenConfig) -> TestSuite:
    """Build ``cfg.max_tests`` call sequences, each starting with the constructor.

    Each candidate call is executed right away on the live object; a call that
    raises a runtime error (or exhausts its step budget) ends the sequence and
    is dropped, keeping the completed prefix.
    """
    rng = np.random.default_rng(cfg.seed)
    src = _ArgSource(cfg, rng)
    tests: List[TestCase] = []
    records: List[ExecutionRecord] = []
    width = len(str(cfg.max_tests - 1))
    for t in range(cfg.max_tests):
        n_calls = int(rng.integers(1, cfg.max_calls_per_test + 1))
        plan = [(unit.ctor, src.args(unit.ctor))]
        for _ in range(n_calls):
            if not unit.methods:
                break
            m = unit.methods[int(rng.integers(len(unit.methods)))]
            plan.append((m, src.args(m)))
        calls = tuple(Call(m.name, args) for m, args in plan)
        test = TestCase(f"t{t:0{width}d}", calls)
        rec = exec_test(unit, test, cfg.step_budget)
        if rec.outcome.status != COMPLETED:
            keep = rec.outcome.call_index
            if keep == 0:
                continue
            test = TestCase(test.seed_id, calls[:keep])
            rec = exec_test(unit, test, cfg.step_budget)
        tests.append(test)
        records.append(rec)
    if not tests:
        raise GenerationFailure(f"no test completed a constructor call for {unit.name}")
    return TestSuite(unit.name, cfg, tests, records)


def signature_compatible(test: TestCase, unit: A.Unit) -> bool:
    for c in test.calls:
        try:
            m = unit.method(c.method)
        except KeyError:
            return False
        if len(m.params) != len(c.args):
            return False
        for p, a in zip(m.params, c.args):
            if not _value_has_type(a, p.type):
                return False
    return bool(test.calls) and test.calls[0].method == A.CTOR_NAME


def _value_has_type(v, t: str) -> bool:
    if A.is_array(t):
        return isinstance(v, tuple) and all(_value_has_type(x, A.elem_type(t)) for x in v)
    if t == "bool":
        return type(v) is bool
    if t == "int":
        return type(v) is int
    return type(v) is float


def replay_suite(unit: A.Unit, tests: Sequence[TestCase], cfg: GenConfig) -> TestSuite:
    """Execute fixed tests on ``unit`` without truncation."""
    records = [exec_test(unit, t, cfg.step_budget) for t in tests]
    return TestSuite(unit.name, cfg, list(tests), records)


def shared_suite(pre: A.Unit, post: A.Unit, suite_pre: TestSuite, suite_post: TestSuite) -> List[TestCase]:
    """Union of both suites' call sequences that are type-valid on both versions."""
    out: List[TestCase] = []
    seen = set()
    for tag, suite in (("pre", suite_pre), ("post", suite_post)):
        for t in suite.tests:
            key = json.dumps(test_to_json(t)["calls"], sort_keys=True)
            if key in seen:
                continue
            if signature_compatible(t, pre) and signature_compatible(t, post):
                seen.add(key)
                out.append(TestCase(f"{tag}:{t.seed_id}", t.calls))
    return out


__all__ = [
    "GenConfig",
    "GenerationFailure",
    "TestSuite",
    "content_hash",
    "generate_suite",
    "replay_suite",
    "shared_suite",
    "signature_compatible",
    "test_from_json",
    "test_to_json",
]
