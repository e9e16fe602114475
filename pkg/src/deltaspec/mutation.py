"""AST mutants, cross-version transplanting, commit relevance and kill matrices.

Operator table (variants in this order):

=====  ===========================================================
AOR    ``+ - * / %``: each operator to each of the other four
ROR    ``< <= > >= == !=``: each to each of the other five
LOR    ``&&`` <-> ``||``
CRP    int c -> c+1, c-1, 0; real c -> c+1.0, c-1.0, 0.0 (nan -> 0.0);
       bool -> negated literal
SDL    delete one assignment or array-element assignment
NEG    wrap an ``if``/``while`` condition in ``!``
=====  ===========================================================

Mutants are enumerated in AST preorder over the constructor then the methods;
at each node the operators are tried in table order.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .assertlang import ast as S
from .assertlang.evaluate import ERROR, FALSE, ObsTable, evaluate
from .assertlang.parser import unit_scope
from .interpreter import COMPLETED, ExecutionRecord, TestCase, exec_test, observable
from .minilang import ast as A
from .minilang.checker import check_unit
from .minilang.lexer import DiagnosticError
from .minilang.points import ProgramPoint, body_tokens, diff_common_points
from .minilang.printer import expr as expr_text
from .minilang.printer import unit_text

OPERATORS = ("AOR", "ROR", "LOR", "CRP", "SDL", "NEG")

RELEVANT = "RELEVANT"
NOT_RELEVANT = "NOT_RELEVANT"
UNTRANSPLANTABLE = "UNTRANSPLANTABLE_IN_CHANGED_CODE"

_DELETE = object()

Step = Tuple[str, Optional[int]]


class NoSharedTests(ValueError):
    pass


@dataclass(frozen=True)
class Mutant:
    operator: str
    method: str
    path: Tuple[Step, ...]
    variant: int
    unit: A.Unit = field(compare=False, repr=False)
    replacement: object = field(compare=False, repr=False)
    description: str = field(default="", compare=False)
    line: int = field(default=0, compare=False)

    @property
    def id(self) -> str:
        return f"{self.operator}:{self.method}:{path_text(self.path)}:{self.variant}"

    @property
    def location_method(self) -> str:
        return self.method


def path_text(path: Sequence[Step]) -> str:
    parts = []
    for slot, idx in path:
        parts.append(slot if idx is None else f"{slot}[{idx}]")
    return ".".join(parts)


# --- enumeration -------------------------------------------------------------


def _preorder(node, path):
    yield node, path
    for slot, v in A.child_slots(node):
        if isinstance(v, tuple):
            for i, x in enumerate(v):
                yield from _preorder(x, path + ((slot, i),))
        else:
            yield from _preorder(v, path + ((slot, None),))


def _walk_method(m: A.Method):
    for i, s in enumerate(m.body):
        yield from _preorder(s, (("body", i),))


def _real_text(v: float) -> str:
    return "nan" if math.isnan(v) else repr(v)


def _variants(node) -> List[Tuple[str, object, str]]:
    """(operator, replacement, description) for one node, in table order."""
    out = []
    if isinstance(node, A.Binary):
        if node.op in A.ARITH_OPS:
            for op in A.ARITH_OPS:
                if op != node.op:
                    out.append(("AOR", replace(node, op=op), f"{node.op} -> {op}"))
        elif node.op in A.REL_OPS:
            for op in A.REL_OPS:
                if op != node.op:
                    out.append(("ROR", replace(node, op=op), f"{node.op} -> {op}"))
        elif node.op in A.LOGIC_OPS:
            op = "||" if node.op == "&&" else "&&"
            out.append(("LOR", replace(node, op=op), f"{node.op} -> {op}"))
    elif isinstance(node, A.IntLit):
        for v in (node.value + 1, node.value - 1, 0):
            out.append(("CRP", replace(node, value=v), f"{node.value} -> {v}"))
    elif isinstance(node, A.RealLit):
        vals = (0.0,) if math.isnan(node.value) else (node.value + 1.0, node.value - 1.0, 0.0)
        for v in vals:
            out.append(("CRP", replace(node, value=v), f"{_real_text(node.value)} -> {_real_text(v)}"))
    elif isinstance(node, A.BoolLit):
        out.append(("CRP", replace(node, value=not node.value), f"{node.value} -> {not node.value}".lower()))
    elif isinstance(node, (A.Assign, A.IndexAssign)):
        out.append(("SDL", _DELETE, f"delete assignment to {node.name}"))
    elif isinstance(node, (A.If, A.While)):
        out.append(("NEG", replace(node, cond=A.Unary("!", node.cond)), f"negate {expr_text(node.cond)}"))
    return out


def _replace_at(obj, steps: Sequence[Step], new):
    slot, idx = steps[0]
    child = getattr(obj, slot)
    if idx is None:
        return replace(obj, **{slot: _replace_at(child, steps[1:], new) if len(steps) > 1 else new})
    if len(steps) == 1:
        if new is _DELETE:
            items = child[:idx] + child[idx + 1:]
        else:
            items = child[:idx] + (new,) + child[idx + 1:]
    else:
        items = child[:idx] + (_replace_at(child[idx], steps[1:], new),) + child[idx + 1:]
    return replace(obj, **{slot: items})


def apply_mutation(unit: A.Unit, method: str, path: Sequence[Step], replacement) -> A.Unit:
    m = unit.method(method)
    new_m = _replace_at(m, path, replacement)
    if method == A.CTOR_NAME:
        return replace(unit, ctor=new_m)
    return replace(unit, methods=tuple(new_m if x.name == method else x for x in unit.methods))


def _node_line(node) -> int:
    pos = getattr(node, "pos", None)
    return pos[0] if isinstance(pos, tuple) and pos else 0


def generate_mutants(unit: A.Unit, operators: Iterable[str] = OPERATORS) -> List[Mutant]:
    ops = set(operators)
    unknown = ops - set(OPERATORS)
    if unknown:
        raise ValueError(f"unknown operators {sorted(unknown)}")
    original = unit_text(unit)
    seen = {original}
    out: List[Mutant] = []
    for m in unit.callables():
        counters: Dict[Tuple[str, tuple], int] = {}
        for node, path in _walk_method(m):
            for op, repl, desc in _variants(node):
                if op not in ops:
                    continue
                key = (op, path)
                variant = counters.get(key, 0)
                counters[key] = variant + 1
                mutated = apply_mutation(unit, m.name, path, repl)
                try:
                    check_unit(mutated)
                except DiagnosticError:
                    continue
                text = unit_text(mutated)
                if text in seen:
                    continue
                seen.add(text)
                out.append(Mutant(op, m.name, path, variant, mutated, repl, desc, _node_line(node)))
    return out


def transplant(m: Mutant, source: A.Unit, target: A.Unit) -> Optional[Mutant]:
    """Apply ``m`` to ``target`` if its method body is token-identical there."""
    try:
        src_m = source.method(m.method)
        dst_m = target.method(m.method)
    except KeyError:
        return None
    if src_m.signature != dst_m.signature or body_tokens(src_m) != body_tokens(dst_m):
        return None
    mutated = apply_mutation(target, m.method, m.path, m.replacement)
    return replace(m, unit=mutated)


# --- execution ---------------------------------------------------------------


@dataclass
class MutantRuns:
    """Records of every test on every mutant, plus the original's records."""

    mutants: List[Mutant]
    tests: List[TestCase]
    original: List[ExecutionRecord]
    runs: List[List[ExecutionRecord]]


def run_mutants(unit: A.Unit, mutants: Sequence[Mutant], tests: Sequence[TestCase],
                step_budget: int) -> MutantRuns:
    original = [exec_test(unit, t, step_budget) for t in tests]
    runs = [[exec_test(m.unit, t, step_budget) for t in tests] for m in mutants]
    return MutantRuns(list(mutants), list(tests), original, runs)


def _diverged(orig: ExecutionRecord, mut: ExecutionRecord) -> bool:
    return orig.outcome.status == COMPLETED and mut.outcome.status != COMPLETED


# --- relevance ---------------------------------------------------------------


@dataclass(frozen=True)
class RelevanceLabel:
    value: str
    witness_test_id: Optional[str] = None
    mode: str = "literal"

    @property
    def relevant(self) -> bool:
        return self.value != NOT_RELEVANT


def label_relevance(mutants: Sequence[Mutant], pre: A.Unit, post: A.Unit, shared_tests: Sequence[TestCase],
                    mode: str = "literal", step_budget: int = 100_000) -> Dict[str, RelevanceLabel]:
    if mode not in ("literal", "refined"):
        raise ValueError(f"unknown relevance mode {mode!r}")
    tests = list(getattr(shared_tests, "tests", shared_tests))
    if not tests:
        raise NoSharedTests("no test runs on both versions")
    tests.sort(key=lambda t: t.seed_id)
    changed = diff_common_points(pre, post).changed_methods
    base_pre = base_post = None
    if mode == "refined":
        base_pre = [observable(exec_test(pre, t, step_budget)) for t in tests]
        base_post = [observable(exec_test(post, t, step_budget)) for t in tests]
    out: Dict[str, RelevanceLabel] = {}
    for m in mutants:
        m_pre = None if m.method in changed else transplant(m, post, pre)
        if m_pre is None:
            out[m.id] = RelevanceLabel(UNTRANSPLANTABLE, None, mode)
            continue
        label = RelevanceLabel(NOT_RELEVANT, None, mode)
        for k, t in enumerate(tests):
            o_pre = observable(exec_test(m_pre.unit, t, step_budget))
            o_post = observable(exec_test(m.unit, t, step_budget))
            if mode == "literal":
                hit = o_pre != o_post
            else:
                hit = (o_post == base_post[k]) != (o_pre == base_pre[k])
            if hit:
                label = RelevanceLabel(RELEVANT, t.seed_id, mode)
                break
        out[m.id] = label
    return out


# --- kill matrix ---------------------------------------------------------------


@dataclass
class KillMatrix:
    rows: List[str]  # assertion keys
    cols: List[str]  # mutant ids
    killed: np.ndarray  # bool (rows, cols)
    witnesses: Dict[Tuple[int, int], Tuple[str, int]]
    implicit: np.ndarray  # bool (cols,)

    def row(self, key: str) -> np.ndarray:
        return self.killed[self.rows.index(key)]

    def kill_count(self, key: str) -> int:
        return int(self.row(key).sum())

    def mutation_score(self) -> Optional[float]:
        if not self.cols:
            return None
        any_kill = self.killed.any(axis=0) | self.implicit
        return float(any_kill.mean())

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["assertion"] + self.cols)
        for i, r in enumerate(self.rows):
            w.writerow([r] + [int(x) for x in self.killed[i]])
        return buf.getvalue()

    def summary(self, relevance: Optional[Dict[str, RelevanceLabel]] = None) -> dict:
        out = {
            "assertions": len(self.rows),
            "mutants": len(self.cols),
            "killed_by_assertions": int(self.killed.any(axis=0).sum()) if self.rows else 0,
            "killed_by_implicit_oracle_only": int((self.implicit & ~self.killed.any(axis=0)).sum()),
            "ms": self.mutation_score(),
        }
        if relevance is not None:
            rel = np.array([relevance[c].relevant for c in self.cols], dtype=bool)
            out["relevant"] = int(rel.sum())
            if rel.any():
                killed = self.killed.any(axis=0) if self.rows else np.zeros(len(self.cols), bool)
                out["rms"] = float((killed & rel).sum() / rel.sum())
            else:
                out["rms"] = None
        return out


def kill_matrix(assertions: Sequence[S.Assertion], mutants: Sequence[Mutant], unit: A.Unit,
                tests: Sequence[TestCase], step_budget: int = 100_000,
                runs: Optional[MutantRuns] = None) -> KillMatrix:
    """Replay ``tests`` on every mutant and check every assertion on the results.

    Rows follow the assertions' order; columns follow the mutants' order.
    """
    tests = list(getattr(tests, "tests", tests))
    if runs is None:
        runs = run_mutants(unit, mutants, tests, step_budget)
    ncols = len(mutants)
    implicit = np.zeros(ncols, dtype=bool)
    for j, recs in enumerate(runs.runs):
        implicit[j] = any(_diverged(o, r) for o, r in zip(runs.original, recs))
    killed = np.zeros((len(assertions), ncols), dtype=bool)
    witnesses: Dict[Tuple[int, int], Tuple[str, int]] = {}
    by_point: Dict[ProgramPoint, List[int]] = {}
    for i, a in enumerate(assertions):
        by_point.setdefault(a.point, []).append(i)
    for point, idxs in by_point.items():
        obs, col_of = [], []
        for j, recs in enumerate(runs.runs):
            for rec in recs:
                for o in rec.observations:
                    if o.point == point:
                        obs.append(o)
                        col_of.append(j)
        if not obs:
            continue
        table = ObsTable.from_observations(obs, unit_scope(unit, point))
        col_of = np.array(col_of)
        order_keys = [(o.test_id, o.call_index) for o in obs]
        for i in idxs:
            codes, _ = evaluate(assertions[i].body, table)
            bad = np.flatnonzero((codes == FALSE) | (codes == ERROR))
            for r in bad:
                j = int(col_of[r])
                killed[i, j] = True
                w = order_keys[r]
                if (i, j) not in witnesses or w < witnesses[(i, j)]:
                    witnesses[(i, j)] = w
    return KillMatrix([a.key for a in assertions], [m.id for m in mutants], killed, witnesses, implicit)


def replay_witness(assertion: S.Assertion, mutant: Mutant, test: TestCase, call_index: int,
                   step_budget: int = 100_000) -> bool:
    """True if re-running ``test`` on the mutant falsifies the assertion at ``call_index``."""
    rec = exec_test(mutant.unit, test, step_budget)
    obs = [o for o in rec.observations if o.point == assertion.point and o.call_index == call_index]
    if not obs:
        return False
    table = ObsTable.from_observations(obs, unit_scope(mutant.unit, assertion.point))
    codes, _ = evaluate(assertion.body, table)
    return bool(((codes == FALSE) | (codes == ERROR)).any())


def mutants_json(mutants: Sequence[Mutant], relevance: Optional[Dict[str, RelevanceLabel]] = None) -> list:
    out = []
    for m in mutants:
        d = {"id": m.id, "operator": m.operator, "method": m.method, "path": path_text(m.path),
             "variant": m.variant, "line": m.line, "description": m.description}
        if relevance is not None:
            lab = relevance[m.id]
            d["relevance"] = lab.value
            d["witness_test"] = lab.witness_test_id
        out.append(d)
    return out
