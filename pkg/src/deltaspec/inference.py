"""Dynamic classification of candidates and the mutation-based relevance filter."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .assertlang import ast as S
from .assertlang.evaluate import ERROR, FALSE, ObsTable, evaluate, support_mask
from .assertlang.fuzz import CandidateSet
from .assertlang.parser import unit_scope
from .interpreter import DEFAULT_STEP_BUDGET
from .minilang import ast as A
from .mutation import MutantRuns, generate_mutants, kill_matrix, run_mutants

log = logging.getLogger(__name__)

VALID = "VALID"
INVALID = "INVALID"
UNDETERMINED = "UNDETERMINED"

SPEC = "SPEC"
DISCARDED_IRRELEVANT = "DISCARDED_IRRELEVANT"
DISCARDED_REDUNDANT = "DISCARDED_REDUNDANT"

FALSIFIES = "FALSIFIES"
SKIPS = "SKIPS"


class MatrixMismatch(ValueError):
    pass


@dataclass(frozen=True)
class SpecConfig:
    min_support: int = 5
    eval_error_policy: str = FALSIFIES
    mutation_filter: bool = True
    keep_representatives_only: bool = False
    step_budget: int = DEFAULT_STEP_BUDGET

    def __post_init__(self):
        if self.min_support < 1:
            raise ValueError("min_support must be >= 1")
        if self.eval_error_policy not in (FALSIFIES, SKIPS):
            raise ValueError(f"unknown eval-error policy {self.eval_error_policy!r}")

    def to_json(self) -> dict:
        return {
            "min_support": self.min_support,
            "eval_error_policy": self.eval_error_policy,
            "mutation_filter": self.mutation_filter,
            "keep_representatives_only": self.keep_representatives_only,
            "step_budget": self.step_budget,
        }


@dataclass
class Entry:
    assertion: S.Assertion
    status: str
    eval_count: int  # non-vacuous supporting observations
    observed: int  # observations at the point
    falsifier: Optional[Tuple[str, int]] = None  # (test id, call index)
    bucket: Optional[str] = None
    kill_count: Optional[int] = None


@dataclass
class StatusTable:
    version: str
    config: SpecConfig
    entries: Dict[str, Entry] = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)

    def keys(self):
        return list(self.entries)

    def with_status(self, status: str) -> List[S.Assertion]:
        return [e.assertion for e in self.entries.values() if e.status == status]

    def valid_keys(self) -> set:
        return {k for k, e in self.entries.items() if e.status == VALID}

    def status(self, key: str) -> str:
        return self.entries[key].status

    def spec(self) -> List[S.Assertion]:
        return [e.assertion for e in self.entries.values() if e.bucket == SPEC]

    def to_json(self) -> dict:
        return {
            "version": self.version,
            "config": self.config.to_json(),
            "warnings": list(self.warnings),
            "entries": [
                {
                    "point": e.assertion.point.id,
                    "assertion": e.assertion.text,
                    "status": e.status,
                    "evalCount": e.eval_count,
                    "observed": e.observed,
                    "falsifier": None if e.falsifier is None else {"test": e.falsifier[0], "call": e.falsifier[1]},
                    "bucket": e.bucket,
                    "killCount": e.kill_count,
                }
                for e in self.entries.values()
            ],
        }


def _point_tables(unit: A.Unit, observations) -> Dict[object, Tuple[ObsTable, list]]:
    grouped: Dict[object, list] = {}
    for o in observations:
        grouped.setdefault(o.point, []).append(o)
    out = {}
    for point, obs in grouped.items():
        table = ObsTable.from_observations(obs, unit_scope(unit, point))
        out[point] = (table, [(o.test_id, o.call_index) for o in obs])
    return out


def classify(candidates: Sequence[S.Assertion], suite, cfg: SpecConfig, unit: A.Unit,
             version: str = "") -> StatusTable:
    """Evaluate each candidate on every observation of its point.

    FALSE (and EVAL_ERROR under the FALSIFIES policy) makes a candidate INVALID,
    with the least (test id, call index) falsifying observation as witness.
    Otherwise it is VALID once it has ``min_support`` non-vacuous TRUE results.
    """
    tables = _point_tables(unit, suite.observations())
    table = StatusTable(version, cfg)
    for a in candidates:
        pt = tables.get(a.point)
        if pt is None:
            table.entries[a.key] = Entry(a, UNDETERMINED, 0, 0)
            continue
        obs_table, keys = pt
        codes, _ = evaluate(a.body, obs_table)
        bad = codes == FALSE
        if cfg.eval_error_policy == FALSIFIES:
            bad |= codes == ERROR
        support = int(support_mask(a.body, obs_table, codes).sum())
        if bad.any():
            witness = min(keys[i] for i in np.flatnonzero(bad))
            table.entries[a.key] = Entry(a, INVALID, support, obs_table.n, witness)
        elif support >= cfg.min_support:
            table.entries[a.key] = Entry(a, VALID, support, obs_table.n)
        else:
            table.entries[a.key] = Entry(a, UNDETERMINED, support, obs_table.n)
    if not tables:
        table.warnings.append("suite has no observations; every candidate is UNDETERMINED")
        log.warning("empty suite for %s: all candidates undetermined", version or "unit")
    return table


def filter_by_mutation(table: StatusTable, km, cfg: SpecConfig) -> StatusTable:
    valid = [k for k, e in table.entries.items() if e.status == VALID]
    if set(km.rows) != set(valid):
        raise MatrixMismatch("kill matrix rows differ from the VALID assertions")
    out = StatusTable(table.version, table.config, dict(table.entries), list(table.warnings))
    row_of = {k: i for i, k in enumerate(km.rows)}
    groups: Dict[bytes, List[str]] = {}
    for k in valid:
        vec = km.killed[row_of[k]] if km.cols else np.zeros(0, dtype=bool)
        n = int(vec.sum())
        bucket = SPEC if n > 0 else DISCARDED_IRRELEVANT
        out.entries[k] = replace(out.entries[k], bucket=bucket, kill_count=n)
        if n > 0:
            groups.setdefault(np.packbits(vec).tobytes() + str(len(vec)).encode(), []).append(k)
    if cfg.keep_representatives_only:
        for members in groups.values():
            best = min(members, key=lambda k: (len(out.entries[k].assertion.text), out.entries[k].assertion.text))
            for k in members:
                if k != best:
                    out.entries[k] = replace(out.entries[k], bucket=DISCARDED_REDUNDANT)
    return out


def mark_all_spec(table: StatusTable) -> StatusTable:
    out = StatusTable(table.version, table.config, dict(table.entries), list(table.warnings))
    for k, e in out.entries.items():
        if e.status == VALID:
            out.entries[k] = replace(e, bucket=SPEC)
    return out


@dataclass
class InferenceResult:
    table: StatusTable
    mutants: list = field(default_factory=list)
    runs: Optional[MutantRuns] = None
    kills: object = None


def infer_spec(unit: A.Unit, suite, candidates, cfg: SpecConfig, version: str = "") -> InferenceResult:
    """classify, then (optionally) keep only VALID assertions that kill a mutant of ``unit``."""
    cands = list(candidates.assertions if isinstance(candidates, CandidateSet) else candidates)
    table = classify(cands, suite, cfg, unit, version)
    if not cfg.mutation_filter:
        return InferenceResult(mark_all_spec(table))
    mutants = generate_mutants(unit)
    runs = run_mutants(unit, mutants, suite.tests, cfg.step_budget)
    valid = [e.assertion for e in table.entries.values() if e.status == VALID]
    km = kill_matrix(valid, mutants, unit, suite.tests, cfg.step_budget, runs=runs)
    return InferenceResult(filter_by_mutation(table, km, cfg), mutants, runs, km)


def soundness_violations(table: StatusTable, suite, unit: A.Unit) -> List[str]:
    """Independent second pass: VALID assertions that some observation falsifies."""
    tables = _point_tables(unit, suite.observations())
    out = []
    for k, e in table.entries.items():
        if e.status != VALID:
            continue
        obs_table, _ = tables[e.assertion.point]
        codes, _ = evaluate(e.assertion.body, obs_table)
        bad = codes == FALSE
        if table.config.eval_error_policy == FALSIFIES:
            bad |= codes == ERROR
        if bad.any():
            out.append(k)
    return out
