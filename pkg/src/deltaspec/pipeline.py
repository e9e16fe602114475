"""End-to-end run over one commit directory, plus report writers."""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

from . import __version__
from .assertlang import ast as S
from .assertlang.equiv import DomainConfig, semantic_key
from .assertlang.fuzz import CandidateSet, fuzz_candidates
from .assertlang.grammar import Grammar, instantiate_grammar
from .assertlang.parser import parse_expr
from .delta import (
    PARTITIONS,
    DeltaItem,
    DeltaReport,
    MatchResult,
    compute_delta,
    match_ground_truth,
    parse_truth,
    reduce_equivalent,
    render_markdown,
)
from .inference import FALSIFIES, SPEC, InferenceResult, SpecConfig, infer_spec, soundness_violations
from .interpreter import DEFAULT_STEP_BUDGET
from .minilang import CommonPoints, DiagnosticError, diff_common_points, parse_unit, point_from_label
from .minilang import ast as A
from .mutation import KillMatrix, RelevanceLabel, generate_mutants, kill_matrix, label_relevance
from .testgen import GenConfig, TestSuite, content_hash, generate_suite, shared_suite


class InputError(Exception):
    """Malformed commit directory or source file (exit code 2)."""


class InvariantViolation(Exception):
    """An internal consistency check failed (exit code 3)."""


@dataclass(frozen=True)
class RunOptions:
    seed: int = 1
    candidates: int = 2000
    min_support: int = 5
    mode: str = "strict"
    relevance: str = "literal"
    reps: int = 100
    max_tests: int = 100
    max_calls: int = 6
    step_budget: int = DEFAULT_STEP_BUDGET
    mutation_filter: bool = True
    keep_representatives_only: bool = False
    eval_error_policy: str = FALSIFIES

    def gen_config(self) -> GenConfig:
        return GenConfig(seed=self.seed, max_tests=self.max_tests, max_calls_per_test=self.max_calls,
                         step_budget=self.step_budget)

    def spec_config(self) -> SpecConfig:
        return SpecConfig(self.min_support, self.eval_error_policy, self.mutation_filter,
                          self.keep_representatives_only, self.step_budget)


@dataclass
class CommitDir:
    path: Path
    pre_file: Path
    post_file: Path
    truth_file: Optional[Path]
    config_file: Optional[Path]

    @property
    def name(self) -> str:
        return self.path.name


def load_commit(path) -> CommitDir:
    root = Path(path)
    if not root.is_dir():
        raise InputError(f"{root}: not a directory")
    files = {}
    for side in ("pre", "post"):
        d = root / side
        if not d.is_dir():
            raise InputError(f"{root}: missing '{side}/' directory")
        dl = sorted(d.glob("*.dl"))
        if len(dl) != 1:
            raise InputError(f"{d}: expected exactly one .dl file, found {len(dl)}")
        files[side] = dl[0]
    truth = root / "truth.delta"
    cfg = root / "config.ini"
    return CommitDir(root, files["pre"], files["post"], truth if truth.is_file() else None,
                     cfg if cfg.is_file() else None)


def load_source(path: Path) -> A.Unit:
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise InputError(f"{path}: {exc}") from exc
    try:
        return parse_unit(text)
    except DiagnosticError as exc:
        raise InputError(exc.format(str(path))) from exc


@dataclass
class PipelineResult:
    commit: CommitDir
    options: RunOptions
    pre: A.Unit
    post: A.Unit
    common: CommonPoints
    grammars: Dict[str, Grammar]
    suite_pre: TestSuite
    suite_post: TestSuite
    candidates: CandidateSet
    inf_pre: InferenceResult
    inf_post: InferenceResult
    raw_report: DeltaReport
    report: DeltaReport
    timings: Dict[str, float] = field(default_factory=dict)

    @property
    def scopes(self) -> Dict[str, Dict[str, str]]:
        return {pid: g.scope for pid, g in self.grammars.items()}

    def points(self):
        return self.common.sorted_shared()


def _sha(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def run_pipeline(commit: CommitDir, opts: RunOptions) -> PipelineResult:
    timings: Dict[str, float] = {}
    t0 = time.perf_counter()

    def lap(name):
        nonlocal t0
        now = time.perf_counter()
        timings[name] = round(now - t0, 4)
        t0 = now

    pre = load_source(commit.pre_file)
    post = load_source(commit.post_file)
    if pre.name != post.name:
        raise InputError(f"unit names differ: {pre.name!r} vs {post.name!r}")
    common = diff_common_points(pre, post)
    lap("parse")
    suite_pre = generate_suite(pre, opts.gen_config())
    suite_post = generate_suite(post, opts.gen_config())
    lap("testgen")
    grammars = {p.id: instantiate_grammar(pre, post, p) for p in common.sorted_shared()}
    candidates = CandidateSet.merge(fuzz_candidates(g, opts.seed, opts.candidates) for g in grammars.values())
    lap("fuzz")
    cfg = opts.spec_config()
    inf_pre = infer_spec(pre, suite_pre, candidates, cfg, "pre")
    inf_post = infer_spec(post, suite_post, candidates, cfg, "post")
    lap("infer")
    for tag, inf, unit, suite in (("pre", inf_pre, pre, suite_pre), ("post", inf_post, post, suite_post)):
        bad = soundness_violations(inf.table, suite, unit)
        if bad:
            raise InvariantViolation(f"{tag}: VALID assertions falsified on re-check: {bad[:3]}")
    raw = compute_delta(inf_pre.table, inf_post.table, opts.mode, commit.name)
    scopes = {pid: g.scope for pid, g in grammars.items()}
    report = reduce_equivalent(raw, scopes)
    problems = report.check_invariants() + raw.check_invariants()
    if problems:
        raise InvariantViolation("; ".join(problems))
    report.provenance = {
        "seed": opts.seed,
        "options": asdict(opts),
        "inputs": {"pre": _sha(commit.pre_file.read_text(encoding="utf-8")),
                   "post": _sha(commit.post_file.read_text(encoding="utf-8"))},
        "suites": {"pre": suite_pre.to_json()["hash"], "post": suite_post.to_json()["hash"]},
        "candidates": len(candidates),
        "grammar_hashes": candidates.grammar_hashes,
        "spec_sizes": {"pre": len(inf_pre.table.spec()), "post": len(inf_post.table.spec())},
    }
    lap("delta")
    return PipelineResult(commit, opts, pre, post, common, grammars, suite_pre, suite_post, candidates,
                          inf_pre, inf_post, raw, report, timings)


# --- experiment inputs ---------------------------------------------------------


@dataclass
class ExperimentInputs:
    matrix: KillMatrix
    relevance: Dict[str, RelevanceLabel]
    pools: Dict[str, List[str]]
    mutants: list


def _spec_post(res: PipelineResult, key: str) -> bool:
    e = res.inf_post.table.entries.get(key)
    return e is not None and e.bucket == SPEC


def _class_pool(res: PipelineResult, items: List[DeltaItem]) -> List[str]:
    pool = []
    for it in items:
        members = [k for k in (it.members or [it.key]) if _spec_post(res, k)]
        if members:
            pool.append(min(members, key=lambda k: (len(k), k)))
    return pool


def experiment_inputs(res: PipelineResult, relevance_mode: Optional[str] = None) -> ExperimentInputs:
    """Post-version kill matrix, relevance labels and the three assertion pools."""
    mode = relevance_mode or res.options.relevance
    post_table = res.inf_post.table
    valid = [e.assertion for e in post_table.entries.values() if e.status == "VALID"]
    if res.inf_post.kills is not None:
        matrix, mutants = res.inf_post.kills, res.inf_post.mutants
    else:
        mutants = generate_mutants(res.post)
        matrix = kill_matrix(valid, mutants, res.post, res.suite_post.tests, res.options.step_budget)
    tests = shared_suite(res.pre, res.post, res.suite_pre, res.suite_post)
    relevance = label_relevance(mutants, res.pre, res.post, tests, mode, res.options.step_budget)
    scopes = res.scopes
    seen, all_valid = set(), []
    spec_items = sorted((e.assertion for e in post_table.entries.values() if e.bucket == SPEC),
                        key=lambda a: (a.point.sort_key(), len(a.text), a.text))
    for a in spec_items:
        k = (a.point, semantic_key(a.body, scopes[a.point.id]))
        if k not in seen:
            seen.add(k)
            all_valid.append(a.key)
    pools = {
        "added": _class_pool(res, res.report.added),
        "preserved": _class_pool(res, res.report.preserved),
        "allValidPost": all_valid,
    }
    return ExperimentInputs(matrix, relevance, pools, mutants)


# --- truth -----------------------------------------------------------------


def match_truth(res_or_report, commit: CommitDir, scopes: Dict[str, Dict[str, str]], unit_name: str,
                d: Optional[DomainConfig] = None) -> MatchResult:
    if commit.truth_file is None:
        raise InputError(f"{commit.path}: no truth.delta")
    report = res_or_report.report if isinstance(res_or_report, PipelineResult) else res_or_report
    truth = parse_truth(commit.truth_file.read_text(encoding="utf-8"), unit_name, scopes)
    return match_ground_truth(report, truth, scopes, d)


def report_from_json(data: dict, unit_name: str) -> DeltaReport:
    def items(rows):
        out = []
        for r in rows:
            point = point_from_label(unit_name, r["point"])
            a = S.Assertion(point, parse_expr(r["assertion"]))
            members = [f"{point.id}: {m}" for m in r.get("members", [])]
            out.append(DeltaItem(a, r["status_pre"], r["status_post"], r.get("bucket_pre"),
                                 r.get("bucket_post"), members))
        return out

    return DeltaReport(data["commit"], data["mode"], items(data["added"]), items(data["removed"]),
                       items(data["preserved"]), items(data["undetermined"]), data.get("provenance", {}),
                       data.get("reduced", False))


# --- writers -----------------------------------------------------------------


def dump_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=False, allow_nan=False) + "\n", encoding="utf-8")


def write_run_outputs(res: PipelineResult, out: Path) -> List[Path]:
    out.mkdir(parents=True, exist_ok=True)
    files = []

    def put(name, obj):
        p = out / name
        if isinstance(obj, str):
            p.write_text(obj, encoding="utf-8")
        else:
            dump_json(p, obj)
        files.append(p)

    put("delta.json", res.report.to_json())
    put("delta.md", render_markdown(res.report, res.points()))
    put("status.pre.json", res.inf_pre.table.to_json())
    put("status.post.json", res.inf_post.table.to_json())
    put("suite.pre.json", res.suite_pre.to_json())
    put("suite.post.json", res.suite_post.to_json())
    cands = res.candidates.to_json()
    cands["hash"] = content_hash(cands)
    put("candidates.json", cands)
    put("manifest.json", manifest(res))
    return files


def manifest(res: PipelineResult) -> dict:
    prov = res.report.provenance
    return {
        "tool": "deltaspec",
        "version": __version__,
        "commit": res.commit.name,
        "seeds": {"testgen": res.options.seed, "fuzz": res.options.seed},
        "options": asdict(res.options),
        "inputs": prov.get("inputs", {}),
        "suites": prov.get("suites", {}),
        "grammar_hashes": prov.get("grammar_hashes", {}),
        "timings": res.timings,
    }


def partition_keys(report: DeltaReport) -> Dict[str, List[str]]:
    return {p: [i.key for i in report.partition(p)] for p in PARTITIONS}


# --- experiments -------------------------------------------------------------

RQ3_POOLS = ("added", "preserved")
RQ4_POOLS = ("added", "allValidPost", "preserved")


def run_rq3(inputs: ExperimentInputs, seed: int, reps: int):
    from .experiments import SimConfig, simulate_fixed_size

    cfg = SimConfig(seed=seed, reps=reps)
    return cfg, simulate_fixed_size(inputs.matrix, inputs.relevance, cfg, {p: inputs.pools[p] for p in RQ3_POOLS})


def run_rq4(inputs: ExperimentInputs, seed: int, reps: int):
    from .experiments import SimConfig, simulate_to_target

    cfg = SimConfig(seed=seed, reps=reps)
    return cfg, simulate_to_target(inputs.matrix, inputs.relevance, cfg, {p: inputs.pools[p] for p in RQ4_POOLS})
