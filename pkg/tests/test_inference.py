import random
from dataclasses import replace

import numpy as np
import pytest

from conftest import CASES, SUM_SRC, load_side, pipeline
from deltaspec.assertlang import parse_assertion, semantic_key, unit_scope
from deltaspec.inference import (
    DISCARDED_IRRELEVANT,
    DISCARDED_REDUNDANT,
    INVALID,
    SKIPS,
    SPEC,
    UNDETERMINED,
    VALID,
    MatrixMismatch,
    SpecConfig,
    classify,
    filter_by_mutation,
    infer_spec,
    soundness_violations,
)
from deltaspec.interpreter import Call, TestCase as Case
from deltaspec.minilang import parse_unit
from deltaspec.minilang.points import invariant_point, post_point
from deltaspec.mutation import KillMatrix
from deltaspec.testgen import GenConfig, TestSuite as Suite, generate_suite, replay_suite

NOFILTER = SpecConfig(mutation_filter=False)


@pytest.fixture(scope="module")
def unit():
    return parse_unit(SUM_SRC)


@pytest.fixture(scope="module")
def suite(unit):
    return generate_suite(unit, GenConfig(seed=1, max_tests=60))


def A(unit, text, point=None):
    point = point or invariant_point(unit)
    return parse_assertion(text, point, unit_scope(unit, point))


def increments(unit, k):
    t = Case("t0", (Call("init", ()),) + tuple(Call("increment", (1.0,)) for _ in range(k)))
    return replay_suite(unit, [t], GenConfig())


def test_nonnegative_count_is_valid(unit, suite):
    a = A(unit, "n >= 0")
    t = classify([a], suite, NOFILTER, unit)
    assert t.status(a.key) == VALID
    assert t.entries[a.key].eval_count >= NOFILTER.min_support


def test_fresh_object_nan_rule_invalid_on_post():
    post = load_side("sum_fix", "post")
    pre = load_side("sum_fix", "pre")
    a = A(post, "(n == 0) ==> isnan(value)")
    t_post = classify([a], generate_suite(post, GenConfig(seed=1)), NOFILTER, post)
    t_pre = classify([a], generate_suite(pre, GenConfig(seed=1)), NOFILTER, pre)
    assert t_post.status(a.key) == INVALID
    assert t_post.entries[a.key].falsifier is not None
    assert t_pre.status(a.key) == VALID


def test_min_support_threshold(unit):
    a = A(unit, "n == old(n) + 1", post_point(unit, "increment"))
    assert classify([a], increments(unit, 3), NOFILTER, unit).status(a.key) == UNDETERMINED
    assert classify([a], increments(unit, 5), NOFILTER, unit).status(a.key) == VALID
    lax = SpecConfig(min_support=3, mutation_filter=False)
    assert classify([a], increments(unit, 3), lax, unit).status(a.key) == VALID


def test_vacuous_guard_gives_no_support(unit):
    # the guard n == 2 holds at only one invariant observation per test
    a = A(unit, "(n == 2) ==> value >= 0.0")
    e = classify([a], increments(unit, 4), NOFILTER, unit).entries[a.key]
    assert e.status == UNDETERMINED and e.eval_count == 1


def test_eval_error_policy(unit, suite):
    a = A(unit, "1 / n >= 0")
    assert classify([a], suite, NOFILTER, unit).status(a.key) == INVALID
    skips = SpecConfig(eval_error_policy=SKIPS, mutation_filter=False)
    assert classify([a], suite, skips, unit).status(a.key) == VALID


def test_config_validation():
    with pytest.raises(ValueError):
        SpecConfig(min_support=0)
    with pytest.raises(ValueError):
        SpecConfig(eval_error_policy="IGNORE")


def test_empty_suite(unit):
    cands = [A(unit, "n >= 0"), A(unit, "value == value")]
    res = infer_spec(unit, Suite(unit.name, GenConfig(), [], []), cands, SpecConfig())
    assert {e.status for e in res.table.entries.values()} == {UNDETERMINED}
    assert res.table.spec() == []
    assert res.table.warnings


def test_order_independence(unit, suite):
    cands = pipeline("sum_fix").candidates.assertions
    base = classify(cands, suite, NOFILTER, unit).to_json()
    tests = list(suite.tests)
    random.Random(3).shuffle(tests)
    shuffled = replay_suite(unit, tests, suite.config)
    assert classify(cands, shuffled, NOFILTER, unit).to_json() == base


def test_invalid_is_monotone_under_more_tests(unit, suite):
    cands = pipeline("sum_fix").candidates.assertions
    full = classify(cands, suite, NOFILTER, unit)
    part = classify(cands, replay_suite(unit, suite.tests[:15], suite.config), NOFILTER, unit)
    for k, e in part.entries.items():
        if e.status == INVALID:
            assert full.status(k) == INVALID


# --- mutation filter ----------------------------------------------------------


def _table(unit, suite, texts):
    cands = [A(unit, t) for t in texts]
    t = classify(cands, suite, NOFILTER, unit)
    assert all(t.status(a.key) == VALID for a in cands)
    return t, [a.key for a in cands]


def test_zero_kill_assertion_is_irrelevant(unit, suite):
    t, keys = _table(unit, suite, ["n >= 0", "n >= -1"])
    km = KillMatrix(keys, ["m1", "m2"], np.array([[True, False], [False, False]]), {}, np.zeros(2, bool))
    out = filter_by_mutation(t, km, SpecConfig())
    assert out.entries[keys[0]].bucket == SPEC and out.entries[keys[0]].kill_count == 1
    assert out.entries[keys[1]].bucket == DISCARDED_IRRELEVANT
    assert [a.key for a in out.spec()] == [keys[0]]


def test_representatives_only(unit, suite):
    t, keys = _table(unit, suite, ["n >= -1", "n >= 0", "value == value"])
    killed = np.array([[True, True], [True, True], [False, True]])
    km = KillMatrix(keys, ["m1", "m2"], killed, {}, np.zeros(2, bool))
    kept = filter_by_mutation(t, km, SpecConfig(keep_representatives_only=True))
    assert {a.key for a in kept.spec()} == {keys[1], keys[2]}  # shortest text wins
    assert kept.entries[keys[0]].bucket == DISCARDED_REDUNDANT
    assert len(filter_by_mutation(t, km, SpecConfig()).spec()) == 3


def test_all_zero_matrix(unit, suite):
    t, keys = _table(unit, suite, ["n >= 0", "n >= -1", "value == value"])
    km = KillMatrix(keys, ["m1"], np.zeros((3, 1), bool), {}, np.zeros(1, bool))
    out = filter_by_mutation(t, km, SpecConfig())
    assert out.spec() == []
    assert {out.entries[k].bucket for k in keys} == {DISCARDED_IRRELEVANT}


def test_matrix_mismatch(unit, suite):
    t, keys = _table(unit, suite, ["n >= 0", "n >= -1"])
    km = KillMatrix(keys[:1], ["m1"], np.ones((1, 1), bool), {}, np.zeros(1, bool))
    with pytest.raises(MatrixMismatch):
        filter_by_mutation(t, km, SpecConfig())


# --- full inference -----------------------------------------------------------


def test_sum_post_spec_covers_fixed_contract():
    res = pipeline("sum_fix")
    post = res.post
    spec = res.inf_post.table.spec()
    wanted = [
        ("(n == 0) ==> value == 0.0", invariant_point(post)),
        ("n >= 0", invariant_point(post)),
        ("n == old(n) + 1", post_point(post, "increment")),
        ("value == old(value) + d", post_point(post, "increment")),
    ]
    for text, point in wanted:
        scope = res.scopes[point.id]
        key = semantic_key(parse_assertion(text, point, scope).body, scope)
        hits = [a for a in spec if a.point == point and semantic_key(a.body, scope) == key]
        assert hits, text


def test_refactor_gives_identical_valid_sets():
    res = pipeline("refactor_iterator")
    assert res.inf_pre.table.valid_keys() == res.inf_post.table.valid_keys()
    assert res.inf_post.table.valid_keys()


@pytest.mark.parametrize("case", CASES)
def test_soundness_recheck(case):
    res = pipeline(case)
    assert soundness_violations(res.inf_pre.table, res.suite_pre, res.pre) == []
    assert soundness_violations(res.inf_post.table, res.suite_post, res.post) == []


def test_soundness_recheck_catches_planted_error(unit, suite):
    a = A(unit, "n == 0")
    t = classify([a], suite, NOFILTER, unit)
    assert t.status(a.key) == INVALID
    t.entries[a.key] = replace(t.entries[a.key], status=VALID)
    assert soundness_violations(t, suite, unit) == [a.key]


def test_infer_spec_is_deterministic(unit, suite):
    cands = pipeline("sum_fix").candidates.assertions[:300]
    a = infer_spec(unit, suite, cands, SpecConfig()).table.to_json()
    b = infer_spec(unit, suite, cands, SpecConfig()).table.to_json()
    assert a == b


def test_status_json_shape(unit, suite):
    d = classify([A(unit, "n >= 0")], suite, NOFILTER, unit, "post").to_json()
    assert d["version"] == "post"
    (e,) = d["entries"]
    assert {"assertion", "status", "evalCount", "killCount"} <= set(e)
