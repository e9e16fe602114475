import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import CASES, load_side
from deltaspec.assertlang import (
    EQUIVALENT,
    DomainConfig,
    DomainTooLarge,
    ObsTable,
    Witness,
    AssertionScopeError,
    AssertionSyntaxError,
    ast as S,
    bounded_equiv,
    derivation_space,
    equivalence_classes,
    evaluate,
    fuzz_candidates,
    instantiate_grammar,
    is_trivial,
    normalize,
    normalize_expr,
    parse_assertion,
    parse_expr,
    semantic_key,
    support_mask,
    UnknownPoint,
)
from deltaspec.assertlang.equiv import environment_table
from deltaspec.assertlang.evaluate import OUTCOME_NAMES
from deltaspec.minilang.points import INVARIANT, POST, ProgramPoint, diff_common_points
from oracle_eval import outcome

INV = ProgramPoint(INVARIANT, "Sum")
INC = ProgramPoint(POST, "Sum", "increment")
GET = ProgramPoint(POST, "Sum", "getResult")
SUM_INV = {"n": "int", "value": "real"}
SUM_INC = {"n": "int", "value": "real", "old:n": "int", "old:value": "real", "d": "real"}
ARR = {"n": "int", "value": "real", "data": "real[]", "ks": "int[]", "flag": "bool"}


def codes_of(text, rows, scope):
    c, _ = evaluate(parse_expr(text), ObsTable.from_rows(rows, scope))
    return [OUTCOME_NAMES[int(x)] for x in c]


def one(text, row, scope):
    return codes_of(text, [row], scope)[0]


def grammars():
    for case in CASES:
        pre, post = load_side(case, "pre"), load_side(case, "post")
        for p in sorted(diff_common_points(pre, post).shared, key=lambda p: p.sort_key()):
            yield case, instantiate_grammar(pre, post, p)


# --- parsing ------------------------------------------------------------------


@pytest.mark.parametrize("text", [
    "n >=",
    "n == == 1",
    "forall i in data data[i] > 0",
    "(n > 0",
    "n @ 1",
    "1 < n < 3",
])
def test_syntax_errors(text):
    with pytest.raises(AssertionSyntaxError):
        parse_expr(text)


@pytest.mark.parametrize("text,point,scope", [
    ("old(n) == 0", INV, SUM_INV),
    ("result == 0.0", INC, SUM_INC),
    ("zz > 0", INV, SUM_INV),
    ("data[0] > 0.0", INV, ARR),
    ("forall i in data: exists j in data: data[j] > 0.0", INV, ARR),
    ("n + true > 0", INV, ARR),
    ("n", INV, SUM_INV),
])
def test_scope_errors(text, point, scope):
    with pytest.raises((AssertionScopeError, AssertionSyntaxError)):
        parse_assertion(text, point, scope)


def test_isnan_accepts_ints():
    a = parse_assertion("isnan(n)", INV, SUM_INV)
    assert one(S.to_text(a.body), {"n": 0, "value": 0.0}, SUM_INV) == "FALSE"


def test_int_literal_range():
    parse_assertion("n != 9223372036854775807", INV, SUM_INV)
    parse_assertion("n != -9223372036854775808", INV, SUM_INV)
    with pytest.raises((AssertionSyntaxError, AssertionScopeError)):
        parse_assertion("n != 9223372036854775808", INV, SUM_INV)


def test_precedence_and_roundtrip():
    e = parse_expr("n > 0 && n < 5 || isnan(value) ==> n == 1 ==> value > 0.0")
    assert isinstance(e, S.Implies)
    assert isinstance(e.right, S.Implies)  # right associative
    assert isinstance(e.left, S.Or) and isinstance(e.left.left, S.And)
    assert parse_expr(S.to_text(e)) == e
    m = parse_expr("n + 2 * 3 == 7")
    assert isinstance(m.left, S.Arith) and m.left.op == "+"


def test_parse_of_print_over_fuzzed_space():
    for _, g in grammars():
        for e in derivation_space(g)[:400]:
            assert parse_expr(S.to_text(e)) == e


# --- evaluation examples ------------------------------------------------------


def test_old_increment():
    row = {"n": 1, "old:n": 0, "value": 0.0, "old:value": 0.0, "d": 0.0}
    assert one("n == old(n) + 1", row, SUM_INC) == "TRUE"


def test_implication_with_isnan():
    assert one("(n == 0) ==> isnan(value)", {"n": 0, "value": math.nan}, SUM_INV) == "TRUE"
    assert one("(n == 0) ==> isnan(value)", {"n": 0, "value": 0.0}, SUM_INV) == "FALSE"


def test_empty_array_rules():
    row = {"n": 0, "value": 0.0, "data": (), "ks": (), "flag": False}
    assert one("forall i in data: data[i] >= 0.0", row, ARR) == "TRUE"
    assert one("exists i in data: data[i] >= 0.0", row, ARR) == "FALSE"
    assert one("sum(data) == 0.0", row, ARR) == "TRUE"
    assert one("sumabs(ks) == 0", row, ARR) == "TRUE"
    for fn in ("max", "maxabs", "min"):
        assert one(f"{fn}(data) == 0.0", row, ARR) == "EVAL_ERROR"


def test_arithmetic_errors():
    big = {"n": 2**63 - 1, "value": 0.0, "data": (1.0,), "ks": (2**63 - 1, 1), "flag": True}
    assert one("n + 1 > 0", big, ARR) == "EVAL_ERROR"
    assert one("n / 0 == 0", big, ARR) == "EVAL_ERROR"
    assert one("n % 0 == 0", big, ARR) == "EVAL_ERROR"
    assert one("sum(ks) > 0", big, ARR) == "EVAL_ERROR"
    # real division by zero is IEEE, not an error
    assert one("isnan(value / 0.0)", big, ARR) == "TRUE"


def test_nan_comparisons():
    row = {"n": 0, "value": math.nan}
    assert one("value == value", row, SUM_INV) == "TRUE"
    assert one("value != value", row, SUM_INV) == "FALSE"
    assert one("value < 1.0", row, SUM_INV) == "FALSE"
    assert one("value >= 1.0", row, SUM_INV) == "FALSE"


def test_unbound_identifier_is_error():
    assert one("n >= 0", {"value": 1.0}, SUM_INV) == "EVAL_ERROR"


def test_short_circuit_hides_errors():
    row = {"n": 0, "value": 1.0}
    assert one("n != 0 ==> 1 / n == 0", row, SUM_INV) == "TRUE"
    assert one("n == 0 || 1 / n == 0", row, SUM_INV) == "TRUE"
    assert one("n != 0 && 1 / n == 0", row, SUM_INV) == "FALSE"
    assert one("n == 0 && 1 / n == 0", row, SUM_INV) == "EVAL_ERROR"


def test_int_division_truncates():
    row = {"n": -7, "value": 0.0}
    assert one("n / 2 == -3", row, SUM_INV) == "TRUE"
    assert one("n % 2 == -1", row, SUM_INV) == "TRUE"


def test_support_ignores_vacuous_implications():
    rows = [{"n": 0, "value": math.nan}, {"n": 3, "value": 1.0}, {"n": 0, "value": math.nan}]
    body = parse_expr("(n == 0) ==> isnan(value)")
    table = ObsTable.from_rows(rows, SUM_INV)
    codes, _ = evaluate(body, table)
    assert list(codes) == [1, 1, 1]
    assert list(support_mask(body, table, codes)) == [True, False, True]
    plain = parse_expr("n >= 0")
    c2, _ = evaluate(plain, table)
    assert support_mask(plain, table, c2).all()


# --- independent oracle agreement ---------------------------------------------

_EDGE_INT = (0, 1, -1, 2, -2, 7, 2**63 - 1, -(2**63), 2**62)
_EDGE_REAL = (0.0, -0.0, 1.0, -1.5, 0.5, math.nan, math.inf, -math.inf, 1e308, 3.0)


def random_value(rng, t):
    if t.endswith("[]"):
        return tuple(random_value(rng, t[:-2]) for _ in range(rng.randrange(4)))
    if t == "int":
        return rng.choice(_EDGE_INT) if rng.random() < 0.5 else rng.randrange(-5, 6)
    if t == "real":
        return rng.choice(_EDGE_REAL) if rng.random() < 0.5 else float(rng.randrange(-8, 9)) / 2
    return rng.random() < 0.5


def random_rows(rng, scope, k):
    return [{key: random_value(rng, t) for key, t in scope.items()} for _ in range(k)]


@pytest.mark.parametrize("case", CASES)
def test_vectorized_matches_oracle_on_corpus_candidates(case):
    rng = random.Random(case)
    for c, g in grammars():
        if c != case:
            continue
        cands = fuzz_candidates(g, seed=3, n=250).assertions
        rows = random_rows(rng, g.scope, 40)
        table = ObsTable.from_rows(rows, g.scope)
        for a in cands:
            got, _ = evaluate(a.body, table)
            want = [outcome(a.body, r, g.scope) for r in rows]
            assert [OUTCOME_NAMES[int(x)] for x in got] == want, a.text


# hand-built expression texts over ARR
_int_atom = st.sampled_from(["n", "len(data)", "len(ks)", "sum(ks)", "max(ks)", "0", "1", "-1", "2",
                             "9223372036854775807"])
_real_atom = st.sampled_from(["value", "sum(data)", "max(data)", "min(data)", "sumabs(data)",
                              "maxabs(data)", "0.0", "1.5", "nan", "-0.5"])


def _arith(atom):
    return st.recursive(atom, lambda c: st.tuples(c, st.sampled_from("+-*/%"), c).map(
        lambda t: f"({t[0]} {t[1]} {t[2]})"), max_leaves=3)


_num = st.one_of(_arith(_int_atom), _arith(st.one_of(_real_atom, _int_atom)))
_cmp = st.tuples(_num, st.sampled_from(["==", "!=", "<", "<=", ">", ">="]), _num).map(
    lambda t: f"{t[0]} {t[1]} {t[2]}")
_quant = st.tuples(st.sampled_from(["forall", "exists"]),
                   st.sampled_from(["data[i] >= value", "data[i] != 0.0", "i < n", "isnan(data[i])"])).map(
    lambda t: f"{t[0]} i in data: {t[1]}")
_atom_bool = st.one_of(_cmp, _quant, st.sampled_from(["flag", "isnan(value)", "isnan(sum(data))"]))
_bool = st.recursive(_atom_bool, lambda c: st.one_of(
    c.map(lambda x: f"!({x})"),
    st.tuples(c, st.sampled_from(["&&", "||", "==>"]), c).map(lambda t: f"({t[0]}) {t[1]} ({t[2]})"),
), max_leaves=4)


@settings(max_examples=300, deadline=None)
@given(text=_bool, seed=st.integers(0, 10_000))
def test_vectorized_matches_oracle_on_random_expressions(text, seed):
    e = parse_assertion(text, INV, ARR).body
    rows = random_rows(random.Random(seed), ARR, 12)
    got, _ = evaluate(e, ObsTable.from_rows(rows, ARR))
    assert [OUTCOME_NAMES[int(x)] for x in got] == [outcome(e, r, ARR) for r in rows]


# --- normalization ------------------------------------------------------------


def test_orientation_shares_key():
    a = normalize(parse_assertion("0 <= n", INV, SUM_INV))
    b = normalize(parse_assertion("n >= 0", INV, SUM_INV))
    assert a.key == b.key
    assert S.to_text(a.body) == "0 <= n"


def test_double_negation_of_ne():
    e = normalize_expr(parse_expr("!(n != value)"))
    assert e == normalize_expr(parse_expr("n == value"))


def test_constant_folding_and_triviality():
    assert normalize_expr(parse_expr("n >= 1 + 1")) == normalize_expr(parse_expr("n >= 2"))
    assert is_trivial(normalize_expr(parse_expr("0 == 0")))
    assert is_trivial(normalize_expr(parse_expr("1 < 0")))
    assert not is_trivial(normalize_expr(parse_expr("n == 0")))


@settings(max_examples=200, deadline=None)
@given(text=_bool)
def test_normalize_is_idempotent(text):
    e = normalize_expr(parse_expr(text))
    assert normalize_expr(e) == e


def _all_env_codes(e, scope, d=DomainConfig(real_domain=(-1.5, 0.0, 1.0, math.nan), array_lens=(0, 1, 2))):
    keys = sorted(k for k in scope if k in S.free_names(e) or True)
    table, _, _ = environment_table(keys, scope, d)
    return evaluate(e, table)[0]


_SMALL = {"n": "int", "value": "real", "data": "real[]"}
_small_bool = st.recursive(
    st.one_of(
        st.tuples(st.sampled_from(["n", "0", "1", "-1", "(n * 2)", "(n - 1)", "len(data)"]),
                  st.sampled_from(["==", "!=", "<", "<=", ">", ">="]),
                  st.sampled_from(["n", "0", "2", "len(data)", "(1 + 1)"])).map(" ".join),
        st.tuples(st.sampled_from(["value", "0.0", "nan", "sum(data)", "max(data)", "(value / 0.0)"]),
                  st.sampled_from(["==", "!=", "<", "<=", ">", ">="]),
                  st.sampled_from(["value", "1.0", "n", "maxabs(data)"])).map(" ".join),
        st.sampled_from(["isnan(value)", "forall i in data: data[i] > value", "exists i in data: i == n"]),
    ),
    lambda c: st.one_of(
        c.map(lambda x: f"!({x})"),
        st.tuples(c, st.sampled_from(["&&", "||", "==>"]), c).map(lambda t: f"({t[0]}) {t[1]} ({t[2]})")),
    max_leaves=3)


@settings(max_examples=150, deadline=None)
@given(text=_small_bool)
def test_normalize_preserves_outcomes_on_every_environment(text):
    e = parse_assertion(text, INV, _SMALL).body
    before = _all_env_codes(e, _SMALL)
    after = _all_env_codes(normalize_expr(e), _SMALL)
    assert np.array_equal(before, after)


def test_normalize_preserves_fuzzed_corpus_candidates():
    # fuzzed candidates are already normalized; their raw derivations must agree too
    d = DomainConfig()
    for case, g in grammars():
        if not g.scope:
            continue
        space = derivation_space(g)
        sample = random.Random(7).sample(space, min(40, len(space)))
        for e in sample:
            assert normalize_expr(e) == e
            keys = sorted(g.scope)
            if sum(t.endswith("[]") for t in g.scope.values()) > 1:
                continue
            table, _, _ = environment_table(keys, g.scope, DomainConfig(array_lens=(0, 1, 2)))
            np.testing.assert_array_equal(evaluate(e, table)[0], evaluate(normalize_expr(e), table)[0])


# --- bounded equivalence ------------------------------------------------------


def test_equiv_examples():
    a = parse_assertion("(n == 0) ==> value == 0.0", INV, SUM_INV)
    b = parse_assertion("n != 0 || value == 0.0", INV, SUM_INV)
    assert bounded_equiv(a, b, SUM_INV) == EQUIVALENT
    w = bounded_equiv(parse_assertion("n > 0", INV, SUM_INV), parse_assertion("n >= 0", INV, SUM_INV), SUM_INV)
    assert isinstance(w, Witness)
    assert w.env == {"n": 0} and (w.left, w.right) == ("FALSE", "TRUE")
    assert bounded_equiv(parse_assertion("n >= 0", INV, SUM_INV),
                         parse_assertion("0 <= n", INV, SUM_INV), SUM_INV) == EQUIVALENT


def test_equiv_error_is_a_distinct_value():
    a = parse_assertion("max(data) >= 0.0", INV, ARR)
    b = parse_assertion("len(data) > 0 && max(data) >= 0.0", INV, ARR)
    w = bounded_equiv(a, b, ARR)
    assert isinstance(w, Witness) and w.left == "EVAL_ERROR" and w.right == "FALSE"


def test_equiv_rejects_mixed_points_and_huge_domains():
    with pytest.raises(ValueError):
        bounded_equiv(parse_assertion("n >= 0", INV, SUM_INV), parse_assertion("n >= 0", INC, SUM_INC), SUM_INV)
    wide = {f"x{i}": "int" for i in range(12)}
    body = " && ".join(f"x{i} >= 0" for i in range(12))
    a = parse_assertion(body, INV, wide)
    with pytest.raises(DomainTooLarge):
        bounded_equiv(a, a, wide)


def test_equiv_ignores_irrelevant_identifiers():
    a = parse_assertion("n >= 0 || value == value", INV, SUM_INV)
    b = parse_assertion("value == value || value != value", INV, SUM_INV)
    assert bounded_equiv(a, b, SUM_INV) == EQUIVALENT
    assert semantic_key(a.body, SUM_INV) == semantic_key(b.body, SUM_INV)


def test_equivalence_relation_on_candidates():
    rng = random.Random(11)
    for case, g in grammars():
        cands = fuzz_candidates(g, seed=1, n=120).assertions
        if len(cands) < 3:
            continue
        keys = {a.text: semantic_key(a.body, g.scope) for a in cands}
        for a in rng.sample(cands, 5):
            assert bounded_equiv(a, a, g.scope) == EQUIVALENT
        for _ in range(40):
            a, b = rng.sample(cands, 2)
            ab = bounded_equiv(a, b, g.scope) == EQUIVALENT
            assert ab == (bounded_equiv(b, a, g.scope) == EQUIVALENT)
            assert ab == (keys[a.text] == keys[b.text])
        classes = equivalence_classes([a.body for a in cands], g.scope)
        for cls in classes:
            if len(cls) >= 3:
                x, y, z = (cands[i] for i in cls[:3])
                assert bounded_equiv(x, y, g.scope) == EQUIVALENT
                assert bounded_equiv(y, z, g.scope) == EQUIVALENT
                assert bounded_equiv(x, z, g.scope) == EQUIVALENT


# --- grammar and fuzzing ------------------------------------------------------


def _sum_grammar(point_name):
    pre, post = load_side("sum_fix", "pre"), load_side("sum_fix", "post")
    p = ProgramPoint(INVARIANT, "Sum") if point_name == "inv" else ProgramPoint(POST, "Sum", point_name)
    return instantiate_grammar(pre, post, p)


def test_grammar_terminals_by_point_kind():
    g = _sum_grammar("increment")
    assert {"d", "n", "value", "old:n", "old:value"} <= set(g.terminals)
    assert "result" not in g.terminals
    assert "result" in _sum_grammar("getResult").terminals
    assert not any(t.startswith("old:") or t == "result" for t in _sum_grammar("inv").terminals)


def test_grammar_literal_pool_spans_both_sides():
    g = _sum_grammar("inv")
    assert {-1, 0, 1} <= set(g.int_lits)
    assert any(math.isnan(v) for v in g.real_lits)  # nan only occurs in the pre version


def test_grammar_same_for_both_orders():
    pre, post = load_side("sum_fix", "pre"), load_side("sum_fix", "post")
    g1 = instantiate_grammar(pre, post, INC)
    g2 = instantiate_grammar(post, pre, INC)
    assert g1.fingerprint() == g2.fingerprint()


def test_grammar_unknown_point():
    pre, post = load_side("sum_fix", "pre"), load_side("sum_fix", "post")
    with pytest.raises(UnknownPoint):
        instantiate_grammar(pre, post, ProgramPoint(POST, "Sum", "nope"))


def test_linf_aggregates_available():
    pre, post = load_side("linf_norm", "pre"), load_side("linf_norm", "post")
    p = ProgramPoint(POST, post.name, "getLInfNorm")
    texts = {S.to_text(e) for e in derivation_space(instantiate_grammar(pre, post, p))}
    assert "maxabs(data) == result" in texts or "result == maxabs(data)" in texts
    assert any("sumabs(data)" in t for t in texts)


def test_max_nodes_bounds_candidates():
    for _, g in grammars():
        for e in derivation_space(g):
            assert S.size(e) <= g.max_nodes


@pytest.mark.parametrize("seed", [1, 2, 99, 2**40])
def test_fuzz_contains_nonnegative_count(seed):
    keys = fuzz_candidates(_sum_grammar("inv"), seed, 100).keys()
    assert normalize(parse_assertion("n >= 0", INV, SUM_INV)).key in keys


def test_fuzz_dedups_and_is_normalized():
    g = _sum_grammar("increment")
    cs = fuzz_candidates(g, 5, 2000)
    keys = cs.keys()
    assert len(keys) == len(set(keys)) <= 2000
    for a in cs.assertions[:300]:
        assert normalize(a) == a
        assert not is_trivial(a.body)


def test_fuzz_full_space_when_budget_exceeds_it():
    g = _sum_grammar("inv")
    space = derivation_space(g)
    cs = fuzz_candidates(g, 1, len(space) + 500)
    assert len(cs) == len(space)
    assert len(set(cs.keys())) == len(space)


def test_fuzz_deterministic_and_seed_sensitive():
    g = _sum_grammar("increment")
    a = fuzz_candidates(g, 4, 700).keys()
    assert a == fuzz_candidates(g, 4, 700).keys()
    assert set(a) != set(fuzz_candidates(g, 5, 700).keys())
    with pytest.raises(ValueError):
        fuzz_candidates(g, 4, 0)


def test_fig5_largest_assertion_is_derivable():
    g = _sum_grammar("increment")
    target = normalize(parse_assertion("(n > 0) ==> value == old(value) + d", INC, SUM_INC)).body
    assert target in derivation_space(g)
