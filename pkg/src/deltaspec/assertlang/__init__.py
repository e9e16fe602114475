"""Candidate assertion language: syntax, evaluation, normalization, grammar, fuzzing, equivalence."""

from . import ast
from .ast import Assertion
from .equiv import EQUIVALENT, DomainConfig, DomainTooLarge, Witness, bounded_equiv, equivalence_classes, semantic_key
from .evaluate import ERROR, FALSE, TRUE, ObsTable, eval_assertion, evaluate, support_mask
from .fuzz import CandidateSet, derivation_space, fuzz_candidates
from .grammar import DEFAULT_MAX_NODES, Grammar, UnknownPoint, instantiate_grammar
from .normalize import is_trivial, normalize, normalize_expr
from .parser import AssertionScopeError, AssertionSyntaxError, parse_assertion, parse_expr, scope_for, type_of, unit_scope

__all__ = [
    "ast",
    "Assertion",
    "AssertionScopeError",
    "AssertionSyntaxError",
    "CandidateSet",
    "DEFAULT_MAX_NODES",
    "DomainConfig",
    "DomainTooLarge",
    "EQUIVALENT",
    "ERROR",
    "FALSE",
    "Grammar",
    "ObsTable",
    "TRUE",
    "UnknownPoint",
    "Witness",
    "bounded_equiv",
    "derivation_space",
    "equivalence_classes",
    "eval_assertion",
    "evaluate",
    "fuzz_candidates",
    "instantiate_grammar",
    "is_trivial",
    "normalize",
    "normalize_expr",
    "parse_assertion",
    "parse_expr",
    "scope_for",
    "semantic_key",
    "support_mask",
    "type_of",
    "unit_scope",
]
