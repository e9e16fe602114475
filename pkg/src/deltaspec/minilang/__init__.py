"""The DL class language: parsing, checking, printing, version diffing."""

from pathlib import Path

from . import ast
from .checker import DLTypeError, DuplicateName, check_unit
from .lexer import DiagnosticError, DLSyntaxError, token_keys, tokenize
from .parser import parse_source
from .points import (
    INVARIANT,
    POST,
    CommonPoints,
    NameMismatch,
    ProgramPoint,
    diff_common_points,
    invariant_point,
    point_from_label,
    post_point,
    program_points,
)
from .printer import unit_text


def parse_unit(source: str) -> ast.Unit:
    """Parse and type-check one DL class.

    Raises a :class:`DiagnosticError` subclass (syntax, type, duplicate name)
    carrying the line and column of the first problem.
    """
    return check_unit(parse_source(source))


def load_unit(path) -> ast.Unit:
    return parse_unit(Path(path).read_text(encoding="utf-8"))


__all__ = [
    "ast",
    "CommonPoints",
    "DiagnosticError",
    "DLSyntaxError",
    "DLTypeError",
    "DuplicateName",
    "INVARIANT",
    "NameMismatch",
    "POST",
    "ProgramPoint",
    "check_unit",
    "diff_common_points",
    "invariant_point",
    "load_unit",
    "parse_source",
    "parse_unit",
    "point_from_label",
    "post_point",
    "program_points",
    "token_keys",
    "tokenize",
    "unit_text",
]
