from __future__ import annotations

from dataclasses import dataclass, field
from typing import FrozenSet, List, Optional

from . import ast as A
from .lexer import token_keys
from .printer import body_text

INVARIANT = "ClassInvariant"
POST = "MethodPost"


class NameMismatch(ValueError):
    pass


@dataclass(frozen=True, order=True)
class ProgramPoint:
    kind: str
    unit_name: str
    method_name: Optional[str] = None

    @property
    def label(self) -> str:
        """Short form used in files: ``inv`` or ``<method>``."""
        return "inv" if self.kind == INVARIANT else self.method_name

    @property
    def id(self) -> str:
        return "inv" if self.kind == INVARIANT else f"{self.method_name}.post"

    def sort_key(self):
        return (self.kind != INVARIANT, self.method_name or "")


def invariant_point(unit: A.Unit) -> ProgramPoint:
    return ProgramPoint(INVARIANT, unit.name)


def post_point(unit: A.Unit, method: str) -> ProgramPoint:
    return ProgramPoint(POST, unit.name, method)


def program_points(unit: A.Unit) -> List[ProgramPoint]:
    """One invariant point, then one exit point per callable (constructor first)."""
    return [invariant_point(unit)] + [post_point(unit, m.name) for m in unit.callables()]


def point_from_label(unit_name: str, label: str) -> ProgramPoint:
    label = label.strip()
    if label in ("inv", "invariant"):
        return ProgramPoint(INVARIANT, unit_name)
    if label.endswith(".post"):
        label = label[: -len(".post")]
    return ProgramPoint(POST, unit_name, label)


def body_tokens(m: A.Method) -> list:
    return token_keys(body_text(m.body))


@dataclass(frozen=True)
class CommonPoints:
    shared: FrozenSet[ProgramPoint]
    changed_methods: FrozenSet[str]
    added_methods: FrozenSet[str] = field(default_factory=frozenset)
    removed_methods: FrozenSet[str] = field(default_factory=frozenset)

    def sorted_shared(self) -> List[ProgramPoint]:
        return sorted(self.shared, key=ProgramPoint.sort_key)


def diff_common_points(pre: A.Unit, post: A.Unit) -> CommonPoints:
    if pre.name != post.name:
        raise NameMismatch(f"unit names differ: {pre.name!r} vs {post.name!r}")
    pre_m = {m.name: m for m in pre.callables()}
    post_m = {m.name: m for m in post.callables()}
    shared = {invariant_point(post)}
    changed = set()
    added = set()
    removed = set()
    for name, m in post_m.items():
        old = pre_m.get(name)
        if old is None or old.signature != m.signature:
            added.add(name)
            if old is not None:
                removed.add(name)
            continue
        shared.add(post_point(post, name))
        if body_tokens(old) != body_tokens(m):
            changed.add(name)
    for name in pre_m:
        if name not in post_m:
            removed.add(name)
    return CommonPoints(frozenset(shared), frozenset(changed), frozenset(added), frozenset(removed))
