"""Set algebra over two status tables, equivalence reduction and truth matching."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .assertlang import ast as S
from .assertlang.equiv import DomainConfig, semantic_key
from .assertlang.normalize import normalize
from .assertlang.parser import AssertionScopeError, AssertionSyntaxError, parse_assertion
from .inference import INVALID, UNDETERMINED, VALID, StatusTable
from .minilang.points import ProgramPoint

PAPER = "paper"
STRICT = "strict"
PARTITIONS = ("added", "removed", "preserved")
TAGS = {"+": "added", "-": "removed", "=": "preserved"}


class CandidateMismatch(ValueError):
    pass


class TruthFormatError(ValueError):
    pass


@dataclass
class DeltaItem:
    assertion: S.Assertion
    status_pre: str
    status_post: str
    bucket_pre: Optional[str] = None
    bucket_post: Optional[str] = None
    members: List[str] = field(default_factory=list)  # keys of the equivalence class

    @property
    def key(self) -> str:
        return self.assertion.key

    def to_json(self) -> dict:
        return {
            "point": self.assertion.point.id,
            "assertion": self.assertion.text,
            "status_pre": self.status_pre,
            "status_post": self.status_post,
            "bucket_pre": self.bucket_pre,
            "bucket_post": self.bucket_post,
            "members": [m.split(": ", 1)[1] for m in (self.members or [self.key])],
        }


@dataclass
class DeltaReport:
    commit_id: str
    mode: str
    added: List[DeltaItem]
    removed: List[DeltaItem]
    preserved: List[DeltaItem]
    undetermined: List[DeltaItem]
    provenance: Dict[str, object] = field(default_factory=dict)
    reduced: bool = False

    def partition(self, name: str) -> List[DeltaItem]:
        return getattr(self, name)

    def keys(self, name: str) -> set:
        return {i.key for i in self.partition(name)}

    def member_keys(self, name: str) -> set:
        out = set()
        for i in self.partition(name):
            out.update(i.members or [i.key])
        return out

    def check_invariants(self) -> List[str]:
        problems = []
        a, r, p = self.member_keys("added"), self.member_keys("removed"), self.member_keys("preserved")
        if a & r:
            problems.append("added and removed overlap")
        if (a | r) & p:
            problems.append("delta and preserved overlap")
        if self.mode == STRICT:
            for i in self.added:
                if i.status_pre != INVALID:
                    problems.append(f"added without falsification on pre: {i.key}")
            for i in self.removed:
                if i.status_post != INVALID:
                    problems.append(f"removed without falsification on post: {i.key}")
        return problems

    def to_json(self) -> dict:
        return {
            "commit": self.commit_id,
            "mode": self.mode,
            "reduced": self.reduced,
            "counts": {n: len(self.partition(n)) for n in PARTITIONS + ("undetermined",)},
            "added": [i.to_json() for i in self.added],
            "removed": [i.to_json() for i in self.removed],
            "preserved": [i.to_json() for i in self.preserved],
            "undetermined": [i.to_json() for i in self.undetermined],
            "provenance": self.provenance,
        }


def compute_delta(table_pre: StatusTable, table_post: StatusTable, mode: str = STRICT,
                  commit_id: str = "") -> DeltaReport:
    if mode not in (PAPER, STRICT):
        raise ValueError(f"unknown mode {mode!r}")
    if set(table_pre.entries) != set(table_post.entries):
        raise CandidateMismatch("the two tables were built from different candidate sets")
    added, removed, preserved, undet = [], [], [], []
    for key, post in table_post.entries.items():
        pre = table_pre.entries[key]
        item = DeltaItem(post.assertion, pre.status, post.status, pre.bucket, post.bucket)
        sp, sq = pre.status, post.status
        if sp == VALID and sq == VALID:
            preserved.append(item)
            continue
        if mode == PAPER:
            if sq == VALID:
                added.append(item)
            elif sp == VALID:
                removed.append(item)
        else:
            if sq == VALID and sp == INVALID:
                added.append(item)
            elif sp == VALID and sq == INVALID:
                removed.append(item)
        if (sp == VALID and sq == UNDETERMINED) or (sq == VALID and sp == UNDETERMINED):
            undet.append(item)
    return DeltaReport(commit_id, mode, added, removed, preserved, undet)


def _rank(a: S.Assertion):
    return (len(a.text), a.text)


def reduce_equivalent(report: DeltaReport, scopes: Dict[str, Dict[str, str]],
                      d: Optional[DomainConfig] = None) -> DeltaReport:
    """Group each partition by bounded equivalence; keep the shortest text per class."""
    d = d or DomainConfig()
    cache: Dict[str, tuple] = {}

    def key_of(item: DeltaItem):
        k = item.key
        if k not in cache:
            cache[k] = (item.assertion.point, semantic_key(item.assertion.body, scopes[item.assertion.point.id], d))
        return cache[k]

    def reduce(items: Sequence[DeltaItem]) -> List[DeltaItem]:
        classes: Dict[tuple, List[DeltaItem]] = {}
        for it in items:
            classes.setdefault(key_of(it), []).append(it)
        out = []
        for members in classes.values():
            rep = min(members, key=lambda i: _rank(i.assertion))
            keys = sorted({m for i in members for m in (i.members or [i.key])},
                          key=lambda k: (len(k), k))
            out.append(DeltaItem(rep.assertion, rep.status_pre, rep.status_post, rep.bucket_pre,
                                 rep.bucket_post, keys))
        out.sort(key=lambda i: (i.assertion.point.sort_key(), _rank(i.assertion)))
        return out

    return DeltaReport(report.commit_id, report.mode, reduce(report.added), reduce(report.removed),
                       reduce(report.preserved), reduce(report.undetermined), dict(report.provenance), True)


# --- ground truth ------------------------------------------------------------

_LINE = re.compile(r"^([+\-=])\s*([A-Za-z_][A-Za-z_0-9]*(?:\.post)?)\s*:\s*(.+)$")


@dataclass
class TruthItem:
    partition: str
    point_label: str
    text: str
    line: int
    assertion: Optional[S.Assertion] = None
    reason: Optional[str] = None

    @property
    def expressible(self) -> bool:
        return self.assertion is not None


def parse_truth(text: str, unit_name: str, scopes: Dict[str, Dict[str, str]]) -> List[TruthItem]:
    """Read ``TAG point: assertion`` lines; ``#`` starts a comment.

    Lines whose assertion does not parse or type-check against the point's
    scope are kept as inexpressible.
    """
    from .minilang.points import point_from_label

    items = []
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _LINE.match(line)
        if not m:
            raise TruthFormatError(f"line {n}: expected 'TAG point: assertion'")
        tag, label, body = m.groups()
        item = TruthItem(TAGS[tag], label, body.strip(), n)
        point = point_from_label(unit_name, label)
        scope = scopes.get(point.id)
        if scope is None:
            item.reason = f"no shared point {point.id}"
        else:
            try:
                item.assertion = normalize(parse_assertion(body, point, scope))
            except (AssertionSyntaxError, AssertionScopeError) as exc:
                item.reason = str(exc)
        items.append(item)
    return items


@dataclass
class MatchResult:
    items: List[dict]
    recall: float
    expressible: int
    matched: int
    by_convention: bool
    surplus: Dict[str, List[str]]

    def to_json(self) -> dict:
        return {
            "recall": self.recall,
            "recall_by_convention": self.by_convention,
            "expressible": self.expressible,
            "matched": self.matched,
            "items": self.items,
            "surplus": self.surplus,
        }


def match_ground_truth(report: DeltaReport, truth: Sequence[TruthItem], scopes: Dict[str, Dict[str, str]],
                       d: Optional[DomainConfig] = None) -> MatchResult:
    d = d or DomainConfig()
    keys: Dict[Tuple[str, str], tuple] = {}

    def key_of(a: S.Assertion):
        k = (a.point.id, a.text)
        if k not in keys:
            keys[k] = semantic_key(a.body, scopes[a.point.id], d)
        return keys[k]

    items, matched, used = [], 0, {p: set() for p in PARTITIONS}
    expressible = [t for t in truth if t.expressible]
    for t in truth:
        row = {"partition": t.partition, "point": t.point_label, "assertion": t.text, "line": t.line}
        if not t.expressible:
            row.update(status="INEXPRESSIBLE", reason=t.reason)
            items.append(row)
            continue
        tk = key_of(t.assertion)
        hit = None
        for it in report.partition(t.partition):
            if it.assertion.point == t.assertion.point and key_of(it.assertion) == tk:
                hit = it
                break
        if hit is None:
            row["status"] = "UNMATCHED"
        else:
            matched += 1
            used[t.partition].add(hit.key)
            row.update(status="MATCHED", reported=hit.assertion.text)
        items.append(row)
    surplus = {
        p: [i.key for i in report.partition(p) if i.key not in used[p]] for p in ("added", "removed")
    }
    if expressible:
        recall, conv = matched / len(expressible), False
    else:
        recall, conv = 1.0, True
    return MatchResult(items, recall, len(expressible), matched, conv, surplus)


def render_markdown(report: DeltaReport, points: Sequence[ProgramPoint]) -> str:
    lines = [f"# Delta specification: {report.commit_id}", "",
             f"mode: {report.mode}; added {len(report.added)}, removed {len(report.removed)}, "
             f"preserved {len(report.preserved)}, undetermined {len(report.undetermined)}", ""]
    for p in points:
        a = [i for i in report.added if i.assertion.point == p]
        r = [i for i in report.removed if i.assertion.point == p]
        k = [i for i in report.preserved if i.assertion.point == p]
        if not (a or r or k):
            continue
        lines.append(f"## {p.id}")
        lines.append("")
        lines.append("```diff")
        lines.extend(f"- {i.assertion.text}" for i in r)
        lines.extend(f"+ {i.assertion.text}" for i in a)
        lines.extend(f"  {i.assertion.text}" for i in k)
        lines.append("```")
        lines.append("")
    return "\n".join(lines)
