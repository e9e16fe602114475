"""Seeded derivation of candidate assertions from a :class:`Grammar`.

The derivable space is finite. Candidates are normalized, deduplicated and
ordered by (size, shape, text). Whole size tiers are taken while they fit in
the budget; the first tier that does not fit is sampled with the seed.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field
from typing import Dict, Iterable, List

import numpy as np

from . import ast as S
from .grammar import Grammar, atoms, guards
from .normalize import is_trivial, normalize_expr

_SHAPE_RANK = {"atom": 0, "implies": 1, "or": 2}


@dataclass
class CandidateSet:
    assertions: List[S.Assertion]
    grammar_hashes: Dict[str, str] = field(default_factory=dict)
    space_sizes: Dict[str, int] = field(default_factory=dict)

    def __len__(self):
        return len(self.assertions)

    def __iter__(self):
        return iter(self.assertions)

    def by_point(self) -> Dict[object, List[S.Assertion]]:
        out: Dict[object, List[S.Assertion]] = {}
        for a in self.assertions:
            out.setdefault(a.point, []).append(a)
        return out

    def keys(self) -> List[str]:
        return [a.key for a in self.assertions]

    def to_json(self) -> dict:
        points: Dict[str, List[str]] = {}
        for a in self.assertions:
            points.setdefault(a.point.id, []).append(a.text)
        return {"grammar_hashes": dict(sorted(self.grammar_hashes.items())),
                "space_sizes": dict(sorted(self.space_sizes.items())),
                "points": points}

    @classmethod
    def merge(cls, sets: Iterable["CandidateSet"]) -> "CandidateSet":
        out = cls([])
        for s in sets:
            out.assertions.extend(s.assertions)
            out.grammar_hashes.update(s.grammar_hashes)
            out.space_sizes.update(s.space_sizes)
        return out


def derivation_space(g: Grammar) -> List[S.Expr]:
    """Every distinct normalized, non-trivial candidate within ``g.max_nodes``, ordered."""
    seen: Dict[str, tuple] = {}

    def add(e: S.Expr, shape: str):
        n = normalize_expr(e)
        if is_trivial(n):
            return
        sz = S.size(n)
        if sz > g.max_nodes:
            return
        text = S.to_text(n)
        rank = (sz, _SHAPE_RANK[shape], text)
        prev = seen.get(text)
        if prev is None or rank < prev[0]:
            seen[text] = (rank, n)

    atom_list = [normalize_expr(a) for a in atoms(g)]
    atom_list = [a for a in atom_list if not is_trivial(a)]
    for a in atom_list:
        add(a, "atom")
    guard_list = [normalize_expr(x) for x in guards(g)]
    guard_list = [x for x in guard_list if not is_trivial(x)]
    for gd in guard_list:
        room = g.max_nodes - 1 - S.size(gd)
        for a in atom_list:
            if a == gd or S.size(a) > room:
                continue
            add(S.Implies(gd, a), "implies")
            add(S.Or(gd, a), "or")
    ranked = sorted(seen.values(), key=lambda p: p[0])
    return [n for _, n in ranked]


def _point_seed(seed: int, point_id: str) -> List[int]:
    return [int(seed) & 0xFFFFFFFFFFFFFFFF, zlib.crc32(point_id.encode("utf-8"))]


def fuzz_candidates(g: Grammar, seed: int, n: int) -> CandidateSet:
    if n < 1:
        raise ValueError("candidate budget must be >= 1")
    space = derivation_space(g)
    if len(space) <= n:
        chosen = space
    else:
        tiers: Dict[int, List[S.Expr]] = {}
        for e in space:
            tiers.setdefault(S.size(e), []).append(e)
        chosen = []
        rng = np.random.default_rng(_point_seed(seed, g.point.id))
        for sz in sorted(tiers):
            tier = tiers[sz]
            room = n - len(chosen)
            if len(tier) <= room:
                chosen.extend(tier)
                continue
            if room > 0:
                pick = np.sort(rng.choice(len(tier), size=room, replace=False))
                chosen.extend(tier[i] for i in pick)
            break
    assertions = [S.Assertion(g.point, e) for e in chosen]
    return CandidateSet(assertions, {g.point.id: g.fingerprint()}, {g.point.id: len(space)})
