"""Bounded-domain semantic equivalence of assertions.

Two assertions at the same point are EQUIVALENT when their outcome (TRUE,
FALSE, EVAL_ERROR) agrees on every environment built from a small finite
domain per identifier. This is sound for inequivalence (a witness is a real
counterexample) and incomplete for equivalence.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import ast as S
from .evaluate import Column, ObsTable, evaluate, make_column

EQUIVALENT = "EQUIVALENT"
DEFAULT_CAP = 10_000_000


class DomainTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class DomainConfig:
    int_domain: Tuple[int, ...] = (-2, -1, 0, 1, 2)
    real_domain: Tuple[float, ...] = (-1.5, 0.0, 1.0, math.nan)
    array_lens: Tuple[int, ...] = (0, 1, 2, 3)
    bool_domain: Tuple[bool, ...] = (False, True)
    cap: int = DEFAULT_CAP

    def __post_init__(self):
        if not self.int_domain or not self.real_domain or not self.array_lens or not self.bool_domain:
            raise ValueError("domains must be non-empty")

    def values(self, t: str) -> list:
        if t.endswith("[]"):
            elems = self.values(t[:-2])
            out = []
            for n in self.array_lens:
                out.extend(itertools.product(elems, repeat=n))
            return out
        if t == "int":
            return list(self.int_domain)
        if t == "real":
            return list(self.real_domain)
        return list(self.bool_domain)

    def to_json(self) -> dict:
        return {
            "int_domain": list(self.int_domain),
            "real_domain": [S.real_lit(v).text for v in self.real_domain],
            "array_lens": list(self.array_lens),
            "cap": self.cap,
        }


@dataclass(frozen=True)
class Witness:
    env: Dict[str, object]
    left: str
    right: str


def _domain_size(keys: Sequence[str], scope: Dict[str, str], d: DomainConfig) -> int:
    total = 1
    for k in keys:
        total *= len(d.values(scope[k]))
    return total


def environment_table(keys: Sequence[str], scope: Dict[str, str], d: DomainConfig):
    """Cartesian product of the domains of ``keys`` (last key varies fastest)."""
    keys = list(keys)
    doms = [d.values(scope[k]) for k in keys]
    total = 1
    for v in doms:
        total *= len(v)
    if total > d.cap:
        raise DomainTooLarge(f"{total} environments exceed the cap of {d.cap}")
    shape = tuple(len(v) for v in doms)
    idx = np.unravel_index(np.arange(total), shape) if keys else ()
    cols: Dict[str, Column] = {}
    for k, dom, ix in zip(keys, doms, idx):
        base = make_column(scope[k], dom)
        if base.is_array:
            cols[k] = Column(base.type, base.values[ix], base.lens[ix])
        else:
            cols[k] = Column(base.type, base.values[ix])
    return ObsTable(total, cols), shape, doms


def _scope_for(exprs: Sequence[S.Expr], scope: Dict[str, str]) -> List[str]:
    keys = set()
    for e in exprs:
        keys |= S.free_names(e)
    missing = sorted(k for k in keys if k not in scope)
    if missing:
        raise KeyError(f"no type known for {missing}")
    return sorted(keys)


def bounded_equiv(a: S.Assertion, b: S.Assertion, scope: Dict[str, str],
                  d: Optional[DomainConfig] = None):
    """EQUIVALENT, or the first :class:`Witness` in enumeration order."""
    d = d or DomainConfig()
    if a.point != b.point:
        raise ValueError("assertions belong to different points")
    keys = _scope_for([a.body, b.body], scope)
    table, shape, doms = environment_table(keys, scope, d)
    ca, _ = evaluate(a.body, table)
    cb, _ = evaluate(b.body, table)
    diff = np.flatnonzero(ca != cb)
    if diff.size == 0:
        return EQUIVALENT
    i = int(diff[0])
    pos = np.unravel_index(i, shape) if keys else ()
    env = {k: doms[j][int(p)] for j, (k, p) in enumerate(zip(keys, pos))}
    names = {0: "FALSE", 1: "TRUE", 2: "EVAL_ERROR"}
    return Witness(env, names[int(ca[i])], names[int(cb[i])])


def semantic_key(e: S.Expr, scope: Dict[str, str], d: Optional[DomainConfig] = None) -> tuple:
    """Canonical key such that equal keys iff bounded-equivalent.

    The outcome tensor over the assertion's own identifiers is projected onto
    the identifiers it actually depends on (within the domain).
    """
    d = d or DomainConfig()
    keys = _scope_for([e], scope)
    table, shape, _ = environment_table(keys, scope, d)
    codes, _ = evaluate(e, table)
    t = codes.reshape(shape) if keys else codes.reshape(())
    essential = []
    for axis, k in enumerate(keys):
        first = np.take(t, [0], axis=axis)
        if not np.array_equal(np.broadcast_to(first, t.shape), t):
            essential.append(k)
    proj = t
    for axis in reversed(range(len(keys))):
        if keys[axis] not in essential:
            proj = np.take(proj, 0, axis=axis)
    sig = tuple((k, scope[k]) for k in essential)
    return sig, np.ascontiguousarray(proj, dtype=np.int8).tobytes()


def equivalence_classes(exprs: Sequence[S.Expr], scope: Dict[str, str],
                        d: Optional[DomainConfig] = None) -> List[List[int]]:
    """Indices of ``exprs`` grouped by bounded equivalence, in first-seen order."""
    groups: Dict[tuple, List[int]] = {}
    for i, e in enumerate(exprs):
        groups.setdefault(semantic_key(e, scope, d), []).append(i)
    return list(groups.values())
