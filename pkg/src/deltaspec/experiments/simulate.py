"""Selection simulations over a kill matrix: fixed-size rMS and cost to a target rMS."""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import _kernels as K
from .stats import mann_whitney_u, vargha_delaney_a12


class UndefinedScore(ValueError):
    pass


class EmptyPool(ValueError):
    pass


def rms(killed_relevant, relevant) -> float:
    """|killed| / |relevant| for relevant mutant sets."""
    killed_relevant, relevant = set(killed_relevant), set(relevant)
    if not relevant:
        raise UndefinedScore("no commit-relevant mutants")
    if not killed_relevant <= relevant:
        raise ValueError("killed mutants must be a subset of the relevant ones")
    return float(Fraction(len(killed_relevant), len(relevant)))


@dataclass(frozen=True)
class SimConfig:
    seed: int = 1
    sizes: Tuple[int, ...] = tuple(range(1, 11))
    reps: int = 100
    target_grid: Tuple[float, ...] = (0.25, 0.5, 0.75, 1.0)

    def __post_init__(self):
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        if not self.sizes or any(k < 1 for k in self.sizes):
            raise ValueError("sizes must be positive")


def _relevant_kills(matrix, relevance, pool: Sequence[str]) -> Tuple[np.ndarray, int]:
    rel = np.array([relevance[c].relevant for c in matrix.cols], dtype=bool)
    if not rel.any():
        raise UndefinedScore("no commit-relevant mutants")
    idx = [matrix.rows.index(k) for k in pool]
    sub = matrix.killed[np.ix_(idx, np.flatnonzero(rel))] if idx else np.zeros((0, int(rel.sum())), bool)
    return sub, int(rel.sum())


def _rng(seed: int, *parts: int) -> np.random.Generator:
    return np.random.default_rng([int(seed) & 0xFFFFFFFF, *parts])


@dataclass
class SimResult:
    pools: List[str]
    rows: List[Tuple[str, int, int, float]]  # pool, size, rep, rms
    exhausted: Dict[Tuple[str, int], bool]
    absent: List[str]
    stats: List[Tuple[int, Optional[float], Optional[float], Optional[float]]]  # size, U, p, A12

    def samples(self, pool: str, size: int) -> List[float]:
        return [r[3] for r in self.rows if r[0] == pool and r[1] == size]

    def mean(self, pool: str, size: int) -> Optional[float]:
        s = self.samples(pool, size)
        return float(np.mean(s)) if s else None


def simulate_fixed_size(matrix, relevance, cfg: SimConfig, pools: Dict[str, Sequence[str]]) -> SimResult:
    """Sample ``k`` assertions per pool and rep; record the rMS of their union.

    The first two pools are compared per size with Mann-Whitney U and A12.
    """
    names = list(pools)
    if all(len(pools[n]) == 0 for n in names):
        raise EmptyPool("every pool is empty")
    rows: List[Tuple[str, int, int, float]] = []
    exhausted: Dict[Tuple[str, int], bool] = {}
    absent = [n for n in names if not pools[n]]
    for pi, name in enumerate(names):
        pool = list(pools[name])
        if not pool:
            continue
        kills, n_rel = _relevant_kills(matrix, relevance, pool)
        for k in cfg.sizes:
            take = min(k, len(pool))
            exhausted[(name, k)] = k >= len(pool)
            picks = np.empty((cfg.reps, take), dtype=np.int64)
            for r in range(cfg.reps):
                if take == len(pool):
                    picks[r] = np.arange(take)
                else:
                    picks[r] = _rng(cfg.seed, pi, k, r).choice(len(pool), size=take, replace=False)
            covered = K.coverage_counts(kills, picks, np.full(cfg.reps, take))
            for r in range(cfg.reps):
                rows.append((name, k, r, float(Fraction(int(covered[r]), n_rel))))
    stats = []
    if len(names) >= 2 and not ({names[0], names[1]} & set(absent)):
        a, b = names[0], names[1]
        for k in cfg.sizes:
            xs = [r[3] for r in rows if r[0] == a and r[1] == k]
            ys = [r[3] for r in rows if r[0] == b and r[1] == k]
            u, p = mann_whitney_u(xs, ys)
            stats.append((k, u, p, vargha_delaney_a12(xs, ys)))
    return SimResult(names, rows, exhausted, absent, stats)


@dataclass
class CostResult:
    pools: List[str]
    rows: List[Tuple[str, float, int, Optional[int]]]  # pool, target, rep, draws or None
    absent: List[str] = field(default_factory=list)

    def costs(self, pool: str, target: float) -> List[Optional[int]]:
        return [r[3] for r in self.rows if r[0] == pool and r[1] == target]

    def summary(self, pool: str, target: float) -> dict:
        c = self.costs(pool, target)
        reached = [x for x in c if x is not None]
        return {
            "pool": pool,
            "target": target,
            "reps": len(c),
            "reach_rate": len(reached) / len(c) if c else 0.0,
            "mean_cost": float(np.mean(reached)) if reached else None,
            "median_cost": float(statistics.median(reached)) if reached else None,
        }


def simulate_to_target(matrix, relevance, cfg: SimConfig, pools: Dict[str, Sequence[str]]) -> CostResult:
    """Draw assertions without replacement until the rMS target is met."""
    names = list(pools)
    if all(len(pools[n]) == 0 for n in names):
        raise EmptyPool("every pool is empty")
    rows: List[Tuple[str, float, int, Optional[int]]] = []
    absent = [n for n in names if not pools[n]]
    for pi, name in enumerate(names):
        pool = list(pools[name])
        if not pool:
            continue
        kills, n_rel = _relevant_kills(matrix, relevance, pool)
        orders = np.stack([_rng(cfg.seed, pi, r).permutation(len(pool)) for r in range(cfg.reps)])
        for target in cfg.target_grid:
            need = math.ceil(target * n_rel - 1e-9)
            draws = K.draws_to_target(kills, orders, need)
            for r in range(cfg.reps):
                rows.append((name, target, r, None if draws[r] < 0 else int(draws[r])))
    return CostResult(names, rows, absent)
