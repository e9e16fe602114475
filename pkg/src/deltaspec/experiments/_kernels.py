"""Hot loops for the simulations and rank statistics.

Each kernel exists twice: a numba ``@njit`` version and a plain numpy one.
Setting ``DELTASPEC_NO_JIT=1`` (or lacking numba) selects the numpy path.
Both paths return identical results; ``tests/test_kernels.py`` checks this.
"""

from __future__ import annotations

import os

import numpy as np

try:  # pragma: no cover - exercised implicitly
    from numba import njit
except ImportError:  # pragma: no cover
    njit = None

USE_JIT = njit is not None and os.environ.get("DELTASPEC_NO_JIT", "") not in ("1", "true", "yes")


# --- numpy implementations ------------------------------------------------


def coverage_counts_np(kills: np.ndarray, picks: np.ndarray, sizes: np.ndarray) -> np.ndarray:
    """Relevant mutants covered by each selection.

    kills: (pool, mutants) bool; picks: (reps, width) pool indices; sizes: (reps,)
    number of leading entries of each pick row in use.
    """
    reps, width = picks.shape
    if reps == 0 or kills.shape[1] == 0:
        return np.zeros(reps, dtype=np.int64)
    used = np.arange(width)[None, :] < sizes[:, None]
    rows = kills[np.where(used, picks, 0)]  # (reps, width, mutants)
    rows &= used[:, :, None]
    return rows.any(axis=1).sum(axis=1).astype(np.int64)


def draws_to_target_np(kills: np.ndarray, orders: np.ndarray, target: int) -> np.ndarray:
    """Draws (1-based) until ``target`` mutants are covered; -1 if never."""
    reps, pool = orders.shape
    out = np.full(reps, -1, dtype=np.int64)
    if target <= 0:
        out[:] = 0
        return out
    for r in range(reps):
        covered = np.cumsum(kills[orders[r]], axis=0) > 0 if pool else np.zeros((0, kills.shape[1]), bool)
        counts = covered.sum(axis=1)
        hit = np.flatnonzero(counts >= target)
        if hit.size:
            out[r] = hit[0] + 1
    return out


def mwu_null_np(ranks: np.ndarray, n1: int) -> np.ndarray:
    """U of the first group for every way to choose ``n1`` of the pooled ranks."""
    from itertools import combinations

    n = len(ranks)
    offset = n1 * (n1 + 1) / 2.0
    out = [ranks[list(c)].sum() - offset for c in combinations(range(n), n1)]
    return np.array(out, dtype=np.float64)


def pair_counts_np(xs: np.ndarray, ys: np.ndarray):
    gt = int((xs[:, None] > ys[None, :]).sum())
    eq = int((xs[:, None] == ys[None, :]).sum())
    return gt, eq


# --- numba implementations ------------------------------------------------

if njit is not None:

    @njit(cache=True)
    def _coverage_counts_jit(kills, picks, sizes):
        reps = picks.shape[0]
        m = kills.shape[1]
        out = np.zeros(reps, dtype=np.int64)
        seen = np.zeros(m, dtype=np.bool_)
        for r in range(reps):
            seen[:] = False
            c = 0
            for w in range(sizes[r]):
                row = picks[r, w]
                for j in range(m):
                    if kills[row, j] and not seen[j]:
                        seen[j] = True
                        c += 1
            out[r] = c
        return out

    @njit(cache=True)
    def _draws_to_target_jit(kills, orders, target):
        reps, pool = orders.shape
        m = kills.shape[1]
        out = np.full(reps, -1, dtype=np.int64)
        seen = np.zeros(m, dtype=np.bool_)
        for r in range(reps):
            if target <= 0:
                out[r] = 0
                continue
            seen[:] = False
            c = 0
            for w in range(pool):
                row = orders[r, w]
                for j in range(m):
                    if kills[row, j] and not seen[j]:
                        seen[j] = True
                        c += 1
                if c >= target:
                    out[r] = w + 1
                    break
        return out

    @njit(cache=True)
    def _mwu_null_jit(ranks, n1):
        n = ranks.shape[0]
        # number of combinations
        total = 1
        for i in range(n1):
            total = total * (n - i) // (i + 1)
        out = np.empty(total, dtype=np.float64)
        idx = np.arange(n1)
        offset = n1 * (n1 + 1) / 2.0
        k = 0
        while True:
            s = 0.0
            for i in range(n1):
                s += ranks[idx[i]]
            out[k] = s - offset
            k += 1
            # next combination in lexicographic order
            i = n1 - 1
            while i >= 0 and idx[i] == n - n1 + i:
                i -= 1
            if i < 0:
                break
            idx[i] += 1
            for j in range(i + 1, n1):
                idx[j] = idx[j - 1] + 1
        return out

    @njit(cache=True)
    def _pair_counts_jit(xs, ys):
        gt = 0
        eq = 0
        for i in range(xs.shape[0]):
            for j in range(ys.shape[0]):
                if xs[i] > ys[j]:
                    gt += 1
                elif xs[i] == ys[j]:
                    eq += 1
        return gt, eq


# --- dispatch --------------------------------------------------------------


def coverage_counts(kills, picks, sizes, jit=None):
    jit = USE_JIT if jit is None else jit and njit is not None
    kills = np.ascontiguousarray(kills, dtype=np.bool_)
    picks = np.ascontiguousarray(picks, dtype=np.int64)
    sizes = np.ascontiguousarray(sizes, dtype=np.int64)
    if jit:
        return _coverage_counts_jit(kills, picks, sizes)
    return coverage_counts_np(kills, picks, sizes)


def draws_to_target(kills, orders, target: int, jit=None):
    jit = USE_JIT if jit is None else jit and njit is not None
    kills = np.ascontiguousarray(kills, dtype=np.bool_)
    orders = np.ascontiguousarray(orders, dtype=np.int64)
    if jit:
        return _draws_to_target_jit(kills, orders, int(target))
    return draws_to_target_np(kills, orders, int(target))


def mwu_null(ranks, n1: int, jit=None):
    jit = USE_JIT if jit is None else jit and njit is not None
    ranks = np.ascontiguousarray(ranks, dtype=np.float64)
    if n1 == 0:
        return np.zeros(1, dtype=np.float64)
    if jit:
        return _mwu_null_jit(ranks, int(n1))
    return mwu_null_np(ranks, int(n1))


def pair_counts(xs, ys, jit=None):
    jit = USE_JIT if jit is None else jit and njit is not None
    xs = np.ascontiguousarray(xs, dtype=np.float64)
    ys = np.ascontiguousarray(ys, dtype=np.float64)
    if jit:
        gt, eq = _pair_counts_jit(xs, ys)
        return int(gt), int(eq)
    return pair_counts_np(xs, ys)
