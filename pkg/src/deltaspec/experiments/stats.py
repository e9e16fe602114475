"""Mann-Whitney U with exact small-sample p-values, and Vargha-Delaney A12."""

from __future__ import annotations

import math
import sys
from typing import Sequence, Tuple

import numpy as np
from scipy.stats import rankdata

from . import _kernels as K

EXACT_LIMIT = 12
_TOL = 1e-9


def _as_array(xs: Sequence[float], name: str) -> np.ndarray:
    a = np.asarray(list(xs), dtype=np.float64)
    if a.size == 0:
        raise ValueError(f"{name} must be non-empty")
    return a


def mann_whitney_u(xs: Sequence[float], ys: Sequence[float], exact: bool = True) -> Tuple[float, float]:
    """U of ``xs`` (midranks for ties) and the two-sided p-value.

    The p-value is exact (all splits of the pooled ranks enumerated) when
    ``exact`` and the pooled size is at most 12; otherwise a normal
    approximation with tie and continuity corrections is used.
    """
    x = _as_array(xs, "xs")
    y = _as_array(ys, "ys")
    n1, n2 = x.size, y.size
    ranks = rankdata(np.concatenate([x, y]))
    u = float(ranks[:n1].sum() - n1 * (n1 + 1) / 2.0)
    mean = n1 * n2 / 2.0
    if exact and n1 + n2 <= EXACT_LIMIT:
        null = K.mwu_null(ranks, n1)
        extreme = np.abs(null - mean) >= abs(u - mean) - _TOL
        p = float(extreme.sum()) / null.size
    else:
        n = n1 + n2
        _, counts = np.unique(ranks, return_counts=True)
        tie = float((counts ** 3 - counts).sum())
        var = n1 * n2 / 12.0 * ((n + 1) - tie / (n * (n - 1)))
        if var <= 0:
            p = 1.0
        else:
            z = max(abs(u - mean) - 0.5, 0.0) / math.sqrt(var)
            p = math.erfc(z / math.sqrt(2.0))
    return u, min(1.0, max(p, sys.float_info.min))


def vargha_delaney_a12(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Probability that a draw from ``xs`` exceeds one from ``ys`` (ties count half)."""
    x = _as_array(xs, "xs")
    y = _as_array(ys, "ys")
    gt, eq = K.pair_counts(x, y)
    return (gt + 0.5 * eq) / (x.size * y.size)
