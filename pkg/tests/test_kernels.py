import os
import subprocess
import sys

import numpy as np
import pytest

from deltaspec.experiments import _kernels as K

jit_only = pytest.mark.skipif(K.njit is None, reason="numba not installed")


def _random_kills(rng, pool, mutants, p=0.3):
    return rng.random((pool, mutants)) < p


@jit_only
@pytest.mark.parametrize("seed", range(5))
def test_coverage_counts_paths_agree(seed):
    rng = np.random.default_rng(seed)
    kills = _random_kills(rng, 20, 15)
    picks = np.stack([rng.permutation(20)[:8] for _ in range(50)])
    sizes = rng.integers(0, 9, 50)
    a = K.coverage_counts(kills, picks, sizes, jit=True)
    b = K.coverage_counts(kills, picks, sizes, jit=False)
    assert np.array_equal(a, b)
    # direct reference
    for r in range(50):
        want = kills[picks[r, : sizes[r]]].any(axis=0).sum() if sizes[r] else 0
        assert a[r] == want


@jit_only
@pytest.mark.parametrize("seed", range(5))
def test_draws_to_target_paths_agree(seed):
    rng = np.random.default_rng(seed)
    kills = _random_kills(rng, 12, 10, 0.2)
    orders = np.stack([rng.permutation(12) for _ in range(40)])
    for target in (0, 1, 3, 7, 10, 11):
        assert np.array_equal(K.draws_to_target(kills, orders, target, jit=True),
                              K.draws_to_target(kills, orders, target, jit=False))


@jit_only
@pytest.mark.parametrize("n1,n2", [(1, 1), (3, 3), (2, 7), (6, 6), (5, 1)])
def test_mwu_null_paths_agree(n1, n2):
    rng = np.random.default_rng(n1 * 10 + n2)
    ranks = rng.integers(1, 5, n1 + n2).astype(float)
    a = np.sort(K.mwu_null(ranks, n1, jit=True))
    b = np.sort(K.mwu_null(ranks, n1, jit=False))
    assert np.allclose(a, b)


@jit_only
def test_pair_counts_paths_agree():
    rng = np.random.default_rng(1)
    for _ in range(20):
        xs = rng.integers(0, 4, rng.integers(1, 30)).astype(float)
        ys = rng.integers(0, 4, rng.integers(1, 30)).astype(float)
        assert K.pair_counts(xs, ys, jit=True) == K.pair_counts(xs, ys, jit=False)


def test_env_flag_selects_numpy_path():
    code = "from deltaspec.experiments import _kernels as K; print(K.USE_JIT)"
    env = dict(os.environ, DELTASPEC_NO_JIT="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "False"


def test_results_identical_without_jit():
    code = (
        "import numpy as np\n"
        "from deltaspec.experiments import mann_whitney_u, vargha_delaney_a12\n"
        "from deltaspec.experiments import _kernels as K\n"
        "rng = np.random.default_rng(7)\n"
        "kills = rng.random((9, 8)) < 0.3\n"
        "orders = np.stack([rng.permutation(9) for _ in range(6)])\n"
        "print(K.draws_to_target(kills, orders, 5).tolist())\n"
        "print(mann_whitney_u([1, 2, 2, 5], [2, 3, 4]), vargha_delaney_a12([1, 2, 2], [2, 3]))\n"
    )
    outs = []
    for flag in ("1", "0"):
        env = dict(os.environ, DELTASPEC_NO_JIT=flag)
        r = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        outs.append(r.stdout)
    assert outs[0] == outs[1]
