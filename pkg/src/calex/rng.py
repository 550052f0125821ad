"""Deterministic random streams shared by the whole library.

Every randomized operation in calex draws from a PCG64 generator keyed by
``(seed, *stream)`` through :func:`stream_rng`.  Distinct stream keys give
independent streams, so e.g. the perturbation of feature 3 never consumes
draws meant for feature 4.  The derived algorithms below are fixed so that
outputs are bit-reproducible for a given seed and numpy version:

* shuffles are Fisher-Yates from the last index down, with all swap targets
  drawn in one batched ``integers`` call (``j_i`` uniform on ``{0..i}`` for
  ``i = n-1 .. 1``);
* normal draws use the Box-Muller transform on pairs of uniforms rather
  than the generator's own ziggurat sampler.
"""

import numpy as np
from numba import njit

# stream tags; keep values stable, they are part of the reproducibility contract
SPLIT = 1
PERMUTE = 2
NOISE = 3
TAU = 4
DATA = 5


def stream_rng(seed, *stream):
    """A PCG64 generator for the stream keyed by (seed, *stream)."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), *map(int, stream)])))


@njit(cache=True)
def _apply_swaps(perm, js):
    n = perm.shape[0]
    for i in range(n - 1, 0, -1):
        j = js[n - 1 - i]
        tmp = perm[i]
        perm[i] = perm[j]
        perm[j] = tmp


def permutation(n, rng):
    """Fisher-Yates permutation of range(n), from the last index down."""
    perm = np.arange(n, dtype=np.int64)
    if n < 2:
        return perm
    # one j per step, bounds i+1 for i = n-1 .. 1
    js = rng.integers(0, np.arange(n, 1, -1, dtype=np.int64))
    _apply_swaps(perm, js)
    return perm


def normals(n, rng):
    """n standard-normal draws via Box-Muller on 2*ceil(n/2) uniforms."""
    m = (n + 1) // 2
    u = rng.random(2 * m)
    u1, u2 = u[:m], u[m:]
    r = np.sqrt(-2.0 * np.log1p(-u1))  # 1-u1 in (0,1], log is finite
    z = np.concatenate([r * np.cos(2.0 * np.pi * u2), r * np.sin(2.0 * np.pi * u2)])
    return z[:n]
