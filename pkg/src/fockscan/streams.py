"""Counter-based random streams for reproducible parallel sampling.

Each work unit gets its own Philox generator whose 256-bit counter block
encodes (phase index, pulse block); the 128-bit key holds the master
seed.  A unit's stream therefore depends only on (master_seed, phase,
block), never on scheduling order or worker count, so scans are
bit-reproducible however the work is distributed.

Poisson draws with mean <= 10 use CDF inversion (one uniform per draw,
k = searchsorted(cdf, u)), which pins every pulse to a fixed position in
its block's stream.  Above mean 10 the generator's built-in rejection
sampler takes over; there the draw count per pulse varies, but the
consumption order within a block is still deterministic.
"""

import numpy as np

__all__ = ["BLOCK_SIZE", "POISSON_INVERSION_MAX", "block_rng", "poisson_draw"]

# pulses per work unit; fixed so the (phase, block) -> stream map never
# depends on how the work is scheduled
BLOCK_SIZE = 4096

# largest mean handled by single-uniform CDF inversion
POISSON_INVERSION_MAX = 10.0

# domain separator so scan streams never collide with other Philox uses
_STREAM_DOMAIN = 0x666F636B7363616E  # ascii "fockscan"


def block_rng(master_seed: int, phase_index: int, block_index: int) -> np.random.Generator:
    """Generator for one (phase point, pulse block) work unit.

    The work-unit indices go in the *high* counter words: generation
    increments the 256-bit Philox counter from the low word up, so each
    unit owns a disjoint 2^128-value counter range.
    """
    key = np.array([np.uint64(master_seed & 0xFFFFFFFFFFFFFFFF),
                    np.uint64(_STREAM_DOMAIN)], dtype=np.uint64)
    counter = np.array([0, 0, np.uint64(block_index), np.uint64(phase_index)],
                       dtype=np.uint64)
    return np.random.Generator(np.random.Philox(counter=counter, key=key))


def poisson_cdf_table(mean: float) -> np.ndarray:
    """Cumulative Poisson probabilities, long enough that the leftover
    tail is below float64 resolution (< 1e-16)."""
    if mean == 0.0:
        return np.ones(1)
    # mean + 12*sqrt(mean) + 30 overshoots the 1e-16 quantile comfortably
    k_hi = int(np.ceil(mean + 12.0 * np.sqrt(mean) + 30.0))
    pmf = np.empty(k_hi + 1)
    pmf[0] = np.exp(-mean)
    for k in range(1, k_hi + 1):
        pmf[k] = pmf[k - 1] * mean / k
    return np.cumsum(pmf)


def poisson_draw(rng: np.random.Generator, mean: float, size: int,
                 cdf: np.ndarray | None = None) -> np.ndarray:
    """Poisson sample of `size` draws at the given mean.

    Means up to POISSON_INVERSION_MAX invert the CDF with one uniform
    per draw; pass a precomputed `cdf` table to amortize it across
    blocks.  Larger means fall back to the generator's rejection
    sampler.
    """
    if mean < 0:
        raise ValueError(f"mean must be >= 0, got {mean}")
    if mean == 0.0:
        rng.random(size)  # keep stream consumption identical for all means
        return np.zeros(size, dtype=np.int64)
    if mean <= POISSON_INVERSION_MAX:
        if cdf is None:
            cdf = poisson_cdf_table(mean)
        u = rng.random(size)
        k = np.searchsorted(cdf, u, side="left")
        return np.minimum(k, cdf.size - 1).astype(np.int64)
    return rng.poisson(mean, size).astype(np.int64)
