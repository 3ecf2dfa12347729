"""SplitMix64, the seeded generator behind every random draw in the package.

The algorithm is fixed so that runs can be replayed bit-for-bit from any
language.  The ``i``-th output (0-based) of a stream seeded with ``seed`` is::

    z = (seed + (i + 1) * 0x9E3779B97F4A7C15) mod 2**64
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 mod 2**64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB mod 2**64
    z = z ^ (z >> 31)

and a uniform double on [0, 1) is ``(z >> 11) * 2**-53``.  Being counter
based, any slice of the stream can be computed without walking the prefix.
"""

import numpy as np

GOLDEN_GAMMA = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB
ALGORITHM = "splitmix64-v1"

_MASK = (1 << 64) - 1


def _as_u64(seed):
    return np.uint64(int(seed) & _MASK)


def splitmix64(seed, count, start=0):
    """Outputs ``start .. start+count-1`` of the stream seeded by ``seed``."""
    idx = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = _as_u64(seed) + idx * np.uint64(GOLDEN_GAMMA)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(MIX1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(MIX2)
    return z ^ (z >> np.uint64(31))


def uniform01(seed, count, start=0):
    """Doubles on [0, 1) from the same stream."""
    z = splitmix64(seed, count, start)
    return (z >> np.uint64(11)).astype(np.float64) * 2.0**-53


def uniform(seed, low, high, size):
    """``size`` draws on [low, high); ``size`` may be an int or a shape tuple."""
    shape = (size,) if np.isscalar(size) else tuple(size)
    u = uniform01(seed, int(np.prod(shape, dtype=np.int64)))
    return (low + (high - low) * u).reshape(shape)


def derive_seed(seed, index):
    """Child seed number ``index`` of ``seed`` (used for per-step streams)."""
    # scalar path in plain ints; same value as splitmix64(seed, 1, start=index)[0]
    z = (int(seed) + (int(index) + 1) * GOLDEN_GAMMA) & _MASK
    z = ((z ^ (z >> 30)) * MIX1) & _MASK
    z = ((z ^ (z >> 27)) * MIX2) & _MASK
    return z ^ (z >> 31)
