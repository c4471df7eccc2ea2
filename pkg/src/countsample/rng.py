"""Deterministic counter-based randomness.

Every random value in the library is a pure function of a 64-bit seed, a
stream identifier, and a counter.  This is what lets a coordinate's random
tape be replayed identically across rounds and across samplers without
storing anything: the tape for coordinate position ``i`` is simply the word
stream keyed by ``(seed, i)``.

Scalar functions operate on Python ints (masked to 64 bits); the ``*_np``
variants operate on ``uint64`` numpy arrays and produce bit-identical
values, which the test suite asserts.
"""

from __future__ import annotations

import numpy as np

_MASK = 0xFFFFFFFFFFFFFFFF
_SPAN = 1 << 64
_SEED_TAG = 0x9E3779B97F4A7C15
_STREAM_TAG = 0xBF58476D1CE4E5B9
_INV_2_53 = 2.0 ** -53

# Reserved stream ids (never valid coordinate positions, which are >= 0).
PERMUTATION_STREAM = -1
DERIVE_STREAM = -2


def mix64(z: int) -> int:
    """Bijective 64-bit avalanche mix (murmur3 finalizer constants)."""
    z &= _MASK
    z = ((z ^ (z >> 33)) * 0xFF51AFD7ED558CCD) & _MASK
    z = ((z ^ (z >> 33)) * 0xC4CEB9FE1A85EC53) & _MASK
    return z ^ (z >> 33)


def word64(seed: int, stream: int, counter: int) -> int:
    """The ``counter``-th 64-bit word of the stream keyed by (seed, stream)."""
    z = mix64((seed & _MASK) ^ _SEED_TAG)
    z = mix64(z ^ (stream & _MASK) ^ _STREAM_TAG)
    return mix64(z ^ (counter & _MASK))


def unit_float(word: int) -> float:
    """Map a 64-bit word to [0, 1) with full 53-bit mantissa precision."""
    return (word >> 11) * _INV_2_53


def bounded_word(seed: int, stream: int, counter: int, bound: int) -> tuple[int, int]:
    """Unbiased draw in [0, bound), rejecting the biased top range.

    Returns ``(value, next_counter)``; rejected words advance the counter.
    """
    limit = _SPAN - (_SPAN % bound)
    while True:
        w = word64(seed, stream, counter)
        counter += 1
        if w < limit:
            return w % bound, counter


def permutation(seed: int, n: int) -> list[int]:
    """Seeded Fisher-Yates permutation of ``range(n)``."""
    perm = list(range(n))
    counter = 0
    for i in range(n - 1, 0, -1):
        j, counter = bounded_word(seed, PERMUTATION_STREAM, counter, i + 1)
        perm[i], perm[j] = perm[j], perm[i]
    return perm


def mix64_np(z: np.ndarray) -> np.ndarray:
    """Vectorized :func:`mix64` over a uint64 array."""
    z = np.asarray(z).astype(np.uint64, copy=True)
    with np.errstate(over="ignore"):
        z ^= z >> np.uint64(33)
        z *= np.uint64(0xFF51AFD7ED558CCD)
        z ^= z >> np.uint64(33)
        z *= np.uint64(0xC4CEB9FE1A85EC53)
        z ^= z >> np.uint64(33)
    return z


def word64_np(seeds, stream: int, counters) -> np.ndarray:
    """Vectorized :func:`word64`; ``seeds`` and ``counters`` broadcast."""
    s = np.asarray(seeds, dtype=np.uint64)
    c = np.asarray(counters, dtype=np.uint64)
    z = mix64_np(s ^ np.uint64(_SEED_TAG))
    z = mix64_np(z ^ np.uint64(stream & _MASK) ^ np.uint64(_STREAM_TAG))
    z, c = np.broadcast_arrays(z, c)
    return mix64_np(z ^ c)


def unit_float_np(words: np.ndarray) -> np.ndarray:
    """Vectorized :func:`unit_float` (bit-identical to the scalar path)."""
    return (words >> np.uint64(11)).astype(np.float64) * _INV_2_53


def derive_seeds(seed: int, count: int) -> np.ndarray:
    """``count`` independent 64-bit seeds derived from ``seed``."""
    return word64_np(np.uint64(seed & _MASK), DERIVE_STREAM, np.arange(count))


def uniform_array(seed: int, stream: int, count: int) -> np.ndarray:
    """``count`` uniform [0, 1) floats from the (seed, stream) word stream."""
    return unit_float_np(word64_np(np.uint64(seed & _MASK), stream, np.arange(count)))
