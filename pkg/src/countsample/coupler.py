"""Robust universal couplers over finite alphabets.

A universal coupler deterministically maps a distribution and a shared
random tape to a sample whose law (over random seeds) is exactly the
distribution.  Feeding the same tape to nearby distributions yields equal
outputs with high probability, which is what lets a guess-and-verify
sampler accept whole batches of speculative draws at once.

Two couplers are provided:

* ``min_coupler``: scans i.i.d. pairs ``(x_k, p_k)`` uniform on
  ``[q] x [0, 1)`` and returns the first ``x_k`` with ``p_k <= mu(x_k)``.
* ``gumbel_trick``: returns ``argmin_x r_x / mu(x)`` where ``r_x`` are
  shared unit-exponential variates keyed per symbol.

Both satisfy the multi-distribution robustness bound

    P[outputs not all equal] <= sum_x (max_i mu_i(x) - min_i mu_i(x))
                                / sum_x max_i mu_i(x)

which ``diagnostics.check_coupler_robustness`` measures empirically.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import rng

_SUM_TOL = 1e-9
_SPAN = 1 << 64


@dataclass(frozen=True, eq=False)
class Distribution:
    """A probability vector over the alphabet ``[q]`` (symbols ``0..q-1``).

    Entries must be non-negative and sum to 1 within an absolute tolerance
    of 1e-9; the vector is renormalized exactly on construction.
    """

    probs: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.probs, dtype=np.float64)
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError("distribution must be a non-empty 1-d vector")
        if not np.all(np.isfinite(arr)):
            raise ValueError("distribution entries must be finite")
        if np.any(arr < 0.0) or np.any(arr > 1.0 + _SUM_TOL):
            raise ValueError("distribution entries must lie in [0, 1]")
        total = float(arr.sum())
        if abs(total - 1.0) > _SUM_TOL:
            raise ValueError(f"distribution sums to {total!r}, not 1 within 1e-9")
        arr = arr / total
        arr.setflags(write=False)
        object.__setattr__(self, "probs", arr)

    @property
    def q(self) -> int:
        return int(self.probs.shape[0])

    @classmethod
    def from_weights(cls, weights) -> "Distribution":
        """Normalize an arbitrary non-negative weight vector."""
        arr = np.asarray(weights, dtype=np.float64)
        total = float(arr.sum())
        if not (total > 0.0) or not np.all(np.isfinite(arr)):
            raise ValueError("weights must be finite with positive total mass")
        return cls(arr / total)

    @classmethod
    def point_mass(cls, symbol: int, q: int) -> "Distribution":
        arr = np.zeros(q)
        arr[symbol] = 1.0
        return cls(arr)


@dataclass(frozen=True)
class RandomTape:
    """Identifies one lazy random stream: the tape for coordinate position
    ``coordinate`` of the run seeded by ``seed``.

    Successive derived values are a pure function of (seed, coordinate,
    draw counter), so the same tape replays identically across rounds.
    """

    seed: int
    coordinate: int


class CouplerKind(enum.Enum):
    MIN_COUPLER = "min"
    GUMBEL_TRICK = "gumbel"


def _reject_limit(q: int) -> int:
    return _SPAN - (_SPAN % q)


def couple_probs(kind: CouplerKind, probs: np.ndarray, seed: int, stream: int) -> int:
    """Hot-path coupling on a raw (already normalized) probability vector."""
    if kind is CouplerKind.MIN_COUPLER:
        return _min_couple(probs, seed, stream)
    return _gumbel_couple(probs, seed, stream)


def _min_couple(probs: np.ndarray, seed: int, stream: int) -> int:
    q = len(probs)
    limit = _reject_limit(q)
    draw = 0
    while True:
        wx = rng.word64(seed, stream, 2 * draw)
        wp = rng.word64(seed, stream, 2 * draw + 1)
        draw += 1
        if wx >= limit:
            continue
        x = wx % q
        if rng.unit_float(wp) <= probs[x]:
            return x


def _gumbel_couple(probs: np.ndarray, seed: int, stream: int) -> int:
    best = -1
    best_ratio = math.inf
    for x in range(len(probs)):
        p = probs[x]
        if p <= 0.0:
            continue
        u = rng.unit_float(rng.word64(seed, stream, x))
        ratio = math.inf if u == 0.0 else -math.log(u) / p
        if ratio < best_ratio:
            best_ratio = ratio
            best = x
    return best


def min_coupler(mu: Distribution, tape: RandomTape) -> int:
    """First-accepted-pair coupler; marginal over seeds equals ``mu``."""
    return _min_couple(mu.probs, tape.seed, tape.coordinate)


def gumbel_trick(mu: Distribution, tape: RandomTape) -> int:
    """Argmin-of-scaled-exponentials coupler; marginal equals ``mu``.

    The exponential for symbol ``x`` is keyed by (seed, coordinate, x), so
    every distribution coupled against the same tape sees the same variates.
    Symbols with zero mass get an infinite ratio; argmin ties break toward
    the lowest symbol.
    """
    return _gumbel_couple(mu.probs, tape.seed, tape.coordinate)


def couple(kind: CouplerKind, mu: Distribution, tape: RandomTape) -> int:
    """Dispatch to the selected coupler."""
    if kind is CouplerKind.MIN_COUPLER:
        return min_coupler(mu, tape)
    if kind is CouplerKind.GUMBEL_TRICK:
        return gumbel_trick(mu, tape)
    raise ValueError(f"unknown coupler kind: {kind!r}")


def trace_min_coupler(probs, pairs: Iterable[tuple[int, float]]) -> int:
    """Apply the min-coupler acceptance rule to an explicit pair sequence.

    Exists so the acceptance rule can be checked against hand-traced pair
    streams without reconstructing tape bits.
    """
    arr = np.asarray(probs, dtype=np.float64)
    for x, p in pairs:
        if p <= arr[x]:
            return x
    raise ValueError("pair sequence exhausted without acceptance")


def trace_gumbel(probs, exponentials) -> int:
    """Apply the gumbel argmin rule to explicit exponential variates."""
    arr = np.asarray(probs, dtype=np.float64)
    best, best_ratio = -1, math.inf
    for x, r in enumerate(exponentials):
        if arr[x] <= 0.0:
            continue
        ratio = r / arr[x]
        if ratio < best_ratio:
            best, best_ratio = x, ratio
    return best


def min_coupler_batch(mu: Distribution, seeds, coordinate: int) -> np.ndarray:
    """Vectorized ``min_coupler`` over an array of seeds.

    Bit-identical to looping the scalar coupler; used by the statistical
    checks, which need 1e5+ trials.
    """
    probs = mu.probs
    q = mu.q
    seeds = np.asarray(seeds, dtype=np.uint64)
    out = np.full(seeds.shape, -1, dtype=np.int64)
    active = np.arange(seeds.size)
    limit = _reject_limit(q)
    check_limit = limit < _SPAN
    if check_limit:
        limit_u = np.uint64(limit)
    draw = 0
    while active.size:
        s = seeds[active]
        wx = rng.word64_np(s, coordinate, np.uint64(2 * draw))
        wp = rng.word64_np(s, coordinate, np.uint64(2 * draw + 1))
        ok = wx < limit_u if check_limit else np.ones(wx.shape, dtype=bool)
        x = (wx % np.uint64(q)).astype(np.int64)
        accept = ok & (rng.unit_float_np(wp) <= probs[x])
        out[active[accept]] = x[accept]
        active = active[~accept]
        draw += 1
        if draw > 1_000_000:
            raise RuntimeError("min coupler failed to terminate")
    return out


def gumbel_trick_batch(mu: Distribution, seeds, coordinate: int) -> np.ndarray:
    """Vectorized ``gumbel_trick`` over an array of seeds."""
    probs = mu.probs
    q = mu.q
    seeds = np.asarray(seeds, dtype=np.uint64)
    words = rng.word64_np(seeds[:, None], coordinate, np.arange(q)[None, :])
    u = rng.unit_float_np(words)
    r = np.where(u > 0.0, -np.log(np.where(u > 0.0, u, 1.0)), np.inf)
    safe = np.where(probs > 0.0, probs, 1.0)
    ratios = np.where(probs > 0.0, r / safe, np.inf)
    return np.argmin(ratios, axis=1)


def couple_batch(kind: CouplerKind, mu: Distribution, seeds, coordinate: int) -> np.ndarray:
    if kind is CouplerKind.MIN_COUPLER:
        return min_coupler_batch(mu, seeds, coordinate)
    if kind is CouplerKind.GUMBEL_TRICK:
        return gumbel_trick_batch(mu, seeds, coordinate)
    raise ValueError(f"unknown coupler kind: {kind!r}")
