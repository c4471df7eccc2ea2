"""Conditional-marginal (counting) oracles.

Every oracle answers, exactly, the distribution of one coordinate given a
pinning of any subset of the others, plus the log-probability of a pinning
itself.  The two are interchangeable through the ratio

    P[X_i = x | X_S = s] = P[X_S = s, X_i = x] / P[X_S = s]

and the sampler modules consume the marginal form directly.

Concrete families:

* ``TableOracle``       -- explicit joint table, summation (ground truth).
* ``ProductOracle``     -- independent coordinates.
* ``MarkovChainOracle`` -- exact chain conditionals in O(q^2 log n) per
                           query via precomputed range products; the
                           designated family for scaling experiments.
* ``PairCopyOracle``    -- even coordinates copy their predecessor; the
                           worst case for prefix-window samplers under the
                           identity permutation.
* ``AffineCodeOracle``  -- uniform over the solutions of a GF(2) affine
                           system; marginals via two pinned solve counts.
* ``ApproximateOracle`` -- deterministic multiplicative-noise wrapper
                           around any inner oracle.

``GridMatchingOracle`` (separator-column marginals of uniform grid perfect
matchings) lives in ``gridmatch`` and shares this module's base class.

Instances are immutable after construction and queries are read-only, so
any number of concurrent callers is safe.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Iterator, Mapping

import numpy as np

from . import rng
from .coupler import Distribution
from .gf2 import BitMatrix, BitVector, bits_to_hex, hex_to_bits, solve_affine_with_pinning

_LN2 = math.log(2.0)
_SUM_TOL = 1e-9
_TABLE_STATE_CAP = 1 << 24


class OracleError(Exception):
    """Base class for oracle query failures."""


class MalformedQuery(OracleError):
    """Raised on out-of-range indices, repeated pins, or a pinned target."""


class ZeroMeasurePinning(OracleError):
    """Raised when a conditional is requested under a probability-0 pinning.

    Zero-measure pinnings are an error rather than a zero vector: the
    samplers only ever pin previously sampled values, so hitting one means
    an oracle bug.
    """


class Pinning(Mapping[int, int]):
    """A partial assignment {coordinate -> symbol} conditioning a query."""

    __slots__ = ("_assignments",)

    def __init__(self, assignments=()) -> None:
        self._assignments = dict(assignments)

    def __getitem__(self, key: int) -> int:
        return self._assignments[key]

    def __iter__(self) -> Iterator[int]:
        return iter(self._assignments)

    def __len__(self) -> int:
        return len(self._assignments)

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}={v}" for k, v in self.sorted_items())
        return f"Pinning({inner})"

    def sorted_items(self) -> list[tuple[int, int]]:
        return sorted(self._assignments.items())

    def extended(self, coordinate: int, symbol: int) -> "Pinning":
        ext = dict(self._assignments)
        ext[coordinate] = symbol
        return Pinning(ext)


@dataclass(frozen=True)
class MarginalQuery:
    """Ask for the distribution of ``target`` given ``pinning``."""

    target: int
    pinning: Pinning

    def __post_init__(self) -> None:
        if self.target in self.pinning:
            raise MalformedQuery(f"target coordinate {self.target} is pinned")


class ConditionalOracle(ABC):
    """Interface every oracle family implements.

    Subclasses provide the trusted hot paths ``_marginal_probs`` and
    ``_log_probability``; the public methods validate indices and wrap the
    result in :class:`Distribution`.
    """

    variant: str = "abstract"
    n: int
    q: int

    def conditional_marginal(self, query: MarginalQuery) -> Distribution:
        """Exact vector ``(P[X_target = x | pinning])_x``."""
        self._validate_target(query.target)
        self._validate_pinning(query.pinning)
        self._check_pinning_measure(query.pinning)
        return Distribution(self._marginal_probs(query.target, query.pinning))

    def joint_probability(self, pinning: Mapping[int, int]) -> float:
        """Exact ``log P[X_S = s]``; ``-inf`` for zero measure."""
        self._validate_pinning(pinning)
        if not pinning:
            return 0.0
        return self._log_probability(pinning)

    def _validate_target(self, target: int) -> None:
        if not 0 <= target < self.n:
            raise MalformedQuery(f"target {target} outside [0, {self.n})")

    def _validate_pinning(self, pins: Mapping[int, int]) -> None:
        for pos, val in pins.items():
            if not 0 <= pos < self.n:
                raise MalformedQuery(f"pinned coordinate {pos} outside [0, {self.n})")
            if not 0 <= val < self.q:
                raise MalformedQuery(f"pinned symbol {val} outside [0, {self.q})")

    def _check_pinning_measure(self, pins: Mapping[int, int]) -> None:
        """Hook for families whose hot path does not already prove the
        pinning has positive measure."""

    @abstractmethod
    def _marginal_probs(self, target: int, pins: Mapping[int, int]) -> np.ndarray:
        """Normalized marginal vector; trusted input, may raise
        ZeroMeasurePinning."""

    @abstractmethod
    def _log_probability(self, pins: Mapping[int, int]) -> float:
        ...

    @abstractmethod
    def to_json(self) -> dict:
        ...


class TableOracle(ConditionalOracle):
    """Explicit joint distribution over ``[q]^n`` (row-major flat table)."""

    variant = "table"

    def __init__(self, n: int, q: int, probs) -> None:
        if n < 1 or q < 1:
            raise ValueError("n and q must be positive")
        if q**n > _TABLE_STATE_CAP:
            raise ValueError(f"table oracle capped at {_TABLE_STATE_CAP} joint states")
        arr = np.asarray(probs, dtype=np.float64).reshape(-1)
        if arr.size != q**n:
            raise ValueError(f"expected {q ** n} entries, got {arr.size}")
        if np.any(arr < 0.0) or not np.all(np.isfinite(arr)):
            raise ValueError("table entries must be non-negative and finite")
        total = float(arr.sum())
        if abs(total - 1.0) > _SUM_TOL:
            raise ValueError(f"table sums to {total!r}, not 1 within 1e-9")
        self.n = n
        self.q = q
        self._table = (arr / total).reshape((q,) * n)
        self._table.setflags(write=False)

    def _indexer(self, pins: Mapping[int, int]) -> tuple:
        return tuple(pins.get(k, slice(None)) for k in range(self.n))

    def _marginal_probs(self, target: int, pins: Mapping[int, int]) -> np.ndarray:
        sub = self._table[self._indexer(pins)]
        axis = sum(1 for k in range(target) if k not in pins)
        weights = np.moveaxis(sub, axis, 0).reshape(self.q, -1).sum(axis=1)
        total = weights.sum()
        if total <= 0.0:
            raise ZeroMeasurePinning(f"pinning {dict(pins)!r} has probability 0")
        return weights / total

    def _log_probability(self, pins: Mapping[int, int]) -> float:
        p = float(self._table[self._indexer(pins)].sum())
        return math.log(p) if p > 0.0 else -math.inf

    def to_json(self) -> dict:
        return {
            "variant": self.variant,
            "n": self.n,
            "q": self.q,
            "probs": [float(v) for v in self._table.reshape(-1)],
        }


class ProductOracle(ConditionalOracle):
    """Independent coordinates with per-coordinate factor distributions."""

    variant = "product"

    def __init__(self, factors) -> None:
        arr = np.asarray(factors, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] < 1:
            raise ValueError("factors must be an (n, q) array")
        self.n, self.q = int(arr.shape[0]), int(arr.shape[1])
        rows = []
        for row in arr:
            rows.append(Distribution(row).probs)
        self._factors = np.stack(rows)
        self._factors.setflags(write=False)

    def _marginal_probs(self, target: int, pins: Mapping[int, int]) -> np.ndarray:
        for pos, val in pins.items():
            if self._factors[pos, val] <= 0.0:
                raise ZeroMeasurePinning(f"coordinate {pos} pinned to zero-mass symbol")
        return self._factors[target]

    def _log_probability(self, pins: Mapping[int, int]) -> float:
        logp = 0.0
        for pos, val in sorted(pins.items()):
            p = self._factors[pos, val]
            if p <= 0.0:
                return -math.inf
            logp += math.log(p)
        return logp

    def to_json(self) -> dict:
        return {
            "variant": self.variant,
            "factors": [[float(v) for v in row] for row in self._factors],
        }


class MarkovChainOracle(ConditionalOracle):
    """First-order chain: initial distribution plus n-1 transition matrices.

    Conditioning factorizes through the nearest pinned neighbors, so each
    marginal needs only the transition product over two index ranges.
    Range products are assembled from a doubling table built once at
    construction, giving O(q^2 log n) per query and a canonical float
    computation independent of pinning insertion order.
    """

    variant = "markov"

    def __init__(self, initial, transitions) -> None:
        init = Distribution(initial).probs
        trans = np.asarray(transitions, dtype=np.float64)
        if trans.size == 0:
            trans = trans.reshape(0, init.shape[0], init.shape[0])
        if trans.ndim != 3 or trans.shape[1] != trans.shape[2]:
            raise ValueError("transitions must be a (n-1, q, q) array")
        if trans.shape[1] != init.shape[0]:
            raise ValueError("transition size does not match initial distribution")
        self.n = int(trans.shape[0]) + 1
        self.q = int(init.shape[0])
        rows = trans.reshape(-1, self.q)
        sums = rows.sum(axis=1)
        if np.any(np.abs(sums - 1.0) > _SUM_TOL) or np.any(rows < 0.0):
            raise ValueError("every transition row must be a distribution")
        trans = (rows / sums[:, None]).reshape(self.n - 1, self.q, self.q)
        self._initial = init
        self._transitions = trans
        self._transitions.setflags(write=False)

        pi = np.empty((self.n, self.q))
        pi[0] = init
        for i in range(self.n - 1):
            pi[i + 1] = pi[i] @ trans[i]
        self._pi = pi
        self._pi.setflags(write=False)

        lift = [trans]
        step = 1
        while 2 * step <= self.n - 1:
            prev = lift[-1]
            count = self.n - 1 - 2 * step + 1
            lift.append(np.matmul(prev[:count], prev[step : step + count]))
            step *= 2
        self._lift = lift

    def _range_product(self, i: int, j: int) -> np.ndarray:
        """Product of transition matrices covering coordinates i..j."""
        i, j = int(i), int(j)
        length = j - i
        result = None
        pos = i
        k = length.bit_length() - 1
        while k >= 0:
            if length & (1 << k):
                block = self._lift[k][pos]
                result = block if result is None else result @ block
                pos += 1 << k
            k -= 1
        return result

    @staticmethod
    def _neighbors(target: int, pins: Mapping[int, int]) -> tuple[int | None, int | None]:
        if not pins:
            return None, None
        keys = np.fromiter(pins.keys(), dtype=np.int64, count=len(pins))
        left = keys[keys < target]
        right = keys[keys > target]
        return (
            int(left.max()) if left.size else None,
            int(right.min()) if right.size else None,
        )

    def _marginal_probs(self, target: int, pins: Mapping[int, int]) -> np.ndarray:
        left, right = self._neighbors(target, pins)
        if left is None:
            base = self._pi[target]
        else:
            base = self._range_product(left, target)[pins[left]]
        if right is None:
            weights = base
        else:
            weights = base * self._range_product(target, right)[:, pins[right]]
        total = weights.sum()
        if total <= 0.0:
            raise ZeroMeasurePinning(f"pinning {dict(pins)!r} has probability 0")
        return weights / total

    def _log_probability(self, pins: Mapping[int, int]) -> float:
        if not pins:
            return 0.0
        items = sorted(pins.items())
        pos0, val0 = items[0]
        p = self._pi[pos0][val0]
        if p <= 0.0:
            return -math.inf
        logp = math.log(p)
        for (pa, va), (pb, vb) in zip(items, items[1:]):
            step = self._range_product(pa, pb)[va, vb]
            if step <= 0.0:
                return -math.inf
            logp += math.log(step)
        return logp

    def to_json(self) -> dict:
        return {
            "variant": self.variant,
            "initial": [float(v) for v in self._initial],
            "transitions": [
                [[float(v) for v in row] for row in mat] for mat in self._transitions
            ],
        }


class PairCopyOracle(ConditionalOracle):
    """Coordinates come in pairs: even index uniform, odd copies its
    predecessor.  Under the identity permutation every pair forces a
    fresh verify round, which is the linear-round worst case the window
    samplers are benchmarked against."""

    variant = "paircopy"

    def __init__(self, n: int, q: int = 2) -> None:
        if n < 2 or n % 2:
            raise ValueError("pair-copy instances need even n >= 2")
        if q < 2:
            raise ValueError("q must be at least 2")
        self.n = n
        self.q = q
        self._uniform = np.full(q, 1.0 / q)
        self._uniform.setflags(write=False)

    def _check_pairs(self, pins: Mapping[int, int]) -> None:
        for pos, val in pins.items():
            partner = pos ^ 1
            other = pins.get(partner)
            if other is not None and other != val:
                raise ZeroMeasurePinning(
                    f"coordinates {pos} and {partner} pinned to different symbols"
                )

    def _marginal_probs(self, target: int, pins: Mapping[int, int]) -> np.ndarray:
        self._check_pairs(pins)
        partner = target ^ 1
        if partner in pins:
            out = np.zeros(self.q)
            out[pins[partner]] = 1.0
            return out
        return self._uniform

    def _log_probability(self, pins: Mapping[int, int]) -> float:
        pairs = set()
        for pos, val in pins.items():
            partner = pos ^ 1
            other = pins.get(partner)
            if other is not None and other != val:
                return -math.inf
            pairs.add(pos // 2)
        return -len(pairs) * math.log(self.q)

    def to_json(self) -> dict:
        return {"variant": self.variant, "n": self.n, "q": self.q}


class AffineCodeOracle(ConditionalOracle):
    """Uniform distribution over the GF(2) solutions of ``Bx = v``.

    Marginals come from two pinned solution counts (target forced to 0 and
    to 1); because the support is an affine subspace, every marginal is
    componentwise in {0, 1/2, 1}.
    """

    variant = "affine"

    def __init__(self, matrix: BitMatrix, rhs: BitVector) -> None:
        if matrix.cols < 1:
            raise ValueError("code must have at least one column")
        base = solve_affine_with_pinning(matrix, rhs, ())
        if base is None:
            raise ValueError("affine system is inconsistent (empty support)")
        self.n = matrix.cols
        self.q = 2
        self.matrix = matrix
        self.rhs = rhs
        self._log2_total = base

    def _marginal_probs(self, target: int, pins: Mapping[int, int]) -> np.ndarray:
        items = list(pins.items())
        c0 = solve_affine_with_pinning(self.matrix, self.rhs, items + [(target, 0)])
        c1 = solve_affine_with_pinning(self.matrix, self.rhs, items + [(target, 1)])
        if c0 is None and c1 is None:
            raise ZeroMeasurePinning(f"pinning {dict(pins)!r} has probability 0")
        if c0 is None:
            return np.array([0.0, 1.0])
        if c1 is None:
            return np.array([1.0, 0.0])
        diff = c1 - c0
        if diff >= 60:
            return np.array([0.0, 1.0])
        if diff <= -60:
            return np.array([1.0, 0.0])
        ratio = 2.0**diff
        p1 = ratio / (1.0 + ratio)
        return np.array([1.0 - p1, p1])

    def _log_probability(self, pins: Mapping[int, int]) -> float:
        count = solve_affine_with_pinning(self.matrix, self.rhs, pins.items())
        if count is None:
            return -math.inf
        return (count - self._log2_total) * _LN2

    def to_json(self) -> dict:
        return {
            "variant": self.variant,
            "cols": self.matrix.cols,
            "rows_hex": [bits_to_hex(r, self.matrix.cols) for r in self.matrix.rows],
            "v_hex": bits_to_hex(self.rhs.bits, max(1, self.rhs.length)),
        }


class ApproximateOracle(ConditionalOracle):
    """Deterministic noisy wrapper: joint counts are multiplied by
    ``1 + epsilon * U`` with ``U`` uniform in [-1, 1], and with probability
    ``delta`` the answer is adversarial (doubled) instead.

    Both the noise value and the failure event are derived from a hash of
    (seed, pinning), so repeated identical queries agree.  Marginals are
    rebuilt from the perturbed counts of the q extended pinnings.
    """

    variant = "approximate"

    def __init__(self, inner: ConditionalOracle, epsilon: float, delta: float, seed: int) -> None:
        if not 0.0 <= epsilon < 1.0:
            raise ValueError("epsilon must lie in [0, 1)")
        if not 0.0 <= delta < 1.0:
            raise ValueError("delta must lie in [0, 1)")
        self.inner = inner
        self.epsilon = float(epsilon)
        self.delta = float(delta)
        self.seed = int(seed)
        self.n = inner.n
        self.q = inner.q

    def _fold(self, pins: Mapping[int, int]) -> int:
        acc = 0x5B5AD4DD4EE5DD1B
        for pos, val in sorted(pins.items()):
            acc = rng.mix64(acc ^ pos)
            acc = rng.mix64(acc ^ val)
        return acc

    def _perturbed_log_count(self, pins: Mapping[int, int]) -> float:
        base = self.inner._log_probability(pins)
        if base == -math.inf:
            return base
        key = self._fold(pins)
        if self.delta > 0.0 and rng.unit_float(rng.word64(self.seed, key, 1)) < self.delta:
            return base + _LN2
        if self.epsilon == 0.0:
            return base
        u = 2.0 * rng.unit_float(rng.word64(self.seed, key, 0)) - 1.0
        return base + math.log1p(self.epsilon * u)

    def _marginal_probs(self, target: int, pins: Mapping[int, int]) -> np.ndarray:
        ext = dict(pins)
        logs = np.empty(self.q)
        for x in range(self.q):
            ext[target] = x
            logs[x] = self._perturbed_log_count(ext)
        top = logs.max()
        if top == -math.inf:
            raise ZeroMeasurePinning(f"pinning {dict(pins)!r} has probability 0")
        weights = np.exp(logs - top)
        return weights / weights.sum()

    def _log_probability(self, pins: Mapping[int, int]) -> float:
        return self._perturbed_log_count(pins)

    def to_json(self) -> dict:
        return {
            "variant": self.variant,
            "inner": self.inner.to_json(),
            "epsilon": self.epsilon,
            "delta": self.delta,
            "seed": self.seed,
        }


def approximate_wrap(
    inner: ConditionalOracle, epsilon: float, delta: float, seed: int
) -> ApproximateOracle:
    """Wrap an exact oracle in deterministic multiplicative noise."""
    return ApproximateOracle(inner, epsilon, delta, seed)


def oracle_from_json(data: Mapping) -> ConditionalOracle:
    """Rebuild an oracle from its JSON dict ({"variant": ...})."""
    try:
        variant = data["variant"]
    except (KeyError, TypeError):
        raise ValueError("oracle JSON must carry a 'variant' discriminator") from None
    if variant == "table":
        return TableOracle(int(data["n"]), int(data["q"]), data["probs"])
    if variant == "product":
        return ProductOracle(data["factors"])
    if variant == "markov":
        return MarkovChainOracle(data["initial"], data["transitions"])
    if variant == "paircopy":
        return PairCopyOracle(int(data["n"]), int(data["q"]))
    if variant == "affine":
        cols = int(data["cols"])
        rows = tuple(hex_to_bits(h, cols) for h in data["rows_hex"])
        matrix = BitMatrix(cols, rows)
        rhs = BitVector(len(rows), hex_to_bits(data["v_hex"], max(1, len(rows))))
        return AffineCodeOracle(matrix, rhs)
    if variant == "grid":
        from .gridmatch import GridMatchingOracle

        return GridMatchingOracle(int(data["w"]), int(data["h"]))
    if variant == "approximate":
        inner = oracle_from_json(data["inner"])
        return ApproximateOracle(
            inner, float(data["epsilon"]), float(data["delta"]), int(data["seed"])
        )
    if variant == "hardness":
        from .hardness import HardnessInstance, HardnessOracle

        return HardnessOracle(HardnessInstance.from_json(data["instance"]))
    raise ValueError(f"unknown oracle variant {variant!r}")
