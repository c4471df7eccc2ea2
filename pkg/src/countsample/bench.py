"""Round-complexity benchmark harness with seeded, reproducible runs.

Each repetition draws a fresh instance and tape seed from the base seed,
runs the query-efficient sampler, and records rounds and query counts (the
model-level costs).  Wall time is recorded for convenience but is never an
acceptance quantity, and it is the one CSV column exempt from
byte-reproducibility.
"""

from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import dataclass

import numpy as np

from . import rng
from .coupler import CouplerKind
from .families import pair_copy, sticky_markov
from .oracle import ConditionalOracle
from .sampler import PermutationMode, SamplerConfig, efficient_sample, resolve_theta

CSV_HEADER = ("oracle", "n", "q", "theta", "coupler", "seed", "rounds", "total_queries", "wall_time_ms")

BENCH_FAMILIES = ("markov", "paircopy")


@dataclass(frozen=True)
class BenchRow:
    oracle: str
    n: int
    q: int
    theta: int
    coupler: str
    seed: int
    rounds: int
    total_queries: int
    wall_time_ms: float

    def __post_init__(self) -> None:
        if self.rounds < 1:
            raise ValueError("rounds must be >= 1")
        if self.total_queries < self.n:
            raise ValueError("total queries can never undercut n")

    def as_csv(self) -> list[str]:
        return [
            self.oracle,
            str(self.n),
            str(self.q),
            str(self.theta),
            self.coupler,
            str(self.seed),
            str(self.rounds),
            str(self.total_queries),
            f"{self.wall_time_ms:.3f}",
        ]


@dataclass(frozen=True)
class ScalingFit:
    """Least-squares slope of log mean-rounds against log n."""

    exponent: float
    intercept: float
    r_squared: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.r_squared <= 1.0:
            raise ValueError("r_squared must lie in [0, 1]")

    def to_json(self) -> dict:
        return {
            "exponent": self.exponent,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
        }


def build_family_instance(family: str, n: int, q: int, instance_seed: int) -> ConditionalOracle:
    if family == "markov":
        return sticky_markov(n, q, instance_seed)
    if family == "paircopy":
        return pair_copy(n, q)
    raise ValueError(f"unknown bench family {family!r}; expected one of {BENCH_FAMILIES}")


def run_bench(
    family: str,
    n_list: list[int],
    q: int,
    reps: int,
    seed: int,
    coupler: CouplerKind = CouplerKind.MIN_COUPLER,
    permutation: PermutationMode = PermutationMode.RANDOM,
    theta: int | None = None,
) -> list[BenchRow]:
    """reps runs of the efficient sampler per n; rows sorted by (n, seed)."""
    if reps < 1:
        raise ValueError("reps must be >= 1")
    rows: list[BenchRow] = []
    for n in n_list:
        resolved_theta = theta if theta is not None else resolve_theta(n, q)
        for rep in range(reps):
            rep_key = rng.word64(seed, 7, n * 1_000_003 + rep)
            instance_seed = rng.word64(rep_key, 8, 0)
            run_seed = rng.word64(rep_key, 9, 0)
            oracle = build_family_instance(family, n, q, instance_seed)
            config = SamplerConfig(
                seed=run_seed,
                coupler=coupler,
                theta=resolved_theta,
                permutation=permutation,
            )
            start = time.perf_counter()
            _, trace = efficient_sample(oracle, config)
            elapsed_ms = (time.perf_counter() - start) * 1000.0
            rows.append(
                BenchRow(
                    oracle=family,
                    n=n,
                    q=q,
                    theta=resolved_theta,
                    coupler=coupler.value,
                    seed=run_seed,
                    rounds=trace.rounds,
                    total_queries=trace.total_queries,
                    wall_time_ms=elapsed_ms,
                )
            )
    rows.sort(key=lambda r: (r.n, r.seed))
    return rows


def mean_rounds_by_n(rows: list[BenchRow]) -> dict[int, float]:
    totals: dict[int, list[int]] = {}
    for row in rows:
        totals.setdefault(row.n, []).append(row.rounds)
    return {n: sum(v) / len(v) for n, v in sorted(totals.items())}


def fit_scaling(rows: list[BenchRow]) -> ScalingFit:
    means = mean_rounds_by_n(rows)
    if len(means) < 2:
        raise ValueError("need at least two distinct n values to fit")
    x = np.log(np.array(sorted(means.keys()), dtype=np.float64))
    y = np.log(np.array([means[n] for n in sorted(means.keys())]))
    slope, intercept = np.polyfit(x, y, 1)
    predicted = slope * x + intercept
    ss_res = float(((y - predicted) ** 2).sum())
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return ScalingFit(exponent=float(slope), intercept=float(intercept), r_squared=min(max(r2, 0.0), 1.0))


def rows_to_csv(rows: list[BenchRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow(row.as_csv())
    return buf.getvalue()


def rows_from_csv(text: str) -> list[BenchRow]:
    reader = csv.reader(io.StringIO(text))
    header = tuple(next(reader))
    if header != CSV_HEADER:
        raise ValueError(f"unexpected CSV header {header!r}")
    rows = []
    for rec in reader:
        rows.append(
            BenchRow(
                oracle=rec[0],
                n=int(rec[1]),
                q=int(rec[2]),
                theta=int(rec[3]),
                coupler=rec[4],
                seed=int(rec[5]),
                rounds=int(rec[6]),
                total_queries=int(rec[7]),
                wall_time_ms=float(rec[8]),
            )
        )
    return rows


def fit_to_json_str(fit: ScalingFit) -> str:
    return json.dumps(fit.to_json(), sort_keys=True, separators=(",", ":"))
