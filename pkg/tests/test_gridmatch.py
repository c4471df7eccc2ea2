import math

import numpy as np
import pytest

from conftest import brute_force_count, enumerate_perfect_matchings
from countsample.gridmatch import (
    DIRECTIONS,
    GridMatchingOracle,
    fkt_match_count,
    grid_matching_marginal,
    match_count,
)
from countsample.oracle import MarginalQuery, Pinning, ZeroMeasurePinning


def config_of_matching(oracle: GridMatchingOracle, matching) -> tuple[int, ...]:
    """Separator-column symbol vector induced by a perfect matching."""
    symbols = []
    for row in range(oracle.h):
        v = (oracle.sep_col, row)
        edge = next(e for e in matching if v in e)
        (other,) = set(edge) - {v}
        dx, dy = other[0] - v[0], other[1] - v[1]
        symbols.append(DIRECTIONS.index((dx, dy)))
    return tuple(symbols)


def exact_config_distribution(oracle: GridMatchingOracle) -> dict[tuple[int, ...], float]:
    matchings = enumerate_perfect_matchings(oracle.w, oracle.h)
    counts: dict[tuple[int, ...], int] = {}
    for m in matchings:
        key = config_of_matching(oracle, m)
        counts[key] = counts.get(key, 0) + 1
    total = len(matchings)
    return {k: v / total for k, v in counts.items()}


class TestCounts:
    @pytest.mark.parametrize("w", range(1, 5))
    @pytest.mark.parametrize("h", range(1, 5))
    def test_dp_matches_enumeration(self, w, h):
        assert match_count(w, h) == brute_force_count(w, h)

    @pytest.mark.parametrize("w,h", [(2, 2), (3, 2), (4, 3), (4, 4)])
    def test_dp_with_removals_matches_enumeration(self, w, h):
        rng = np.random.default_rng(0)
        vertices = [(x, y) for x in range(w) for y in range(h)]
        for _ in range(25):
            k = int(rng.integers(0, len(vertices)))
            picks = rng.permutation(len(vertices))[:k]
            removed = frozenset(vertices[i] for i in picks)
            assert match_count(w, h, removed) == brute_force_count(w, h, removed)

    def test_known_values(self):
        assert match_count(2, 1) == 1
        assert match_count(2, 2) == 2
        assert match_count(4, 4) == 36
        assert match_count(3, 3) == 0  # odd vertex count

    @pytest.mark.parametrize("w", range(1, 7))
    @pytest.mark.parametrize("h", range(1, 7))
    def test_fkt_matches_dp(self, w, h):
        if (w * h) % 2:
            assert fkt_match_count(w, h) == 0
        else:
            assert fkt_match_count(w, h) == match_count(w, h)

    def test_larger_grid_fkt(self):
        # 8x8 is the classic dimer value
        assert fkt_match_count(8, 8) == 12988816
        assert match_count(8, 8) == 12988816


class TestOracle:
    def test_two_by_two_marginal(self):
        oracle = GridMatchingOracle(2, 2)
        probs = oracle.conditional_marginal(MarginalQuery(0, Pinning())).probs
        # vertex (0,0): edges right and down each appear in one of 2 matchings
        assert probs[DIRECTIONS.index((1, 0))] == pytest.approx(0.5)
        assert probs[DIRECTIONS.index((0, 1))] == pytest.approx(0.5)

    def test_single_edge_grid(self):
        oracle = GridMatchingOracle(2, 1)
        probs = oracle.conditional_marginal(MarginalQuery(0, Pinning())).probs
        assert probs[DIRECTIONS.index((1, 0))] == 1.0

    def test_marginals_match_enumeration_4x4(self):
        oracle = GridMatchingOracle(4, 4)
        dist = exact_config_distribution(oracle)
        # unpinned marginal of each row
        for row in range(4):
            expected = np.zeros(4)
            for config, p in dist.items():
                expected[config[row]] += p
            got = oracle.conditional_marginal(MarginalQuery(row, Pinning())).probs
            np.testing.assert_allclose(got, expected, atol=1e-12)
        # pinned marginals
        for config, p in list(dist.items())[:10]:
            pins = {0: config[0], 2: config[2]}
            cond = {
                k: v for k, v in dist.items() if k[0] == config[0] and k[2] == config[2]
            }
            total = sum(cond.values())
            for row in (1, 3):
                expected = np.zeros(4)
                for k, v in cond.items():
                    expected[k[row]] += v / total
                got = oracle.conditional_marginal(MarginalQuery(row, Pinning(pins))).probs
                np.testing.assert_allclose(got, expected, atol=1e-12)

    def test_adjacent_rows_sharing_edge(self):
        # rows 0 and 1 pointing at each other share one edge: consistent
        oracle = GridMatchingOracle(2, 2)
        down, up = DIRECTIONS.index((0, 1)), DIRECTIONS.index((0, -1))
        logp = oracle.joint_probability(Pinning({0: down, 1: up}))
        assert math.exp(logp) == pytest.approx(0.5)

    def test_off_grid_direction_zero_measure(self):
        # separator column of the 2x2 grid is x=0: pointing left exits the grid
        oracle = GridMatchingOracle(2, 2)
        left = DIRECTIONS.index((-1, 0))
        with pytest.raises(ZeroMeasurePinning):
            oracle.conditional_marginal(MarginalQuery(1, Pinning({0: left})))

    def test_vertex_conflict_zero_measure(self):
        # 4x3, separator column x=1: row0 down uses (1,0)-(1,1), row1 right
        # uses (1,1)-(2,1); both cover vertex (1,1)
        oracle = GridMatchingOracle(4, 3)
        right = DIRECTIONS.index((1, 0))
        down = DIRECTIONS.index((0, 1))
        with pytest.raises(ZeroMeasurePinning):
            oracle.conditional_marginal(MarginalQuery(2, Pinning({0: down, 1: right})))
        assert oracle.joint_probability(Pinning({0: down, 1: right})) == -math.inf

    def test_impossible_grid_rejected(self):
        with pytest.raises(ValueError):
            GridMatchingOracle(3, 3)

    def test_wrapper_function(self):
        probs = grid_matching_marginal(2, 2, MarginalQuery(0, Pinning())).probs
        assert probs.sum() == pytest.approx(1.0)


def test_log_probability_matches_ratio():
    oracle = GridMatchingOracle(4, 4)
    dist = exact_config_distribution(oracle)
    config = next(iter(dist))
    pins = {0: config[0]}
    expected = sum(v for k, v in dist.items() if k[0] == config[0])
    assert math.exp(oracle.joint_probability(Pinning(pins))) == pytest.approx(expected)
