import numpy as np

from countsample import rng


def test_word64_deterministic():
    assert rng.word64(1, 2, 3) == rng.word64(1, 2, 3)
    assert rng.word64(1, 2, 3) != rng.word64(1, 2, 4)
    assert rng.word64(1, 2, 3) != rng.word64(1, 3, 3)
    assert rng.word64(1, 2, 3) != rng.word64(2, 2, 3)


def test_word64_range():
    for counter in range(50):
        w = rng.word64(123, 7, counter)
        assert 0 <= w < 1 << 64


def test_mix64_bijective_on_samples():
    seen = {rng.mix64(z) for z in range(10_000)}
    assert len(seen) == 10_000


def test_scalar_batch_equality():
    seeds = np.array([0, 1, 2**63, 2**64 - 1, 987654321], dtype=np.uint64)
    counters = np.arange(7)
    batch = rng.word64_np(seeds[:, None], 5, counters[None, :])
    for i, s in enumerate(seeds):
        for j, c in enumerate(counters):
            assert int(batch[i, j]) == rng.word64(int(s), 5, int(c))


def test_unit_float_scalar_batch_equality():
    words = rng.word64_np(np.uint64(9), 0, np.arange(100))
    floats = rng.unit_float_np(words)
    for j in range(100):
        assert floats[j] == rng.unit_float(int(words[j]))
    assert np.all(floats >= 0.0) and np.all(floats < 1.0)


def test_bounded_word_unbiased_range():
    counts = np.zeros(5, dtype=int)
    counter = 0
    for _ in range(5000):
        v, counter = rng.bounded_word(3, 1, counter, 5)
        counts[v] += 1
    assert counts.min() > 800  # each bucket near 1000


def test_permutation_is_permutation():
    for seed in range(20):
        perm = rng.permutation(seed, 17)
        assert sorted(perm) == list(range(17))
    assert rng.permutation(5, 17) == rng.permutation(5, 17)
    assert rng.permutation(5, 17) != rng.permutation(6, 17)


def test_permutation_uniform_first_element():
    n = 6
    counts = np.zeros(n, dtype=int)
    for seed in range(6000):
        counts[rng.permutation(seed, n)[0]] += 1
    assert counts.min() > 800


def test_derive_seeds_distinct():
    seeds = rng.derive_seeds(42, 1000)
    assert len(set(int(s) for s in seeds)) == 1000
