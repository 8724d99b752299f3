import numpy as np

from critshuffle._rng import (
    SeededStream,
    mix64,
    substream_seed,
    substream_seeds,
    u64_at,
    uniforms_at,
)

# reference outputs of the counter-based generator for seed 0
REFERENCE_SEED0 = [0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F]


def test_reference_vectors():
    s = SeededStream(0)
    assert [s.next_u64() for _ in range(3)] == REFERENCE_SEED0


def test_determinism_and_seed_sensitivity():
    a = SeededStream(1234)
    b = SeededStream(1234)
    c = SeededStream(1235)
    xs = [a.next_u64() for _ in range(10)]
    assert xs == [b.next_u64() for _ in range(10)]
    assert xs != [c.next_u64() for _ in range(10)]


def test_uniforms_in_unit_interval():
    s = SeededStream(7)
    us = [s.next_uniform() for _ in range(1000)]
    assert all(0.0 <= u < 1.0 for u in us)
    assert abs(np.mean(us) - 0.5) < 0.05


def test_vectorized_matches_sequential():
    seed = 987654321
    s = SeededStream(seed)
    seq = [s.next_u64() for _ in range(64)]
    vec = u64_at(seed, np.arange(64, dtype=np.uint64))
    assert seq == [int(v) for v in vec]
    s2 = SeededStream(seed)
    us = uniforms_at(seed, np.arange(8, dtype=np.uint64))
    assert [s2.next_uniform() for _ in range(8)] == [float(u) for u in us]


def test_substream_split_matches_scalar():
    seed = 42
    vec = substream_seeds(seed, np.arange(16, dtype=np.uint64))
    assert [substream_seed(seed, i) for i in range(16)] == [int(v) for v in vec]
    # spawned streams generate distinct output
    a = SeededStream(substream_seed(seed, 0))
    b = SeededStream(substream_seed(seed, 1))
    assert [a.next_u64() for _ in range(4)] != [b.next_u64() for _ in range(4)]


def test_mix_is_bijective_on_samples():
    xs = [0, 1, 2, 3, 2**63, 2**64 - 1, 0xDEADBEEF]
    assert len({mix64(x) for x in xs}) == len(xs)
