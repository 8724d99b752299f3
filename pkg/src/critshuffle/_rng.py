"""Deterministic 64-bit random stream for the sampling experiments.

The generator is counter-based: the state advances by a fixed odd constant
and each output is produced by an xor-shift-multiply mixer of the state.
Output ``k`` of the stream with seed ``s`` is therefore a pure function

    out(s, k) = mix64(s + (k + 1) * GAMMA   mod 2**64)

which makes the sequential generator and the vectorized numpy path produce
bit-identical draws.  Reference test vectors live in tests/test_rng.py.

Parallel or per-sample substreams use the documented split rule

    substream_seed(s, i) = mix64(s + mix64((i + 1) * GAMMA)   mod 2**64)

so that each substream is again a counter-based stream of the same family.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

# uniforms are the top 53 bits of the mixed output
_INV53 = 1.0 / (1 << 53)


def mix64(z: int) -> int:
    """Finalizing xor-shift-multiply mixer (bijective on 64-bit words)."""
    z &= MASK64
    z ^= z >> 30
    z = (z * _MIX1) & MASK64
    z ^= z >> 27
    z = (z * _MIX2) & MASK64
    z ^= z >> 31
    return z


def substream_seed(seed: int, index: int) -> int:
    """Seed of the ``index``-th derived substream of ``seed``."""
    return mix64((seed + mix64(((index + 1) * GAMMA) & MASK64)) & MASK64)


class SeededStream:
    """Single-owner sequential view of the counter-based stream.

    Identical seeds reproduce identical outputs bit-for-bit; the class keeps
    only the 64-bit counter state.
    """

    def __init__(self, seed: int):
        self.state = int(seed) & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GAMMA) & MASK64
        return mix64(self.state)

    def next_uniform(self) -> float:
        """Uniform double in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * _INV53

    def spawn(self, index: int) -> "SeededStream":
        """Independent substream via the documented split rule."""
        return SeededStream(substream_seed(self.state, index))


# ---------------------------------------------------------------------------
# vectorized counter access (numpy fallback path of the kernels)
# ---------------------------------------------------------------------------

def _mix_vec(z: np.ndarray) -> np.ndarray:
    z = z.copy()
    z ^= z >> np.uint64(30)
    z *= np.uint64(_MIX1)
    z ^= z >> np.uint64(27)
    z *= np.uint64(_MIX2)
    z ^= z >> np.uint64(31)
    return z


def u64_at(seed: int, ks: np.ndarray) -> np.ndarray:
    """Outputs ``out(seed, k)`` for an int64/uint64 array of counters ``k``."""
    s = np.uint64(int(seed) & MASK64)
    return _mix_vec(s + (ks.astype(np.uint64) + np.uint64(1)) * np.uint64(GAMMA))


def uniforms_at(seed: int, ks: np.ndarray) -> np.ndarray:
    """Uniform doubles in [0, 1) at the given counter positions."""
    return (u64_at(seed, ks) >> np.uint64(11)).astype(np.float64) * _INV53


def substream_seeds(seed: int, indices: np.ndarray) -> np.ndarray:
    """Vectorized ``substream_seed`` for an array of substream indices."""
    inner = _mix_vec((indices.astype(np.uint64) + np.uint64(1)) * np.uint64(GAMMA))
    return _mix_vec(inner + np.uint64(int(seed) & MASK64))


def uniform_column(seeds: np.ndarray, position: int) -> np.ndarray:
    """One uniform from each of many streams, all at the same position."""
    step = np.uint64(((position + 1) * GAMMA) & MASK64)
    z = seeds.astype(np.uint64) + step
    return (_mix_vec(z) >> np.uint64(11)).astype(np.float64) * _INV53
