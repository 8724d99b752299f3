"""Hot sampling loops of the coupling experiments.

Each kernel exists twice: a numba-jitted per-sample loop and a vectorized
numpy path.  Both read the same counter-based stream (see _rng), one
substream per sample with a fixed position layout, so outputs are
bit-identical; the active implementation is chosen by CRITSHUFFLE_BACKEND.

Position layout within a sample's substream:

* binomial/Poisson coupler (m indices): position 2i is the Poisson
  inversion draw of index i, position 2i+1 its Bernoulli repair draw (the
  Bernoulli draw is consumed even when unused, keeping stream alignment
  stable across parameter changes);
* Poisson perturbation coupler: position 0 the base draw, 1 the increment;
* multinomial coupler: totals as in the binomial coupler, then allocation
  draws at positions 2m+t (t < S) for the binomial side and, when the
  totals disagree, 2m+S+t (t < N) for the Poisson side (shared when they
  agree).

Inversion clamps to the last table entry when a uniform falls beyond the
truncated cdf (probability below the table's tail mass).
"""

from __future__ import annotations

import numpy as np

from ._backend import HAS_NUMBA, use_numba
from ._rng import GAMMA, MASK64, _MIX1, _MIX2, substream_seeds

_INV53 = 1.0 / (1 << 53)


# ---------------------------------------------------------------------------
# numpy path
# ---------------------------------------------------------------------------

def _uniform_grid(seeds: np.ndarray, positions: np.ndarray) -> np.ndarray:
    """Uniforms for every (stream, position) pair: shape (len(seeds), len(positions))."""
    z = seeds[:, None] + (positions[None, :] + np.uint64(1)) * np.uint64(GAMMA)
    z ^= z >> np.uint64(30)
    z *= np.uint64(_MIX1)
    z ^= z >> np.uint64(27)
    z *= np.uint64(_MIX2)
    z ^= z >> np.uint64(31)
    return (z >> np.uint64(11)).astype(np.float64) * _INV53


def _uniform_pointwise(seeds: np.ndarray, positions: np.ndarray) -> np.ndarray:
    """Uniforms at per-stream positions (elementwise)."""
    z = seeds + (positions.astype(np.uint64) + np.uint64(1)) * np.uint64(GAMMA)
    z ^= z >> np.uint64(30)
    z *= np.uint64(_MIX1)
    z ^= z >> np.uint64(27)
    z *= np.uint64(_MIX2)
    z ^= z >> np.uint64(31)
    return (z >> np.uint64(11)).astype(np.float64) * _INV53


def _invert(cdf: np.ndarray, u: np.ndarray) -> np.ndarray:
    return np.minimum(np.searchsorted(cdf, u, side="right"), cdf.size - 1)


def _binom_poisson_numpy(seed: int, n_samples: int, m: int, cdf: np.ndarray,
                         q: float, chunk: int = 1 << 16):
    S = np.empty(n_samples, dtype=np.int64)
    N = np.empty(n_samples, dtype=np.int64)
    idx_mismatch = np.empty(n_samples, dtype=bool)
    any_ge2 = np.empty(n_samples, dtype=bool)
    any_n0x1 = np.empty(n_samples, dtype=bool)
    pos_N = np.arange(m, dtype=np.uint64) * np.uint64(2)
    pos_B = pos_N + np.uint64(1)
    for start in range(0, n_samples, chunk):
        stop = min(start + chunk, n_samples)
        seeds = substream_seeds(seed, np.arange(start, stop, dtype=np.uint64))
        uN = _uniform_grid(seeds, pos_N)
        uB = _uniform_grid(seeds, pos_B)
        Ni = _invert(cdf, uN)
        Xi = np.where(Ni >= 1, 1, (uB < q).astype(np.int64))
        S[start:stop] = Xi.sum(axis=1)
        N[start:stop] = Ni.sum(axis=1)
        any_ge2[start:stop] = (Ni >= 2).any(axis=1)
        any_n0x1[start:stop] = ((Ni == 0) & (Xi == 1)).any(axis=1)
        # direct indexwise comparison, asserted upstream against the union
        idx_mismatch[start:stop] = (Xi != Ni).any(axis=1)
    return S, N, idx_mismatch, any_ge2, any_n0x1


def _poisson_poisson_numpy(seed: int, n_samples: int, cdf_base: np.ndarray,
                           cdf_extra: np.ndarray, chunk: int = 1 << 18):
    M = np.empty(n_samples, dtype=np.int64)
    R = np.empty(n_samples, dtype=np.int64)
    for start in range(0, n_samples, chunk):
        stop = min(start + chunk, n_samples)
        seeds = substream_seeds(seed, np.arange(start, stop, dtype=np.uint64))
        u = _uniform_grid(seeds, np.arange(2, dtype=np.uint64))
        M[start:stop] = _invert(cdf_base, u[:, 0])
        R[start:stop] = _invert(cdf_extra, u[:, 1])
    return M, R


def _allocate_numpy(seeds: np.ndarray, counts: np.ndarray, offsets: np.ndarray,
                    cond_cdf: np.ndarray, nB: int) -> np.ndarray:
    """Categorical allocation of ``counts[s]`` balls per stream, drawing at
    positions offsets[s] + t; returns per-category count matrix."""
    out = np.zeros((seeds.size, nB), dtype=np.int64)
    if counts.max(initial=0) == 0:
        return out
    for t in range(int(counts.max())):
        active = counts > t
        if not np.any(active):
            break
        u = _uniform_pointwise(seeds[active],
                               offsets[active] + np.uint64(t))
        cats = _invert(cond_cdf, u)
        np.add.at(out, (np.nonzero(active)[0], cats), 1)
    return out


def _multinomial_poisson_numpy(seed: int, n_samples: int, m: int,
                               cdf: np.ndarray, q: float,
                               cond_cdf: np.ndarray, nB: int,
                               chunk: int = 1 << 15):
    S, N, idx_mismatch, any_ge2, any_n0x1 = _binom_poisson_numpy(
        seed, n_samples, m, cdf, q, chunk=chunk)
    X = np.zeros((n_samples, nB), dtype=np.int64)
    U = np.zeros((n_samples, nB), dtype=np.int64)
    base = np.uint64(2 * m)
    for start in range(0, n_samples, chunk):
        stop = min(start + chunk, n_samples)
        seeds = substream_seeds(seed, np.arange(start, stop, dtype=np.uint64))
        Sv = S[start:stop]
        Nv = N[start:stop]
        offs_bin = np.full(seeds.size, base, dtype=np.uint64)
        X[start:stop] = _allocate_numpy(seeds, Sv, offs_bin, cond_cdf, nB)
        same = Sv == Nv
        U[start:stop][same] = X[start:stop][same]
        if np.any(~same):
            sel = ~same
            offs_poi = base + Sv[sel].astype(np.uint64)
            U[start:stop][sel] = _allocate_numpy(
                seeds[sel], Nv[sel], offs_poi, cond_cdf, nB)
    return X, U, S, N, idx_mismatch


# ---------------------------------------------------------------------------
# numba path
# ---------------------------------------------------------------------------

if HAS_NUMBA:
    from numba import njit

    _U64_GAMMA = np.uint64(GAMMA)
    _U64_M1 = np.uint64(_MIX1)
    _U64_M2 = np.uint64(_MIX2)

    @njit(cache=True, inline="always")
    def _mix_nb(z):
        z ^= z >> np.uint64(30)
        z *= _U64_M1
        z ^= z >> np.uint64(27)
        z *= _U64_M2
        z ^= z >> np.uint64(31)
        return z

    @njit(cache=True, inline="always")
    def _unif_nb(stream_seed, position):
        z = _mix_nb(stream_seed + (np.uint64(position) + np.uint64(1)) * _U64_GAMMA)
        return np.float64(z >> np.uint64(11)) * _INV53

    @njit(cache=True, inline="always")
    def _substream_nb(seed, index):
        return _mix_nb(_mix_nb((np.uint64(index) + np.uint64(1)) * _U64_GAMMA) + seed)

    @njit(cache=True, inline="always")
    def _invert_nb(cdf, u):
        j = 0
        last = cdf.size - 1
        while j < last and u >= cdf[j]:
            j += 1
        return j

    @njit(cache=True)
    def _binom_poisson_nb(seed, n_samples, m, cdf, q):
        S = np.empty(n_samples, dtype=np.int64)
        N = np.empty(n_samples, dtype=np.int64)
        idx_mismatch = np.empty(n_samples, dtype=np.bool_)
        any_ge2 = np.empty(n_samples, dtype=np.bool_)
        any_n0x1 = np.empty(n_samples, dtype=np.bool_)
        seed_u = np.uint64(seed)
        for s in range(n_samples):
            ss = _substream_nb(seed_u, s)
            ssum = 0
            nsum = 0
            ge2 = False
            n0x1 = False
            direct = False
            for i in range(m):
                Ni = _invert_nb(cdf, _unif_nb(ss, 2 * i))
                uB = _unif_nb(ss, 2 * i + 1)
                if Ni >= 1:
                    Xi = 1
                    if Ni >= 2:
                        ge2 = True
                else:
                    Xi = 1 if uB < q else 0
                    if Xi == 1:
                        n0x1 = True
                if Xi != Ni:
                    direct = True
                ssum += Xi
                nsum += Ni
            S[s] = ssum
            N[s] = nsum
            any_ge2[s] = ge2
            any_n0x1[s] = n0x1
            idx_mismatch[s] = direct
        return S, N, idx_mismatch, any_ge2, any_n0x1

    @njit(cache=True)
    def _poisson_poisson_nb(seed, n_samples, cdf_base, cdf_extra):
        M = np.empty(n_samples, dtype=np.int64)
        R = np.empty(n_samples, dtype=np.int64)
        seed_u = np.uint64(seed)
        for s in range(n_samples):
            ss = _substream_nb(seed_u, s)
            M[s] = _invert_nb(cdf_base, _unif_nb(ss, 0))
            R[s] = _invert_nb(cdf_extra, _unif_nb(ss, 1))
        return M, R

    @njit(cache=True)
    def _multinomial_poisson_nb(seed, n_samples, m, cdf, q, cond_cdf, nB):
        X = np.zeros((n_samples, nB), dtype=np.int64)
        U = np.zeros((n_samples, nB), dtype=np.int64)
        S = np.empty(n_samples, dtype=np.int64)
        N = np.empty(n_samples, dtype=np.int64)
        idx_mismatch = np.empty(n_samples, dtype=np.bool_)
        seed_u = np.uint64(seed)
        for s in range(n_samples):
            ss = _substream_nb(seed_u, s)
            ssum = 0
            nsum = 0
            mism = False
            for i in range(m):
                Ni = _invert_nb(cdf, _unif_nb(ss, 2 * i))
                uB = _unif_nb(ss, 2 * i + 1)
                if Ni >= 1:
                    Xi = 1
                    if Ni >= 2:
                        mism = True
                else:
                    Xi = 1 if uB < q else 0
                    if Xi == 1:
                        mism = True
                ssum += Xi
                nsum += Ni
            S[s] = ssum
            N[s] = nsum
            idx_mismatch[s] = mism
            base = 2 * m
            for t in range(ssum):
                cat = _invert_nb(cond_cdf, _unif_nb(ss, base + t))
                X[s, cat] += 1
            if ssum == nsum:
                for b in range(nB):
                    U[s, b] = X[s, b]
            else:
                for t in range(nsum):
                    cat = _invert_nb(cond_cdf, _unif_nb(ss, base + ssum + t))
                    U[s, cat] += 1
        return X, U, S, N, idx_mismatch


# ---------------------------------------------------------------------------
# dispatchers
# ---------------------------------------------------------------------------

def binom_poisson_samples(seed: int, n_samples: int, m: int,
                          pois_cdf: np.ndarray, q: float):
    """Coupled (Binomial total, Poisson total) samples plus indexwise
    mismatch-event flags."""
    if use_numba():
        return _binom_poisson_nb(np.uint64(seed & MASK64), n_samples, m,
                                 pois_cdf, q)
    return _binom_poisson_numpy(seed, n_samples, m, pois_cdf, q)


def poisson_poisson_samples(seed: int, n_samples: int, cdf_base: np.ndarray,
                            cdf_extra: np.ndarray):
    """Additive Poisson coupling: base draw and independent increment."""
    if use_numba():
        return _poisson_poisson_nb(np.uint64(seed & MASK64), n_samples,
                                   cdf_base, cdf_extra)
    return _poisson_poisson_numpy(seed, n_samples, cdf_base, cdf_extra)


def multinomial_poisson_samples(seed: int, n_samples: int, m: int,
                                pois_cdf: np.ndarray, q: float,
                                cond_cdf: np.ndarray, nB: int):
    """Coupled (multinomial restriction, independent Poisson vector) samples."""
    if use_numba():
        return _multinomial_poisson_nb(np.uint64(seed & MASK64), n_samples, m,
                                       pois_cdf, q, cond_cdf, nB)
    return _multinomial_poisson_numpy(seed, n_samples, m, pois_cdf, q,
                                      cond_cdf, nB)
