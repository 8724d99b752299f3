"""Exact finite-n histogram experiments by enumeration.

The released histogram under composition k is the independent sum of two
multinomial blocks (the 0-input and 1-input user groups).  Rare-output
counts are enumerated up to a cap with the excess mass tracked into the
lattice tail; dominant counts are enumerated exactly.  The neighboring
alternative uses group sizes (n-k-1, k+1) with the same k-centering, so the
unit shift shows up in the data rather than the bookkeeping.
"""

from __future__ import annotations

import math
from typing import Dict, List, Tuple

import numpy as np
from scipy.special import gammaln

from .channels import SparseChannel, TwoDominantSpec
from .lattice import LatticeDist

__all__ = ["exact_histogram_pair"]

MAX_ALPHABET = 6
MAX_N_TWO_DOMINANT = 128


def _rare_vectors(n_rare: int, cap: int) -> np.ndarray:
    """All rare count vectors with each coordinate in 0..cap."""
    if n_rare == 0:
        return np.zeros((1, 0), dtype=np.int64)
    grids = np.indices((cap + 1,) * n_rare)
    return grids.reshape(n_rare, -1).T.astype(np.int64)


def _group_law_single(W: np.ndarray, dom: int, m: int,
                      cap: int) -> Tuple[np.ndarray, np.ndarray, float]:
    """Histogram law of m iid draws from row W with one dominant output.

    Returns (points, probs, truncated) where points[i] is a full histogram
    vector over the alphabet.
    """
    Y = W.size
    rare_idx = [j for j in range(Y) if j != dom]
    R = _rare_vectors(len(rare_idx), cap)
    totals = R.sum(axis=1)
    ok = totals <= m
    # exact zeros in the row forbid positive counts there
    zero = W[rare_idx] == 0.0
    if np.any(zero):
        ok &= (R[:, zero] == 0).all(axis=1)
    R, totals = R[ok], totals[ok]
    logw = np.log(np.maximum(W, 1e-300))
    logp = (gammaln(m + 1.0) - gammaln(m - totals + 1.0)
            - gammaln(R + 1.0).sum(axis=1)
            + R @ logw[rare_idx] + (m - totals) * logw[dom])
    probs = np.exp(logp)
    pts = np.zeros((R.shape[0], Y), dtype=np.int64)
    pts[:, rare_idx] = R
    pts[:, dom] = m - totals
    keep = probs > 0.0
    pts, probs = pts[keep], probs[keep]
    truncated = max(0.0, 1.0 - math.fsum(probs.tolist()))
    return pts, probs, truncated


def _group_law_pair(W: np.ndarray, pair: Tuple[int, int], m: int,
                    cap: int) -> Tuple[np.ndarray, np.ndarray, float]:
    """Histogram law of m iid draws from a row with a dominant pair.

    Conditional on the rare counts, the pair total splits binomially with
    the within-pair proportion of W.
    """
    Y = W.size
    ia, ib = pair
    rare_idx = [j for j in range(Y) if j not in pair]
    w_pair = W[ia] + W[ib]
    theta = W[ia] / w_pair
    R = _rare_vectors(len(rare_idx), cap)
    totals = R.sum(axis=1)
    ok = totals <= m
    zero = W[rare_idx] == 0.0
    if np.any(zero):
        ok &= (R[:, zero] == 0).all(axis=1)
    R, totals = R[ok], totals[ok]
    logw = np.log(np.maximum(W, 1e-300))
    log_rare = (gammaln(m + 1.0) - gammaln(m - totals + 1.0)
                - gammaln(R + 1.0).sum(axis=1)
                + R @ logw[rare_idx] + (m - totals) * math.log(w_pair))
    pts_list: List[np.ndarray] = []
    probs_list: List[np.ndarray] = []
    degenerate = theta in (0.0, 1.0)
    if not degenerate:
        log_theta = math.log(theta)
        log_1mtheta = math.log1p(-theta)
    for r, t, lr in zip(R, totals, log_rare):
        T = m - int(t)
        if degenerate:
            block = np.zeros((1, Y), dtype=np.int64)
            block[0, rare_idx] = r
            block[0, ia if theta == 1.0 else ib] = T
            pts_list.append(block)
            probs_list.append(np.exp([lr]))
            continue
        x = np.arange(T + 1, dtype=np.float64)
        log_split = (gammaln(T + 1.0) - gammaln(x + 1.0) - gammaln(T - x + 1.0)
                     + x * log_theta + (T - x) * log_1mtheta)
        block = np.zeros((T + 1, Y), dtype=np.int64)
        block[:, rare_idx] = r
        block[:, ia] = np.arange(T + 1)
        block[:, ib] = T - np.arange(T + 1)
        pts_list.append(block)
        probs_list.append(np.exp(lr + log_split))
    pts = np.concatenate(pts_list, axis=0)
    probs = np.concatenate(probs_list)
    keep = probs > 0.0
    pts, probs = pts[keep], probs[keep]
    truncated = max(0.0, 1.0 - math.fsum(probs.tolist()))
    return pts, probs, truncated


def _encode(pts: np.ndarray, base: int) -> np.ndarray:
    code = np.zeros(pts.shape[0], dtype=np.int64)
    for j in range(pts.shape[1]):
        code = code * base + pts[:, j]
    return code


def _decode(code: int, base: int, dim: int) -> Tuple[int, ...]:
    out = []
    for _ in range(dim):
        out.append(code % base)
        code //= base
    return tuple(reversed(out))


def _combine(codes0: np.ndarray, probs0: np.ndarray,
             codes1: np.ndarray, probs1: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Convolution of two coded sparse laws (codes add coordinatewise)."""
    chunk = max(1, int(4e6) // max(1, codes1.size))
    acc_codes: List[np.ndarray] = []
    acc_probs: List[np.ndarray] = []
    for start in range(0, codes0.size, chunk):
        c0 = codes0[start:start + chunk]
        p0 = probs0[start:start + chunk]
        sums = (c0[:, None] + codes1[None, :]).ravel()
        ws = (p0[:, None] * probs1[None, :]).ravel()
        u, inv = np.unique(sums, return_inverse=True)
        acc_codes.append(u)
        acc_probs.append(np.bincount(inv, weights=ws, minlength=u.size))
    codes = np.concatenate(acc_codes)
    probs = np.concatenate(acc_probs)
    u, inv = np.unique(codes, return_inverse=True)
    return u, np.bincount(inv, weights=probs, minlength=u.size)


def _centering(channel: SparseChannel, n: int, k: int) -> Tuple[np.ndarray, int]:
    """Centering vector (numerators, denominator) for the k-composition."""
    Y = channel.alphabet
    spec = channel.spec
    if isinstance(spec, TwoDominantSpec):
        D = int(np.lcm(spec.p0.denominator, spec.p1.denominator))
        num = np.zeros(len(Y), dtype=np.int64)
        p0n = spec.p0.numerator * (D // spec.p0.denominator)
        p1n = spec.p1.numerator * (D // spec.p1.denominator)
        num[channel.index(spec.D0[0])] += (n - k) * p0n
        num[channel.index(spec.D0[1])] += (n - k) * (D - p0n)
        num[channel.index(spec.D1[0])] += k * p1n
        num[channel.index(spec.D1[1])] += k * (D - p1n)
        return num, D
    num = np.zeros(len(Y), dtype=np.int64)
    num[channel.index(spec.y0)] = n - k
    num[channel.index(spec.y1)] = k
    return num, 1


def exact_histogram_pair(channel: SparseChannel, n: int, k: int,
                         rare_cap: int = 12) -> Tuple[LatticeDist, LatticeDist]:
    """Exact centered-histogram laws under compositions k and k+1.

    Raises when the aggregated rare-count truncation exceeds 1e-9, when the
    alphabet exceeds the enumeration guard, or (two-dominant mode, where the
    dominant split makes enumeration quadratic in n) when n exceeds 128.
    """
    spec = channel.spec
    Y = channel.alphabet
    if len(Y) > MAX_ALPHABET:
        raise ValueError(f"alphabet size {len(Y)} exceeds guard {MAX_ALPHABET}")
    if channel.n != n:
        raise ValueError(f"channel instantiated at n={channel.n}, not {n}")
    if not 0 <= k <= n - 1:
        raise ValueError(f"k={k} outside 0..{n - 1}")
    two_dom = isinstance(spec, TwoDominantSpec)
    if two_dom and n > MAX_N_TWO_DOMINANT:
        raise ValueError(f"two-dominant enumeration guard: n={n} > {MAX_N_TWO_DOMINANT}")

    def group(b: int, m: int):
        W = channel.row(b)
        if two_dom:
            pr = spec.D0 if b == 0 else spec.D1
            return _group_law_pair(W, (channel.index(pr[0]), channel.index(pr[1])), m, rare_cap)
        dom = spec.y0 if b == 0 else spec.y1
        return _group_law_single(W, channel.index(dom), m, rare_cap)

    base = n + 1
    center_num, denom = _centering(channel, n, k)

    def build(m0: int, m1: int) -> LatticeDist:
        pts0, probs0, t0 = group(0, m0)
        pts1, probs1, t1 = group(1, m1)
        tail = t0 + t1
        if tail > 1e-9:
            raise ValueError(f"rare-count truncation {tail:.3e} exceeds 1e-9; "
                             "raise rare_cap")
        codes, probs = _combine(_encode(pts0, base), probs0,
                                _encode(pts1, base), probs1)
        points: Dict[Tuple[int, ...], float] = {}
        for code, p in zip(codes.tolist(), probs.tolist()):
            raw = _decode(code, base, len(Y))
            key = tuple(int(v) * denom - int(cn) for v, cn in zip(raw, center_num))
            points[key] = p
        return LatticeDist(points=points, denom=denom, tail_mass=tail)

    P = build(n - k, k)
    Q = build(n - k - 1, k + 1)
    return P, Q
