"""Two-dominant channels: Gaussian/jump decomposition and its checks.

With a dominant output pair per input, the centered histogram splits into a
sqrt(n)-scale fluctuation inside the span M of the pair-difference vectors
and an O(1) jump component in the orthogonal complement.  This module builds
the exact rational projections, the limiting covariance / jump measure /
shift, the finite-n and limiting characteristic functions, a seeded sampler
for the normalized statistic, and the full-versus-projected privacy-curve
gap with its n^{-1/2} envelope.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ._rng import substream_seeds, uniform_column
from .bounds import cint_constant
from .channels import SparseChannel, TwoDominantSpec, channel_from_intensities
from .curves import delta_np
from .distcore import make_binomial, make_poisson
from .lattice import (
    LatticeDist,
    apply_rational_matrix,
    convolve_along_direction,
    lattice_point_mass,
    product_with_int_factor,
    shift_lattice,
)
from .multivariate import exact_histogram_pair

__all__ = [
    "HybridModel",
    "hybrid_setup",
    "project_jump_pair",
    "projected_limit_pair",
    "hybrid_cf",
    "hybrid_mc_sample",
    "hybrid_delta_gap",
    "HybridSamples",
    "HybridGapRow",
]


@dataclass(frozen=True)
class HybridModel:
    """Exact projection data for a disjoint two-dominant channel.

    Rational objects are stored as integer numerators over a denominator:
    the Gaussian-block projector is proj_g_num / 2 (the Gram matrix of the
    pair differences is 2 I for disjoint pairs), the jump projector its
    complement, jump vectors and the shift are over jump_denom.
    """

    spec: TwoDominantSpec
    pi: float
    g0: np.ndarray                   # e_{y0a} - e_{y0b}
    g1: np.ndarray
    mu_denom: int
    mu0_num: np.ndarray
    mu1_num: np.ndarray
    proj_g_num: np.ndarray           # 2 * Pi_G, integer
    proj_j_num: np.ndarray           # 2 * Pi_J, integer
    sigma: np.ndarray                # covariance operator on the full space
    sigma_frame: np.ndarray          # 2x2 Gram form <g_i, Sigma g_j>
    jump_denom: int
    jumps: Tuple[Tuple[int, str, float, Tuple[int, ...]], ...]
    # entries (input bit, symbol, levy weight, jump vector numerators)
    delta_num: Tuple[int, ...]       # shift Pi_J(mu1 - mu0) over jump_denom

    @property
    def proj_g(self) -> np.ndarray:
        return self.proj_g_num / 2.0

    @property
    def proj_j(self) -> np.ndarray:
        return self.proj_j_num / 2.0

    @property
    def delta(self) -> np.ndarray:
        return np.asarray(self.delta_num, dtype=np.float64) / self.jump_denom


def hybrid_setup(spec: TwoDominantSpec, pi: Optional[float] = None) -> HybridModel:
    """Exact projections, covariance, jump measure and shift for the model."""
    if pi is None:
        pi = spec.pi
    Y = spec.alphabet
    dim = len(Y)
    idx = {y: i for i, y in enumerate(Y)}

    def basis(y: str) -> np.ndarray:
        v = np.zeros(dim, dtype=np.int64)
        v[idx[y]] = 1
        return v

    g0 = basis(spec.D0[0]) - basis(spec.D0[1])
    g1 = basis(spec.D1[0]) - basis(spec.D1[1])
    # disjoint pairs make {g0, g1} orthogonal with squared norm 2
    proj_g_num = np.outer(g0, g0) + np.outer(g1, g1)
    proj_j_num = 2 * np.eye(dim, dtype=np.int64) - proj_g_num

    D = int(np.lcm(spec.p0.denominator, spec.p1.denominator))
    p0n = spec.p0.numerator * (D // spec.p0.denominator)
    p1n = spec.p1.numerator * (D // spec.p1.denominator)
    mu0_num = p0n * basis(spec.D0[0]) + (D - p0n) * basis(spec.D0[1])
    mu1_num = p1n * basis(spec.D1[0]) + (D - p1n) * basis(spec.D1[1])

    p0f, p1f = float(spec.p0), float(spec.p1)
    sigma = ((1.0 - pi) * p0f * (1.0 - p0f) * np.outer(g0, g0)
             + pi * p1f * (1.0 - p1f) * np.outer(g1, g1)).astype(np.float64)
    sigma_frame = np.diag([4.0 * (1.0 - pi) * p0f * (1.0 - p0f),
                           4.0 * pi * p1f * (1.0 - p1f)])

    jd = 2 * D
    jumps: List[Tuple[int, str, float, Tuple[int, ...]]] = []
    for b, (pair, mu_num, alpha, w) in enumerate((
        (spec.D0, mu0_num, spec.alpha0, 1.0 - pi),
        (spec.D1, mu1_num, spec.alpha1, pi),
    )):
        for y, a in alpha.items():
            vec = proj_j_num @ (D * basis(y) - mu_num)  # over denom 2D
            jumps.append((b, y, w * a, tuple(int(v) for v in vec)))
    delta_vec = proj_j_num @ (mu1_num - mu0_num)
    delta_num = tuple(int(v) for v in delta_vec)
    if all(v == 0 for v in delta_num):
        raise ValueError("projected dominant means coincide; jump shift is zero")
    return HybridModel(
        spec=spec, pi=pi, g0=g0, g1=g1,
        mu_denom=D, mu0_num=mu0_num, mu1_num=mu1_num,
        proj_g_num=proj_g_num, proj_j_num=proj_j_num,
        sigma=sigma, sigma_frame=sigma_frame,
        jump_denom=jd, jumps=tuple(jumps), delta_num=delta_num,
    )


def project_jump_pair(pair: Tuple[LatticeDist, LatticeDist],
                      model: HybridModel) -> Tuple[LatticeDist, LatticeDist]:
    """Exact pushforward of both laws under the jump projector."""
    P, Q = pair
    return (apply_rational_matrix(P, model.proj_j_num, 2),
            apply_rational_matrix(Q, model.proj_j_num, 2))


def projected_limit_pair(model: HybridModel,
                         tail_eps: float = 1e-12) -> Tuple[LatticeDist, LatticeDist]:
    """Limit laws of the jump block: independent Poisson counts along each
    jump vector, and the same law shifted by the jump-space shift."""
    dim = len(model.spec.alphabet)
    P = lattice_point_mass([0] * dim)
    active = [(w, vec) for _, _, w, vec in model.jumps if w > 0]
    if active:
        per = tail_eps / len(active)
        for w, vec in active:
            counts = make_poisson(w, per)
            P = convolve_along_direction(P, counts, vec, model.jump_denom)
    Q = shift_lattice(P, model.delta_num, model.jump_denom)
    return P, Q


# ---------------------------------------------------------------------------
# characteristic functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CFTable:
    grid: Tuple[Tuple[Tuple[float, ...], Tuple[float, ...]], ...]
    finite_null: np.ndarray
    finite_alt: np.ndarray
    limit_null: np.ndarray
    limit_alt: np.ndarray

    @property
    def sup_null(self) -> float:
        return float(np.max(np.abs(self.finite_null - self.limit_null)))

    @property
    def sup_alt(self) -> float:
        return float(np.max(np.abs(self.finite_alt - self.limit_alt)))


def hybrid_cf(model: HybridModel, channel: SparseChannel, n: int, k: int,
              grid: Sequence[Tuple[Sequence[float], Sequence[float]]]) -> CFTable:
    """Finite-n and limiting characteristic functions of the normalized
    statistic (Gaussian block / sqrt(n), jump block) on a (u, v) grid.

    The finite-n value is the product of per-user factors; the alternative
    keeps the null centering, contributing the shift phase.
    """
    Y = channel.alphabet
    dim = len(Y)
    pg = model.proj_g
    pj = model.proj_j
    mu0 = model.mu0_num / model.mu_denom
    mu1 = model.mu1_num / model.mu_denom
    sqn = math.sqrt(n)
    m0, m1 = n - k, k
    fin_null = np.empty(len(grid), dtype=np.complex128)
    fin_alt = np.empty(len(grid), dtype=np.complex128)
    lim_null = np.empty(len(grid), dtype=np.complex128)
    lim_alt = np.empty(len(grid), dtype=np.complex128)
    basis = np.eye(dim)
    for idx, (u, v) in enumerate(grid):
        u = np.asarray(u, dtype=np.float64)
        v = np.asarray(v, dtype=np.float64)
        phis = []
        for b, mu in ((0, mu0), (1, mu1)):
            W = channel.row(b)
            phase = ((basis - mu) @ pg.T @ u) / sqn + (basis - mu) @ pj.T @ v
            phis.append(complex(np.sum(W * np.exp(1j * phase))))
        shift_phase = float(u @ pg @ (mu1 - mu0)) / sqn + float(v @ pj @ (mu1 - mu0))
        fin_null[idx] = phis[0] ** m0 * phis[1] ** m1
        fin_alt[idx] = phis[0] ** (m0 - 1) * phis[1] ** (m1 + 1) * np.exp(1j * shift_phase)
        exponent = -0.5 * float(u @ model.sigma @ u)
        for _, _, w, vec in model.jumps:
            jv = np.asarray(vec, dtype=np.float64) / model.jump_denom
            exponent += w * (np.exp(1j * float(v @ jv)) - 1.0)
        lim_null[idx] = np.exp(exponent)
        lim_alt[idx] = lim_null[idx] * np.exp(1j * float(v @ model.delta))
    return CFTable(
        grid=tuple((tuple(map(float, u)), tuple(map(float, v))) for u, v in grid),
        finite_null=fin_null, finite_alt=fin_alt,
        limit_null=lim_null, limit_alt=lim_alt,
    )


# ---------------------------------------------------------------------------
# seeded sampling of the normalized statistic
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HybridSamples:
    seed: int
    counts: np.ndarray        # (S, |Y|) histogram under the sampled hypothesis
    group0_counts: np.ndarray
    group1_counts: np.ndarray
    gauss_frame: np.ndarray   # (S, 2): <H, g0>/sqrt(n), <H, g1>/sqrt(n)
    jump_num: np.ndarray      # (S, |Y|) jump-block numerators
    jump_denom: int


def _binomial_inversion_small(M: np.ndarray, q: float, u: np.ndarray) -> np.ndarray:
    """Vectorized Binomial(M, q) sampling by cdf inversion from zero.

    Intended for small q (expected count O(1)); exact for any q.
    """
    out = np.zeros(M.size, dtype=np.int64)
    if q == 0.0:
        return out
    t = np.exp(M * math.log1p(-q))
    cdf = t.copy()
    active = u >= cdf
    ratio = q / (1.0 - q)
    j = 0
    while np.any(active):
        j += 1
        hit = active & (out + 0 >= M)  # exhausted support: clamp
        out[hit] = M[hit]
        active &= ~hit
        if not np.any(active):
            break
        t = np.where(active, t * (M - j + 1) / j * ratio, t)
        cdf = np.where(active, cdf + t, cdf)
        out[active] += 1
        active &= u >= cdf
    return out


def _binomial_by_table(T: np.ndarray, theta: float, u: np.ndarray) -> np.ndarray:
    """Exact Binomial(T, theta) inversion with one cdf table per distinct T."""
    out = np.zeros(T.size, dtype=np.int64)
    for t in np.unique(T):
        sel = T == t
        if t == 0:
            continue
        dist = make_binomial(int(t), theta)
        cdf = np.cumsum(dist.mass)
        idx = np.minimum(np.searchsorted(cdf, u[sel], side="right"), cdf.size - 1)
        out[sel] = dist.offset + idx
    return out


def hybrid_mc_sample(channel: SparseChannel, n: int, k: int, seed: int,
                     n_samples: int, hypothesis: str = "null") -> HybridSamples:
    """Seeded histogram samples of the two-dominant channel experiment.

    Each sample draws the two multinomial groups by sequential conditional
    binomials (rare categories first, then the dominant-pair split); all
    randomness comes from per-sample substreams of the given seed, so runs
    are reproducible bit-for-bit.
    """
    spec = channel.spec
    if not isinstance(spec, TwoDominantSpec):
        raise ValueError("sampler requires a two-dominant channel")
    if hypothesis not in ("null", "alt"):
        raise ValueError(f"unknown hypothesis {hypothesis!r}")
    Y = channel.alphabet
    dim = len(Y)
    m0, m1 = (n - k, k) if hypothesis == "null" else (n - k - 1, k + 1)
    model = hybrid_setup(spec)
    seeds = substream_seeds(seed, np.arange(n_samples, dtype=np.uint64))

    pos = 0
    group_counts = []
    for b, (pair, m) in enumerate(((spec.D0, m0), (spec.D1, m1))):
        W = channel.row(b)
        rare_idx = [j for j in range(dim) if Y[j] not in pair]
        counts = np.zeros((n_samples, dim), dtype=np.int64)
        remaining = np.full(n_samples, m, dtype=np.int64)
        mass_left = 1.0
        for j in rare_idx:
            u = uniform_column(seeds, pos)
            pos += 1
            q = W[j] / mass_left if mass_left > 0 else 0.0
            c = _binomial_inversion_small(remaining, min(q, 1.0), u)
            counts[:, j] = c
            remaining -= c
            mass_left -= W[j]
        ia, ib = Y.index(pair[0]), Y.index(pair[1])
        theta = W[ia] / (W[ia] + W[ib])
        u = uniform_column(seeds, pos)
        pos += 1
        x = _binomial_by_table(remaining, theta, u)
        counts[:, ia] = x
        counts[:, ib] = remaining - x
        group_counts.append(counts)

    counts = group_counts[0] + group_counts[1]
    center = ((n - k) * model.mu0_num + k * model.mu1_num) / model.mu_denom
    centered = counts - center[None, :]
    gauss_frame = np.stack([
        centered @ model.g0 / math.sqrt(n),
        centered @ model.g1 / math.sqrt(n),
    ], axis=1)
    # jump-block numerators over jump_denom = 2 * mu_denom
    jn = (counts * model.mu_denom
          - ((n - k) * model.mu0_num + k * model.mu1_num)[None, :]) @ model.proj_j_num.T
    return HybridSamples(
        seed=seed, counts=counts,
        group0_counts=group_counts[0], group1_counts=group_counts[1],
        gauss_frame=gauss_frame, jump_num=jn, jump_denom=model.jump_denom,
    )


# ---------------------------------------------------------------------------
# full vs projected privacy curves
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HybridGapRow:
    n: int
    k: int
    delta_full: float
    delta_proj: float
    gap: float
    bound: Optional[float]        # C_int (1 + e^eps) / sqrt(n); interior only
    cint: Optional[float]
    empirical_constant: Optional[float]  # gap sqrt(n) / (1 + e^eps)
    delta_proj_limit: float
    identity_gap: float           # common-independent-factor identity residual


def hybrid_delta_gap(spec: TwoDominantSpec, eps: float, n_grid: Sequence[int],
                     rare_cap: int = 12) -> List[HybridGapRow]:
    """Exact full-experiment delta versus projected-jump delta per n.

    Also evaluates, at the projected limit pair, the exact identity that a
    common independent factor leaves the privacy curve unchanged (the reason
    the Gaussian block drops out in the limit).
    """
    pi = spec.pi
    model = hybrid_setup(spec)
    PL, QL = projected_limit_pair(model)
    delta_lim = delta_np(PL, QL, eps).value
    R = make_binomial(3, 0.375)
    prodP = product_with_int_factor(PL, R)
    prodQ = product_with_int_factor(QL, R)
    identity_gap = abs(delta_np(prodP, prodQ, eps).value - delta_lim)

    cint = None
    if 0.0 < pi < 1.0:
        cint = cint_constant(float(spec.p0), float(spec.p1), pi,
                             math.fsum(spec.alpha0.values()),
                             math.fsum(spec.alpha1.values()))
    rows = []
    for n in (int(v) for v in n_grid):
        k = int(math.floor(pi * n))
        channel = channel_from_intensities(spec, n)
        P, Q = exact_histogram_pair(channel, n, k, rare_cap)
        d_full = delta_np(P, Q, eps).value
        PJ, QJ = project_jump_pair((P, Q), model)
        d_proj = delta_np(PJ, QJ, eps).value
        gap = abs(d_full - d_proj)
        bound = emp = None
        if cint is not None:
            bound = cint * (1.0 + math.exp(eps)) / math.sqrt(n)
            emp = gap * math.sqrt(n) / (1.0 + math.exp(eps))
        rows.append(HybridGapRow(
            n=n, k=k, delta_full=d_full, delta_proj=d_proj, gap=gap,
            bound=bound, cint=cint, empirical_constant=emp,
            delta_proj_limit=delta_lim, identity_gap=identity_gap,
        ))
    return rows
