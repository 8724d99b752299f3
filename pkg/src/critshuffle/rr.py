"""Exact finite-n shuffled binary randomized-response experiments.

The released statistic is the count of output-1 messages; neighboring
datasets (k versus k+1 ones) give a pair of exact integer laws built from
binomial blocks.  The log-likelihood-ratio law is derived from the exact
pmf ratio, together with the standardization constants used by the
sub-critical Gaussian diagnostics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .distcore import IntDist, affine_map, convolve, make_bernoulli, make_binomial

__all__ = [
    "RRConfig",
    "ScoredLaw",
    "rr_config",
    "canonical_pair",
    "composition_pair",
    "likelihood_ratio_canonical",
    "loglr_law",
]

# pmf entries below this are moved to the reported defect, never dropped
UNDERFLOW = 1e-300


@dataclass(frozen=True)
class RRConfig:
    """Scalar parameters of one finite-n shuffled RR instance."""

    n: int
    eps0: float
    k: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"population n={self.n} must be >= 1")
        if not 0 <= self.k <= self.n - 1:
            raise ValueError(f"composition k={self.k} outside 0..{self.n - 1}")
        if not self.eps0 > 0:
            raise ValueError(f"local level eps0={self.eps0} must be > 0")

    @property
    def delta_n(self) -> float:
        """Local flip probability 1 / (1 + e^{eps0})."""
        return 1.0 / (1.0 + math.exp(self.eps0))

    @property
    def a_n(self) -> float:
        """Scaling parameter e^{eps0} / n."""
        return math.exp(self.eps0) / self.n

    @property
    def pi_n(self) -> float:
        return self.k / self.n


def rr_config(n: int, eps0: Optional[float] = None, c: Optional[float] = None,
              k: int = 0) -> RRConfig:
    """Build a config from an explicit local level or the canonical
    calibration e^{eps0} = c^2 n."""
    if (eps0 is None) == (c is None):
        raise ValueError("specify exactly one of eps0 or c")
    if c is not None:
        if c <= 0:
            raise ValueError(f"c={c} must be > 0")
        eps0 = math.log(c * c * n)
    return RRConfig(n=n, eps0=float(eps0), k=k)


def canonical_pair(cfg: RRConfig) -> Tuple[IntDist, IntDist]:
    """Null and alternative count laws for the all-zeros dataset vs one one.

    P = Bin(n, delta); Q = Bin(n-1, delta) + Bern(1-delta), both exact.
    """
    if cfg.k != 0:
        raise ValueError(f"canonical pair requires k=0, got k={cfg.k}")
    d = cfg.delta_n
    P = make_binomial(cfg.n, d)
    Q = convolve(make_binomial(cfg.n - 1, d), make_bernoulli(1.0 - d))
    return P, Q


def composition_pair(cfg: RRConfig) -> Tuple[IntDist, IntDist]:
    """Centered count laws D = K - k under compositions k and k+1.

    P is the law of Bin(n-k, d) - Bin(k, d); Q is the law of
    1 + Bin(n-k-1, d) - Bin(k+1, d), both with the k-centering.
    """
    d = cfg.delta_n
    n, k = cfg.n, cfg.k
    P = convolve(make_binomial(n - k, d), affine_map(make_binomial(k, d), -1, 0))
    Qbase = convolve(make_binomial(n - k - 1, d),
                     affine_map(make_binomial(k + 1, d), -1, 0))
    Q = affine_map(Qbase, 1, 1)
    return P, Q


def likelihood_ratio_canonical(cfg: RRConfig, m: int) -> float:
    """dQ/dP at count m for the canonical pair: the affine form
    e^{-eps0} + (e^{eps0} - e^{-eps0}) m / n."""
    if cfg.k != 0:
        raise ValueError("canonical likelihood ratio requires k=0")
    if not 0 <= m <= cfg.n:
        raise ValueError(f"count m={m} outside 0..{cfg.n}")
    e = math.exp(cfg.eps0)
    return 1.0 / e + (e - 1.0 / e) * m / cfg.n


@dataclass(frozen=True)
class ScoredLaw:
    """Discrete law of the log-likelihood ratio under one hypothesis.

    values are strictly increasing; probs sum to 1 - defect, where defect
    collects the mass of support points whose pmf underflowed.  shift,
    variance and scale are the standardization constants
    (1 - 2 delta, n delta (1 - delta), shift / sqrt(variance)).
    """

    values: np.ndarray
    probs: np.ndarray
    defect: float
    shift: float
    variance: float
    scale: float

    def __post_init__(self):
        if np.any(np.diff(self.values) <= 0):
            raise ValueError("values must be strictly increasing")
        total = math.fsum(self.probs.tolist()) + self.defect
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"scored law mass {total!r} is not normalized")


def loglr_law(cfg: RRConfig, hypothesis: str = "null") -> ScoredLaw:
    """Exact law of log(dQ/dP) over the common support of the pair.

    The ratio is computed from the exact pmfs; entries below the underflow
    threshold are excluded from the atoms and accumulated into ``defect``.
    """
    if hypothesis not in ("null", "alt"):
        raise ValueError(f"unknown hypothesis {hypothesis!r}")
    P, Q = composition_pair(cfg)
    lo = min(P.offset, Q.offset)
    hi = max(P.hi, Q.hi)
    width = hi - lo + 1
    p = np.zeros(width)
    q = np.zeros(width)
    p[P.offset - lo: P.offset - lo + P.mass.size] = P.mass
    q[Q.offset - lo: Q.offset - lo + Q.mass.size] = Q.mass
    w = p if hypothesis == "null" else q

    ok = (p >= UNDERFLOW) & (q >= UNDERFLOW)
    defect = float(w[~ok].sum()) + (P.tail_mass if hypothesis == "null" else Q.tail_mass)
    values = np.log(q[ok]) - np.log(p[ok])
    probs = w[ok]

    # the ratio is increasing in the count, but merge float-equal values
    order = np.argsort(values, kind="stable")
    values, probs = values[order], probs[order]
    vals_out = [values[0]]
    probs_out = [probs[0]]
    for v, pr in zip(values[1:], probs[1:]):
        if v - vals_out[-1] <= 1e-12 * max(1.0, abs(v)):
            probs_out[-1] += pr
        else:
            vals_out.append(v)
            probs_out.append(pr)

    d = cfg.delta_n
    shift = 1.0 - 2.0 * d
    variance = cfg.n * d * (1.0 - d)
    return ScoredLaw(
        values=np.array(vals_out),
        probs=np.array(probs_out),
        defect=defect,
        shift=shift,
        variance=variance,
        scale=shift / math.sqrt(variance),
    )
