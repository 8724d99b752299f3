"""Every explicit convergence bound as a computable record, plus the sweep
engine that measures empirical total-variation rates against them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .curves import delta_np
from .distcore import IntDist, TVInterval, tv_distance
from .limits import IntensitySpec, LimitParams
from .rr import RRConfig, composition_pair

__all__ = [
    "PoissonBounds",
    "SharpLowerRecord",
    "SkellamBounds",
    "MultivariateBounds",
    "RateRow",
    "SweepResult",
    "poisson_bounds",
    "poisson_sharp_lower",
    "skellam_bounds",
    "multivariate_bounds",
    "cint_constant",
    "rate_sweep",
]


@dataclass(frozen=True)
class PoissonBounds:
    """Terms of the Poisson-shift total-variation bounds for one config."""

    n: int
    delta_n: float
    lambda_n: float          # n delta_n
    lambda_nm1: float        # (n-1) delta_n
    n_delta_sq: float        # n delta_n^2
    gap_n: float             # |lambda_n - lam|
    gap_n_signed: float      # lambda_n - lam
    gap_nm1: float           # |lambda_nm1 - lam|
    tv_p_bound: float        # null-side TV bound
    tv_q_bound: float        # alternative-side TV bound
    canonical_composite: float  # 2/(c^2 n) + 2/(c^4 n) with c^2 = a_n


def poisson_bounds(cfg: RRConfig, lam: float) -> PoissonBounds:
    n, d = cfg.n, cfg.delta_n
    lam_n = n * d
    lam_nm1 = (n - 1) * d
    one_minus = 1.0 - math.exp(-d)
    c2 = cfg.a_n
    return PoissonBounds(
        n=n,
        delta_n=d,
        lambda_n=lam_n,
        lambda_nm1=lam_nm1,
        n_delta_sq=n * d * d,
        gap_n=abs(lam_n - lam),
        gap_n_signed=lam_n - lam,
        gap_nm1=abs(lam_nm1 - lam),
        tv_p_bound=n * d * one_minus + abs(lam_n - lam),
        tv_q_bound=d + (n - 1) * d * one_minus + abs(lam_nm1 - lam),
        canonical_composite=2.0 / (c2 * n) + 2.0 / (c2 * c2 * n),
    )


@dataclass(frozen=True)
class SharpLowerRecord:
    """Sharp n^{-1} lower-bound data in the canonical calibration."""

    n: int
    c: float
    lower_bound: float          # e^{-1/c^2} / (4 c^4 n)
    predicted_atom_gap: float   # e^{-1/c^2} / (2 c^4 n)
    exact_atom_gap: float       # (1 + 1/(c^2 n))^{-n} - e^{-1/c^2}


def poisson_sharp_lower(c: float, n: int) -> SharpLowerRecord:
    if c <= 0 or n < 1:
        raise ValueError("need c > 0 and n >= 1")
    lam = 1.0 / (c * c)
    e = math.exp(-lam)
    c4 = c ** 4
    exact = math.exp(-n * math.log1p(1.0 / (c * c * n))) - e
    return SharpLowerRecord(
        n=n, c=c,
        lower_bound=e / (4.0 * c4 * n),
        predicted_atom_gap=e / (2.0 * c4 * n),
        exact_atom_gap=exact,
    )


@dataclass(frozen=True)
class SkellamBounds:
    """Terms of the Skellam-shift bounds, incl. the characteristic-function
    lower proxy evaluated from the exact pmfs at z = i."""

    n: int
    k: int
    delta_n: float
    n_delta_sq: float
    gap0: float               # |(n-k) delta - lam0|
    gap1: float               # |k delta - lam1|
    gap0_alt: float           # |(n-k-1) delta - lam0|
    gap1_alt: float           # |(k+1) delta - lam1|
    tv_p_bound: float
    tv_q_bound: float
    canonical_composite: float  # (2 c^2 + 3) / (c^4 n)
    cf_lower_proxy: Optional[float]       # |G_n(i) - G_inf(i)| / 2
    cf_gap: Optional[float]               # |G_n(i) - G_inf(i)|
    cf_predicted_gap: Optional[float]     # |G_inf(i)| sqrt(1/c^8 + 4 a^2/c^4) / n
    cf_limit_modulus: Optional[float]     # |G_inf(i)| = e^{-1/c^2}


def _pgf_at_i(dist: IntDist) -> complex:
    d = dist.support.astype(np.float64)
    phase = np.exp(1j * (math.pi / 2.0) * d)
    return complex(np.sum(dist.mass * phase))


def skellam_bounds(cfg: RRConfig, params: "LimitParams",
                   include_cf: bool = True,
                   pair: Optional[Tuple[IntDist, IntDist]] = None) -> SkellamBounds:
    lam0, lam1, pi = params.lam0, params.lam1, params.pi
    n, k, d = cfg.n, cfg.k, cfg.delta_n
    one_minus = 1.0 - math.exp(-d)
    g0 = abs((n - k) * d - lam0)
    g1 = abs(k * d - lam1)
    g0a = abs((n - k - 1) * d - lam0)
    g1a = abs((k + 1) * d - lam1)
    c2 = cfg.a_n
    cf_proxy = cf_gap = cf_pred = cf_mod = None
    if include_cf:
        P = pair[0] if pair is not None else composition_pair(cfg)[0]
        Gn = _pgf_at_i(P)
        Ginf = complex(np.exp(lam0 * (1j - 1.0) + lam1 * (-1j - 1.0)))
        cf_gap = abs(Gn - Ginf)
        cf_proxy = 0.5 * cf_gap
        alpha_n = k - pi * n
        cf_mod = abs(Ginf)
        cf_pred = cf_mod * math.sqrt(1.0 / c2 ** 4 + 4.0 * alpha_n ** 2 / c2 ** 2) / n
    return SkellamBounds(
        n=n, k=k, delta_n=d,
        n_delta_sq=n * d * d,
        gap0=g0, gap1=g1, gap0_alt=g0a, gap1_alt=g1a,
        tv_p_bound=(n - k) * d * one_minus + k * d * one_minus + g0 + g1,
        tv_q_bound=(n - k - 1) * d * one_minus + (k + 1) * d * one_minus + g0a + g1a,
        canonical_composite=(2.0 * c2 + 3.0) / (c2 * c2 * n),
        cf_lower_proxy=cf_proxy, cf_gap=cf_gap,
        cf_predicted_gap=cf_pred, cf_limit_modulus=cf_mod,
    )


@dataclass(frozen=True)
class MultivariateBounds:
    """Terms of the multivariate histogram-limit bounds for a sparse-error
    channel instance."""

    n: int
    k: int
    p0n: float
    p1n: float
    binom_term_p: float
    binom_term_q: float
    mismatch_p: float
    mismatch_q: float
    tv_p_bound: float
    tv_q_bound: float


def multivariate_bounds(channel, n: int, k: int, spec: IntensitySpec) -> MultivariateBounds:
    if channel.n != n:
        raise ValueError(f"channel instantiated at n={channel.n}, not {n}")
    W0 = channel.row(0)
    W1 = channel.row(1)
    Y = list(spec.alphabet)
    i0, i1 = Y.index(spec.y0), Y.index(spec.y1)
    pi = spec.pi
    p0n = 1.0 - W0[i0]
    p1n = 1.0 - W1[i1]
    bp = (n - k) * p0n * (1.0 - math.exp(-p0n)) + k * p1n * (1.0 - math.exp(-p1n))
    bq = (n - k - 1) * p0n * (1.0 - math.exp(-p0n)) + (k + 1) * p1n * (1.0 - math.exp(-p1n))
    mp = mq = 0.0
    for j, y in enumerate(Y):
        if j != i0:
            a = (1.0 - pi) * spec.alpha0.get(y, 0.0)
            mp += abs((n - k) * W0[j] - a)
            mq += abs((n - k - 1) * W0[j] - a)
        if j != i1:
            a = pi * spec.alpha1.get(y, 0.0)
            mp += abs(k * W1[j] - a)
            mq += abs((k + 1) * W1[j] - a)
    return MultivariateBounds(
        n=n, k=k, p0n=p0n, p1n=p1n,
        binom_term_p=bp, binom_term_q=bq,
        mismatch_p=mp, mismatch_q=mq,
        tv_p_bound=bp + mp, tv_q_bound=bq + mq,
    )


def cint_constant(p0: float, p1: float, pi: float,
                  Lambda0: float, Lambda1: float) -> float:
    """Interior conditional-smoothing constant with kappa = min(pi, 1-pi)/4."""
    for name, v in (("p0", p0), ("p1", p1), ("pi", pi)):
        if not 0.0 < v < 1.0:
            raise ValueError(f"{name}={v} must lie in the open interval (0, 1)")
    if Lambda0 < 0 or Lambda1 < 0:
        raise ValueError("total intensities must be nonnegative")
    kappa = 0.25 * min(pi, 1.0 - pi)
    L = Lambda0 + Lambda1
    front = math.sqrt(2.0 / (p0 * (1.0 - p0))) + math.sqrt(2.0 / (p1 * (1.0 - p1)))
    return front * (2.0 * L / math.sqrt(2.0 * kappa) + (2.0 * L + 4.0 * L * L) / kappa)


# ---------------------------------------------------------------------------
# sweep engine
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RateRow:
    n: int
    tv_exact: TVInterval
    upper_bound: Optional[float]
    lower_bound: Optional[float]
    delta_gap: float
    delta_gaps: Tuple[float, ...]
    stability_bound: Optional[float]
    valid: bool
    slack_ok: bool


@dataclass(frozen=True)
class SweepResult:
    rows: Tuple[RateRow, ...]
    slope: Optional[float]
    flags: Tuple[str, ...]


def rate_sweep(
    experiment_builder: Callable[[int], Tuple[IntDist, IntDist]],
    limit_pair: Tuple,
    n_grid: Sequence[int],
    eps_grid: Sequence[float],
    upper_bound: Optional[Callable[[int], float]] = None,
    lower_bound: Optional[Callable[[int], float]] = None,
    stability: Optional[Callable[[int, float], float]] = None,
    min_valid_n: int = 100,
) -> SweepResult:
    """Exact null-side TV against the limit, privacy-curve gaps at each eps,
    and the fitted log-log slope of the TV lower values.

    Rows where the enumeration slack exceeds 1% of the TV value are flagged
    (and excluded from the fit), never silently dropped.  ``valid`` records
    whether n has reached the asymptotic-validity threshold of the sharp
    lower bounds.
    """
    if len(n_grid) < 1:
        raise ValueError("empty n grid")
    Pinf, Qinf = limit_pair
    limit_deltas = [delta_np(Pinf, Qinf, e).value for e in eps_grid]
    rows: List[RateRow] = []
    flags: List[str] = []
    if len(n_grid) < 4:
        flags.append("short grid: slope fits want a geometric grid of length >= 4")
    for n in sorted(int(v) for v in n_grid):
        Pn, Qn = experiment_builder(n)
        tv = tv_distance(Pn, Pinf)
        gaps = tuple(
            abs(delta_np(Pn, Qn, e).value - ld) for e, ld in zip(eps_grid, limit_deltas)
        )
        slack = tv.upper - tv.lower
        slack_ok = slack <= 0.01 * tv.lower if tv.lower > 0 else slack == 0.0
        if not slack_ok:
            flags.append(f"slack at n={n}: {slack:.3e} vs tv {tv.lower:.3e}")
        rows.append(RateRow(
            n=n,
            tv_exact=tv,
            upper_bound=upper_bound(n) if upper_bound else None,
            lower_bound=lower_bound(n) if lower_bound else None,
            delta_gap=gaps[0] if gaps else 0.0,
            delta_gaps=gaps,
            stability_bound=stability(n, eps_grid[0]) if stability and eps_grid else None,
            valid=n >= min_valid_n,
            slack_ok=slack_ok,
        ))
    pts = [(math.log(r.n), math.log(r.tv_exact.lower))
           for r in rows if r.valid and r.slack_ok and r.tv_exact.lower > 0]
    if len(pts) >= 2:
        xs = np.array([p[0] for p in pts])
        ys = np.array([p[1] for p in pts])
        slope = float(np.polyfit(xs, ys, 1)[0])
    else:
        slope = None
        flags.append("slope undefined: fewer than 2 usable rows")
    return SweepResult(rows=tuple(rows), slope=slope, flags=tuple(flags))
