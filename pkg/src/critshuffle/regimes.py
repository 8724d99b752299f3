"""Regime classification and the phase-diagram diagnostics.

The scaling parameter a_n = e^{eps0(n)} / n selects the asymptotic regime:
a_n -> 0 gives Gaussian behavior of the log-likelihood ratio, a_n -> c^2 the
Poisson family, a_n -> infinity asymptotic distinguishability.  This module
classifies scalings, verifies the super-critical collapse and the
sub-critical Gaussianization on exact laws, compares the small-c edge with
the Gaussian curve, and evaluates the hidden-count diagnostics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .curves import delta_np
from .distcore import std_normal_cdf, tv_distance
from .limits import LimitParams, poisson_shift_delta_closed, skellam_shift_pair
from .rr import RRConfig, composition_pair, loglr_law, rr_config

__all__ = [
    "Scaling",
    "RegimeVerdict",
    "classify_regime",
    "supercritical_diagnostic",
    "subcritical_gaussian_check",
    "gaussian_edge_compare",
    "hidden_count_diagnostic",
    "noncommuting_demo",
    "gaussian_delta",
    "ks_standard_normal",
]


@dataclass(frozen=True)
class Scaling:
    """Local privacy level as a function of n.

    kind 'power' uses e^{eps0} = n^alpha, 'canonical' uses e^{eps0} = c^2 n,
    'explicit' takes a sequence of eps0 values aligned with the n grid.
    """

    kind: str
    alpha: Optional[float] = None
    c: Optional[float] = None
    eps0_values: Optional[Tuple[float, ...]] = None

    def eps0(self, n: int, index: int = 0) -> float:
        if self.kind == "power":
            return self.alpha * math.log(n)
        if self.kind == "canonical":
            return math.log(self.c * self.c * n)
        if self.kind == "explicit":
            return self.eps0_values[index]
        raise ValueError(f"unknown scaling kind {self.kind!r}")


def power_scaling(alpha: float) -> Scaling:
    if alpha <= 0:
        raise ValueError(f"power exponent {alpha} must be > 0")
    return Scaling(kind="power", alpha=alpha)


def canonical_scaling(c: float) -> Scaling:
    if c <= 0:
        raise ValueError(f"c={c} must be > 0")
    return Scaling(kind="canonical", c=c)


def explicit_scaling(eps0_values: Sequence[float]) -> Scaling:
    return Scaling(kind="explicit", eps0_values=tuple(float(v) for v in eps0_values))


@dataclass(frozen=True)
class RegimeVerdict:
    regime: str                 # subcritical | critical | supercritical | indeterminate
    c: Optional[float]          # populated for critical verdicts
    a_n_trace: Tuple[float, ...]
    n_grid: Tuple[int, ...]


def classify_regime(scaling: Scaling, n_grid: Sequence[int]) -> RegimeVerdict:
    """Verdict from the a_n trace over the grid.

    The decision uses the log-log trend of a_n, which is invariant under
    rescaling e^{eps0} by a constant (only the critical c changes).
    Non-monotone ambiguous traces yield 'indeterminate' with the trace
    attached.
    """
    ns = [int(v) for v in n_grid]
    if len(ns) < 2 or any(b <= a for a, b in zip(ns, ns[1:])):
        raise ValueError("n grid must be increasing with at least 2 points")
    trace = tuple(
        math.exp(scaling.eps0(n, i)) / n for i, n in enumerate(ns)
    )
    logs = np.log(np.asarray(trace))
    slope = float(np.polyfit(np.log(np.asarray(ns, dtype=float)), logs, 1)[0])
    diffs = np.diff(logs)
    tol = 1e-9
    if np.all(np.abs(diffs) <= tol) or abs(slope) < 0.02 and np.max(logs) - np.min(logs) < 0.02:
        c = math.sqrt(float(np.exp(logs.mean())))
        return RegimeVerdict("critical", c, trace, tuple(ns))
    if slope < -0.02 and np.all(diffs <= tol):
        return RegimeVerdict("subcritical", None, trace, tuple(ns))
    if slope > 0.02 and np.all(diffs >= -tol):
        return RegimeVerdict("supercritical", None, trace, tuple(ns))
    return RegimeVerdict("indeterminate", None, trace, tuple(ns))


def _resolve_k(k_rule: Union[str, int, Callable[[int], int]], n: int) -> int:
    if callable(k_rule):
        return int(k_rule(n))
    if k_rule in ("zero", 0):
        return 0
    if k_rule == "half":
        return n // 2
    if isinstance(k_rule, int):
        return k_rule
    raise ValueError(f"unknown composition rule {k_rule!r}")


@dataclass(frozen=True)
class SupercriticalRow:
    n: int
    k: int
    tv: float
    p_at_center: float    # P(D = 0), the separating event under the null
    q_at_center: float
    lr_at_zero_count: float  # e^{-eps0}


def supercritical_diagnostic(scaling: Scaling, k_rule,
                             n_grid: Sequence[int]) -> List[SupercriticalRow]:
    """Exact TV(P_n, Q_n) per n plus the separation-event masses."""
    rows = []
    for i, n in enumerate(int(v) for v in n_grid):
        k = _resolve_k(k_rule, n)
        cfg = RRConfig(n=n, eps0=scaling.eps0(n, i), k=k)
        P, Q = composition_pair(cfg)
        rows.append(SupercriticalRow(
            n=n, k=k,
            tv=tv_distance(P, Q).lower,
            p_at_center=P.prob(0),
            q_at_center=Q.prob(0),
            lr_at_zero_count=math.exp(-cfg.eps0),
        ))
    return rows


def ks_standard_normal(values: np.ndarray, probs: np.ndarray) -> float:
    """Exact Kolmogorov-Smirnov distance between a discrete law (with atoms
    at ``values``) and the standard normal."""
    cdf = np.cumsum(probs)
    phi = std_normal_cdf(values)
    upper = np.max(np.abs(cdf - phi))
    lower = np.max(np.abs(np.concatenate(([0.0], cdf[:-1])) - phi))
    return float(max(upper, lower))


@dataclass(frozen=True)
class GaussianCheckRow:
    n: int
    k: int
    h: float      # standardization scale
    ks: float     # exact KS distance of the standardized log-LR to N(0,1)


def subcritical_gaussian_check(alpha: float, k_rule, n_grid: Sequence[int],
                               hypothesis: str = "null") -> List[GaussianCheckRow]:
    """Standardized log-likelihood-ratio law versus the standard normal.

    Under the null the centering is +h^2/2; under the alternative it flips
    to -h^2/2.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"power exponent {alpha} outside (0, 1)")
    rows = []
    for n in (int(v) for v in n_grid):
        k = _resolve_k(k_rule, n)
        cfg = RRConfig(n=n, eps0=alpha * math.log(n), k=k)
        law = loglr_law(cfg, hypothesis=hypothesis)
        h = law.scale
        center = 0.5 * h * h if hypothesis == "null" else -0.5 * h * h
        x = (law.values + center) / h
        rows.append(GaussianCheckRow(n=n, k=k, h=h,
                                     ks=ks_standard_normal(x, law.probs)))
    return rows


def gaussian_delta(mu: float, eps: float) -> float:
    """(eps, delta) profile of the Gaussian shift-mu experiment."""
    if mu <= 0:
        return 0.0
    return float(std_normal_cdf(-eps / mu + mu / 2.0)
                 - math.exp(eps) * std_normal_cdf(-eps / mu - mu / 2.0))


@dataclass(frozen=True)
class EdgeCompareRow:
    c: float
    eps: float
    delta_poisson: float
    delta_gauss: float
    gap: float
    delta_skellam: Optional[float]
    gap_skellam: Optional[float]


def gaussian_edge_compare(c_grid: Sequence[float], eps_grid: Sequence[float],
                          include_skellam: bool = False,
                          pi: float = 0.5) -> List[EdgeCompareRow]:
    """Distance between the small-c critical curves and the Gaussian curve
    with shift parameter mu = c; the gap closes as c decreases."""
    rows = []
    for c in c_grid:
        if not 0.0 < c <= 1.0:
            raise ValueError(f"c={c} outside (0, 1]")
        skell_pair = None
        if include_skellam:
            skell_pair = skellam_shift_pair(LimitParams(c=c, pi=pi))
        for eps in eps_grid:
            dp = poisson_shift_delta_closed(1.0 / (c * c), eps)
            dg = gaussian_delta(c, eps)
            ds = gs = None
            if skell_pair is not None:
                ds = delta_np(skell_pair[0], skell_pair[1], eps).value
                gs = abs(ds - dg)
            rows.append(EdgeCompareRow(c=c, eps=eps, delta_poisson=dp,
                                       delta_gauss=dg, gap=abs(dp - dg),
                                       delta_skellam=ds, gap_skellam=gs))
    return rows


@dataclass(frozen=True)
class HiddenCountRow:
    n: int
    clone_mean: float        # (n-1) e^{-eps0}
    blanket_mean: float      # 2 n delta_n (instantiated blanket probability)
    clone_limit: float       # 1/c^2
    blanket_limit: float     # 2/c^2
    blanket_instantiated: bool = True  # 2 delta_n stands in for the blanket rate


def hidden_count_diagnostic(c: float, n_grid: Sequence[int]) -> List[HiddenCountRow]:
    """Hidden-count means under the canonical calibration and their limits."""
    if c <= 0:
        raise ValueError(f"c={c} must be > 0")
    rows = []
    for n in (int(v) for v in n_grid):
        cfg = rr_config(n, c=c, k=0)
        rows.append(HiddenCountRow(
            n=n,
            clone_mean=(n - 1) * math.exp(-cfg.eps0),
            blanket_mean=2.0 * n * cfg.delta_n,
            clone_limit=1.0 / (c * c),
            blanket_limit=2.0 / (c * c),
        ))
    return rows


@dataclass(frozen=True)
class NoncommutingCell:
    n: Optional[int]   # None marks the limit-experiment row
    eps: float
    delta_two: float
    slack: float
    stability_bound: Optional[float]
    limit_floor: float  # e^{-lam}


def noncommuting_demo(c: float, n_grid: Sequence[int],
                      eps_grid: Sequence[float]) -> List[NoncommutingCell]:
    """Matrix of exact two-sided deltas showing the non-commuting limits:
    rows in eps vanish at fixed n, columns in n approach the limit curve,
    which itself never drops below the support-mismatch floor e^{-1/c^2}."""
    from .limits import poisson_shift_pair
    from .rr import canonical_pair

    lam = 1.0 / (c * c)
    floor = math.exp(-lam)
    Pinf, Qinf = poisson_shift_pair(lam)
    cells = []
    for n in (int(v) for v in n_grid):
        cfg = rr_config(n, c=c, k=0)
        P, Q = canonical_pair(cfg)
        comp = 2.0 / (c * c * n) + 2.0 / (c ** 4 * n)
        for eps in eps_grid:
            res = delta_np(P, Q, eps, direction="two_sided")
            cells.append(NoncommutingCell(
                n=n, eps=eps, delta_two=res.value, slack=res.slack,
                stability_bound=(1.0 + math.exp(eps)) * comp,
                limit_floor=floor,
            ))
    for eps in eps_grid:
        res = delta_np(Pinf, Qinf, eps, direction="two_sided")
        cells.append(NoncommutingCell(
            n=None, eps=eps, delta_two=res.value, slack=res.slack,
            stability_bound=None, limit_floor=floor,
        ))
    return cells
