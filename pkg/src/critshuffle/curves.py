"""Exact privacy curves and trade-off functions for discrete experiments.

The hockey-stick value delta(eps) = sup_A {Q(A) - e^eps P(A)} is computed as
the positive-part series sum over the enumerated support union; truncation
slack is reported alongside (truncated Q-mass counts fully, truncated P-mass
is amplified by e^eps, mirroring the stability of the curve under TV
perturbations).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from .distcore import IntDist, TVInterval, _aligned
from .lattice import LatticeDist, _common

__all__ = [
    "DeltaResult",
    "TradeoffCurve",
    "delta_np",
    "tradeoff_generic",
    "delta_from_tradeoff",
    "curve_stability_bound",
    "floor_lower_bound",
]


@dataclass(frozen=True)
class DeltaResult:
    """Hockey-stick value with rigorous truncation slack."""

    value: float
    slack: float

    def __post_init__(self):
        if not 0.0 <= self.value <= 1.0 + 1e-9:
            raise ValueError(f"delta value {self.value} outside [0, 1]")
        if self.slack < 0:
            raise ValueError("slack must be nonnegative")


@dataclass(frozen=True)
class TradeoffCurve:
    """Piecewise-affine Neyman-Pearson curve as an ordered knot list.

    Knots have strictly increasing type-I error alpha and nonincreasing
    type-II error beta; the curve is the convex interpolation between them.
    """

    knots: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        al = [a for a, _ in self.knots]
        if any(a2 <= a1 for a1, a2 in zip(al, al[1:])):
            raise ValueError("knot alphas must be strictly increasing")
        if not self.knots or self.knots[0][0] != 0.0:
            raise ValueError("curve must start at alpha = 0")

    def evaluate(self, alpha: float) -> float:
        a = np.array([k[0] for k in self.knots])
        b = np.array([k[1] for k in self.knots])
        if alpha >= a[-1]:
            return float(b[-1])
        return float(np.interp(alpha, a, b))


def _pmf_pair(P, Q) -> Tuple[np.ndarray, np.ndarray]:
    """Aligned pmf arrays over the support union, for either kind."""
    if isinstance(P, LatticeDist) or isinstance(Q, LatticeDist):
        if not (isinstance(P, LatticeDist) and isinstance(Q, LatticeDist)):
            raise TypeError("operands must be the same kind")
        P2, Q2 = _common(P, Q)
        keys = list(P2.points.keys() | Q2.points.keys())
        p = np.array([P2.points.get(k, 0.0) for k in keys])
        q = np.array([Q2.points.get(k, 0.0) for k in keys])
        return p, q
    p, q, _ = _aligned(P, Q)
    return p, q


def _one_sided(p: np.ndarray, q: np.ndarray, eps: float) -> float:
    # delta_{Q||P}(eps) = sum_x (q(x) - e^eps p(x))_+
    diff = q - math.exp(eps) * p
    return float(diff[diff > 0].sum())


def delta_np(P, Q, eps: float, direction: str = "forward") -> DeltaResult:
    """Exact positive-part series for the privacy curve at one eps.

    direction 'forward' is delta_{Q||P}, 'reverse' is delta_{P||Q},
    'two_sided' is their maximum.
    """
    if eps < 0:
        raise ValueError(f"eps must be >= 0, got {eps}")
    p, q = _pmf_pair(P, Q)
    e = math.exp(eps)
    tp, tq = P.tail_mass, Q.tail_mass
    if direction == "forward":
        return DeltaResult(value=min(1.0, _one_sided(p, q, eps)), slack=tq + e * tp)
    if direction == "reverse":
        return DeltaResult(value=min(1.0, _one_sided(q, p, eps)), slack=tp + e * tq)
    if direction == "two_sided":
        fwd = _one_sided(p, q, eps)
        rev = _one_sided(q, p, eps)
        return DeltaResult(value=min(1.0, max(fwd, rev)),
                           slack=max(tq + e * tp, tp + e * tq))
    raise ValueError(f"unknown direction {direction!r}")


def tradeoff_generic(P: IntDist, Q: IntDist) -> TradeoffCurve:
    """Neyman-Pearson curve of a fully enumerated discrete experiment.

    Outcomes are sorted by likelihood ratio q/p descending (Q-only atoms
    first); likelihood-ratio ties are grouped into single segments, so the
    accumulated knots already form the lower convex envelope.
    """
    if P.tail_mass + Q.tail_mass > 1e-12:
        raise ValueError("tradeoff_generic needs fully enumerated supports "
                         f"(combined tail {P.tail_mass + Q.tail_mass:.3e} > 1e-12)")
    p, q = _pmf_pair(P, Q)
    keep = (p > 0) | (q > 0)
    p, q = p[keep], q[keep]
    with np.errstate(divide="ignore"):
        ratio = np.where(p > 0, q / np.maximum(p, 1e-300), np.inf)
    order = np.argsort(-ratio, kind="stable")
    p, q, ratio = p[order], q[order], ratio[order]

    knots: List[Tuple[float, float]] = []
    cum_p = 0.0
    cum_q = 0.0
    i = 0
    n = p.size
    # leading Q-only block drops beta at alpha = 0
    while i < n and math.isinf(ratio[i]):
        cum_q += q[i]
        i += 1
    knots.append((0.0, 1.0 - cum_q))
    while i < n:
        r = ratio[i]
        while i < n and ratio[i] == r:
            cum_p += p[i]
            cum_q += q[i]
            i += 1
        knots.append((min(cum_p, 1.0), max(0.0, 1.0 - cum_q)))
    if knots[-1][0] < 1.0:
        knots.append((1.0, knots[-1][1]))
    # collapse numerically duplicate alphas, keeping the lowest beta
    dedup: List[Tuple[float, float]] = []
    for a, b in knots:
        if dedup and a <= dedup[-1][0]:
            dedup[-1] = (dedup[-1][0], min(dedup[-1][1], b))
        else:
            dedup.append((a, b))
    return TradeoffCurve(knots=tuple(dedup))


def delta_from_tradeoff(curve: TradeoffCurve, eps: float) -> float:
    """sup_alpha {1 - f(alpha) - e^eps alpha}; attained at a knot by convexity."""
    e = math.exp(eps)
    best = 0.0
    for a, b in curve.knots:
        best = max(best, 1.0 - b - e * a)
    return best


def curve_stability_bound(tvP: TVInterval, tvQ: TVInterval, eps: float) -> float:
    """Bound on |delta_n(eps) - delta(eps)| from TV control of each marginal."""
    return tvQ.upper + math.exp(eps) * tvP.upper


def floor_lower_bound(P, Q) -> float:
    """Total P-mass on enumerated points where Q has zero mass.

    Taking that set as the rejection region shows delta_{P||Q}(eps) is at
    least this value for every eps; a support-mismatch floor.
    """
    p, q = _pmf_pair(P, Q)
    return float(p[q == 0.0].sum())
