"""Limit experiments of the critical scaling window and their closed forms.

Covers the scalar Poisson-shift pair (Poi(lambda), 1 + Poi(lambda)), the
Skellam-shift pair for interior compositions, the multivariate
compound-Poisson histogram limit, and the boundary factorization into a
scalar Poisson-shift plus common independent noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Tuple

from .curves import TradeoffCurve
from .distcore import IntDist, affine_map, make_poisson, make_skellam, poisson_upper_tail
from .lattice import LatticeDist, convolve_along_direction, lattice_point_mass, shift_lattice

__all__ = [
    "LimitParams",
    "IntensitySpec",
    "poisson_shift_pair",
    "skellam_shift_pair",
    "poisson_shift_delta_closed",
    "poisson_shift_tradeoff",
    "compound_poisson_limit",
    "boundary_factorization",
]

MAX_ALPHABET = 8  # enumeration guard for the multivariate limit


@dataclass(frozen=True)
class LimitParams:
    """Signal parameter c and composition pi, with the induced Poisson rates
    lambda = 1/c^2 and (lambda0, lambda1) = ((1-pi)/c^2, pi/c^2)."""

    c: float
    pi: float = 0.0

    def __post_init__(self):
        if self.c <= 0:
            raise ValueError(f"c={self.c} must be > 0")
        if not 0.0 <= self.pi <= 1.0:
            raise ValueError(f"pi={self.pi} outside [0, 1]")

    @property
    def lam(self) -> float:
        return 1.0 / (self.c * self.c)

    @property
    def lam0(self) -> float:
        return (1.0 - self.pi) / (self.c * self.c)

    @property
    def lam1(self) -> float:
        return self.pi / (self.c * self.c)


@dataclass(frozen=True)
class IntensitySpec:
    """Sparse-error channel limit: dominant outputs and deviation intensities.

    alpha0 maps each y != y0 to the limit of n * W0(y); alpha1 likewise for
    y != y1.  Missing entries mean intensity zero.
    """

    alphabet: Tuple[str, ...]
    y0: str
    y1: str
    alpha0: Dict[str, float] = field(default_factory=dict)
    alpha1: Dict[str, float] = field(default_factory=dict)
    pi: float = 0.0

    def __post_init__(self):
        if len(set(self.alphabet)) != len(self.alphabet):
            raise ValueError("alphabet symbols must be distinct")
        if self.y0 == self.y1:
            raise ValueError("dominant outputs must differ")
        for y in (self.y0, self.y1):
            if y not in self.alphabet:
                raise ValueError(f"dominant output {y!r} not in alphabet")
        if self.y0 in self.alpha0 or self.y1 in self.alpha1:
            raise ValueError("intensities are defined off the dominant output")
        for d in (self.alpha0, self.alpha1):
            for y, a in d.items():
                if y not in self.alphabet:
                    raise ValueError(f"unknown symbol {y!r}")
                if a < 0:
                    raise ValueError(f"negative intensity {a} at {y!r}")
        if not 0.0 <= self.pi <= 1.0:
            raise ValueError(f"pi={self.pi} outside [0, 1]")


def poisson_shift_pair(lam: float, tail_eps: float = 1e-14) -> Tuple[IntDist, IntDist]:
    """The pair (Poi(lam), 1 + Poi(lam))."""
    if lam <= 0:
        raise ValueError(f"rate lam={lam} must be > 0")
    P = make_poisson(lam, tail_eps)
    return P, affine_map(P, 1, 1)


def skellam_shift_pair(params: LimitParams,
                       tail_eps: float = 1e-14) -> Tuple[IntDist, IntDist]:
    """The pair (Skellam(lam0, lam1), its +1 shift); degenerates to the
    (possibly reflected) Poisson-shift pair at boundary compositions."""
    P = make_skellam(params.lam0, params.lam1, tail_eps)
    return P, affine_map(P, 1, 1)


def poisson_shift_delta_closed(lam: float, eps: float) -> float:
    """Closed-form forward privacy curve of the Poisson-shift pair:
    P(J >= m-1) - e^eps P(J >= m) at m = floor(lam e^eps) + 1."""
    if lam <= 0:
        raise ValueError(f"rate lam={lam} must be > 0")
    if eps < 0:
        raise ValueError(f"eps={eps} must be >= 0")
    m = math.floor(lam * math.exp(eps)) + 1
    return poisson_upper_tail(lam, m - 1) - math.exp(eps) * poisson_upper_tail(lam, m)


def poisson_shift_tradeoff(lam: float, m_max: int | None = None) -> TradeoffCurve:
    """Trade-off curve of the Poisson-shift pair.

    Knots are the Poisson upper-tail pairs (P(J >= m), P(J <= m-2)) for
    m = m_max..1, preceded by (0, 1) and followed by the terminal flat knot
    (1, 0); the m = 1 knot is exactly (P(J >= 1), 0).
    """
    if lam <= 0:
        raise ValueError(f"rate lam={lam} must be > 0")
    if m_max is None:
        m_max = make_poisson(lam).hi + 1
    if poisson_upper_tail(lam, m_max + 1) > 1e-12:
        raise ValueError(f"m_max={m_max} leaves tail above 1e-12")
    knots = [(0.0, 1.0)]
    for m in range(m_max, 0, -1):
        alpha = poisson_upper_tail(lam, m)
        beta = max(0.0, 1.0 - poisson_upper_tail(lam, m - 1))
        if alpha <= knots[-1][0]:
            continue
        knots.append((alpha, beta))
    if knots[-1][0] < 1.0:
        knots.append((1.0, 0.0))
    return TradeoffCurve(knots=tuple(knots))


def _dominant_index(spec: IntensitySpec, y: str) -> int:
    return spec.alphabet.index(y)


def compound_poisson_limit(spec: IntensitySpec,
                           tail_eps: float = 1e-12) -> Tuple[LatticeDist, LatticeDist]:
    """Limit histogram experiment on Z^alphabet.

    The null law pushes independent truncated Poisson deviation counts
    U_y ~ Poi((1-pi) alpha0(y)) and V_y ~ Poi(pi alpha1(y)) through the jump
    map sum_y U_y (e_y - e_{y0}) + sum_y V_y (e_y - e_{y1}); the alternative
    is the null shifted by e_{y1} - e_{y0}.  Coordinate truncations aggregate
    into the lattice tail mass.
    """
    Y = spec.alphabet
    if len(Y) > MAX_ALPHABET:
        raise ValueError(f"alphabet size {len(Y)} exceeds guard {MAX_ALPHABET}")
    i0, i1 = _dominant_index(spec, spec.y0), _dominant_index(spec, spec.y1)
    comps = []
    for y in Y:
        if y != spec.y0:
            rate = (1.0 - spec.pi) * spec.alpha0.get(y, 0.0)
            if rate > 0:
                comps.append((rate, Y.index(y), i0))
    for y in Y:
        if y != spec.y1:
            rate = spec.pi * spec.alpha1.get(y, 0.0)
            if rate > 0:
                comps.append((rate, Y.index(y), i1))

    P = lattice_point_mass([0] * len(Y))
    if comps:
        per_comp = tail_eps / len(comps)
        for rate, iy, idom in comps:
            counts = make_poisson(rate, per_comp)
            direction = [0] * len(Y)
            direction[iy] += 1
            direction[idom] -= 1
            P = convolve_along_direction(P, counts, direction)
    shift = [0] * len(Y)
    shift[i1] += 1
    shift[i0] -= 1
    Q = shift_lattice(P, shift)
    return P, Q


def boundary_factorization(spec: IntensitySpec) -> Tuple[IntDist, IntDist]:
    """Scalar Poisson-shift pair carried by the switched coordinate at a
    boundary composition; the remaining coordinates are common independent
    noise and do not affect the privacy curve."""
    if spec.pi == 0.0:
        lam = spec.alpha0.get(spec.y1, 0.0)
    elif spec.pi == 1.0:
        lam = spec.alpha1.get(spec.y0, 0.0)
    else:
        raise ValueError(f"boundary factorization needs pi in {{0, 1}}, got {spec.pi}")
    P = make_poisson(lam)
    return P, affine_map(P, 1, 1)
