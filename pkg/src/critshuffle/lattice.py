"""Sparse pmfs on integer and rational lattices.

Points are stored as integer numerator tuples over one common positive
denominator, so rational coordinates produced by projections and fractional
centerings group exactly, with no floating-point hashing.  Dominant-block
projections only ever introduce denominators dividing the Gram determinant
of the pair-difference vectors, so denominators stay tiny.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Sequence, Tuple

import numpy as np

from .distcore import IntDist, TVInterval

__all__ = [
    "LatticeDist",
    "lattice_point_mass",
    "lattice_tv",
    "shift_lattice",
    "convolve_along_direction",
    "apply_rational_matrix",
    "lattice_to_intdist",
    "product_with_int_factor",
    "lattice_marginal",
]

Point = Tuple[int, ...]


@dataclass(frozen=True)
class LatticeDist:
    """Sparse pmf on (1/denom) * Z^dim; keys are numerator tuples."""

    points: Dict[Point, float]
    denom: int = 1
    tail_mass: float = 0.0

    def __post_init__(self):
        if self.denom < 1:
            raise ValueError("denominator must be >= 1")
        if self.tail_mass < 0:
            raise ValueError("tail_mass must be nonnegative")
        total = math.fsum(self.points.values()) + self.tail_mass
        if abs(total - 1.0) > 1e-10:
            raise ValueError(f"lattice mass + tail = {total!r} is not normalized")

    @property
    def dim(self) -> int:
        return len(next(iter(self.points)))

    def reduced(self) -> "LatticeDist":
        """Divide out the gcd of the denominator and all numerators."""
        g = self.denom
        for pt in self.points:
            for v in pt:
                g = math.gcd(g, abs(v))
            if g == 1:
                break
        if g == 1:
            return self
        return LatticeDist(
            points={tuple(v // g for v in pt): p for pt, p in self.points.items()},
            denom=self.denom // g,
            tail_mass=self.tail_mass,
        )

    def rescaled(self, denom: int) -> "LatticeDist":
        """Re-express on a finer denominator (must be a multiple)."""
        if denom % self.denom:
            raise ValueError(f"{denom} is not a multiple of {self.denom}")
        f = denom // self.denom
        if f == 1:
            return self
        return LatticeDist(
            points={tuple(v * f for v in pt): p for pt, p in self.points.items()},
            denom=denom,
            tail_mass=self.tail_mass,
        )


def lattice_point_mass(point: Sequence[int], denom: int = 1) -> LatticeDist:
    return LatticeDist(points={tuple(int(v) for v in point): 1.0}, denom=denom)


def _common(a: LatticeDist, b: LatticeDist) -> Tuple[LatticeDist, LatticeDist]:
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch {a.dim} != {b.dim}")
    d = a.denom * b.denom // math.gcd(a.denom, b.denom)
    return a.rescaled(d), b.rescaled(d)


def lattice_tv(a: LatticeDist, b: LatticeDist) -> TVInterval:
    a, b = _common(a, b)
    acc = 0.0
    for pt, p in a.points.items():
        acc += abs(p - b.points.get(pt, 0.0))
    for pt, q in b.points.items():
        if pt not in a.points:
            acc += q
    lower = min(1.0, 0.5 * acc)
    return TVInterval(lower=lower, upper=min(1.0, lower + a.tail_mass + b.tail_mass))


def shift_lattice(a: LatticeDist, shift_num: Sequence[int], shift_denom: int = 1) -> LatticeDist:
    """Law of X + s where s = shift_num / shift_denom."""
    d = a.denom * shift_denom // math.gcd(a.denom, shift_denom)
    a2 = a.rescaled(d)
    s = tuple(int(v) * (d // shift_denom) for v in shift_num)
    return LatticeDist(
        points={tuple(x + y for x, y in zip(pt, s)): p for pt, p in a2.points.items()},
        denom=d,
        tail_mass=a.tail_mass,
    )


def convolve_along_direction(a: LatticeDist, counts: IntDist,
                             direction_num: Sequence[int],
                             direction_denom: int = 1) -> LatticeDist:
    """Law of X + C * v for independent X ~ a, integer C ~ counts, and the
    fixed rational direction v = direction_num / direction_denom."""
    d = a.denom * direction_denom // math.gcd(a.denom, direction_denom)
    a2 = a.rescaled(d)
    v = tuple(int(x) * (d // direction_denom) for x in direction_num)
    out: Dict[Point, float] = {}
    for c, w in zip(counts.support, counts.mass):
        if w == 0.0:
            continue
        step = tuple(int(c) * x for x in v)
        for pt, p in a2.points.items():
            key = tuple(x + y for x, y in zip(pt, step))
            out[key] = out.get(key, 0.0) + p * w
    return LatticeDist(points=out, denom=d,
                       tail_mass=a.tail_mass + counts.tail_mass)


def apply_rational_matrix(a: LatticeDist, mat_num: np.ndarray,
                          mat_denom: int) -> LatticeDist:
    """Exact pushforward under the linear map (mat_num / mat_denom).

    Colliding images are grouped exactly; the output denominator is
    a.denom * mat_denom (reduced afterwards).
    """
    mat = np.asarray(mat_num, dtype=np.int64)
    out: Dict[Point, float] = {}
    for pt, p in a.points.items():
        img = tuple(int(v) for v in mat @ np.asarray(pt, dtype=np.int64))
        out[img] = out.get(img, 0.0) + p
    return LatticeDist(points=out, denom=a.denom * mat_denom,
                       tail_mass=a.tail_mass).reduced()


def lattice_marginal(a: LatticeDist, axis: int) -> IntDist:
    """Marginal along one coordinate (requires integer coordinates there)."""
    acc: Dict[int, float] = {}
    for pt, p in a.points.items():
        num = pt[axis]
        if num % a.denom:
            raise ValueError("marginal coordinate is not integer-valued")
        v = num // a.denom
        acc[v] = acc.get(v, 0.0) + p
    lo, hi = min(acc), max(acc)
    mass = np.zeros(hi - lo + 1)
    for v, p in acc.items():
        mass[v - lo] = p
    return IntDist(offset=lo, mass=mass, tail_mass=a.tail_mass)


def lattice_to_intdist(a: LatticeDist, direction: Sequence[int]) -> IntDist:
    """Identify a one-dimensional lattice law with an IntDist.

    Every support point must be an integer multiple of ``direction`` (given
    in numerator units of a's denominator); returns the law of the multiple.
    """
    dvec = tuple(int(v) for v in direction)
    nz = [i for i, v in enumerate(dvec) if v != 0]
    if not nz:
        raise ValueError("direction must be nonzero")
    i0 = nz[0]
    acc: Dict[int, float] = {}
    for pt, p in a.points.items():
        if pt[i0] % dvec[i0]:
            raise ValueError(f"point {pt} is not a multiple of {dvec}")
        c = pt[i0] // dvec[i0]
        if tuple(c * v for v in dvec) != pt:
            raise ValueError(f"point {pt} is not a multiple of {dvec}")
        acc[c] = acc.get(c, 0.0) + p
    lo, hi = min(acc), max(acc)
    mass = np.zeros(hi - lo + 1)
    for v, p in acc.items():
        mass[v - lo] = p
    return IntDist(offset=lo, mass=mass, tail_mass=a.tail_mass)


def product_with_int_factor(a: LatticeDist, r: IntDist) -> LatticeDist:
    """Independent product law of (X, R) as a lattice on dim+1 coordinates."""
    out: Dict[Point, float] = {}
    for pt, p in a.points.items():
        for v, w in zip(r.support, r.mass):
            if w == 0.0:
                continue
            out[pt + (int(v) * a.denom,)] = p * w
    return LatticeDist(points=out, denom=a.denom,
                       tail_mass=a.tail_mass + r.tail_mass)
