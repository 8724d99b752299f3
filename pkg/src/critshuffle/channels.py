"""Finite-alphabet sparse-error channels and their declarative text format.

A channel row puts all but O(1/n) mass on one dominant output (single
dominant) or splits it across a dominant pair in fixed proportions (two
dominant); the remaining outputs carry intensities alpha / n.  Split
parameters are exact rationals so that fractional centerings group exactly
in the lattice laws.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Tuple, Union

import numpy as np

from .limits import IntensitySpec

__all__ = [
    "TwoDominantSpec",
    "SparseChannel",
    "channel_from_intensities",
    "parse_channel_spec",
]


@dataclass(frozen=True)
class TwoDominantSpec:
    """Channel limit with a dominant output pair per input and O(1) splits."""

    alphabet: Tuple[str, ...]
    D0: Tuple[str, str]
    D1: Tuple[str, str]
    p0: Fraction
    p1: Fraction
    alpha0: Dict[str, float] = field(default_factory=dict)
    alpha1: Dict[str, float] = field(default_factory=dict)
    pi: float = 0.0

    def __post_init__(self):
        if len(set(self.alphabet)) != len(self.alphabet):
            raise ValueError("alphabet symbols must be distinct")
        for pair in (self.D0, self.D1):
            if len(set(pair)) != 2 or any(y not in self.alphabet for y in pair):
                raise ValueError(f"dominant pair {pair} invalid")
        if set(self.D0) & set(self.D1):
            raise ValueError("overlapping dominant pairs are not supported")
        # degenerate splits (0 or 1) collapse to a single dominant output and
        # are allowed; the Gaussian block is then identically zero
        for p in (self.p0, self.p1):
            if not 0 <= p <= 1:
                raise ValueError(f"split parameter {p} outside [0, 1]")
        for d, pair in ((self.alpha0, self.D0), (self.alpha1, self.D1)):
            for y, a in d.items():
                if y in pair:
                    raise ValueError(f"intensity on dominant output {y!r}")
                if y not in self.alphabet or a < 0:
                    raise ValueError(f"bad intensity {y!r}={a}")
        if not 0.0 <= self.pi <= 1.0:
            raise ValueError(f"pi={self.pi} outside [0, 1]")


ChannelSpec = Union[IntensitySpec, TwoDominantSpec]


@dataclass(frozen=True)
class SparseChannel:
    """Exact-rate instantiation of a channel spec at population size n.

    W0 and W1 are the two rows of the local randomizer as probability
    vectors over the alphabet.
    """

    spec: ChannelSpec
    n: int
    W0: np.ndarray
    W1: np.ndarray

    @property
    def alphabet(self) -> Tuple[str, ...]:
        return self.spec.alphabet

    @property
    def mode(self) -> str:
        return "two_dominant" if isinstance(self.spec, TwoDominantSpec) else "single_dominant"

    def row(self, b: int) -> np.ndarray:
        return self.W0 if b == 0 else self.W1

    def index(self, y: str) -> int:
        return self.alphabet.index(y)


def channel_from_intensities(spec: ChannelSpec, n: int) -> SparseChannel:
    """Instantiate W_b(y) = alpha_b(y) / n off the dominant output(s), with
    the remaining mass on the dominant output (single) or split (p, 1-p)
    across the dominant pair (two)."""
    if n < 1:
        raise ValueError(f"n={n} must be >= 1")
    Y = spec.alphabet
    rows = []
    if isinstance(spec, TwoDominantSpec):
        doms = (spec.D0, spec.D1)
        splits = (spec.p0, spec.p1)
        alphas = (spec.alpha0, spec.alpha1)
        for pair, p, alpha in zip(doms, splits, alphas):
            rare_total = math.fsum(alpha.values()) / n
            if rare_total > 1.0:
                raise ValueError(f"n={n} too small for intensities {alpha}")
            w = np.zeros(len(Y))
            for y, a in alpha.items():
                w[Y.index(y)] = a / n
            w[Y.index(pair[0])] = float(p) * (1.0 - rare_total)
            w[Y.index(pair[1])] = float(1 - p) * (1.0 - rare_total)
            rows.append(w)
    else:
        for dom, alpha in ((spec.y0, spec.alpha0), (spec.y1, spec.alpha1)):
            rare_total = math.fsum(alpha.values()) / n
            if rare_total > 1.0:
                raise ValueError(f"n={n} too small for intensities {alpha}")
            w = np.zeros(len(Y))
            for y, a in alpha.items():
                w[Y.index(y)] = a / n
            w[Y.index(dom)] = 1.0 - rare_total
            rows.append(w)
    return SparseChannel(spec=spec, n=n, W0=rows[0], W1=rows[1])


def _parse_alpha(text: str, alphabet) -> Dict[str, float]:
    out: Dict[str, float] = {}
    for item in text.split():
        if "=" not in item:
            raise ValueError(f"intensity entry {item!r} is not symbol=value")
        y, v = item.split("=", 1)
        if y not in alphabet:
            raise ValueError(f"unknown symbol {y!r} in intensity table")
        out[y] = float(v)
    return out


def parse_channel_spec(text: str) -> ChannelSpec:
    """Parse the declarative channel format.

    Lines are ``key: value``; ``#`` starts a comment.  Keys: alphabet
    (space-separated symbols), mode (single_dominant | two_dominant),
    dominant0 / dominant1 (one symbol, or two for a pair), split0 / split1
    (rationals like 1/2, two-dominant only), alpha0 / alpha1 (symbol=value
    pairs), and optional pi.
    """
    fields: Dict[str, str] = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise ValueError(f"malformed line {raw!r}")
        key, value = line.split(":", 1)
        fields[key.strip().lower()] = value.strip()
    for req in ("alphabet", "mode", "dominant0", "dominant1"):
        if req not in fields:
            raise ValueError(f"missing required key {req!r}")
    alphabet = tuple(fields["alphabet"].split())
    mode = fields["mode"]
    pi = float(fields.get("pi", "0"))
    a0 = _parse_alpha(fields.get("alpha0", ""), alphabet)
    a1 = _parse_alpha(fields.get("alpha1", ""), alphabet)
    d0 = tuple(fields["dominant0"].split())
    d1 = tuple(fields["dominant1"].split())
    if mode == "single_dominant":
        if len(d0) != 1 or len(d1) != 1:
            raise ValueError("single_dominant needs one symbol per dominant key")
        return IntensitySpec(alphabet=alphabet, y0=d0[0], y1=d1[0],
                             alpha0=a0, alpha1=a1, pi=pi)
    if mode == "two_dominant":
        if len(d0) != 2 or len(d1) != 2:
            raise ValueError("two_dominant needs two symbols per dominant key")
        if "split0" not in fields or "split1" not in fields:
            raise ValueError("two_dominant needs split0 and split1")
        return TwoDominantSpec(alphabet=alphabet, D0=d0, D1=d1,
                               p0=Fraction(fields["split0"]),
                               p1=Fraction(fields["split1"]),
                               alpha0=a0, alpha1=a1, pi=pi)
    raise ValueError(f"unknown mode {mode!r}")
