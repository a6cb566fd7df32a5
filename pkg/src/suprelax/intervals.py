"""Closed-interval arithmetic and interval boxes.

Endpoints are native floats with no outward rounding; degenerate
(zero-width) intervals are first-class.  Boxes are Cartesian products of
intervals and expose both the Euclidean diameter sqrt(sum wid_i^2), used
everywhere contraction sweeps are fit, and the max width.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError


@dataclass(frozen=True)
class Interval:
    """Closed real interval [lo, hi] with lo <= hi."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (self.lo <= self.hi):
            raise ValueError(f"invalid interval: [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def contains(self, x: float, tol: float = 0.0) -> bool:
        return self.lo - tol <= x <= self.hi + tol

    def contains_interval(self, other: "Interval", tol: float = 0.0) -> bool:
        return self.lo - tol <= other.lo and other.hi <= self.hi + tol

    def intersect(self, other: "Interval") -> "Interval":
        lo = max(self.lo, other.lo)
        hi = min(self.hi, other.hi)
        if lo > hi:
            raise ValueError(f"empty intersection of [{self.lo},{self.hi}] and [{other.lo},{other.hi}]")
        return Interval(lo, hi)

    def hull(self, other: "Interval") -> "Interval":
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def __repr__(self):
        return f"[{self.lo}, {self.hi}]"


def iv_add(a: Interval, b: Interval) -> Interval:
    return Interval(a.lo + b.lo, a.hi + b.hi)


def iv_sub(a: Interval, b: Interval) -> Interval:
    return Interval(a.lo - b.hi, a.hi - b.lo)


def iv_neg(a: Interval) -> Interval:
    return Interval(-a.hi, -a.lo)


def iv_scale(a: Interval, s: float) -> Interval:
    if s >= 0:
        return Interval(s * a.lo, s * a.hi)
    return Interval(s * a.hi, s * a.lo)


def iv_shift(a: Interval, b: float) -> Interval:
    return Interval(a.lo + b, a.hi + b)


def iv_mul(a: Interval, b: Interval) -> Interval:
    products = (a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi)
    return Interval(min(products), max(products))


def iv_div(a: Interval, b: Interval) -> Interval:
    if b.lo <= 0.0 <= b.hi:
        raise DomainError(f"division by interval containing zero: {b}")
    quotients = (a.lo / b.lo, a.lo / b.hi, a.hi / b.lo, a.hi / b.hi)
    return Interval(min(quotients), max(quotients))


def iv_extend(phi, z: Interval) -> Interval:
    """Exact range of a catalog unary function on z.

    Evaluates the endpoints plus any interior stationary points of phi,
    so the result is the true image, not just a sound enclosure.
    """
    phi.check_domain(z)
    candidates = [float(phi.eval(z.lo)), float(phi.eval(z.hi))]
    for p in phi.stationary_points(z):
        candidates.append(float(phi.eval(p)))
    return Interval(min(candidates), max(candidates))


@dataclass(frozen=True)
class Box:
    """Cartesian product of n >= 1 closed intervals."""

    dims: tuple[Interval, ...]

    def __post_init__(self):
        if len(self.dims) < 1:
            raise ValueError("box needs at least one dimension")
        object.__setattr__(self, "dims", tuple(self.dims))

    @staticmethod
    def from_bounds(bounds) -> "Box":
        return Box(tuple(Interval(float(lo), float(hi)) for lo, hi in bounds))

    @property
    def n(self) -> int:
        return len(self.dims)

    def diam(self) -> float:
        """Euclidean diameter sqrt(sum of squared side widths)."""
        return math.sqrt(sum(iv.width**2 for iv in self.dims))

    def max_width(self) -> float:
        return max(iv.width for iv in self.dims)

    def contains_point(self, x, tol: float = 0.0) -> bool:
        return all(iv.contains(float(v), tol) for iv, v in zip(self.dims, x))

    def midpoint(self):
        return tuple(iv.mid for iv in self.dims)

    def __repr__(self):
        return " x ".join(repr(iv) for iv in self.dims)


def box_contract(x: Box, rho: float, center) -> Box:
    """Shrink the box toward an interior point: side i becomes
    [rho*lo_i + (1-rho)*c_i, rho*hi_i + (1-rho)*c_i].

    The diameter scales by exactly rho.
    """
    if not (0.0 < rho <= 1.0):
        raise ValueError(f"contraction ratio must be in (0, 1], got {rho}")
    center = tuple(float(c) for c in center)
    if len(center) != x.n:
        raise ValueError("center dimension mismatch")
    if not x.contains_point(center, tol=1e-12 * (1.0 + x.max_width())):
        raise ValueError(f"center {center} not inside box {x}")
    dims = tuple(
        Interval(rho * iv.lo + (1.0 - rho) * c, rho * iv.hi + (1.0 - rho) * c)
        for iv, c in zip(x.dims, center)
    )
    return Box(dims)
