"""Catalog of unary profile functions with curvature and monotonicity structure.

Each catalog entry carries its value, its derivative (one-sided at kinks),
closed-form tables of inflection points and interior extrema (no numeric
root-finding), and domain checks.  Two derived views feed the composition
rules:

* ``segment(phi, z)`` splits z at the inflections of phi into pieces of
  fixed curvature, classifying each piece as nondecreasing / nonincreasing
  / nonmonotone (with the interior stationary point in the last case).

* ``dc_terms(phi, z)`` rewrites phi on z as a sum of m+1 addends, where m
  is the number of interior inflections.  Addend 0 follows phi up to the
  first inflection and continues along the tangent there; addend k is zero
  below inflection k, then phi minus the running tangent, then linear
  again.  Every addend is globally convex or concave on z, and addends
  1..m are monotone.  The addends sum back to phi exactly.

Conventions: even powers behave like the square (stationary point 0); odd
powers p >= 3 carry one inflection at 0; abs is kept as a single convex
nonmonotone piece with its kink at 0 rather than being decomposed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DomainError
from .intervals import Interval

# slack for classifying a piece as monotone from its endpoint derivatives
MONO_TOL = 1e-12

_FULL_LINE = Interval(-math.inf, math.inf)


@dataclass(frozen=True)
class UnaryFuncSpec:
    """A unary function plus the structure the composition rules need."""

    name: str
    eval: Callable
    deriv: Callable
    domain: Interval = _FULL_LINE
    domain_open_lo: bool = False
    second_deriv: Optional[Callable] = None
    # (point, left slope, right slope) for the single kink, if any
    kink: Optional[tuple[float, float, float]] = None
    # ("max"|"min", c): composition with this entry is an exact truncation
    truncation: Optional[tuple[str, float]] = None
    # closed-form structure tables, as functions of the query interval
    inflections_in: Callable = field(default=lambda z: ())
    stationary_in: Callable = field(default=lambda z: ())
    convexity_on: Callable = field(default=lambda z: "convex")
    custom_domain_check: Optional[Callable] = None

    def deriv_into(self, x, direction):
        """One-sided derivative approached from inside the given direction
        (+1: limit from the right of x, -1: from the left)."""
        d = np.asarray(self.deriv(x), dtype=float)
        if self.kink is None:
            return d
        point, left, right = self.kink
        x = np.asarray(x, dtype=float)
        side = right if direction > 0 else left
        return np.where(x == point, side, d)

    def check_domain(self, z: Interval):
        if self.custom_domain_check is not None:
            self.custom_domain_check(z)
            return
        lo_ok = z.lo > self.domain.lo or (
            not self.domain_open_lo and z.lo == self.domain.lo
        )
        if not (lo_ok and z.hi <= self.domain.hi):
            raise DomainError(f"{self.name} undefined on range {z}")

    def stationary_points(self, z: Interval):
        """Interior extrema of the function inside z (for exact ranges)."""
        return self.stationary_in(z)

    def __repr__(self):
        return f"UnaryFuncSpec({self.name})"


@dataclass(frozen=True)
class Piece:
    interval: Interval
    convexity: str
    monotonicity: str
    stationary: Optional[float] = None


@dataclass(frozen=True)
class CurvatureSegmentation:
    domain: Interval
    inflections: tuple[float, ...]
    pieces: tuple[Piece, ...]

    @property
    def m(self) -> int:
        return len(self.inflections)


def _classify_piece(phi: UnaryFuncSpec, sub: Interval) -> Piece:
    cvx = phi.convexity_on(sub)
    with np.errstate(divide="ignore"):
        # an infinite one-sided slope (sqrt at 0) classifies fine
        d_lo = float(phi.deriv_into(sub.lo, +1))
        d_hi = float(phi.deriv_into(sub.hi, -1))
    if d_lo >= -MONO_TOL and d_hi >= -MONO_TOL:
        return Piece(sub, cvx, "nondecreasing")
    if d_lo <= MONO_TOL and d_hi <= MONO_TOL:
        return Piece(sub, cvx, "nonincreasing")
    pts = [p for p in phi.stationary_points(sub) if sub.lo < p < sub.hi]
    if not pts:
        raise RuntimeError(
            f"{phi.name} classified nonmonotone on {sub} but has no "
            f"interior stationary point"
        )
    # isolated in the catalog; midpoint rule if a flat region ever appears
    sigma_star = pts[0] if len(pts) == 1 else 0.5 * (pts[0] + pts[-1])
    return Piece(sub, cvx, "nonmonotone", sigma_star)


def segment(phi: UnaryFuncSpec, z: Interval) -> CurvatureSegmentation:
    """Split z at the inflections of phi into fixed-curvature pieces."""
    phi.check_domain(z)
    inflections = tuple(p for p in phi.inflections_in(z) if z.lo < p < z.hi)
    cuts = [z.lo, *inflections, z.hi]
    pieces = tuple(
        _classify_piece(phi, Interval(a, b)) for a, b in zip(cuts, cuts[1:])
    )
    return CurvatureSegmentation(z, inflections, pieces)


@dataclass(frozen=True)
class AddendSpec:
    """One convex-or-concave term of the inflection decomposition.

    Behaves like a unary catalog entry (value/derivative/classification)
    on the interval it was built for; outside it continues linearly.
    """

    name: str
    eval: Callable
    deriv: Callable
    convexity: str
    monotonicity: str
    stationary: Optional[float] = None
    truncation: Optional[tuple[str, float]] = None

    def deriv_into(self, x, direction):
        return np.asarray(self.deriv(x), dtype=float)

    def check_domain(self, z: Interval):
        pass

    def stationary_points(self, z: Interval):
        if self.stationary is not None and z.lo < self.stationary < z.hi:
            return (self.stationary,)
        return ()

    def __repr__(self):
        return f"AddendSpec({self.name})"


def _tangent(phi: UnaryFuncSpec, at: float):
    v = float(phi.eval(at))
    d = float(phi.deriv(at))
    return v, d


def _addend_monotonicity(convexity, d_lo, d_hi, stationary):
    if d_lo >= -MONO_TOL and d_hi >= -MONO_TOL:
        return "nondecreasing", None
    if d_lo <= MONO_TOL and d_hi <= MONO_TOL:
        return "nonincreasing", None
    return "nonmonotone", stationary


def dc_terms(phi: UnaryFuncSpec, z: Interval) -> list:
    """Decompose phi on z into tangent-extended convex/concave addends.

    With no interior inflection the function itself is the single addend.
    Otherwise addend k is zero up to inflection k, follows phi minus the
    tangent at inflection k, and beyond inflection k+1 continues along
    that difference's own tangent.  Addends 1..m start with derivative
    zero, so they are increasing convex or decreasing concave.
    """
    seg = segment(phi, z)
    if seg.m == 0:
        piece = seg.pieces[0]
        return [
            AddendSpec(
                phi.name,
                phi.eval,
                phi.deriv,
                piece.convexity,
                piece.monotonicity,
                piece.stationary,
                truncation=phi.truncation,
            )
        ]

    sigmas = seg.inflections
    m = len(sigmas)
    addends = []

    # addend 0: phi up to the first inflection, tangent line beyond
    s1 = sigmas[0]
    v1, d1 = _tangent(phi, s1)
    piece0 = seg.pieces[0]

    def eval0(x, s1=s1, v1=v1, d1=d1):
        x = np.asarray(x, dtype=float)
        return np.where(x <= s1, phi.eval(np.minimum(x, s1)), v1 + d1 * (x - s1))

    def deriv0(x, s1=s1, d1=d1):
        x = np.asarray(x, dtype=float)
        return np.where(x <= s1, phi.deriv(np.minimum(x, s1)), d1)

    d_lo = float(phi.deriv_into(z.lo, +1))
    mono0, stat0 = _addend_monotonicity(
        piece0.convexity, d_lo, d1, piece0.stationary
    )
    addends.append(
        AddendSpec(f"{phi.name}[0]", eval0, deriv0, piece0.convexity, mono0, stat0)
    )

    # addends 1..m: phi minus the running tangent, confined to one piece
    for k in range(1, m + 1):
        sk = sigmas[k - 1]
        vk, dk = _tangent(phi, sk)
        hi = sigmas[k] if k < m else None
        piece = seg.pieces[k]
        if hi is None:

            def evalk(x, sk=sk, vk=vk, dk=dk):
                x = np.asarray(x, dtype=float)
                xc = np.maximum(x, sk)
                return np.where(
                    x < sk, 0.0, phi.eval(xc) - (vk + dk * (xc - sk))
                )

            def derivk(x, sk=sk, dk=dk):
                x = np.asarray(x, dtype=float)
                return np.where(x < sk, 0.0, phi.deriv(np.maximum(x, sk)) - dk)

        else:
            vh, dh = _tangent(phi, hi)

            def evalk(x, sk=sk, vk=vk, dk=dk, hi=hi, vh=vh, dh=dh):
                x = np.asarray(x, dtype=float)
                xm = np.clip(x, sk, hi)
                mid = phi.eval(xm) - (vk + dk * (xm - sk))
                top = (vh - (vk + dk * (hi - sk))) + (dh - dk) * (x - hi)
                return np.where(x < sk, 0.0, np.where(x > hi, top, mid))

            def derivk(x, sk=sk, dk=dk, hi=hi, dh=dh):
                x = np.asarray(x, dtype=float)
                xm = np.clip(x, sk, hi)
                return np.where(
                    x < sk, 0.0, np.where(x > hi, dh - dk, phi.deriv(xm) - dk)
                )

        cvx = piece.convexity
        mono = "nondecreasing" if cvx == "convex" else "nonincreasing"
        addends.append(AddendSpec(f"{phi.name}[{k}]", evalk, derivk, cvx, mono))

    return addends


# ---------------------------------------------------------------------------
# catalog entries


def _no_points(z):
    return ()


def _origin_if_inside(z):
    return (0.0,) if z.lo < 0.0 < z.hi else ()


def _convex(z):
    return "convex"


def _concave(z):
    return "concave"


SQR = UnaryFuncSpec(
    "sqr",
    eval=lambda z: np.square(np.asarray(z, dtype=float)),
    deriv=lambda z: 2.0 * np.asarray(z, dtype=float),
    second_deriv=lambda z: np.full_like(np.asarray(z, dtype=float), 2.0),
    stationary_in=_origin_if_inside,
)

EXP = UnaryFuncSpec(
    "exp",
    eval=np.exp,
    deriv=np.exp,
    second_deriv=np.exp,
)

LOG = UnaryFuncSpec(
    "log",
    eval=np.log,
    deriv=lambda z: 1.0 / np.asarray(z, dtype=float),
    second_deriv=lambda z: -1.0 / np.square(np.asarray(z, dtype=float)),
    domain=Interval(0.0, math.inf),
    domain_open_lo=True,
    convexity_on=_concave,
)

SQRT = UnaryFuncSpec(
    "sqrt",
    eval=np.sqrt,
    deriv=lambda z: 0.5 / np.sqrt(np.asarray(z, dtype=float)),
    second_deriv=lambda z: -0.25 * np.asarray(z, dtype=float) ** (-1.5),
    domain=Interval(0.0, math.inf),
    convexity_on=_concave,
)


def _inv_convexity(z):
    return "convex" if z.lo > 0.0 else "concave"


def _inv_check_domain(z: Interval):
    if z.lo <= 0.0 <= z.hi:
        raise DomainError(f"inv undefined on range {z} containing zero")


INV = UnaryFuncSpec(
    "inv",
    eval=lambda z: 1.0 / np.asarray(z, dtype=float),
    deriv=lambda z: -1.0 / np.square(np.asarray(z, dtype=float)),
    second_deriv=lambda z: 2.0 * np.asarray(z, dtype=float) ** (-3.0),
    convexity_on=_inv_convexity,
    custom_domain_check=_inv_check_domain,
)

NEG = UnaryFuncSpec(
    "neg",
    eval=lambda z: -np.asarray(z, dtype=float),
    deriv=lambda z: np.full_like(np.asarray(z, dtype=float), -1.0),
    second_deriv=lambda z: np.zeros_like(np.asarray(z, dtype=float)),
)

ABS = UnaryFuncSpec(
    "abs",
    eval=np.abs,
    deriv=np.sign,
    kink=(0.0, -1.0, 1.0),
    stationary_in=_origin_if_inside,
)

TANH = UnaryFuncSpec(
    "tanh",
    eval=np.tanh,
    deriv=lambda z: 1.0 / np.cosh(np.asarray(z, dtype=float)) ** 2,
    second_deriv=lambda z: -2.0
    * np.tanh(np.asarray(z, dtype=float))
    / np.cosh(np.asarray(z, dtype=float)) ** 2,
    inflections_in=_origin_if_inside,
    convexity_on=lambda z: "convex" if z.hi <= 0.0 else "concave",
)


def _grid_points(z: Interval, offset: float, step: float, strict: bool):
    """Points offset + k*step inside z (strictly inside when strict)."""
    k_lo = math.ceil((z.lo - offset) / step - 1e-12)
    k_hi = math.floor((z.hi - offset) / step + 1e-12)
    pts = []
    for k in range(k_lo, k_hi + 1):
        p = offset + k * step
        if strict:
            if z.lo < p < z.hi:
                pts.append(p)
        else:
            if z.lo <= p <= z.hi:
                pts.append(p)
    return tuple(pts)


COS = UnaryFuncSpec(
    "cos",
    eval=np.cos,
    deriv=lambda z: -np.sin(np.asarray(z, dtype=float)),
    second_deriv=lambda z: -np.cos(np.asarray(z, dtype=float)),
    inflections_in=lambda z: _grid_points(z, math.pi / 2.0, math.pi, True),
    stationary_in=lambda z: _grid_points(z, 0.0, math.pi, False),
    convexity_on=lambda z: "convex" if math.cos(z.mid) <= 0.0 else "concave",
)

SIN = UnaryFuncSpec(
    "sin",
    eval=np.sin,
    deriv=np.cos,
    second_deriv=lambda z: -np.sin(np.asarray(z, dtype=float)),
    inflections_in=lambda z: _grid_points(z, 0.0, math.pi, True),
    stationary_in=lambda z: _grid_points(z, math.pi / 2.0, math.pi, False),
    convexity_on=lambda z: "convex" if math.sin(z.mid) <= 0.0 else "concave",
)


def pow_int(p: int) -> UnaryFuncSpec:
    """Integer power z**p for p >= 2; even powers are square-like, odd
    powers carry one inflection at the origin."""
    if not isinstance(p, int) or p < 2:
        raise ValueError(f"integer power must have p >= 2, got {p!r}")
    even = p % 2 == 0

    def _eval(z, p=p):
        return np.asarray(z, dtype=float) ** p

    def _deriv(z, p=p):
        return p * np.asarray(z, dtype=float) ** (p - 1)

    def _second(z, p=p):
        return p * (p - 1) * np.asarray(z, dtype=float) ** (p - 2)

    return UnaryFuncSpec(
        f"pow{p}",
        eval=_eval,
        deriv=_deriv,
        second_deriv=_second,
        stationary_in=_origin_if_inside if even else _no_points,
        inflections_in=_no_points if even else _origin_if_inside,
        convexity_on=_convex
        if even
        else (lambda z: "concave" if z.hi <= 0.0 else "convex"),
    )


def max_const(c: float) -> UnaryFuncSpec:
    """z -> max(z, c): convex nondecreasing; composition is an exact
    piecewise-linear truncation."""
    c = float(c)
    return UnaryFuncSpec(
        f"max{{z,{c}}}",
        eval=lambda z, c=c: np.maximum(np.asarray(z, dtype=float), c),
        deriv=lambda z, c=c: (np.asarray(z, dtype=float) > c).astype(float),
        kink=(c, 0.0, 1.0),
        truncation=("max", c),
    )


def min_const(c: float) -> UnaryFuncSpec:
    """z -> min(z, c): concave nondecreasing; exact truncation."""
    c = float(c)
    return UnaryFuncSpec(
        f"min{{z,{c}}}",
        eval=lambda z, c=c: np.minimum(np.asarray(z, dtype=float), c),
        deriv=lambda z, c=c: (np.asarray(z, dtype=float) < c).astype(float),
        kink=(c, 1.0, 0.0),
        truncation=("min", c),
        convexity_on=_concave,
    )


CATALOG = {
    "sqr": SQR,
    "exp": EXP,
    "log": LOG,
    "sqrt": SQRT,
    "inv": INV,
    "neg": NEG,
    "abs": ABS,
    "tanh": TANH,
    "cos": COS,
    "sin": SIN,
}
