"""Standard McCormick relaxation values with subgradient propagation.

Each value carries an interval bound, convex-underestimator and
concave-overestimator values at the evaluation points, and one subgradient
row per point and side.  Rules: exact affine propagation, the four-plane
bilinear product envelope, and univariate composition through the convex /
concave envelope of the outer function with median-point selection.  The
usual cut against the interval bound is applied after every operation
(subgradients zeroed where the cut binds).

Envelopes: convex and concave functions supply themselves plus the chord;
single-inflection functions get the classical chord-or-tangent S-curve
construction (tangency located by bisection); anything wilder falls back
to constant bounds from the exact image, which keeps the relaxation valid
but loose.  All evaluations are vectorized over the sample points.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .intervals import Box, Interval, iv_add, iv_extend, iv_mul, iv_scale, iv_shift
from .unary import segment

_BISECT_STEPS = 80


@dataclass(frozen=True)
class McValue:
    """Interval bound plus pointwise cv/cc values and subgradients.

    cv/cc have shape (M,), subgradients (M, n) for M evaluation points.
    """

    iv: Interval
    cv: np.ndarray
    cc: np.ndarray
    scv: np.ndarray
    scc: np.ndarray

    @property
    def n_points(self) -> int:
        return self.cv.shape[0]

    @property
    def n_dims(self) -> int:
        return self.scv.shape[1]


def _cut(iv: Interval, cv, cc, scv, scc) -> McValue:
    lo_binds = cv < iv.lo
    hi_binds = cc > iv.hi
    cv = np.where(lo_binds, iv.lo, cv)
    cc = np.where(hi_binds, iv.hi, cc)
    scv = np.where(lo_binds[:, None], 0.0, scv)
    scc = np.where(hi_binds[:, None], 0.0, scc)
    return McValue(iv, cv, cc, scv, scc)


def mc_var(
    i: int, box: Box, points: np.ndarray, with_subgradients: bool = True
) -> McValue:
    points = np.atleast_2d(np.asarray(points, dtype=float))
    m, n = points.shape
    if not 0 <= i < box.n or n != box.n:
        raise ValueError("variable index / point dimension mismatch")
    vals = points[:, i].copy()
    # zero-column subgradients make all downstream chain-rule work free
    sub = np.zeros((m, n if with_subgradients else 0))
    if with_subgradients:
        sub[:, i] = 1.0
    return McValue(box.dims[i], vals, vals.copy(), sub, sub.copy())


def mc_const(
    c: float, box: Box, n_points: int, with_subgradients: bool = True
) -> McValue:
    vals = np.full(n_points, float(c))
    sub = np.zeros((n_points, box.n if with_subgradients else 0))
    return McValue(Interval(c, c), vals, vals.copy(), sub, sub.copy())


def mc_add(a: McValue, b: McValue) -> McValue:
    return _cut(
        iv_add(a.iv, b.iv),
        a.cv + b.cv,
        a.cc + b.cc,
        a.scv + b.scv,
        a.scc + b.scc,
    )


def mc_affine(a: McValue, alpha: float, beta: float = 0.0) -> McValue:
    iv = iv_shift(iv_scale(a.iv, alpha), beta)
    if alpha >= 0.0:
        return _cut(iv, alpha * a.cv + beta, alpha * a.cc + beta,
                    alpha * a.scv, alpha * a.scc)
    return _cut(iv, alpha * a.cc + beta, alpha * a.cv + beta,
                alpha * a.scc, alpha * a.scv)


def _under_term(c: float, v: McValue):
    if c >= 0.0:
        return c * v.cv, c * v.scv
    return c * v.cc, c * v.scc


def _over_term(c: float, v: McValue):
    if c >= 0.0:
        return c * v.cc, c * v.scc
    return c * v.cv, c * v.scv


def mc_mul(a: McValue, b: McValue) -> McValue:
    """Four-plane bilinear envelope with sign-selected operand sides."""
    xl, xu = a.iv.lo, a.iv.hi
    yl, yu = b.iv.lo, b.iv.hi

    v1, s1 = _under_term(yl, a)
    w1, t1 = _under_term(xl, b)
    alpha1 = v1 + w1 - xl * yl
    g1 = s1 + t1
    v2, s2 = _under_term(yu, a)
    w2, t2 = _under_term(xu, b)
    alpha2 = v2 + w2 - xu * yu
    g2 = s2 + t2
    pick = alpha1 >= alpha2
    cv = np.where(pick, alpha1, alpha2)
    scv = np.where(pick[:, None], g1, g2)

    v3, s3 = _over_term(yl, a)
    w3, t3 = _over_term(xu, b)
    beta1 = v3 + w3 - xu * yl
    h1 = s3 + t3
    v4, s4 = _over_term(yu, a)
    w4, t4 = _over_term(xl, b)
    beta2 = v4 + w4 - xl * yu
    h2 = s4 + t4
    pick = beta1 <= beta2
    cc = np.where(pick, beta1, beta2)
    scc = np.where(pick[:, None], h1, h2)

    return _cut(iv_mul(a.iv, b.iv), cv, cc, scv, scc)


# ---------------------------------------------------------------------------
# univariate envelopes


@dataclass(frozen=True)
class Envelope:
    vex: Callable
    dvex: Callable
    zmin: float
    cave: Callable
    dcave: Callable
    zmax: float


def _chord(phi, z: Interval):
    flo = float(phi.eval(z.lo))
    fhi = float(phi.eval(z.hi))
    slope = (fhi - flo) / z.width if z.width > 0 else 0.0

    def line(x, flo=flo, slope=slope, lo=z.lo):
        return flo + slope * (np.asarray(x, dtype=float) - lo)

    def dline(x, slope=slope):
        return np.full_like(np.asarray(x, dtype=float), slope)

    return line, dline, slope


def _argmin_from_deriv(deriv, z: Interval) -> float:
    dlo = float(deriv(z.lo))
    dhi = float(deriv(z.hi))
    if dlo >= 0.0:
        return z.lo
    if dhi <= 0.0:
        return z.hi
    lo, hi = z.lo, z.hi
    for _ in range(_BISECT_STEPS):
        mid = 0.5 * (lo + hi)
        if float(deriv(mid)) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _bisect_root(fun, lo: float, hi: float) -> float:
    flo = fun(lo)
    for _ in range(_BISECT_STEPS):
        mid = 0.5 * (lo + hi)
        if (fun(mid) <= 0.0) == (flo <= 0.0):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


class _Neg:
    """Negated profile view, used to mirror envelope constructions."""

    def __init__(self, phi):
        self._phi = phi

    def eval(self, x):
        return -np.asarray(self._phi.eval(x), dtype=float)

    def deriv(self, x):
        return -np.asarray(self._phi.deriv(x), dtype=float)


def _vex_one_inflection(phi, z: Interval, s: float, first: str):
    """Convex envelope of a single-inflection function: the chord when it
    supports the function, otherwise function-then-tangent (convex piece
    first) or tangent-then-function (concave piece first)."""
    lo, hi = z.lo, z.hi
    flo = float(phi.eval(lo))
    fhi = float(phi.eval(hi))
    chord, dchord, m_c = _chord(phi, z)
    if first == "convex":
        if float(phi.deriv(lo)) >= m_c:
            return chord, dchord

        def gap(t):
            return float(phi.eval(t)) + float(phi.deriv(t)) * (hi - t) - fhi

        t_star = _bisect_root(gap, lo, s)
        slope = float(phi.deriv(t_star))

        def vex(x, t=t_star, slope=slope, fhi=fhi, hi=hi):
            x = np.asarray(x, dtype=float)
            return np.where(
                x <= t, phi.eval(np.minimum(x, t)), fhi + slope * (x - hi)
            )

        def dvex(x, t=t_star, slope=slope):
            x = np.asarray(x, dtype=float)
            return np.where(x <= t, phi.deriv(np.minimum(x, t)), slope)

        return vex, dvex

    if float(phi.deriv(hi)) <= m_c:
        return chord, dchord

    def gap(t):
        return float(phi.eval(t)) + float(phi.deriv(t)) * (lo - t) - flo

    t_star = _bisect_root(gap, s, hi)
    slope = float(phi.deriv(t_star))

    def vex(x, t=t_star, slope=slope, flo=flo, lo=lo):
        x = np.asarray(x, dtype=float)
        return np.where(
            x >= t, phi.eval(np.maximum(x, t)), flo + slope * (x - lo)
        )

    def dvex(x, t=t_star, slope=slope):
        x = np.asarray(x, dtype=float)
        return np.where(x >= t, phi.deriv(np.maximum(x, t)), slope)

    return vex, dvex


def envelope(phi, z: Interval) -> Envelope:
    if z.width == 0.0:
        val = float(phi.eval(z.lo))

        def const(x, val=val):
            return np.full_like(np.asarray(x, dtype=float), val)

        def zero(x):
            return np.zeros_like(np.asarray(x, dtype=float))

        return Envelope(const, zero, z.lo, const, zero, z.lo)

    seg = segment(phi, z)
    if seg.m == 0:
        piece = seg.pieces[0]
        chord, dchord, m_c = _chord(phi, z)
        flo = float(phi.eval(z.lo))
        fhi = float(phi.eval(z.hi))
        if piece.convexity == "convex":
            vex, dvex = phi.eval, phi.deriv
            cave, dcave = chord, dchord
            zmin = (
                piece.stationary
                if piece.monotonicity == "nonmonotone"
                else (z.lo if piece.monotonicity == "nondecreasing" else z.hi)
            )
            zmax = z.lo if flo >= fhi else z.hi
        else:
            vex, dvex = chord, dchord
            cave, dcave = phi.eval, phi.deriv
            zmin = z.lo if flo <= fhi else z.hi
            zmax = (
                piece.stationary
                if piece.monotonicity == "nonmonotone"
                else (z.hi if piece.monotonicity == "nondecreasing" else z.lo)
            )
        return Envelope(vex, dvex, zmin, cave, dcave, zmax)

    if seg.m == 1:
        s = seg.inflections[0]
        first = seg.pieces[0].convexity
        vex, dvex = _vex_one_inflection(phi, z, s, first)
        neg = _Neg(phi)
        nfirst = "concave" if first == "convex" else "convex"
        nvex, ndvex = _vex_one_inflection(neg, z, s, nfirst)

        def cave(x, nvex=nvex):
            return -nvex(x)

        def dcave(x, ndvex=ndvex):
            return -ndvex(x)

        zmin = _argmin_from_deriv(dvex, z)
        zmax = _argmin_from_deriv(ndvex, z)
        return Envelope(vex, dvex, zmin, cave, dcave, zmax)

    # several inflections: constant bounds from the exact image
    img = iv_extend(phi, z)

    def vlo(x, v=img.lo):
        return np.full_like(np.asarray(x, dtype=float), v)

    def vhi(x, v=img.hi):
        return np.full_like(np.asarray(x, dtype=float), v)

    def zero(x):
        return np.zeros_like(np.asarray(x, dtype=float))

    return Envelope(vlo, zero, z.lo, vhi, zero, z.lo)


def mc_compose(a: McValue, phi) -> McValue:
    """Univariate composition with median-point selection: the envelope is
    evaluated at mid(cv, cc, envelope extremum) and the subgradient follows
    the selected operand side (zero when the extremum is selected)."""
    env = envelope(phi, a.iv)

    mid_v = np.clip(env.zmin, a.cv, a.cc)
    cv = np.asarray(env.vex(mid_v), dtype=float)
    slope = np.asarray(env.dvex(mid_v), dtype=float)
    sel_lo = env.zmin <= a.cv
    sel_hi = env.zmin >= a.cc
    base = np.where(
        sel_lo[..., None], a.scv, np.where(sel_hi[..., None], a.scc, 0.0)
    )
    scv = slope[:, None] * base

    mid_v = np.clip(env.zmax, a.cv, a.cc)
    cc = np.asarray(env.cave(mid_v), dtype=float)
    slope = np.asarray(env.dcave(mid_v), dtype=float)
    sel_lo = env.zmax <= a.cv
    sel_hi = env.zmax >= a.cc
    base = np.where(
        sel_lo[..., None], a.scv, np.where(sel_hi[..., None], a.scc, 0.0)
    )
    scc = slope[:, None] * base

    return _cut(iv_extend(phi, a.iv), cv, cc, scv, scc)
