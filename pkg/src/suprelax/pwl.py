"""Continuous piecewise-linear univariates under segment encoding.

A function u on [lo, hi] is stored as (nu0, deltas, slopes): its value at
lo, the positive segment widths (summing to hi - lo), and one slope per
segment.  The value on segment k is

    u(x) = nu0 + sum_{j<k} slopes_j*deltas_j + slopes_k*(x - b_k),

with b_k the k-th breakpoint, so evaluation is continuous by construction.
Addition merges partitions, truncation against a level inserts exact
crossing breakpoints, and composition with a convex or concave profile
produces a secant chain and a two-tangent chain that bracket phi(u(x))
and interpolate it at every breakpoint of u.  Extrema are attained at
vertices and read off in one traversal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .errors import PartitionMismatchError
from .intervals import Interval

# relative width below which segments are merged before composition
SLIVER_REL = 1e-14


@dataclass(frozen=True)
class PwlFunction:
    domain: Interval
    nu0: float
    deltas: np.ndarray
    slopes: np.ndarray

    def __post_init__(self):
        d = np.ascontiguousarray(self.deltas, dtype=float)
        s = np.ascontiguousarray(self.slopes, dtype=float)
        object.__setattr__(self, "deltas", d)
        object.__setattr__(self, "slopes", s)
        object.__setattr__(self, "nu0", float(self.nu0))
        width = self.domain.width
        if d.shape != s.shape or d.ndim != 1 or d.size < 1:
            raise ValueError("deltas and slopes must be 1-d arrays of equal size")
        if width > 0.0 and np.any(d <= 0.0):
            raise ValueError("segment widths must be positive")
        if abs(float(d.sum()) - width) > 1e-12 * (1.0 + width):
            raise ValueError(
                f"segment widths sum to {d.sum()}, domain width is {width}"
            )

    @property
    def n_segments(self) -> int:
        return self.deltas.size

    def breakpoints(self) -> np.ndarray:
        b = np.empty(self.deltas.size + 1)
        b[0] = self.domain.lo
        np.cumsum(self.deltas, out=b[1:])
        b[1:] += self.domain.lo
        b[-1] = self.domain.hi
        return b

    def vertex_values(self) -> np.ndarray:
        v = np.empty(self.deltas.size + 1)
        v[0] = self.nu0
        np.cumsum(self.slopes * self.deltas, out=v[1:])
        v[1:] += self.nu0
        return v

    def __repr__(self):
        return (
            f"PwlFunction({self.domain}, nu0={self.nu0}, "
            f"N={self.n_segments})"
        )


def pwl_identity(domain: Interval, n_segments: int = 1) -> PwlFunction:
    """x -> x encoded over an equidistant partition."""
    if n_segments < 1:
        raise ValueError("need at least one segment")
    w = domain.width
    if w == 0.0:
        return PwlFunction(domain, domain.lo, np.array([0.0]), np.array([1.0]))
    deltas = np.full(n_segments, w / n_segments)
    return PwlFunction(domain, domain.lo, deltas, np.ones(n_segments))


def pwl_constant(domain: Interval, value: float) -> PwlFunction:
    w = domain.width
    return PwlFunction(domain, value, np.array([w]), np.array([0.0]))


def pwl_eval(u: PwlFunction, x):
    """Evaluate at a scalar or array of points inside the domain."""
    x = np.asarray(x, dtype=float)
    tol = 1e-12 * (1.0 + u.domain.width)
    if np.any(x < u.domain.lo - tol) or np.any(x > u.domain.hi + tol):
        raise ValueError(f"evaluation point outside domain {u.domain}")
    if u.domain.width == 0.0:
        return np.full_like(x, u.nu0) if x.ndim else float(u.nu0)
    b = u.breakpoints()
    v = u.vertex_values()
    idx = np.clip(np.searchsorted(b, x, side="right") - 1, 0, u.n_segments - 1)
    y = v[idx] + u.slopes[idx] * (x - b[idx])
    return y if x.ndim else float(y)


def pwl_extrema(u: PwlFunction) -> tuple[float, float]:
    """(min, max) over the domain; attained at vertices."""
    v = u.vertex_values()
    return float(v.min()), float(v.max())


def pwl_affine(u: PwlFunction, a: float, b: float) -> PwlFunction:
    """a*u + b, exactly: slopes scale by a, the offset enters nu0 only."""
    return PwlFunction(u.domain, a * u.nu0 + b, u.deltas, a * u.slopes)


def _check_same_domain(u: PwlFunction, v: PwlFunction):
    tol = 1e-12 * (1.0 + abs(u.domain.lo) + abs(u.domain.hi))
    if (
        abs(u.domain.lo - v.domain.lo) > tol
        or abs(u.domain.hi - v.domain.hi) > tol
    ):
        raise PartitionMismatchError(
            f"domain mismatch: {u.domain} vs {v.domain}"
        )


def pwl_add(u: PwlFunction, v: PwlFunction) -> PwlFunction:
    """u + v on the merged partition; pointwise exact."""
    _check_same_domain(u, v)
    if u.domain.width == 0.0:
        return PwlFunction(
            u.domain, u.nu0 + v.nu0, u.deltas, u.slopes + v.slopes
        )
    m, d, s = K.k_pwl_add(u.deltas, u.slopes, v.deltas, v.slopes)
    return PwlFunction(u.domain, u.nu0 + v.nu0, d[:m].copy(), s[:m].copy())


def pwl_truncate(u: PwlFunction, c: float, mode: str = "max") -> PwlFunction:
    """Exact max(u, c) or min(u, c) with crossing breakpoints inserted."""
    if mode not in ("max", "min"):
        raise ValueError(f"mode must be 'max' or 'min', got {mode!r}")
    if u.domain.width == 0.0:
        val = max(u.nu0, c) if mode == "max" else min(u.nu0, c)
        return PwlFunction(u.domain, val, u.deltas, u.slopes)
    m, nu0, d, s = K.k_pwl_truncate(
        u.nu0, u.deltas, u.slopes, float(c), mode == "max"
    )
    return PwlFunction(u.domain, nu0, d[:m].copy(), s[:m].copy())


def _merge_slivers(u: PwlFunction) -> PwlFunction:
    """Absorb segments narrower than SLIVER_REL*width into a neighbor."""
    w = u.domain.width
    if w == 0.0 or u.n_segments == 1:
        return u
    tiny = SLIVER_REL * w
    if not np.any(u.deltas < tiny):
        return u
    d = []
    s = []
    carry = 0.0
    for dk, sk in zip(u.deltas, u.slopes):
        if dk < tiny:
            carry += dk
            continue
        d.append(dk + carry)
        carry = 0.0
        s.append(sk)
    if not d:
        d = [w]
        s = [u.slopes[0]]
    else:
        d[-1] += carry
    return PwlFunction(u.domain, u.nu0, np.array(d), np.array(s))


def pwl_compose_bracket(u: PwlFunction, phi, convexity: str = None):
    """Bracket phi(u(x)) by piecewise-linear functions on u's partition.

    phi must be convex or concave over the range of u.  The secant chain
    connects phi(u) at consecutive breakpoints; the tangent chain uses the
    one-sided tangents at both segment-end images, split where they meet.
    For convex phi the tangent chain underestimates and the secant chain
    overestimates; for concave phi the roles swap.  Flat input segments
    compose exactly, and compositions with pure truncations max(., c) /
    min(., c) short-circuit to the exact algorithm.

    Returns (under, over).
    """
    if convexity is None:
        convexity = getattr(phi, "convexity", None) or phi.convexity_on(
            Interval(*pwl_extrema(u))
        )
    if getattr(phi, "truncation", None) is not None:
        mode, c = phi.truncation
        t = pwl_truncate(u, c, mode)
        return t, t

    u = _merge_slivers(u)
    lo, hi = pwl_extrema(u)
    phi.check_domain(Interval(lo, hi))

    if u.domain.width == 0.0:
        const = PwlFunction(
            u.domain, float(phi.eval(u.nu0)), u.deltas, np.zeros(1)
        )
        return const, const

    v = u.vertex_values()
    xi_l = v[:-1]
    xi_r = v[1:]
    phi_l = np.asarray(phi.eval(xi_l), dtype=float)
    phi_r = np.asarray(phi.eval(xi_r), dtype=float)
    sgn = np.sign(u.slopes)
    d_plus_l = np.asarray(phi.deriv_into(xi_l, +1), dtype=float)
    d_minus_l = np.asarray(phi.deriv_into(xi_l, -1), dtype=float)
    d_plus_r = np.asarray(phi.deriv_into(xi_r, +1), dtype=float)
    d_minus_r = np.asarray(phi.deriv_into(xi_r, -1), dtype=float)
    dphi_l = np.where(sgn >= 0, d_plus_l, d_minus_l)
    dphi_r = np.where(sgn >= 0, d_minus_r, d_plus_r)

    sec_d, sec_s, mt, tan_d, tan_s = K.k_pwl_compose(
        u.deltas, u.slopes, phi_l, phi_r, dphi_l, dphi_r
    )
    nu0 = float(phi_l[0])
    secant = PwlFunction(u.domain, nu0, sec_d, sec_s)
    tangent = PwlFunction(u.domain, nu0, tan_d[:mt].copy(), tan_s[:mt].copy())
    if convexity == "convex":
        return tangent, secant
    return secant, tangent


def pwl_simplify(
    u: PwlFunction,
    tol: float = 0.0,
    side: str = None,
    budget: int = None,
) -> PwlFunction:
    """Merge adjacent segments with slope difference <= tol; optionally
    drop vertices down to a segment budget without crossing the declared
    side ('under' may only move down, 'over' only up) by more than tol.
    """
    if tol < 0.0:
        raise ValueError("tol must be nonnegative")
    m, d, s = K.k_merge_collinear(u.nu0, u.deltas, u.slopes, max(tol, 0.0))
    out = PwlFunction(u.domain, u.nu0, d[:m].copy(), s[:m].copy())
    if budget is None or out.n_segments <= budget:
        return out
    if side not in ("under", "over"):
        raise ValueError("budgeted reduction needs side 'under' or 'over'")

    deltas = list(out.deltas)
    slopes = list(out.slopes)
    # accumulated pointwise deviation charged to each interior vertex
    spent = [0.0] * (len(deltas) + 1)
    while len(deltas) > budget:
        best = None
        best_err = None
        for k in range(len(deltas) - 1):
            ds = slopes[k] - slopes[k + 1]
            concave_corner = ds >= 0.0
            if (side == "under") != concave_corner:
                continue
            w1, w2 = deltas[k], deltas[k + 1]
            # chord vs current function at the dropped vertex
            gap = abs(ds) * w1 * w2 / (w1 + w2)
            err = gap + max(spent[k], spent[k + 1], spent[k + 2])
            if err <= tol and (best_err is None or err < best_err):
                best = k
                best_err = err
        if best is None:
            break
        k = best
        w = deltas[k] + deltas[k + 1]
        merged_slope = (
            slopes[k] * deltas[k] + slopes[k + 1] * deltas[k + 1]
        ) / w
        deltas[k : k + 2] = [w]
        slopes[k : k + 2] = [merged_slope]
        spent[k + 1 : k + 3] = [best_err]
    return PwlFunction(u.domain, u.nu0, np.array(deltas), np.array(slopes))
