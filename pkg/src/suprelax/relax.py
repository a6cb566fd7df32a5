"""Separable (superposition) relaxation arithmetic.

A relaxation of f on a box X is a pair of separable functions,
sum_i under_i(x_i) <= f(x) <= sum_i over_i(x_i), with each univariate
summand stored as a piecewise-linear or piecewise-constant object.  Its
range is read off by adding the summand extrema.

Construction rules:

* variables and affine maps are exact (negative scale swaps the sides,
  offsets are spread as b/n over the summands);
* composition with a convex or concave monotone profile rewrites each
  summand through a shifted copy of the profile (under side) and through
  its perspective theta*phi(./theta) (over side), anchored at the
  aggregate extrema and weighted by the width-proportional theta_i;
* a convex profile with an interior minimizer s* (mirror for concave) is
  split through the identity phi(z) = phi(min(z,s*)) + phi(max(z,s*)) -
  phi(s*), and both resulting monotone terms are composed as above; the
  split keeps the relaxation range tracking the true minimum;
* profiles with interior inflections are decomposed into tangent-extended
  convex/concave addends (see unary.dc_terms), composed addend by addend,
  added up, and by default clamped to the profile's exact image through
  the range-tightening intersection;
* products use the difference-of-squares identity on midpoint-centered,
  range-rescaled factors (or a log transform on request); binary min/max
  use the symmetric half-sum decomposition with exact truncations.

Every operation returns a new immutable value; nothing here mutates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError, InfeasibleBoundError, PartitionMismatchError
from .intervals import Box, Interval, iv_extend
from .pwc import (
    PwcFunction,
    pwc_constant,
    pwc_eval,
    pwc_fn_add,
    pwc_fn_affine,
    pwc_fn_compose,
    pwc_fn_extrema,
    pwc_fn_truncate,
    pwc_variable,
)
from .pwl import (
    PwlFunction,
    pwl_add,
    pwl_affine,
    pwl_compose_bracket,
    pwl_constant,
    pwl_eval,
    pwl_extrema,
    pwl_identity,
    pwl_truncate,
)
from .unary import (
    EXP,
    INV,
    LOG,
    SQR,
    AddendSpec,
    dc_terms,
    max_const,
    min_const,
    segment,
)

# a summand is active when its range width clears this relative floor
ACTIVE_REL_TOL = 1e-12


# ---------------------------------------------------------------------------
# summand dispatch (PwlFunction | PwcFunction)


def _s_extrema(g):
    return pwl_extrema(g) if isinstance(g, PwlFunction) else pwc_fn_extrema(g)


def _s_affine(g, a, b):
    if isinstance(g, PwlFunction):
        return pwl_affine(g, a, b)
    return pwc_fn_affine(g, a, b)


def _s_add(g, h):
    if isinstance(g, PwlFunction):
        return pwl_add(g, h)
    return pwc_fn_add(g, h)


def _s_truncate(g, c, mode):
    if isinstance(g, PwlFunction):
        return pwl_truncate(g, c, mode)
    return pwc_fn_truncate(g, c, mode)


def _s_bracket(g, phi, convexity):
    """(under, over) bracket of phi(g); exact cellwise for constants."""
    if isinstance(g, PwlFunction):
        return pwl_compose_bracket(g, phi, convexity)
    if getattr(phi, "truncation", None) is not None:
        mode, c = phi.truncation
        t = pwc_fn_truncate(g, c, mode)
        return t, t
    composed = pwc_fn_compose(g, phi)
    return composed, composed


def _s_eval(g, x):
    return pwl_eval(g, x) if isinstance(g, PwlFunction) else pwc_eval(g, x)


def _s_const_like(g, value):
    if isinstance(g, PwlFunction):
        return pwl_constant(g.domain, value)
    return pwc_constant(g.domain, value, g.n_cells)


# ---------------------------------------------------------------------------
# relaxation value


@dataclass(frozen=True)
class SupRelax:
    """Box plus one under- and one over-summand per coordinate."""

    box: Box
    under: tuple
    over: tuple
    cached_range: Interval

    @property
    def n(self) -> int:
        return self.box.n


def _mk(box: Box, under, over) -> SupRelax:
    lo = sum(_s_extrema(g)[0] for g in under)
    hi = sum(_s_extrema(g)[1] for g in over)
    return SupRelax(box, tuple(under), tuple(over), Interval(lo, hi))


def sr_variable(i: int, box: Box, n_ini: int = 1, family: str = "pwl") -> SupRelax:
    """Encode coordinate i: summand i is the identity on X_i over n_ini
    equal segments/cells, all other summands are zero."""
    if not 0 <= i < box.n:
        raise ValueError(f"variable index {i} out of range for n={box.n}")
    if n_ini < 1:
        raise ValueError("n_ini must be >= 1")
    under = []
    over = []
    for j, dim in enumerate(box.dims):
        if j == i:
            if family == "pwl":
                ident = pwl_identity(dim, n_ini)
                under.append(ident)
                over.append(ident)
            elif family == "pwc":
                pair = pwc_variable(dim, n_ini)
                under.append(pair.lo)
                over.append(pair.hi)
            else:
                raise ValueError(f"unknown summand family {family!r}")
        else:
            zero = (
                pwl_constant(dim, 0.0)
                if family == "pwl"
                else pwc_constant(dim, 0.0, n_ini)
            )
            under.append(zero)
            over.append(zero)
    return _mk(box, under, over)


def sr_constant(box: Box, value: float, like: SupRelax) -> SupRelax:
    """Constant relaxation with value/n on each summand, matching the
    summand family of an existing relaxation."""
    n = box.n
    under = [_s_const_like(g, value / n) for g in like.under]
    over = [_s_const_like(g, value / n) for g in like.over]
    return _mk(box, under, over)


def _check_same_box(F: SupRelax, G: SupRelax):
    tol = 1e-12 * (1.0 + max(abs(d.lo) + abs(d.hi) for d in F.box.dims))
    for a, b in zip(F.box.dims, G.box.dims):
        if abs(a.lo - b.lo) > tol or abs(a.hi - b.hi) > tol:
            raise PartitionMismatchError(f"box mismatch: {F.box} vs {G.box}")


def sr_add(F: SupRelax, G: SupRelax) -> SupRelax:
    _check_same_box(F, G)
    under = [_s_add(a, b) for a, b in zip(F.under, G.under)]
    over = [_s_add(a, b) for a, b in zip(F.over, G.over)]
    return _mk(F.box, under, over)


def sr_affine(F: SupRelax, a: float, b: float = 0.0) -> SupRelax:
    """a*F + b; a < 0 swaps the under/over roles, b is spread as b/n."""
    shift = b / F.n
    if a >= 0.0:
        under = [_s_affine(g, a, shift) for g in F.under]
        over = [_s_affine(g, a, shift) for g in F.over]
    else:
        under = [_s_affine(g, a, shift) for g in F.over]
        over = [_s_affine(g, a, shift) for g in F.under]
    return _mk(F.box, under, over)


def sr_range(F: SupRelax) -> Interval:
    return F.cached_range


def sr_eval_under(F: SupRelax, x):
    x = np.asarray(x, dtype=float)
    pts = x.reshape(1, -1) if x.ndim == 1 else x
    total = sum(_s_eval(g, pts[:, i]) for i, g in enumerate(F.under))
    return float(total[0]) if x.ndim == 1 else total


def sr_eval_over(F: SupRelax, x):
    x = np.asarray(x, dtype=float)
    pts = x.reshape(1, -1) if x.ndim == 1 else x
    total = sum(_s_eval(g, pts[:, i]) for i, g in enumerate(F.over))
    return float(total[0]) if x.ndim == 1 else total


# ---------------------------------------------------------------------------
# composition


@dataclass(frozen=True)
class CompositionContext:
    """Active sets, width-proportional weights and aggregate anchors of a
    relaxation's two sides, as consumed by the composition rules."""

    active_under: tuple[int, ...]
    active_over: tuple[int, ...]
    theta_under: tuple[float, ...]
    theta_over: tuple[float, ...]
    lo_sum: float
    hi_sum: float
    under_extrema: tuple
    over_extrema: tuple
    stationary: Optional[float] = None
    inflections: tuple[float, ...] = ()


def _actives_and_weights(extrema):
    widths = [hi - lo for lo, hi in extrema]
    active = tuple(
        i
        for i, (w, (lo, hi)) in enumerate(zip(widths, extrema))
        if w > ACTIVE_REL_TOL * (1.0 + max(abs(lo), abs(hi)))
    )
    total = sum(widths[i] for i in active)
    theta = [0.0] * len(widths)
    for i in active:
        theta[i] = widths[i] / total
    return active, tuple(theta)


def composition_context(
    F: SupRelax, stationary=None, inflections=()
) -> CompositionContext:
    ue = tuple(_s_extrema(g) for g in F.under)
    oe = tuple(_s_extrema(g) for g in F.over)
    au, tu = _actives_and_weights(ue)
    ao, to = _actives_and_weights(oe)
    lo_sum = sum(lo for lo, _ in ue)
    hi_sum = sum(hi for _, hi in oe)
    return CompositionContext(
        au, ao, tu, to, lo_sum, hi_sum, ue, oe, stationary, inflections
    )


def _phi_at(phi, z, trunc):
    if trunc is not None:
        mode, c = trunc
        z = min(z, c) if mode == "min" else max(z, c)
    return float(phi.eval(z))


def _side(F, ctx, side):
    if side == "under":
        return F.under, ctx.under_extrema, ctx.active_under, ctx.theta_under, ctx.lo_sum
    return F.over, ctx.over_extrema, ctx.active_over, ctx.theta_over, ctx.hi_sum


def _shift_term(F, ctx, side, phi, convexity, bracket_side, trunc=None):
    """Summands phi_t(g_i - ext_i + agg) - (1-theta_i)*phi_t(agg) on the
    side's active set; a fully inactive side yields the constant
    phi_t(agg) instead (returned for distribution)."""
    summands, extrema, active, thetas, agg = _side(F, ctx, side)
    ext_idx = 0 if side == "under" else 1
    out = [None] * F.n
    if not active:
        return out, _phi_at(phi, agg, trunc)
    for i in active:
        w = _s_affine(summands[i], 1.0, agg - extrema[i][ext_idx])
        if trunc is not None:
            w = _s_truncate(w, trunc[1], trunc[0])
        under_b, over_b = _s_bracket(w, phi, convexity)
        g = under_b if bracket_side == "under" else over_b
        out[i] = _s_affine(g, 1.0, -(1.0 - thetas[i]) * _phi_at(phi, agg, trunc))
    return out, 0.0


def _perspective_term(F, ctx, side, phi, convexity, bracket_side, trunc=None):
    """Summands theta_i*phi_t((g_i - ext_i)/theta_i + agg) on the side's
    active set; constant phi_t(agg) when the side is inactive."""
    summands, extrema, active, thetas, agg = _side(F, ctx, side)
    ext_idx = 0 if side == "under" else 1
    out = [None] * F.n
    if not active:
        return out, _phi_at(phi, agg, trunc)
    for i in active:
        th = thetas[i]
        w = _s_affine(summands[i], 1.0 / th, agg - extrema[i][ext_idx] / th)
        if trunc is not None:
            w = _s_truncate(w, trunc[1], trunc[0])
        under_b, over_b = _s_bracket(w, phi, convexity)
        g = under_b if bracket_side == "under" else over_b
        out[i] = _s_affine(g, th, 0.0)
    return out, 0.0


def _assemble(F, under_parts, over_parts, under_weights=None, over_weights=None):
    """Sum per-coordinate term lists into a relaxation.

    Each part is (summand-list-with-Nones, leftover-constant).  Leftover
    constants are spread as c/n; the optional weight maps subtract a
    weighted constant per coordinate (the stationary-value correction of
    the min/max split)."""

    def build(parts, weights):
        const = sum(c for _, c in parts)
        out = []
        for i in range(F.n):
            acc = None
            for lst, _ in parts:
                if lst[i] is None:
                    continue
                acc = lst[i] if acc is None else _s_add(acc, lst[i])
            shift = const / F.n
            if weights is not None:
                shift -= weights[i]
            if acc is None:
                acc = _s_const_like(F.under[i], shift)
            elif shift != 0.0:
                acc = _s_affine(acc, 1.0, shift)
            out.append(acc)
        return out

    return _mk(
        F.box, build(under_parts, under_weights), build(over_parts, over_weights)
    )


def _compose_monotone(F, ctx, phi, convexity, monotonicity):
    nondec = monotonicity == "nondecreasing"
    if convexity == "convex":
        if nondec:
            under = _shift_term(F, ctx, "under", phi, convexity, "under")
            over = _perspective_term(F, ctx, "over", phi, convexity, "over")
        else:
            under = _shift_term(F, ctx, "over", phi, convexity, "under")
            over = _perspective_term(F, ctx, "under", phi, convexity, "over")
    else:
        if nondec:
            under = _perspective_term(F, ctx, "under", phi, convexity, "under")
            over = _shift_term(F, ctx, "over", phi, convexity, "over")
        else:
            under = _perspective_term(F, ctx, "over", phi, convexity, "under")
            over = _shift_term(F, ctx, "under", phi, convexity, "over")
    return _assemble(F, [under], [over])


def _split_weights(F, ctx):
    """Distribution of the -phi(s*) correction over the active union."""
    have_u = 1.0 if ctx.active_under else 0.0
    have_o = 1.0 if ctx.active_over else 0.0
    wsum = have_u + have_o
    return tuple(
        (ctx.theta_under[i] * have_u + ctx.theta_over[i] * have_o) / wsum
        for i in range(F.n)
    )


def _compose_nonmonotone(F, ctx, phi, convexity, sigma_star):
    """Interior-extremum profile via phi = phi(min(z,s*)) + phi(max(z,s*))
    - phi(s*); both monotone halves compose as usual and the constant is
    distributed with the width-proportional weights."""
    t_min = ("min", sigma_star)
    t_max = ("max", sigma_star)
    cvx = convexity
    if convexity == "convex":
        u1 = _shift_term(F, ctx, "over", phi, cvx, "under", t_min)
        u2 = _shift_term(F, ctx, "under", phi, cvx, "under", t_max)
        o1 = _perspective_term(F, ctx, "under", phi, cvx, "over", t_min)
        o2 = _perspective_term(F, ctx, "over", phi, cvx, "over", t_max)
    else:
        u1 = _perspective_term(F, ctx, "under", phi, cvx, "under", t_min)
        u2 = _perspective_term(F, ctx, "over", phi, cvx, "under", t_max)
        o1 = _shift_term(F, ctx, "over", phi, cvx, "over", t_min)
        o2 = _shift_term(F, ctx, "under", phi, cvx, "over", t_max)
    d = _split_weights(F, ctx)
    phi_star = float(phi.eval(sigma_star))
    weights = tuple(di * phi_star for di in d)
    return _assemble(F, [u1, u2], [o1, o2], weights, weights)


def sr_compose(F: SupRelax, phi, auto_intersect: Optional[bool] = None) -> SupRelax:
    """Relaxation of phi(F) over F's box.

    Dispatch: monotone convex/concave profiles compose directly; an
    interior extremum triggers the min/max split; interior inflections
    trigger the addend decomposition, whose sum is by default intersected
    with the profile's exact image over F's range (override with
    auto_intersect)."""
    rng = F.cached_range
    scale = 1.0 + max(abs(rng.lo), abs(rng.hi))
    if rng.width <= ACTIVE_REL_TOL * scale:
        phi.check_domain(rng)
        return sr_constant(F.box, float(phi.eval(rng.mid)), F)

    if isinstance(phi, AddendSpec):
        convexity = phi.convexity
        monotonicity = phi.monotonicity
        stationary = phi.stationary
    else:
        seg = segment(phi, rng)
        if seg.m >= 1:
            out = None
            for addend in dc_terms(phi, rng):
                part = sr_compose(F, addend, auto_intersect=False)
                out = part if out is None else sr_add(out, part)
            if auto_intersect is None or auto_intersect:
                out = sr_intersect(out, iv_extend(phi, rng))
            return out
        piece = seg.pieces[0]
        convexity = piece.convexity
        monotonicity = piece.monotonicity
        stationary = piece.stationary

    ctx = composition_context(F, stationary)
    if monotonicity == "nonmonotone":
        out = _compose_nonmonotone(F, ctx, phi, convexity, stationary)
    else:
        out = _compose_monotone(F, ctx, phi, convexity, monotonicity)
    if auto_intersect:
        out = sr_intersect(out, iv_extend(phi, rng))
    return out


def sr_intersect(F: SupRelax, bound: Interval) -> SupRelax:
    """Clamp the relaxation to a priori range bounds.

    The under side is pushed up through max(., bound.lo) and the over side
    pulled down through min(., bound.hi), with the usual (1 - theta_i)
    corrections; the resulting range is exactly range(F) intersected with
    the bound."""
    rng = F.cached_range
    tol = 1e-12 * (1.0 + max(abs(rng.lo), abs(rng.hi)))
    if bound.hi < rng.lo - tol or bound.lo > rng.hi + tol:
        raise InfeasibleBoundError(
            f"bound {bound} does not meet relaxation range {rng}"
        )
    ctx = composition_context(F)

    new_lo = max(ctx.lo_sum, bound.lo)
    under = [None] * F.n
    if ctx.active_under:
        for i in ctx.active_under:
            w = _s_affine(F.under[i], 1.0, ctx.lo_sum - ctx.under_extrema[i][0])
            w = _s_truncate(w, bound.lo, "max")
            under[i] = _s_affine(w, 1.0, -(1.0 - ctx.theta_under[i]) * new_lo)
        for i in range(F.n):
            if under[i] is None:
                under[i] = _s_const_like(F.under[i], 0.0)
    else:
        under = [_s_const_like(g, new_lo / F.n) for g in F.under]

    new_hi = min(ctx.hi_sum, bound.hi)
    over = [None] * F.n
    if ctx.active_over:
        for i in ctx.active_over:
            w = _s_affine(F.over[i], 1.0, ctx.hi_sum - ctx.over_extrema[i][1])
            w = _s_truncate(w, bound.hi, "min")
            over[i] = _s_affine(w, 1.0, -(1.0 - ctx.theta_over[i]) * new_hi)
        for i in range(F.n):
            if over[i] is None:
                over[i] = _s_const_like(F.over[i], 0.0)
    else:
        over = [_s_const_like(g, new_hi / F.n) for g in F.over]

    return _mk(F.box, under, over)


# ---------------------------------------------------------------------------
# products, quotients, min/max


def _as_constant(F: SupRelax):
    rng = F.cached_range
    if rng.width <= 1e-14 * (1.0 + abs(rng.mid)):
        return rng.mid
    return None


def _single_active(F: SupRelax) -> bool:
    ctx = composition_context(F)
    return len(set(ctx.active_under) | set(ctx.active_over)) <= 1


def sr_mul(F: SupRelax, G: SupRelax, strategy: str = "dc") -> SupRelax:
    """Product via the difference-of-squares identity on midpoint-centered
    rescaled factors, or exp(log F + log G) for positive ranges."""
    _check_same_box(F, G)
    cf = _as_constant(F)
    if cf is not None:
        return sr_affine(G, cf, 0.0)
    cg = _as_constant(G)
    if cg is not None:
        return sr_affine(F, cg, 0.0)

    if strategy == "log":
        rf, rg = F.cached_range, G.cached_range
        if rf.lo <= 0.0 or rg.lo <= 0.0:
            raise DomainError(
                f"log product strategy needs positive ranges, got {rf} and {rg}"
            )
        return sr_compose(sr_add(sr_compose(F, LOG), sr_compose(G, LOG)), EXP)
    if strategy != "dc":
        raise ValueError(f"unknown product strategy {strategy!r}")

    # midpoint-center each factor and rescale by its own half-width, so the
    # squared terms live on [-1, 1] and the unscaling carries the bilinear
    # width product rather than the squared combined width
    mf = F.cached_range.mid
    mg = G.cached_range.mid
    sf = 2.0 / F.cached_range.width
    sg = 2.0 / G.cached_range.width
    P = sr_affine(F, sf, -sf * mf)
    Q = sr_affine(G, sg, -sg * mg)
    if _single_active(F) and _single_active(G):
        # with univariate factors the pure squares compose exactly, so
        # P*Q = ((P+Q)^2 - P^2 - Q^2)/2 carries separability slack only in
        # the mixed square; this attains the optimal separable product gap
        sq_sum = sr_compose(sr_add(P, Q), SQR)
        sq_p = sr_compose(P, SQR)
        sq_q = sr_compose(Q, SQR)
        hat = sr_affine(
            sr_add(sq_sum, sr_affine(sr_add(sq_p, sq_q), -1.0)), 0.5
        )
    else:
        sum_half = sr_affine(sr_add(P, Q), 0.5)
        diff_half = sr_affine(sr_add(P, sr_affine(Q, -1.0)), 0.5)
        hat = sr_add(
            sr_compose(sum_half, SQR),
            sr_affine(sr_compose(diff_half, SQR), -1.0),
        )
    centered = sr_affine(hat, 1.0 / (sf * sg))
    cross = sr_add(sr_affine(F, mg), sr_affine(G, mf, -mf * mg))
    return sr_add(centered, cross)


def sr_div(F: SupRelax, G: SupRelax) -> SupRelax:
    return sr_mul(F, sr_compose(G, INV))


def sr_relu(F: SupRelax) -> SupRelax:
    return sr_compose(F, max_const(0.0))


def sr_max(F: SupRelax, G: SupRelax) -> SupRelax:
    """max(F, G) = ((F+G) + max(F-G, 0) + max(G-F, 0)) / 2."""
    _check_same_box(F, G)
    if F is G:
        # the self-difference of a relaxation is not the zero function,
        # so the decomposition would inflate the gap; max(f, f) = f
        return F
    diff = sr_add(F, sr_affine(G, -1.0))
    ndiff = sr_affine(diff, -1.0)
    total = sr_add(sr_add(F, G), sr_add(sr_relu(diff), sr_relu(ndiff)))
    return sr_affine(total, 0.5)


def sr_min(F: SupRelax, G: SupRelax) -> SupRelax:
    """min(F, G) = ((F+G) + min(F-G, 0) + min(G-F, 0)) / 2."""
    _check_same_box(F, G)
    if F is G:
        return F
    diff = sr_add(F, sr_affine(G, -1.0))
    ndiff = sr_affine(diff, -1.0)
    lo = min_const(0.0)
    total = sr_add(
        sr_add(F, G), sr_add(sr_compose(diff, lo), sr_compose(ndiff, lo))
    )
    return sr_affine(total, 0.5)
