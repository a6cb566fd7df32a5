"""Hot segment-algebra kernels for continuous piecewise-linear summands.

A piecewise-linear function on [xlo, xhi] is carried as the triplet
(nu0, deltas, slopes): value at xlo, positive segment widths summing to
xhi - xlo, and one slope per segment.  The kernels below do the inner
loops of the three segment-encoding algorithms:

  k_pwl_add        -- merge two partitions and add slopes (binary sum)
  k_pwl_truncate   -- exact max(u, c) / min(u, c) with crossing splits
  k_pwl_compose    -- per-segment secant chain and two-tangent chain
                      bracketing phi(u(x)) for a convex/concave phi

They are written as plain float64 loops so the numba and numpy backends
share one source; see _backend.  No fastmath/parallel options are used,
keeping results bit-identical across backends.

Outputs are preallocated at worst-case size; each kernel returns the used
segment count and the wrappers slice.
"""

import numpy as np

from ._backend import njit

# relative width below which a merged/split segment is treated as degenerate
WIDTH_EPS = 1e-15


@njit(cache=True)
def k_pwl_add(d1, s1, d2, s2):
    """Merged-partition sum of two segment encodings on a common domain.

    Returns (m, out_d, out_s) with m used segments.
    """
    n1 = d1.shape[0]
    n2 = d2.shape[0]
    total = 0.0
    for k in range(n1):
        total += d1[k]
    eps = WIDTH_EPS * (total + 1.0)

    out_d = np.empty(n1 + n2, np.float64)
    out_s = np.empty(n1 + n2, np.float64)

    i = 0
    j = 0
    m = 0
    cur = 0.0
    e1 = d1[0]
    e2 = d2[0]
    while i < n1 or j < n2:
        if i >= n1:
            nxt = e2
        elif j >= n2:
            nxt = e1
        elif e1 <= e2:
            nxt = e1
        else:
            nxt = e2
        w = nxt - cur
        if w > eps:
            si = s1[i] if i < n1 else s1[n1 - 1]
            sj = s2[j] if j < n2 else s2[n2 - 1]
            out_d[m] = w
            out_s[m] = si + sj
            m += 1
        if i < n1 and e1 <= nxt + eps:
            i += 1
            if i < n1:
                e1 += d1[i]
        if j < n2 and e2 <= nxt + eps:
            j += 1
            if j < n2:
                e2 += d2[j]
        cur = nxt

    if m == 0:
        out_d[0] = total
        out_s[0] = s1[n1 - 1] + s2[n2 - 1]
        m = 1
    else:
        # fold width dust into the last segment so the partition stays exact
        acc = 0.0
        for k in range(m):
            acc += out_d[k]
        out_d[m - 1] += total - acc
    return m, out_d, out_s


@njit(cache=True)
def k_pwl_truncate(nu0, d, s, c, take_max):
    """Exact truncation max(u, c) (take_max) or min(u, c).

    Splits a segment at the level crossing and flattens the clipped part.
    Returns (m, out_nu0, out_d, out_s).
    """
    n = d.shape[0]
    out_d = np.empty(2 * n, np.float64)
    out_s = np.empty(2 * n, np.float64)
    m = 0
    v = nu0
    for k in range(n):
        w = d[k]
        sk = s[k]
        vr = v + sk * w
        if take_max:
            lo_clip = v < c
            hi_clip = vr < c
        else:
            lo_clip = v > c
            hi_clip = vr > c
        if lo_clip and hi_clip:
            # adjacent flats sit at the same level by continuity: extend
            if m > 0 and out_s[m - 1] == 0.0:
                out_d[m - 1] += w
            else:
                out_d[m] = w
                out_s[m] = 0.0
                m += 1
        elif not lo_clip and not hi_clip:
            out_d[m] = w
            out_s[m] = sk
            m += 1
        else:
            t = (c - v) / sk
            if t < 0.0:
                t = 0.0
            elif t > w:
                t = w
            if lo_clip:
                # clipped part first, then follow u
                if t > 0.0:
                    if m > 0 and out_s[m - 1] == 0.0:
                        out_d[m - 1] += t
                    else:
                        out_d[m] = t
                        out_s[m] = 0.0
                        m += 1
                if w - t > 0.0:
                    out_d[m] = w - t
                    out_s[m] = sk
                    m += 1
            else:
                if t > 0.0:
                    out_d[m] = t
                    out_s[m] = sk
                    m += 1
                if w - t > 0.0:
                    out_d[m] = w - t
                    out_s[m] = 0.0
                    m += 1
        v = vr
    if take_max:
        new_nu0 = nu0 if nu0 >= c else c
    else:
        new_nu0 = nu0 if nu0 <= c else c
    return m, new_nu0, out_d, out_s


@njit(cache=True)
def k_pwl_compose(d, s, phi_l, phi_r, dphi_l, dphi_r):
    """Secant and tangent chains bracketing phi(u(x)) segment by segment.

    phi_l/phi_r hold phi at the left/right image of each input segment;
    dphi_l/dphi_r the one-sided derivatives of phi there (taken into the
    segment).  The secant chain keeps the input breakpoints; the tangent
    chain splits each segment where the two endpoint tangents intersect.
    Both chains interpolate phi(u) at every input breakpoint.

    For a convex phi the tangent chain is the underestimator and the
    secant chain the overestimator; for a concave phi the roles swap.

    Returns (sec_d, sec_s, mt, tan_d, tan_s); the secant chain reuses the
    input partition size.
    """
    n = d.shape[0]
    sec_d = np.empty(n, np.float64)
    sec_s = np.empty(n, np.float64)
    tan_d = np.empty(2 * n, np.float64)
    tan_s = np.empty(2 * n, np.float64)
    mt = 0
    for k in range(n):
        w = d[k]
        dphi = phi_r[k] - phi_l[k]
        sec = dphi / w
        sec_d[k] = w
        sec_s[k] = sec

        a = s[k] * dphi_l[k]
        b = s[k] * dphi_r[k]
        scale = abs(a) + abs(b) + 1.0
        denom = b - a
        if abs(denom) <= 1e-13 * scale or s[k] == 0.0:
            # phi affine on the segment image (or flat input): chains agree
            tan_d[mt] = w
            tan_s[mt] = sec
            mt += 1
        else:
            t = (b * w - dphi) / denom
            if t <= 0.0 or t >= w:
                # intersection degenerates onto an endpoint: the secant
                # segment keeps the chain continuous and interpolating
                tan_d[mt] = w
                tan_s[mt] = sec
                mt += 1
            else:
                tan_d[mt] = t
                tan_s[mt] = a
                mt += 1
                tan_d[mt] = w - t
                tan_s[mt] = b
                mt += 1
    return sec_d, sec_s, mt, tan_d, tan_s


@njit(cache=True)
def k_merge_collinear(nu0, d, s, tol):
    """Merge adjacent segments whose slopes differ by at most tol."""
    n = d.shape[0]
    out_d = np.empty(n, np.float64)
    out_s = np.empty(n, np.float64)
    m = 0
    for k in range(n):
        if m > 0 and abs(out_s[m - 1] - s[k]) <= tol:
            out_d[m - 1] += d[k]
        else:
            out_d[m] = d[k]
            out_s[m] = s[k]
            m += 1
    return m, out_d, out_s


def warmup():
    """Trigger kernel compilation (no-op on the numpy backend)."""
    d = np.array([0.5, 0.5])
    s = np.array([1.0, -1.0])
    k_pwl_add(d, s, d, s)
    k_pwl_truncate(0.0, d, s, 0.25, True)
    k_pwl_truncate(0.0, d, s, 0.25, False)
    k_pwl_compose(d, s, np.zeros(2), np.ones(2), np.ones(2), np.ones(2))
    k_merge_collinear(0.0, d, s, 0.0)
