"""Piecewise-constant summands over fixed equal-width partitions.

A PwcFunction holds one value per cell of an equidistant partition; a
PwcPair couples a lower and an upper PwcFunction on the same partition
(per-cell interval values).  Pair operations run cellwise interval
arithmetic: addition and affine maps act on the endpoints, and unary
composition maps each cell's interval through the exact range of the
profile function.  Variables are encoded with each cell holding its own
subinterval, so the representation error of a variable is width/N.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PartitionMismatchError
from .intervals import Interval, iv_extend
from .unary import UnaryFuncSpec


@dataclass(frozen=True)
class PwcFunction:
    domain: Interval
    values: np.ndarray

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if v.ndim != 1 or v.size < 1:
            raise ValueError("cell values must be a nonempty 1-d array")

    @property
    def n_cells(self) -> int:
        return self.values.size

    def cell_edges(self) -> np.ndarray:
        return np.linspace(self.domain.lo, self.domain.hi, self.n_cells + 1)


def pwc_constant(domain: Interval, value: float, n_cells: int) -> PwcFunction:
    return PwcFunction(domain, np.full(n_cells, float(value)))


def pwc_eval(u: PwcFunction, x):
    x = np.asarray(x, dtype=float)
    tol = 1e-12 * (1.0 + u.domain.width)
    if np.any(x < u.domain.lo - tol) or np.any(x > u.domain.hi + tol):
        raise ValueError(f"evaluation point outside domain {u.domain}")
    if u.domain.width == 0.0:
        y = np.full_like(x, u.values[0])
        return y if x.ndim else float(y)
    frac = (x - u.domain.lo) / u.domain.width * u.n_cells
    idx = np.clip(np.floor(frac).astype(int), 0, u.n_cells - 1)
    y = u.values[idx]
    return y if x.ndim else float(y)


def pwc_fn_extrema(u: PwcFunction) -> tuple[float, float]:
    return float(u.values.min()), float(u.values.max())


def pwc_fn_affine(u: PwcFunction, a: float, b: float) -> PwcFunction:
    return PwcFunction(u.domain, a * u.values + b)


def pwc_fn_add(u: PwcFunction, v: PwcFunction) -> PwcFunction:
    _check_partition(u, v)
    return PwcFunction(u.domain, u.values + v.values)


def pwc_fn_truncate(u: PwcFunction, c: float, mode: str = "max") -> PwcFunction:
    clip = np.maximum if mode == "max" else np.minimum
    return PwcFunction(u.domain, clip(u.values, float(c)))


def pwc_fn_compose(u: PwcFunction, phi) -> PwcFunction:
    """phi applied to the cell constants; exact per cell."""
    lo, hi = pwc_fn_extrema(u)
    phi.check_domain(Interval(lo, hi))
    return PwcFunction(u.domain, np.asarray(phi.eval(u.values), dtype=float))


def _check_partition(u: PwcFunction, v: PwcFunction):
    tol = 1e-12 * (1.0 + abs(u.domain.lo) + abs(u.domain.hi))
    if (
        u.n_cells != v.n_cells
        or abs(u.domain.lo - v.domain.lo) > tol
        or abs(u.domain.hi - v.domain.hi) > tol
    ):
        raise PartitionMismatchError(
            f"partition mismatch: {u.n_cells} cells on {u.domain} vs "
            f"{v.n_cells} cells on {v.domain}"
        )


@dataclass(frozen=True)
class PwcPair:
    """Per-cell [lower, upper] values over one fixed partition."""

    lo: PwcFunction
    hi: PwcFunction

    def __post_init__(self):
        _check_partition(self.lo, self.hi)
        if np.any(self.lo.values > self.hi.values):
            raise ValueError("cell lower values exceed upper values")

    @property
    def domain(self) -> Interval:
        return self.lo.domain

    @property
    def n_cells(self) -> int:
        return self.lo.n_cells

    @property
    def values(self) -> list[Interval]:
        return [
            Interval(a, b) for a, b in zip(self.lo.values, self.hi.values)
        ]


def pwc_variable(domain: Interval, n_cells: int) -> PwcPair:
    """Encode x -> x: each cell holds its own subinterval."""
    edges = np.linspace(domain.lo, domain.hi, n_cells + 1)
    return PwcPair(
        PwcFunction(domain, edges[:-1].copy()),
        PwcFunction(domain, edges[1:].copy()),
    )


def pwc_apply(pair: PwcPair, op: str, *args) -> PwcPair:
    """Cellwise interval arithmetic on a pair.

    op: "add" (second pair), "affine" (a, b), or "compose" (unary spec).
    """
    if op == "add":
        (other,) = args
        return PwcPair(
            pwc_fn_add(pair.lo, other.lo), pwc_fn_add(pair.hi, other.hi)
        )
    if op == "affine":
        a, b = args
        lo = pwc_fn_affine(pair.lo, a, b)
        hi = pwc_fn_affine(pair.hi, a, b)
        return PwcPair(lo, hi) if a >= 0 else PwcPair(hi, lo)
    if op == "compose":
        (phi,) = args
        los = np.empty(pair.n_cells)
        his = np.empty(pair.n_cells)
        for k, cell in enumerate(pair.values):
            img = iv_extend(phi, cell)
            los[k] = img.lo
            his[k] = img.hi
        return PwcPair(
            PwcFunction(pair.domain, los), PwcFunction(pair.domain, his)
        )
    raise ValueError(f"unknown pair operation {op!r}")


def pwc_extrema(pair: PwcPair) -> tuple[float, float]:
    """(min of lower values, max of upper values)."""
    return float(pair.lo.values.min()), float(pair.hi.values.max())
