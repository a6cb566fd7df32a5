"""Thin expression bindings over the core library.

A Workspace fixes the dimension and hash-conses the underlying expression
graph; BoundExpr handles wrap graph nodes and overload the usual operators.
Range and estimator evaluation delegate straight to the core (same code
path), so binding results are numerically identical to the library's.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from suprelax.dag import ExprBuilder, eval_interval, eval_real, eval_sup
from suprelax.harness import ArithSpec, SweepConfig, format_range_output
from suprelax.intervals import Box, Interval
from suprelax.relax import sr_eval_over, sr_eval_under, sr_range
from suprelax.unary import CATALOG, max_const, min_const, pow_int


class BindingError(Exception):
    pass


class Workspace:
    """Expression factory for a fixed dimension."""

    def __init__(self, dim: int):
        self._builder = ExprBuilder(dim)
        self.dim = dim

    def var(self, i: int) -> "BoundExpr":
        return BoundExpr(self, self._builder.var(i))

    def const(self, c: float) -> "BoundExpr":
        return BoundExpr(self, self._builder.const(c))

    def _wrap(self, node) -> "BoundExpr":
        return BoundExpr(self, node)


@dataclass(frozen=True)
class BoundExpr:
    """Opaque handle to one expression node of a workspace."""

    workspace: Workspace
    node: object

    def _peer(self, other) -> "BoundExpr":
        if isinstance(other, (int, float)):
            return self.workspace.const(float(other))
        if not isinstance(other, BoundExpr):
            raise BindingError(f"cannot combine with {type(other).__name__}")
        if other.workspace is not self.workspace:
            raise BindingError("operands belong to different workspaces")
        return other

    @property
    def _eb(self):
        return self.workspace._builder

    def __add__(self, other):
        other = self._peer(other)
        return self.workspace._wrap(self._eb.add(self.node, other.node))

    __radd__ = __add__

    def __sub__(self, other):
        other = self._peer(other)
        return self.workspace._wrap(self._eb.sub(self.node, other.node))

    def __rsub__(self, other):
        return self._peer(other).__sub__(self)

    def __mul__(self, other):
        other = self._peer(other)
        return self.workspace._wrap(self._eb.mul(self.node, other.node))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._peer(other)
        return self.workspace._wrap(self._eb.div(self.node, other.node))

    def __neg__(self):
        return self.workspace._wrap(self._eb.neg(self.node))

    def affine(self, a: float, b: float) -> "BoundExpr":
        return self.workspace._wrap(self._eb.affine(self.node, a, b))

    def pow(self, p: int) -> "BoundExpr":
        return self.workspace._wrap(self._eb.pow(self.node, p))

    def apply(self, name: str, *params) -> "BoundExpr":
        """Unary catalog application by name (exp, log, tanh, ...,
        max_const / min_const / pow with a parameter)."""
        if name == "max_const":
            phi = max_const(*params)
        elif name == "min_const":
            phi = min_const(*params)
        elif name == "pow":
            phi = pow_int(*params)
        elif name in CATALOG:
            phi = CATALOG[name]
        else:
            raise BindingError(f"unknown unary function {name!r}")
        return self.workspace._wrap(self._eb.unary(phi, self.node))

    def __getattr__(self, name):
        if name in CATALOG:
            return lambda: self.apply(name)
        raise AttributeError(name)


def _check(expr: BoundExpr, box: Box):
    if not isinstance(expr, BoundExpr):
        raise BindingError("expected a BoundExpr handle")
    if box.n != expr.workspace.dim:
        raise BindingError(
            f"box dimension {box.n} does not match workspace dimension "
            f"{expr.workspace.dim}"
        )


def bind_range(expr: BoundExpr, box: Box, arith: str = "pwl:1") -> Interval:
    """Relaxation range (or the natural interval extension)."""
    _check(expr, box)
    spec = ArithSpec.parse(arith)
    if spec.kind == "interval":
        return eval_interval(expr.node, box)
    if spec.kind in ("pwl", "pwc"):
        return sr_range(eval_sup(expr.node, box, spec.param, spec.kind))
    raise BindingError(f"range binding does not support arithmetic {arith!r}")


def bind_eval(expr: BoundExpr, box: Box, x, arith: str = "pwl:1"):
    """(under, value, over) at one point or a batch of points."""
    _check(expr, box)
    spec = ArithSpec.parse(arith)
    if spec.kind not in ("pwl", "pwc"):
        raise BindingError(f"estimator evaluation needs pwl/pwc, got {arith!r}")
    F = eval_sup(expr.node, box, spec.param, spec.kind)
    return (
        sr_eval_under(F, x),
        eval_real(expr.node, np.asarray(x, dtype=float)),
        sr_eval_over(F, x),
    )


def bind_range_report(case_id: str, arith: str, **cfg_kwargs) -> str:
    """The exact `suprelax range` report string (same code path)."""
    cfg = None
    if cfg_kwargs:
        from suprelax.cases import get_case

        case = get_case(case_id)
        cfg = SweepConfig(
            case_id, ArithSpec.parse(arith), tuple(case.default_center), **cfg_kwargs
        )
    return format_range_output(case_id, arith, cfg)
