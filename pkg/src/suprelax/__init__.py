"""Separable relaxations of factorable functions over interval boxes."""

from ._backend import BACKEND
from .intervals import Box, Interval, box_contract, iv_add, iv_div, iv_extend, iv_mul, iv_neg, iv_scale, iv_sub
from .pwl import PwlFunction, pwl_add, pwl_affine, pwl_compose_bracket, pwl_eval, pwl_extrema, pwl_simplify, pwl_truncate
from .pwc import PwcFunction, PwcPair, pwc_apply, pwc_extrema, pwc_variable
from .relax import (
    CompositionContext,
    SupRelax,
    sr_add,
    sr_affine,
    sr_compose,
    sr_div,
    sr_eval_over,
    sr_eval_under,
    sr_intersect,
    sr_max,
    sr_min,
    sr_mul,
    sr_range,
    sr_relu,
    sr_variable,
)
from .unary import CATALOG, UnaryFuncSpec, dc_terms, max_const, min_const, pow_int, segment

__all__ = [
    "BACKEND",
    "Box",
    "Interval",
    "PwcFunction",
    "PwcPair",
    "PwlFunction",
    "SupRelax",
    "CompositionContext",
    "UnaryFuncSpec",
    "CATALOG",
    "box_contract",
    "dc_terms",
    "iv_add",
    "iv_div",
    "iv_extend",
    "iv_mul",
    "iv_neg",
    "iv_scale",
    "iv_sub",
    "max_const",
    "min_const",
    "pow_int",
    "pwc_apply",
    "pwc_extrema",
    "pwc_variable",
    "pwl_add",
    "pwl_affine",
    "pwl_compose_bracket",
    "pwl_eval",
    "pwl_extrema",
    "pwl_simplify",
    "pwl_truncate",
    "segment",
    "sr_add",
    "sr_affine",
    "sr_compose",
    "sr_div",
    "sr_eval_over",
    "sr_eval_under",
    "sr_intersect",
    "sr_max",
    "sr_min",
    "sr_mul",
    "sr_range",
    "sr_relu",
    "sr_variable",
]
