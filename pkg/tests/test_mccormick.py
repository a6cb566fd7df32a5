import math

import numpy as np
import pytest

from suprelax.cases import get_case
from suprelax.dag import eval_mccormick
from suprelax.intervals import Box, Interval
from suprelax.mccormick import envelope, mc_add, mc_affine, mc_compose, mc_const, mc_mul, mc_var
from suprelax.unary import ABS, EXP, SQR, TANH, max_const, pow_int

UNIT_BOX = Box.from_bounds([(0.0, 1.0), (0.0, 1.0)])


def test_bilinear_at_midpoint():
    pt = np.array([[0.5, 0.5]])
    w = mc_mul(mc_var(0, UNIT_BOX, pt), mc_var(1, UNIT_BOX, pt))
    assert w.cv[0] == pytest.approx(0.0)
    assert w.cc[0] == pytest.approx(0.5)


def test_exp_composition_point_values():
    box = Box.from_bounds([(0.0, 1.0)])
    pt = np.array([[0.5]])
    v = mc_compose(mc_var(0, box, pt), EXP)
    assert v.cv[0] == pytest.approx(math.exp(0.5))
    assert v.cc[0] == pytest.approx(1.0 + (math.e - 1.0) * 0.5)


def test_add_is_exact_for_variables():
    pt = np.array([[0.5, 0.5]])
    s = mc_add(mc_var(0, UNIT_BOX, pt), mc_var(1, UNIT_BOX, pt))
    assert s.cv[0] == pytest.approx(1.0)
    assert s.cc[0] == pytest.approx(1.0)
    assert np.allclose(s.scv, [[1.0, 1.0]])


def test_affine_negative_swaps_sides():
    pt = np.array([[0.25, 0.75]])
    v = mc_mul(mc_var(0, UNIT_BOX, pt), mc_var(1, UNIT_BOX, pt))
    w = mc_affine(v, -2.0, 1.0)
    assert w.cv[0] == pytest.approx(-2.0 * v.cc[0] + 1.0)
    assert w.cc[0] == pytest.approx(-2.0 * v.cv[0] + 1.0)
    assert w.iv.lo == pytest.approx(-2.0 * v.iv.hi + 1.0)


def test_envelope_one_inflection_tanh_and_cubic():
    env = envelope(TANH, Interval(-1.0, 2.0))
    zs = np.linspace(-1, 2, 501)
    vals = np.tanh(zs)
    assert np.all(np.asarray(env.vex(zs)) <= vals + 1e-10)
    assert np.all(np.asarray(env.cave(zs)) >= vals - 1e-10)

    cubic = pow_int(3)
    env = envelope(cubic, Interval(-1.0, 2.0))
    zs = np.linspace(-1, 2, 501)
    vals = zs**3
    assert np.all(np.asarray(env.vex(zs)) <= vals + 1e-10)
    assert np.all(np.asarray(env.cave(zs)) >= vals - 1e-10)
    # the known tangency of the cubic envelope on [-1, 2]: at z = 0.5 the
    # line from (-1, -1) touches z^3
    assert env.vex(0.5) == pytest.approx(0.125, abs=1e-9)


def test_envelope_kinked_profiles():
    env = envelope(ABS, Interval(-1.0, 2.0))
    assert env.zmin == pytest.approx(0.0, abs=1e-10)
    env = envelope(max_const(0.0), Interval(-1.0, 2.0))
    assert env.zmin == -1.0
    zs = np.linspace(-1, 2, 301)
    assert np.all(np.asarray(env.cave(zs)) >= np.maximum(zs, 0.0) - 1e-12)


def _sample(case, rng, m):
    lows = np.array([d.lo for d in case.box.dims])
    widths = np.array([d.width for d in case.box.dims])
    return lows + widths * rng.random((m, case.dim))


@pytest.mark.parametrize("case_id", ["cs1", "cs3"])
def test_validity_on_case_studies(case_id, rng):
    case = get_case(case_id)
    pts = _sample(case, rng, 10_000)
    f = case.f(pts)
    val = eval_mccormick(case.root, case.box, pts)
    scale = 1.0 + np.abs(f)
    assert np.max((val.cv - f) / scale) <= 1e-8
    assert np.max((f - val.cc) / scale) <= 1e-8


@pytest.mark.parametrize("case_id", ["cs1", "cs3"])
def test_relaxation_convexity_midpoint(case_id, rng):
    case = get_case(case_id)
    x = _sample(case, rng, 1000)
    y = _sample(case, rng, 1000)
    mid = 0.5 * (x + y)
    vx = eval_mccormick(case.root, case.box, x)
    vy = eval_mccormick(case.root, case.box, y)
    vm = eval_mccormick(case.root, case.box, mid)
    assert np.all(vm.cv <= 0.5 * (vx.cv + vy.cv) + 1e-10)
    assert np.all(vm.cc >= 0.5 * (vx.cc + vy.cc) - 1e-10)


@pytest.mark.parametrize("case_id", ["cs1", "cs3"])
def test_subgradient_planes(case_id, rng):
    case = get_case(case_id)
    x = _sample(case, rng, 1000)
    y = _sample(case, rng, 1000)
    vx = eval_mccormick(case.root, case.box, x)
    vy = eval_mccormick(case.root, case.box, y)
    lin = np.sum(vx.scv * (y - x), axis=1)
    assert np.all(vy.cv >= vx.cv + lin - 1e-8)
    lin = np.sum(vx.scc * (y - x), axis=1)
    assert np.all(vy.cc <= vx.cc + lin + 1e-8)


def test_cut_keeps_cv_above_interval():
    box = Box.from_bounds([(-1.0, 1.0)])
    pts = np.linspace(-1, 1, 21).reshape(-1, 1)
    v = mc_compose(mc_var(0, box, pts), SQR)
    assert np.all(v.cv >= v.iv.lo - 1e-12)
    assert np.all(v.cc <= v.iv.hi + 1e-12)


def test_const_and_subgradient_free_mode():
    v = mc_const(2.5, UNIT_BOX, 3)
    assert v.iv == Interval(2.5, 2.5)
    pt = np.array([[0.5, 0.5]])
    w = mc_var(0, UNIT_BOX, pt, with_subgradients=False)
    assert w.scv.shape == (1, 0)
    prod = mc_mul(w, mc_var(1, UNIT_BOX, pt, with_subgradients=False))
    assert prod.cv[0] == pytest.approx(0.0)
