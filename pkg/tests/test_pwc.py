import numpy as np
import pytest

from suprelax.errors import PartitionMismatchError
from suprelax.intervals import Interval
from suprelax.pwc import (
    PwcFunction,
    PwcPair,
    pwc_apply,
    pwc_eval,
    pwc_extrema,
    pwc_variable,
)
from suprelax.unary import SQR


def test_variable_cells_are_subintervals():
    pair = pwc_variable(Interval(0, 1), 4)
    cells = pair.values
    expected = [(0, 0.25), (0.25, 0.5), (0.5, 0.75), (0.75, 1.0)]
    for cell, (lo, hi) in zip(cells, expected):
        assert cell.lo == pytest.approx(lo)
        assert cell.hi == pytest.approx(hi)
    assert pwc_extrema(pair) == (0.0, 1.0)


def test_compose_sqr_cell_with_interior_minimum():
    pair = PwcPair(
        PwcFunction(Interval(0, 1), np.array([-1.0])),
        PwcFunction(Interval(0, 1), np.array([0.0])),
    )
    out = pwc_apply(pair, "compose", SQR)
    assert out.values[0].lo == pytest.approx(0.0)
    assert out.values[0].hi == pytest.approx(1.0)


def test_add_identity_encodings():
    a = pwc_variable(Interval(0, 1), 4)
    out = pwc_apply(a, "add", a)
    expected = [(0.0, 0.5), (0.5, 1.0), (1.0, 1.5), (1.5, 2.0)]
    for cell, (lo, hi) in zip(out.values, expected):
        assert cell.lo == pytest.approx(lo)
        assert cell.hi == pytest.approx(hi)


def test_affine_negative_swaps_sides():
    pair = pwc_variable(Interval(0, 1), 2)
    out = pwc_apply(pair, "affine", -2.0, 1.0)
    assert pwc_extrema(out) == (-1.0, 1.0)
    assert np.all(out.lo.values <= out.hi.values)


def test_extrema_matches_scan(rng):
    for _ in range(50):
        n = int(rng.integers(1, 12))
        lo = rng.uniform(-2, 2, size=n)
        hi = lo + rng.uniform(0, 1, size=n)
        pair = PwcPair(
            PwcFunction(Interval(0, 1), lo), PwcFunction(Interval(0, 1), hi)
        )
        assert pwc_extrema(pair) == (lo.min(), hi.max())


def test_sqr_composition_across_sign_change():
    pair = pwc_variable(Interval(-1, 1), 2)
    out = pwc_apply(pair, "compose", SQR)
    assert pwc_extrema(out) == (0.0, 1.0)


def test_partition_mismatch_raises():
    a = pwc_variable(Interval(0, 1), 4)
    b = pwc_variable(Interval(0, 1), 8)
    with pytest.raises(PartitionMismatchError):
        pwc_apply(a, "add", b)


def test_eval_cell_lookup():
    f = PwcFunction(Interval(0, 1), np.array([1.0, 2.0, 3.0, 4.0]))
    xs = np.array([0.1, 0.3, 0.6, 0.99])
    assert np.allclose(pwc_eval(f, xs), [1, 2, 3, 4])
    with pytest.raises(ValueError):
        pwc_eval(f, 1.5)
