import math
import os

import numpy as np
import pytest

from suprelax.cases import ShekelParams, get_case, oracle_range
from suprelax.cli import main as cli_main
from suprelax.errors import SuprelaxError
from suprelax.harness import (
    ArithSpec,
    SweepConfig,
    SweepRow,
    bench,
    hausdorff_excess,
    pointwise_error,
    run_case,
    sample_points,
    slope_fit,
    validity_check,
)
from suprelax.intervals import Box
from suprelax.relax import sr_affine, sr_eval_under, sr_variable


def synthetic_rows(power, coeff=1.0):
    rows = []
    for rho in np.logspace(0, -5, 21):
        err = coeff * rho**power
        rows.append(SweepRow(rho, err, err, err, 0, 0, 0, 0, 0.0))
    return rows


def test_slope_fit_exact_power_laws():
    fit = slope_fit(synthetic_rows(2.0), (1e-5, 1.0))
    assert fit.slope == pytest.approx(2.0, abs=1e-6)
    assert fit.r2 == pytest.approx(1.0, abs=1e-12)
    fit = slope_fit(synthetic_rows(1.0, 3.0), (1e-5, 1.0))
    assert fit.slope == pytest.approx(1.0, abs=1e-6)


def test_slope_fit_exact_sentinel_and_window_guard():
    rows = [SweepRow(r, 0.0, 0.0, 0.0, 0, 0, 0, 0, 0.0) for r in (1.0, 0.1, 0.01, 0.001)]
    fit = slope_fit(rows, (1e-3, 1.0))
    assert fit.exact and fit.slope is None
    with pytest.raises(SuprelaxError):
        slope_fit(synthetic_rows(2.0)[:2], (1e-9, 1e-8))


def test_arith_spec_parsing():
    assert str(ArithSpec.parse("pwl:8")) == "pwl:8"
    assert ArithSpec.parse("mccormick").kind == "mccormick"
    for bad in ("pwl", "pwc:0", "foo", "mccormick:3"):
        with pytest.raises(SuprelaxError):
            ArithSpec.parse(bad)


def test_pointwise_error_affine_is_zero():
    case = get_case("ridge:sqr")
    eb = case.builder
    root = eb.add(eb.var(0), eb.var(1))

    class AffineCase:
        case_id = "affine"
        box = case.box
        dim = 2
        root = None

        def f(self, x):
            x = np.atleast_2d(np.asarray(x, dtype=float))
            return x.sum(axis=1)

    ac = AffineCase()
    ac.root = root
    pts = sample_points(case, case.box, 17, 1000, 0)
    eu, eo = pointwise_error(ac, case.box, ArithSpec.parse("pwl:2"), pts)
    assert eu < 1e-12 and eo < 1e-12


def test_pointwise_error_example1_offdiagonal_gap():
    # relaxation of (x1+x2)^2 on [0.2,1]^2: at breakpoint coordinates the
    # overestimator reads 2*x1^2 + 2*x2^2, so the gap at the corner
    # (0.2, 1) is 2*(0.04+1) - 1.44 = 0.64 and zero on the diagonal point
    # (0.6, 0.6), which is a breakpoint of the two-segment encoding
    case = get_case("ridge:sqr")
    box = Box.from_bounds([(0.2, 1.0), (0.2, 1.0)])
    from suprelax.dag import eval_sup
    from suprelax.relax import sr_eval_over

    F = eval_sup(case.root, box, 2)
    corner = np.array([0.2, 1.0])
    over = sr_eval_over(F, corner)
    assert over - 1.44 == pytest.approx(0.64, abs=1e-12)
    mid = np.array([0.6, 0.6])
    assert sr_eval_over(F, mid) == pytest.approx(1.44, abs=1e-12)


def test_hausdorff_excess_affine_zero_and_ridge_exact():
    case = get_case("ridge:sqr")
    cfg = SweepConfig("ridge:sqr", ArithSpec.parse("pwl:2"), (0.0, 0.0), oracle_grid=301)
    excess, incl, oracle = hausdorff_excess(case, case.box, cfg.arith, cfg)
    # the square ridge tracks its range exactly
    assert excess == pytest.approx(0.0, abs=1e-9)
    assert incl.lo == pytest.approx(0.0, abs=1e-12)
    assert incl.hi == pytest.approx(16.0, abs=1e-12)


def test_shekel_params_and_maximizer():
    p = ShekelParams(6)
    assert p.alpha.shape == (6, 10)
    assert np.allclose(p.beta, [0.1, 0.2, 0.2, 0.4, 0.4, 0.6, 0.3, 0.7, 0.5, 0.5])
    case = get_case("cs2:6")
    x_star = p.maximizer()
    f_star = case.f(x_star)
    # local polish from the known optimum pattern does not improve it
    from scipy.optimize import minimize

    res = minimize(
        lambda x: -case.f(x),
        x_star,
        method="L-BFGS-B",
        bounds=[(0, 10)] * 6,
    )
    # the benchmark's maximum sits at x_i = 4 up to a sub-1e-2 shift
    assert -res.fun <= f_star + 1e-3
    assert np.allclose(res.x, 4.0, atol=1e-2)


def test_validity_check_and_injected_fault(rng):
    case = get_case("ridge:sqr")
    worst, ok = validity_check(case, case.box, ArithSpec.parse("pwl:4"), 2000, seed=3)
    assert ok and worst <= 1e-12

    # corrupting an under-summand by +1e-3 must surface as a violation
    from suprelax.dag import eval_sup
    from suprelax.relax import SupRelax
    from suprelax.pwl import pwl_affine

    F = eval_sup(case.root, case.box, 4)
    bad_under = list(F.under)
    bad_under[0] = pwl_affine(bad_under[0], 1.0, 1e-3)
    G = SupRelax(F.box, tuple(bad_under), F.over, F.cached_range)
    pts = sample_points(case, case.box, 33, 1000, 0)
    f = case.f(pts)
    viol = np.max((sr_eval_under(G, pts) - f) / (1.0 + np.abs(f)))
    assert viol == pytest.approx(1e-3, rel=0.5)


def test_run_case_deterministic_modulo_walltime(tmp_path):
    cfg = dict(
        case_id="ridge:sqr",
        arith=ArithSpec.parse("pwl:2"),
        center=(0.5, 0.5),
        rho_min=1e-3,
        rho_count=5,
        grid_m=9,
        oracle_grid=101,
        seed=7,
    )
    rep1 = run_case(SweepConfig(**cfg))
    rep2 = run_case(SweepConfig(**cfg))

    def strip_wall(report):
        return "\n".join(
            ",".join(line.split(",")[:-1]) for line in report.to_csv().splitlines()
        )

    assert strip_wall(rep1) == strip_wall(rep2)


def test_run_case_writes_csv(tmp_path):
    out = tmp_path / "sweep.csv"
    cfg = SweepConfig(
        "ridge:sqr",
        ArithSpec.parse("pwl:1"),
        (0.0, 0.0),
        rho_min=1e-2,
        rho_count=3,
        grid_m=9,
        oracle_grid=101,
        out_path=str(out),
    )
    rep = run_case(cfg)
    text = out.read_text()
    header, *lines = text.strip().splitlines()
    assert header == "rho,err_under,err_over,haus_excess,relax_lo,relax_hi,oracle_lo,oracle_hi,wall_us"
    assert len(lines) == 3
    assert all(r.haus_excess >= -1e-9 for r in rep.rows)


def test_interval_and_mccormick_rows():
    case = get_case("ridge:sqr")
    cfg = SweepConfig(
        "ridge:sqr",
        ArithSpec.parse("interval"),
        (0.0, 0.0),
        rho_count=2,
        rho_min=0.5,
        grid_m=9,
        oracle_grid=101,
    )
    rep = run_case(cfg)
    assert all(r.haus_excess >= -1e-9 for r in rep.rows)
    cfg_mc = SweepConfig(
        "ridge:sqr",
        ArithSpec.parse("mccormick"),
        (0.0, 0.0),
        rho_count=2,
        rho_min=0.5,
        grid_m=9,
        oracle_grid=101,
    )
    rep = run_case(cfg_mc)
    assert all(r.haus_excess >= -1e-9 for r in rep.rows)


def test_bench_reports_positive_times():
    for arith in ("mccormick", "pwl:2", "pwc:16"):
        info = bench(get_case("cs3"), ArithSpec.parse(arith), repeats=2)
        assert info["best_us"] > 0.0


def test_cli_check_and_exit_codes(tmp_path, capsys):
    assert cli_main(["check", "--case", "ridge:sqr", "--arith", "pwl:2", "--samples", "500"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("PASS")
    assert cli_main(["check", "--case", "nope", "--arith", "pwl:2"]) == 2
    assert cli_main(["range", "--case", "ridge:sqr", "--arith", "bad"]) == 2

    csv_path = tmp_path / "out.csv"
    code = cli_main(
        [
            "sweep", "--case", "ridge:sqr", "--arith", "pwl:1",
            "--center", "0,0", "--rho-min", "1e-2", "--rho-count", "3",
            "--grid", "9", "--oracle-grid", "51", "--out", str(csv_path),
        ]
    )
    assert code == 0 and csv_path.exists()

    assert cli_main(["bench", "--case", "ridge:sqr", "--arith", "pwl:1", "--repeats", "1"]) == 0
    assert cli_main(["range", "--case", "ridge:sqr", "--arith", "pwl:2", "--oracle-grid", "101"]) == 0
    out = capsys.readouterr().out
    assert "relax=" in out and "oracle=" in out


def test_oracle_range_matches_grid_for_small_case():
    case = get_case("ridge:sqr")
    r = oracle_range(case, case.box, grid_per_dim=501)
    assert r.lo == pytest.approx(0.0, abs=1e-4)
    assert r.hi == pytest.approx(16.0, abs=1e-9)


def test_cs2_partition_refinement_tightens_at_full_domain():
    case = get_case("cs2:2")
    pts = sample_points(case, case.box, 33, 0, 0)
    coarse = max(pointwise_error(case, case.box, ArithSpec.parse("pwl:2"), pts))
    fine = max(pointwise_error(case, case.box, ArithSpec.parse("pwl:16"), pts))
    assert fine <= coarse + 1e-12


def test_high_dimension_sweep_uses_monte_carlo():
    cfg = SweepConfig(
        "cs2:6",
        ArithSpec.parse("pwc:16"),
        (4.0,) * 6,
        rho_count=2,
        rho_min=0.1,
        mc_samples=2000,
        seed=1,
    )
    rep = run_case(cfg)
    assert len(rep.rows) == 2
    assert all(r.haus_excess >= -1e-9 for r in rep.rows)
    assert all(r.err_under >= 0 and r.err_over >= 0 for r in rep.rows)


def test_mlp_sweep_smoke():
    cfg = SweepConfig(
        "mlp",
        ArithSpec.parse("pwl:1"),
        (0.0, 0.0),
        rho_count=2,
        rho_min=0.1,
        grid_m=9,
        oracle_grid=101,
    )
    rep = run_case(cfg)
    assert len(rep.rows) == 2
    assert all(r.haus_excess >= -1e-9 for r in rep.rows)
