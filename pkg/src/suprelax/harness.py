"""Convergence-measurement harness: sweeps, error metrics, slope fits.

A sweep contracts a case's box toward a center through a log-spaced
schedule of ratios rho, rebuilds the chosen relaxation on every contracted
box, and records the pointwise under/over estimation errors (sup-norm over
a sample set), the Hausdorff excess (inclusion width minus a dense-grid
range width), the two ranges and the construction wall time.  Fitting
log(error) against log(rho) over a window yields the empirical
convergence order.

Sampling: full tensor grids (default 33 points per axis) for n <= 3,
seeded Monte-Carlo batches above.  McCormick estimators are re-evaluated
at every sample point since they are not known in closed form; their
inclusion range is likewise taken as [min cv, max cc] over the dense
oracle grid.  Wall times are measured once per row and are the only
nondeterministic CSV column.
"""

from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np

from .cases import CaseSpec, get_case, grid_points, oracle_range
from .dag import eval_interval, eval_mccormick, eval_sup
from .errors import SuprelaxError
from .intervals import Box, Interval, box_contract
from .relax import SupRelax, sr_eval_over, sr_eval_under

CSV_HEADER = "rho,err_under,err_over,haus_excess,relax_lo,relax_hi,oracle_lo,oracle_hi,wall_us"

VALIDITY_REL_TOL = 1e-8


@dataclass(frozen=True)
class ArithSpec:
    """Parsed arithmetic selector: pwl:<n_ini> | pwc:<n_grid> |
    mccormick | interval."""

    kind: str
    param: int = 0

    @staticmethod
    def parse(text: str) -> "ArithSpec":
        parts = text.split(":")
        kind = parts[0]
        if kind in ("pwl", "pwc"):
            if len(parts) != 2:
                raise SuprelaxError(f"arithmetic {text!r} needs a partition size")
            param = int(parts[1])
            if param < 1:
                raise SuprelaxError("partition size must be >= 1")
            return ArithSpec(kind, param)
        if kind in ("mccormick", "interval") and len(parts) == 1:
            return ArithSpec(kind)
        raise SuprelaxError(f"unknown arithmetic {text!r}")

    def __str__(self):
        if self.kind in ("pwl", "pwc"):
            return f"{self.kind}:{self.param}"
        return self.kind


@dataclass(frozen=True)
class SweepConfig:
    case_id: str
    arith: ArithSpec
    center: tuple
    rho_min: float = 1e-5
    rho_count: int = 25
    grid_m: int = 33
    mc_samples: int = 100_000
    oracle_grid: int = 1001
    seed: int = 0
    out_path: Optional[str] = None

    def __post_init__(self):
        if not (0.0 < self.rho_min <= 1.0):
            raise SuprelaxError("rho_min must lie in (0, 1]")
        if self.rho_count < 1:
            raise SuprelaxError("rho_count must be >= 1")

    def rho_schedule(self) -> np.ndarray:
        """Log-spaced ratios from 1 down to rho_min (decreasing)."""
        if self.rho_count == 1:
            return np.array([1.0])
        return np.logspace(0.0, math.log10(self.rho_min), self.rho_count)


@dataclass(frozen=True)
class SweepRow:
    rho: float
    err_under: float
    err_over: float
    haus_excess: float
    relax_lo: float
    relax_hi: float
    oracle_lo: float
    oracle_hi: float
    wall_us: float

    @property
    def err_max(self) -> float:
        """Pointwise estimation error: the worse of the two sup gaps."""
        return max(self.err_under, self.err_over)


@dataclass(frozen=True)
class SlopeFit:
    slope: Optional[float]
    r2: Optional[float]
    n_rows: int
    exact: bool = False


@dataclass
class ConvergenceReport:
    case_id: str
    arith: str
    center: tuple
    rows: list = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows])

    def fit(self, window: tuple, field_name: str = "err_max") -> SlopeFit:
        """Empirical convergence order over a rho window."""
        return slope_fit(self.rows, window, field_name)

    def to_csv(self, include_header: bool = True) -> str:
        buf = io.StringIO()
        if include_header:
            buf.write(CSV_HEADER + "\n")
        for r in self.rows:
            buf.write(
                ",".join(
                    [
                        repr(r.rho),
                        repr(r.err_under),
                        repr(r.err_over),
                        repr(r.haus_excess),
                        repr(r.relax_lo),
                        repr(r.relax_hi),
                        repr(r.oracle_lo),
                        repr(r.oracle_hi),
                        str(int(round(r.wall_us))),
                    ]
                )
                + "\n"
            )
        return buf.getvalue()


def slope_fit(rows, window: tuple, field_name: str = "err_under") -> SlopeFit:
    """Least-squares slope of log(error) vs log(rho) over a rho window.

    Rows whose error is zero (exact estimation) are dropped; if none are
    positive the fit reports the exact sentinel instead of a slope."""
    lo, hi = window
    picked = [
        (r.rho, getattr(r, field_name))
        for r in rows
        if lo <= r.rho <= hi
    ]
    if not picked:
        raise SuprelaxError(f"no sweep rows inside window [{lo}, {hi}]")
    positive = [(rho, err) for rho, err in picked if err > 0.0]
    if not positive:
        return SlopeFit(None, None, 0, exact=True)
    if len(positive) < 4:
        raise SuprelaxError(
            f"need >= 4 rows with positive error in the window, got {len(positive)}"
        )
    lx = np.log(np.array([rho for rho, _ in positive]))
    ly = np.log(np.array([err for _, err in positive]))
    slope, intercept = np.polyfit(lx, ly, 1)
    pred = slope * lx + intercept
    ss_res = float(np.sum((ly - pred) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return SlopeFit(float(slope), r2, len(positive))


def sample_points(case: CaseSpec, box: Box, grid_m: int, mc_samples: int, seed: int) -> np.ndarray:
    if box.n <= 3:
        return grid_points(box, grid_m)
    rng = np.random.default_rng(seed)
    lows = np.array([d.lo for d in box.dims])
    widths = np.array([d.width for d in box.dims])
    return lows + widths * rng.random((mc_samples, box.n))


def _estimator_values(case: CaseSpec, box: Box, arith: ArithSpec, pts: np.ndarray):
    """(under values, over values, relaxation range, wall microseconds)."""
    if arith.kind in ("pwl", "pwc"):
        t0 = time.perf_counter()
        F = eval_sup(case.root, box, arith.param, arith.kind)
        wall = (time.perf_counter() - t0) * 1e6
        return sr_eval_under(F, pts), sr_eval_over(F, pts), F.cached_range, wall
    if arith.kind == "mccormick":
        center = np.array([d.mid for d in box.dims]).reshape(1, -1)
        t0 = time.perf_counter()
        eval_mccormick(case.root, box, center)
        wall = (time.perf_counter() - t0) * 1e6
        val = eval_mccormick(case.root, box, pts)
        return val.cv, val.cc, None, wall
    if arith.kind == "interval":
        t0 = time.perf_counter()
        rng = eval_interval(case.root, box)
        wall = (time.perf_counter() - t0) * 1e6
        m = pts.shape[0]
        return np.full(m, rng.lo), np.full(m, rng.hi), rng, wall
    raise SuprelaxError(f"unknown arithmetic {arith}")


@lru_cache(maxsize=512)
def _oracle_range_cached(case_id, bounds_key, oracle_grid, mc_samples, seed):
    case = get_case(case_id)
    box = Box.from_bounds(bounds_key)
    return oracle_range(case, box, oracle_grid, mc_samples, seed)


def _oracle_for(case: CaseSpec, box: Box, cfg: SweepConfig) -> Interval:
    key = tuple((d.lo, d.hi) for d in box.dims)
    return _oracle_range_cached(
        case.case_id, key, cfg.oracle_grid, cfg.mc_samples, cfg.seed
    )


def pointwise_error(case: CaseSpec, box: Box, arith: ArithSpec, pts: np.ndarray):
    """(sup |f - under|, sup |f - over|) over the sample set."""
    under, over, _, _ = _estimator_values(case, box, arith, pts)
    f = case.f(pts)
    return float(np.max(np.abs(f - under))), float(np.max(np.abs(over - f)))


def _mccormick_inclusion(case: CaseSpec, box: Box, oracle_grid: int, mc_samples: int, seed: int) -> Interval:
    """[min cv, max cc] recomputed over the dense oracle sample set."""
    pts = sample_points(case, box, oracle_grid, mc_samples, seed)
    lo = np.inf
    hi = -np.inf
    chunk = 100_000
    for start in range(0, pts.shape[0], chunk):
        val = eval_mccormick(
            case.root, box, pts[start : start + chunk], with_subgradients=False
        )
        lo = min(lo, float(val.cv.min()))
        hi = max(hi, float(val.cc.max()))
    return Interval(lo, hi)


def hausdorff_excess(case: CaseSpec, box: Box, arith: ArithSpec, cfg: SweepConfig):
    """(inclusion width - oracle range width, inclusion, oracle)."""
    oracle = _oracle_for(case, box, cfg)
    if arith.kind in ("pwl", "pwc"):
        F = eval_sup(case.root, box, arith.param, arith.kind)
        incl = F.cached_range
    elif arith.kind == "interval":
        incl = eval_interval(case.root, box)
    elif arith.kind == "mccormick":
        incl = _mccormick_inclusion(
            case, box, cfg.oracle_grid, cfg.mc_samples, cfg.seed
        )
    else:
        raise SuprelaxError(f"unknown arithmetic {arith}")
    return incl.width - oracle.width, incl, oracle


def run_case(cfg: SweepConfig) -> ConvergenceReport:
    """Execute the sweep and optionally write the CSV."""
    case = get_case(cfg.case_id)
    center = tuple(float(c) for c in cfg.center)
    if len(center) != case.dim:
        raise SuprelaxError(
            f"center has {len(center)} coordinates, case {case.case_id} needs {case.dim}"
        )
    report = ConvergenceReport(case.case_id, str(cfg.arith), center)
    for rho in cfg.rho_schedule():
        box = box_contract(case.box, float(rho), center)
        pts = sample_points(case, box, cfg.grid_m, cfg.mc_samples, cfg.seed)
        under, over, incl, wall = _estimator_values(case, box, cfg.arith, pts)
        f = case.f(pts)
        err_under = float(np.max(np.abs(f - under)))
        err_over = float(np.max(np.abs(over - f)))
        oracle = _oracle_for(case, box, cfg)
        if incl is None:
            incl = _mccormick_inclusion(
                case, box, cfg.oracle_grid, cfg.mc_samples, cfg.seed
            )
        report.rows.append(
            SweepRow(
                float(rho),
                err_under,
                err_over,
                incl.width - oracle.width,
                incl.lo,
                incl.hi,
                oracle.lo,
                oracle.hi,
                wall,
            )
        )
    if cfg.out_path:
        with open(cfg.out_path, "w") as fh:
            fh.write(report.to_csv())
    return report


def validity_check(
    case: CaseSpec,
    box: Box,
    arith: ArithSpec,
    n_samples: int = 10_000,
    seed: int = 0,
):
    """Max scaled bracketing violation over uniform samples.

    Returns (max scaled violation, PASS flag); the violation at a point is
    max(under - f, f - over, 0) / (1 + |f|)."""
    rng = np.random.default_rng(seed)
    lows = np.array([d.lo for d in box.dims])
    widths = np.array([d.width for d in box.dims])
    pts = lows + widths * rng.random((n_samples, box.n))
    under, over, _, _ = _estimator_values(case, box, arith, pts)
    f = case.f(pts)
    viol = np.maximum(np.maximum(under - f, f - over), 0.0) / (1.0 + np.abs(f))
    worst = float(viol.max())
    return worst, worst <= VALIDITY_REL_TOL


def bench(case: CaseSpec, arith: ArithSpec, repeats: int = 5):
    """Best-of-k wall time of one relaxation construction, in microseconds."""
    box = case.box
    times = []
    for _ in range(repeats):
        if arith.kind in ("pwl", "pwc"):
            t0 = time.perf_counter()
            eval_sup(case.root, box, arith.param, arith.kind)
        elif arith.kind == "mccormick":
            center = np.array([d.mid for d in box.dims]).reshape(1, -1)
            t0 = time.perf_counter()
            eval_mccormick(case.root, box, center)
        elif arith.kind == "interval":
            t0 = time.perf_counter()
            eval_interval(case.root, box)
        else:
            raise SuprelaxError(f"unknown arithmetic {arith}")
        times.append((time.perf_counter() - t0) * 1e6)
    return {
        "case": case.case_id,
        "arith": str(arith),
        "best_us": min(times),
        "repeats": repeats,
    }


def format_range_output(case_id: str, arith_text: str, cfg: Optional[SweepConfig] = None) -> str:
    """The `suprelax range` report: relaxation and oracle ranges."""
    case = get_case(case_id)
    arith = ArithSpec.parse(arith_text)
    if cfg is None:
        cfg = SweepConfig(case_id, arith, tuple(case.default_center))
    excess, incl, oracle = hausdorff_excess(case, case.box, arith, cfg)
    return (
        f"case={case.case_id} arith={arith} "
        f"relax=[{incl.lo!r}, {incl.hi!r}] "
        f"oracle=[{oracle.lo!r}, {oracle.hi!r}] "
        f"excess={excess!r}"
    )
