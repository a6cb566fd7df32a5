"""Benchmark case registry: factorable test functions as expression DAGs.

cs1     x1*x2*(x1*(exp(x1)-exp(-x1)) + x2*(exp(x2)-exp(-x2))) on
        [-1,2]x[-2,1]; separable structure inside the inner sum.  Default
        sweep center is the domain midpoint (-0.5, 0.5).

cs2:N   Shekel's foxholes sum_k 1/(sum_i (x_i - a_ik)^2 + b_k) on [0,10]^N
        with m=10 terms, N even; unique global maximum at x_i = 4.
        Default center (4,...,4).

cs3     The two-dimensional "peaks" surface on [-3,3]^2, a sum of three
        scaled Gaussians times polynomials; global maximum near
        (-0.0106, 1.5803), which is the default center.

ridge:f f(x1+x2) for f in {sqr, abs, tanh} (tanh on [-0.5,1]^2, others on
        [-1,2]^2); exercised by the convergence studies around chosen
        centers.

mlp     A feedforward ReLU surrogate, either the bundled seeded random
        2x10x10x1 net or any weights JSON (see dag.load_mlp).

Range oracles: full tensor grids for n <= 3; for larger n a seeded
Monte-Carlo scan plus multi-start local polish (L-BFGS-B) of both extrema,
which exploits the smoothness of the Shekel sum; the polish starts include
the global maximizer pattern.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize

from .dag import ExprBuilder, ExprNode, eval_real, mlp_to_dag, random_relu_mlp, load_mlp, MlpModel
from .errors import SuprelaxError
from .intervals import Box, Interval
from .unary import ABS, INV, SQR, TANH

MLP_DEFAULT_SEED = 20240

SHEKEL_BETA = np.array([0.1, 0.2, 0.2, 0.4, 0.4, 0.6, 0.3, 0.7, 0.5, 0.5])
# rows indexed by coordinate parity (1-based odd / even coordinates)
SHEKEL_ALPHA_ODD = np.array([4.0, 1.0, 8.0, 6.0, 7.0, 9.0, 3.0, 1.0, 2.0, 3.6])
SHEKEL_ALPHA_EVEN = np.array([4.0, 1.0, 8.0, 6.0, 3.0, 2.0, 5.0, 8.0, 6.0, 7.0])


@dataclass(frozen=True)
class ShekelParams:
    n: int
    m: int = 10

    def __post_init__(self):
        if self.n < 2 or self.n % 2 != 0:
            raise ValueError("Shekel dimension must be even and >= 2")

    @property
    def alpha(self) -> np.ndarray:
        """(n, m) matrix: row i holds the foxhole coordinates a_{i,k}."""
        rows = [
            SHEKEL_ALPHA_ODD if (i % 2 == 0) else SHEKEL_ALPHA_EVEN
            for i in range(self.n)
        ]
        return np.stack(rows)

    @property
    def beta(self) -> np.ndarray:
        return SHEKEL_BETA[: self.m].copy()

    def maximizer(self) -> np.ndarray:
        return np.full(self.n, 4.0)


@dataclass(frozen=True)
class CaseSpec:
    case_id: str
    box: Box
    builder: ExprBuilder
    root: ExprNode
    default_center: tuple
    model: Optional[MlpModel] = None

    @property
    def dim(self) -> int:
        return self.box.n

    def f(self, x):
        return eval_real(self.root, x)


def _build_cs1() -> CaseSpec:
    box = Box.from_bounds([(-1.0, 2.0), (-2.0, 1.0)])
    eb = ExprBuilder(2)

    def stretched(x):
        # x*(exp(x) - exp(-x))
        grow = eb.exp(x)
        decay = eb.exp(eb.neg(x))
        return eb.mul(x, eb.sub(grow, decay))

    x1, x2 = eb.var(0), eb.var(1)
    inner = eb.add(stretched(x1), stretched(x2))
    root = eb.mul(eb.mul(x1, x2), inner)
    return CaseSpec("cs1", box, eb, root, (-0.5, 0.5))


def _build_cs2(n: int) -> CaseSpec:
    params = ShekelParams(n)
    box = Box.from_bounds([(0.0, 10.0)] * n)
    eb = ExprBuilder(n)
    xs = [eb.var(i) for i in range(n)]
    alpha = params.alpha
    terms = []
    for k in range(params.m):
        dist = eb.sum(
            [eb.unary(SQR, eb.affine(xs[i], 1.0, -alpha[i, k])) for i in range(n)]
        )
        denom = eb.affine(dist, 1.0, float(params.beta[k]))
        terms.append(eb.unary(INV, denom))
    root = eb.sum(terms)
    return CaseSpec(f"cs2:{n}", box, eb, root, tuple(params.maximizer()))


def _build_cs3() -> CaseSpec:
    box = Box.from_bounds([(-3.0, 3.0), (-3.0, 3.0)])
    eb = ExprBuilder(2)
    x1, x2 = eb.var(0), eb.var(1)
    sq1 = eb.unary(SQR, x1)
    sq2 = eb.unary(SQR, x2)
    n_sq1 = eb.neg(sq1)

    # 3 (1-x1)^2 exp(-x1^2 - (x2+1)^2)
    bump1 = eb.mul(
        eb.affine(eb.unary(SQR, eb.affine(x1, -1.0, 1.0)), 3.0, 0.0),
        eb.exp(eb.sub(n_sq1, eb.unary(SQR, eb.affine(x2, 1.0, 1.0)))),
    )
    # -10 (x1/5 - x1^3 - x2^5) exp(-x1^2 - x2^2)
    poly = eb.sub(eb.sub(eb.affine(x1, 0.2, 0.0), eb.pow(x1, 3)), eb.pow(x2, 5))
    bump2 = eb.mul(
        eb.affine(poly, -10.0, 0.0), eb.exp(eb.sub(n_sq1, sq2))
    )
    # -(1/3) exp(-(x1+1)^2 - x2^2)
    bump3 = eb.affine(
        eb.exp(eb.sub(eb.neg(eb.unary(SQR, eb.affine(x1, 1.0, 1.0))), sq2)),
        -1.0 / 3.0,
        0.0,
    )
    root = eb.sum([bump1, bump2, bump3])
    return CaseSpec("cs3", box, eb, root, (-0.0106, 1.5803))


_RIDGE_SPECS = {
    "sqr": (SQR, [(-1.0, 2.0), (-1.0, 2.0)]),
    "abs": (ABS, [(-1.0, 2.0), (-1.0, 2.0)]),
    "tanh": (TANH, [(-0.5, 1.0), (-0.5, 1.0)]),
}


def _build_ridge(profile: str) -> CaseSpec:
    if profile not in _RIDGE_SPECS:
        raise SuprelaxError(
            f"unknown ridge profile {profile!r}; choose from {sorted(_RIDGE_SPECS)}"
        )
    phi, bounds = _RIDGE_SPECS[profile]
    box = Box.from_bounds(bounds)
    eb = ExprBuilder(2)
    root = eb.unary(phi, eb.add(eb.var(0), eb.var(1)))
    return CaseSpec(f"ridge:{profile}", box, eb, root, tuple(d.mid for d in box.dims))


def _build_mlp(path: Optional[str]) -> CaseSpec:
    if path is None or path == "":
        model = random_relu_mlp(MLP_DEFAULT_SEED)
        case_id = "mlp"
    else:
        model = load_mlp(path)
        case_id = f"mlp:{path}"
    eb, root = mlp_to_dag(model)
    if isinstance(root, list):
        raise SuprelaxError("sweeps need a single-output network")
    return CaseSpec(
        case_id, model.input_box, eb, root, model.input_box.midpoint(), model
    )


def get_case(case_id: str) -> CaseSpec:
    """Resolve a case id: cs1 | cs2:<n> | cs3 | ridge:<profile> | mlp[:path]."""
    if case_id == "cs1":
        return _build_cs1()
    if case_id == "cs3":
        return _build_cs3()
    if case_id.startswith("cs2"):
        parts = case_id.split(":")
        n = int(parts[1]) if len(parts) > 1 else 2
        return _build_cs2(n)
    if case_id.startswith("ridge:"):
        return _build_ridge(case_id.split(":", 1)[1])
    if case_id == "mlp" or case_id.startswith("mlp:"):
        parts = case_id.split(":", 1)
        return _build_mlp(parts[1] if len(parts) > 1 else None)
    raise SuprelaxError(f"unknown case {case_id!r}")


# ---------------------------------------------------------------------------
# range oracles


def grid_points(box: Box, per_dim: int) -> np.ndarray:
    axes = [np.linspace(d.lo, d.hi, per_dim) for d in box.dims]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def _chunked_minmax(case: CaseSpec, pts: np.ndarray, chunk: int = 200_000):
    lo = np.inf
    hi = -np.inf
    arg_lo = None
    arg_hi = None
    for start in range(0, pts.shape[0], chunk):
        vals = case.f(pts[start : start + chunk])
        i_lo = int(np.argmin(vals))
        i_hi = int(np.argmax(vals))
        if vals[i_lo] < lo:
            lo = float(vals[i_lo])
            arg_lo = pts[start + i_lo]
        if vals[i_hi] > hi:
            hi = float(vals[i_hi])
            arg_hi = pts[start + i_hi]
    return lo, hi, arg_lo, arg_hi


def _polish(case: CaseSpec, box: Box, x0: np.ndarray, sign: float) -> float:
    bounds = [(d.lo, d.hi) for d in box.dims]

    def fun(x):
        return sign * float(case.f(x))

    res = minimize(fun, x0, method="L-BFGS-B", bounds=bounds)
    return sign * float(res.fun)


def oracle_range(
    case: CaseSpec, box: Box, grid_per_dim: int = 1001, mc_samples: int = 100_000, seed: int = 0
) -> Interval:
    """Near-exact range of the case function on a box.

    Dense tensor grid for n <= 3; otherwise a seeded Monte-Carlo scan with
    local polish of both extrema (plus the case's default center as an
    extra polish start)."""
    if box.n <= 3:
        lo, hi, _, _ = _chunked_minmax(case, grid_points(box, grid_per_dim))
        return Interval(lo, hi)
    rng = np.random.default_rng(seed)
    lows = np.array([d.lo for d in box.dims])
    widths = np.array([d.width for d in box.dims])
    pts = lows + widths * rng.random((mc_samples, box.n))
    center = np.clip(np.asarray(case.default_center), lows, lows + widths)
    pts = np.vstack([pts, center.reshape(1, -1)])
    lo, hi, arg_lo, arg_hi = _chunked_minmax(case, pts)
    lo = min(lo, _polish(case, box, arg_lo, 1.0))
    hi = max(hi, _polish(case, box, arg_hi, -1.0))
    hi = max(hi, _polish(case, box, center, -1.0))
    return Interval(lo, hi)
