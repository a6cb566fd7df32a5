"""Factorable expression DAGs and their evaluation over all arithmetics.

Nodes are hash-consed: structurally identical subexpressions share one
node, keyed by (kind, parameters, child ids).  Builders normalize powers
(p=2 becomes the square, higher p a dedicated power spec) and quotients
(g/h becomes g * inv(h)).  Evaluation is a memoized postorder walk, so
every node is computed exactly once per call, in each arithmetic:

  real        floats or numpy arrays (vectorizes over sample batches)
  interval    natural interval extension
  mccormick   McValue propagation at given points
  sup         superposition relaxation with pwl or pwc summands

Network surrogates load from a JSON file {"input_dim", "input_box",
"layers": [{"W", "b", "activation"}, ...]} with row-major W and layers
ordered input to output; affine layers build shared affine/add nodes and
relu activations compose max(., 0).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ModelError, SuprelaxError
from .intervals import Box, Interval, iv_add, iv_extend, iv_mul, iv_scale, iv_shift
from . import mccormick as mc
from . import relax as sr
from .unary import ABS, COS, EXP, INV, LOG, SIN, SQR, SQRT, TANH, UnaryFuncSpec, max_const, min_const, pow_int


@dataclass(frozen=True)
class ExprNode:
    kind: str
    children: tuple = ()
    index: int = -1
    value: float = 0.0
    a: float = 1.0
    b: float = 0.0
    phi: Optional[UnaryFuncSpec] = None
    dim: int = 0

    def __repr__(self):
        if self.kind == "var":
            return f"x{self.index}"
        if self.kind == "const":
            return f"const({self.value})"
        if self.kind == "unary":
            return f"{self.phi.name}(...)"
        return f"{self.kind}(...)"


class ExprBuilder:
    """Hash-consing combinator set for a fixed dimension."""

    def __init__(self, dim: int):
        if dim < 1:
            raise ValueError("dimension must be >= 1")
        self.dim = dim
        self._intern: dict = {}

    def _node(self, key, **kw) -> ExprNode:
        node = self._intern.get(key)
        if node is None:
            node = ExprNode(dim=self.dim, **kw)
            self._intern[key] = node
        return node

    def n_nodes(self, internal_only: bool = False) -> int:
        if not internal_only:
            return len(self._intern)
        return sum(
            1 for v in self._intern.values() if v.kind not in ("var", "const")
        )

    def var(self, i: int) -> ExprNode:
        if not 0 <= i < self.dim:
            raise ValueError(f"variable index {i} outside dimension {self.dim}")
        return self._node(("var", i), kind="var", index=i)

    def const(self, c: float) -> ExprNode:
        c = float(c)
        return self._node(("const", c), kind="const", value=c)

    def _check(self, *nodes):
        for node in nodes:
            if node.dim != self.dim:
                raise ValueError("operand dimension mismatch")

    def add(self, g: ExprNode, h: ExprNode) -> ExprNode:
        self._check(g, h)
        key = ("add",) + tuple(sorted((id(g), id(h))))
        return self._node(key, kind="add", children=(g, h))

    def affine(self, g: ExprNode, a: float, b: float) -> ExprNode:
        self._check(g)
        a, b = float(a), float(b)
        if a == 1.0 and b == 0.0:
            return g
        # collapse affine-of-affine
        if g.kind == "affine":
            return self.affine(g.children[0], a * g.a, a * g.b + b)
        return self._node(("affine", id(g), a, b), kind="affine", children=(g,), a=a, b=b)

    def mul(self, g: ExprNode, h: ExprNode) -> ExprNode:
        self._check(g, h)
        key = ("mul",) + tuple(sorted((id(g), id(h))))
        return self._node(key, kind="mul", children=(g, h))

    def div(self, g: ExprNode, h: ExprNode) -> ExprNode:
        return self.mul(g, self.unary(INV, h))

    def min2(self, g: ExprNode, h: ExprNode) -> ExprNode:
        self._check(g, h)
        key = ("min2",) + tuple(sorted((id(g), id(h))))
        return self._node(key, kind="min2", children=(g, h))

    def max2(self, g: ExprNode, h: ExprNode) -> ExprNode:
        self._check(g, h)
        key = ("max2",) + tuple(sorted((id(g), id(h))))
        return self._node(key, kind="max2", children=(g, h))

    def unary(self, phi: UnaryFuncSpec, g: ExprNode) -> ExprNode:
        self._check(g)
        return self._node(("unary", phi.name, id(g)), kind="unary", children=(g,), phi=phi)

    # convenience combinators
    def sub(self, g, h):
        return self.add(g, self.affine(h, -1.0, 0.0))

    def neg(self, g):
        return self.affine(g, -1.0, 0.0)

    def pow(self, g, p: int):
        return self.unary(SQR if p == 2 else pow_int(p), g)

    def exp(self, g):
        return self.unary(EXP, g)

    def log(self, g):
        return self.unary(LOG, g)

    def sqrt(self, g):
        return self.unary(SQRT, g)

    def tanh(self, g):
        return self.unary(TANH, g)

    def cos(self, g):
        return self.unary(COS, g)

    def sin(self, g):
        return self.unary(SIN, g)

    def abs(self, g):
        return self.unary(ABS, g)

    def relu(self, g):
        return self.unary(max_const(0.0), g)

    def sum(self, nodes):
        out = None
        for node in nodes:
            out = node if out is None else self.add(out, node)
        if out is None:
            raise ValueError("empty sum")
        return out


def _walk(root: ExprNode, visit):
    """Memoized postorder evaluation; each node visited once.

    Domain failures are re-raised with the path from the root to the
    offending node so the failing factor can be located."""
    memo: dict[int, object] = {}
    parent: dict[int, ExprNode] = {}
    stack = [(root, False)]
    while stack:
        node, ready = stack.pop()
        if id(node) in memo:
            continue
        if ready:
            try:
                memo[id(node)] = visit(node, [memo[id(c)] for c in node.children])
            except SuprelaxError as exc:
                raise type(exc)(f"{exc} [at {_node_path(node, parent)}]") from exc
        else:
            stack.append((node, True))
            for child in node.children:
                parent.setdefault(id(child), node)
                if id(child) not in memo:
                    stack.append((child, False))
    return memo[id(root)]


def _node_path(node: ExprNode, parent: dict) -> str:
    labels = []
    seen = set()
    while node is not None and id(node) not in seen:
        seen.add(id(node))
        labels.append(node.kind if node.phi is None else node.phi.name)
        node = parent.get(id(node))
    return " <- ".join(labels)


def count_nodes(root: ExprNode, internal_only: bool = False) -> int:
    seen = set()

    def visit(node, _):
        seen.add(id(node))
        return None

    _walk(root, visit)
    if not internal_only:
        return len(seen)
    count = {"n": 0}

    def visit2(node, _):
        if node.kind not in ("var", "const"):
            count["n"] += 1
        return None

    _walk(root, visit2)
    return count["n"]


def eval_real(root: ExprNode, x):
    """Real evaluation at a point (n,) or a batch (M, n)."""
    x = np.asarray(x, dtype=float)
    pts = x.reshape(1, -1) if x.ndim == 1 else x

    def visit(node, kids):
        if node.kind == "var":
            return pts[:, node.index]
        if node.kind == "const":
            return np.full(pts.shape[0], node.value)
        if node.kind == "add":
            return kids[0] + kids[1]
        if node.kind == "affine":
            return node.a * kids[0] + node.b
        if node.kind == "mul":
            return kids[0] * kids[1]
        if node.kind == "min2":
            return np.minimum(kids[0], kids[1])
        if node.kind == "max2":
            return np.maximum(kids[0], kids[1])
        if node.kind == "unary":
            return np.asarray(node.phi.eval(kids[0]), dtype=float)
        raise ValueError(f"unknown node kind {node.kind!r}")

    out = _walk(root, visit)
    return float(out[0]) if x.ndim == 1 else out


def eval_interval(root: ExprNode, box: Box) -> Interval:
    def visit(node, kids):
        if node.kind == "var":
            return box.dims[node.index]
        if node.kind == "const":
            return Interval(node.value, node.value)
        if node.kind == "add":
            return iv_add(kids[0], kids[1])
        if node.kind == "affine":
            return iv_shift(iv_scale(kids[0], node.a), node.b)
        if node.kind == "mul":
            return iv_mul(kids[0], kids[1])
        if node.kind == "min2":
            return Interval(min(kids[0].lo, kids[1].lo), min(kids[0].hi, kids[1].hi))
        if node.kind == "max2":
            return Interval(max(kids[0].lo, kids[1].lo), max(kids[0].hi, kids[1].hi))
        if node.kind == "unary":
            return iv_extend(node.phi, kids[0])
        raise ValueError(f"unknown node kind {node.kind!r}")

    return _walk(root, visit)


def eval_mccormick(
    root: ExprNode, box: Box, points, with_subgradients: bool = True
) -> mc.McValue:
    points = np.atleast_2d(np.asarray(points, dtype=float))
    m = points.shape[0]

    def relu_mc(v):
        return mc.mc_compose(v, max_const(0.0))

    def visit(node, kids):
        if node.kind == "var":
            return mc.mc_var(node.index, box, points, with_subgradients)
        if node.kind == "const":
            return mc.mc_const(node.value, box, m, with_subgradients)
        if node.kind == "add":
            return mc.mc_add(kids[0], kids[1])
        if node.kind == "affine":
            return mc.mc_affine(kids[0], node.a, node.b)
        if node.kind == "mul":
            return mc.mc_mul(kids[0], kids[1])
        if node.kind in ("min2", "max2"):
            g, h = kids
            diff = mc.mc_add(g, mc.mc_affine(h, -1.0))
            ndiff = mc.mc_affine(diff, -1.0)
            if node.kind == "max2":
                extra = mc.mc_add(relu_mc(diff), relu_mc(ndiff))
            else:
                extra = mc.mc_affine(
                    mc.mc_add(relu_mc(ndiff), relu_mc(diff)), -1.0
                )
            return mc.mc_affine(mc.mc_add(mc.mc_add(g, h), extra), 0.5)
        if node.kind == "unary":
            return mc.mc_compose(kids[0], node.phi)
        raise ValueError(f"unknown node kind {node.kind!r}")

    return _walk(root, visit)


def eval_sup(
    root: ExprNode,
    box: Box,
    n_ini: int,
    family: str = "pwl",
    product_strategy: str = "dc",
    auto_intersect: Optional[bool] = None,
    intersect_with_interval: bool = False,
) -> sr.SupRelax:
    """Superposition relaxation of the expression on the box.

    intersect_with_interval additionally clamps the final relaxation to
    the natural interval extension, making its range at least as tight as
    interval bounds (at the cost of extra truncation kinks)."""
    proto = sr.sr_variable(0, box, n_ini, family)

    def visit(node, kids):
        if node.kind == "var":
            return sr.sr_variable(node.index, box, n_ini, family)
        if node.kind == "const":
            return sr.sr_constant(box, node.value, proto)
        if node.kind == "add":
            return sr.sr_add(kids[0], kids[1])
        if node.kind == "affine":
            return sr.sr_affine(kids[0], node.a, node.b)
        if node.kind == "mul":
            return sr.sr_mul(kids[0], kids[1], product_strategy)
        if node.kind == "min2":
            return sr.sr_min(kids[0], kids[1])
        if node.kind == "max2":
            return sr.sr_max(kids[0], kids[1])
        if node.kind == "unary":
            return sr.sr_compose(kids[0], node.phi, auto_intersect=auto_intersect)
        raise ValueError(f"unknown node kind {node.kind!r}")

    out = _walk(root, visit)
    if intersect_with_interval:
        out = sr.sr_intersect(out, eval_interval(root, box))
    return out


# ---------------------------------------------------------------------------
# network surrogates


@dataclass(frozen=True)
class MlpModel:
    """Dense feedforward net: weights, biases, activations, input box."""

    weights: tuple
    biases: tuple
    activations: tuple
    input_box: Box

    @property
    def input_dim(self) -> int:
        return self.input_box.n

    def __post_init__(self):
        n_in = self.input_dim
        for li, (W, b, act) in enumerate(
            zip(self.weights, self.biases, self.activations)
        ):
            if act not in ("relu", "linear"):
                raise ModelError(f"layer {li}: unknown activation {act!r}")
            if W.ndim != 2 or W.shape[1] != n_in:
                raise ModelError(
                    f"layer {li}: weight shape {W.shape} does not chain "
                    f"from fan-in {n_in}"
                )
            if b.shape != (W.shape[0],):
                raise ModelError(f"layer {li}: bias shape {b.shape} mismatch")
            n_in = W.shape[0]

    def forward(self, x):
        """Plain forward pass, batched over rows."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        for W, b, act in zip(self.weights, self.biases, self.activations):
            x = x @ W.T + b
            if act == "relu":
                x = np.maximum(x, 0.0)
        return x


def load_mlp(path: str) -> MlpModel:
    with open(path) as fh:
        raw = json.load(fh)
    try:
        box = Box.from_bounds(raw["input_box"])
        if box.n != int(raw["input_dim"]):
            raise ModelError("input_dim disagrees with input_box length")
        weights = tuple(np.asarray(layer["W"], dtype=float) for layer in raw["layers"])
        biases = tuple(np.asarray(layer["b"], dtype=float) for layer in raw["layers"])
        acts = tuple(layer["activation"] for layer in raw["layers"])
    except KeyError as exc:
        raise ModelError(f"missing field in weights file: {exc}") from exc
    return MlpModel(weights, biases, acts, box)


def save_mlp(model: MlpModel, path: str):
    payload = {
        "input_dim": model.input_dim,
        "input_box": [[d.lo, d.hi] for d in model.input_box.dims],
        "layers": [
            {"W": W.tolist(), "b": b.tolist(), "activation": act}
            for W, b, act in zip(model.weights, model.biases, model.activations)
        ],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh)


def random_relu_mlp(seed: int, layer_sizes=(2, 10, 10, 1), box=None) -> MlpModel:
    """Seeded random ReLU net (linear output layer) on the given box."""
    rng = np.random.default_rng(seed)
    if box is None:
        box = Box.from_bounds([(-1.0, 1.0)] * layer_sizes[0])
    weights = []
    biases = []
    acts = []
    for fan_in, fan_out in zip(layer_sizes, layer_sizes[1:]):
        scale = 1.0 / np.sqrt(fan_in)
        weights.append(rng.uniform(-scale, scale, size=(fan_out, fan_in)))
        biases.append(rng.uniform(-0.1, 0.1, size=fan_out))
        acts.append("relu")
    acts[-1] = "linear"
    return MlpModel(tuple(weights), tuple(biases), tuple(acts), box)


def mlp_to_dag(model: MlpModel, builder: Optional[ExprBuilder] = None):
    """Affine layers as shared affine/add nodes, relu as max(., 0).

    Returns (builder, roots); single-output models get one root.
    """
    if builder is None:
        builder = ExprBuilder(model.input_dim)
    units = [builder.var(i) for i in range(model.input_dim)]
    for W, b, act in zip(model.weights, model.biases, model.activations):
        new_units = []
        for j in range(W.shape[0]):
            terms = [
                builder.affine(units[i], W[j, i], 0.0)
                for i in range(W.shape[1])
                if W[j, i] != 0.0
            ]
            pre = builder.sum(terms) if terms else builder.const(0.0)
            pre = builder.affine(pre, 1.0, b[j])
            new_units.append(builder.relu(pre) if act == "relu" else pre)
        units = new_units
    return builder, (units if len(units) > 1 else units[0])
