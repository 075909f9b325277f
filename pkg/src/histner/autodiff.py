"""Reverse-mode automatic differentiation over dense float64 arrays.

Just enough engine for a windowed feed-forward tagger with two softmax
heads: a handful of forward ops, a gradient-scaling pass-through, and a
central finite-difference checker. Graphs are built per minibatch and
discarded; there is no persistent tape.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .errors import GraphError, NonFiniteError, ShapeError


class Node:
    """One value in the graph: data, a gradient slot, and a backward rule."""

    __slots__ = ("value", "grad", "parents", "op", "_backward", "_backward_ran")

    def __init__(self, value, parents=(), backward=None, op="leaf"):
        self.value = np.asarray(value, dtype=np.float64)
        if not np.all(np.isfinite(self.value)):
            raise NonFiniteError(f"op '{op}' produced non-finite values")
        self.grad: np.ndarray | None = None
        self.parents: tuple[Node, ...] = tuple(parents)
        self.op = op
        self._backward = backward
        self._backward_ran = False

    @property
    def shape(self) -> tuple[int, ...]:
        return self.value.shape

    def __repr__(self) -> str:
        return f"Node(op={self.op!r}, shape={self.shape})"


def _topo_order(root: Node) -> list[Node]:
    order: list[Node] = []
    visited = {id(root)}
    stack: list[tuple[Node, int]] = [(root, 0)]
    while stack:
        node, i = stack.pop()
        while i < len(node.parents) and id(node.parents[i]) in visited:
            i += 1
        if i < len(node.parents):
            stack.append((node, i + 1))
            child = node.parents[i]
            visited.add(id(child))
            stack.append((child, 0))
        else:
            order.append(node)
    return order


def backward(loss: Node) -> None:
    """Populate ``grad`` on every node reachable from a scalar loss."""
    if loss.value.shape != ():
        raise ShapeError(f"backward needs a scalar loss, got shape {loss.value.shape}")
    if loss._backward_ran:
        raise GraphError("backward already ran on this graph; build a fresh graph")
    loss._backward_ran = True
    order = _topo_order(loss)
    for node in order:
        node.grad = np.zeros_like(node.value)
    loss.grad = np.ones_like(loss.value)
    for node in reversed(order):
        if node._backward is not None:
            node._backward(node.grad)


def _require_2d(a: Node, op: str) -> None:
    if a.value.ndim != 2:
        raise ShapeError(f"{op}: expected a 2-D array, got shape {a.shape}")


def add(a: Node, b: Node) -> Node:
    """Elementwise sum; also supports adding a row vector to a matrix."""
    if a.shape == b.shape:
        def bw(g):
            a.grad += g
            b.grad += g
    elif a.value.ndim == 2 and b.value.ndim == 1 and a.shape[1] == b.shape[0]:
        def bw(g):
            a.grad += g
            b.grad += g.sum(axis=0)
    else:
        raise ShapeError(f"add: incompatible shapes {a.shape} and {b.shape}")
    return Node(a.value + b.value, (a, b), bw, "add")


def sub(a: Node, b: Node) -> Node:
    if a.shape != b.shape:
        raise ShapeError(f"sub: incompatible shapes {a.shape} and {b.shape}")

    def bw(g):
        a.grad += g
        b.grad -= g

    return Node(a.value - b.value, (a, b), bw, "sub")


def mul(a: Node, b) -> Node:
    """Elementwise product with another node, or with a plain scalar."""
    if isinstance(b, Node):
        if a.shape != b.shape:
            raise ShapeError(f"mul: incompatible shapes {a.shape} and {b.shape}")

        def bw(g):
            a.grad += g * b.value
            b.grad += g * a.value

        return Node(a.value * b.value, (a, b), bw, "mul")
    factor = float(b)

    def bw_scalar(g):
        a.grad += g * factor

    return Node(a.value * factor, (a,), bw_scalar, "mul")


def matmul(a: Node, b: Node) -> Node:
    _require_2d(a, "matmul")
    _require_2d(b, "matmul")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: inner dims differ, {a.shape} @ {b.shape}")

    def bw(g):
        a.grad += g @ b.value.T
        b.grad += a.value.T @ g

    return Node(a.value @ b.value, (a, b), bw, "matmul")


def tanh(x: Node) -> Node:
    out_value = np.tanh(x.value)

    def bw(g):
        x.grad += g * (1.0 - out_value * out_value)

    return Node(out_value, (x,), bw, "tanh")


def relu(x: Node) -> Node:
    out_value = np.maximum(x.value, 0.0)

    def bw(g):
        # subgradient at 0 fixed to 0
        x.grad += g * (out_value > 0.0)

    return Node(out_value, (x,), bw, "relu")


def concat(nodes: Sequence[Node], axis: int = 1) -> Node:
    if not nodes:
        raise ShapeError("concat: no inputs")
    sizes = [n.value.shape[axis] for n in nodes]
    offsets = np.cumsum([0] + sizes)

    def bw(g):
        for node, lo, hi in zip(nodes, offsets, offsets[1:]):
            sl = [slice(None)] * g.ndim
            sl[axis] = slice(lo, hi)
            node.grad += g[tuple(sl)]

    return Node(np.concatenate([n.value for n in nodes], axis=axis), tuple(nodes), bw, "concat")


def mean(x: Node) -> Node:
    size = x.value.size
    if size == 0:
        raise ShapeError("mean: empty input")

    def bw(g):
        x.grad += np.full_like(x.value, g / size)

    return Node(x.value.mean(), (x,), bw, "mean")


def sum_(x: Node) -> Node:
    def bw(g):
        x.grad += np.full_like(x.value, g)

    return Node(x.value.sum(), (x,), bw, "sum")


def embedding_lookup(table: Node, ids) -> Node:
    ids = np.asarray(ids, dtype=np.int64)
    _require_2d(table, "embedding_lookup")
    if ids.ndim != 1:
        raise ShapeError(f"embedding_lookup: ids must be 1-D, got shape {ids.shape}")
    if ids.size and (ids.min() < 0 or ids.max() >= table.shape[0]):
        raise ShapeError(
            f"embedding_lookup: id outside table with {table.shape[0]} rows"
        )

    def bw(g):
        np.add.at(table.grad, ids, g)

    return Node(table.value[ids], (table,), bw, "embedding_lookup")


def softmax_cross_entropy(logits: Node, targets) -> Node:
    """Cross entropy of softmax(logits) against integer targets.

    For a (n, C) logits matrix and (n,) targets, returns the (n,) loss
    vector; for a single (C,) row and an int target, a scalar.
    """
    v = logits.value
    if v.ndim == 1:
        tid = int(targets)
        if not 0 <= tid < v.shape[0]:
            raise ShapeError(f"softmax_cross_entropy: target {tid} out of range")
        shifted = v - v.max()
        lse = np.log(np.exp(shifted).sum())
        probs = np.exp(shifted - lse)

        def bw(g):
            delta = probs.copy()
            delta[tid] -= 1.0
            logits.grad += delta * g

        return Node(lse - shifted[tid], (logits,), bw, "softmax_cross_entropy")
    if v.ndim == 2:
        t = np.asarray(targets, dtype=np.int64)
        if t.shape != (v.shape[0],):
            raise ShapeError(
                f"softmax_cross_entropy: targets shape {t.shape} for logits {v.shape}"
            )
        if t.size and (t.min() < 0 or t.max() >= v.shape[1]):
            raise ShapeError("softmax_cross_entropy: target index out of range")
        shifted = v - v.max(axis=1, keepdims=True)
        lse = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
        logp = shifted - lse
        rows = np.arange(v.shape[0])
        probs = np.exp(logp)

        def bw2(g):
            delta = probs.copy()
            delta[rows, t] -= 1.0
            logits.grad += delta * g[:, None]

        return Node(-logp[rows, t], (logits,), bw2, "softmax_cross_entropy")
    raise ShapeError(f"softmax_cross_entropy: logits must be 1-D or 2-D, got {v.shape}")


def scale_gradient(x: Node, factor: float) -> Node:
    """Identity on values; multiplies the backward gradient by ``factor``.

    With factor = -lambda this is a gradient-reversal layer.
    """
    factor = float(factor)

    def bw(g):
        x.grad += factor * g

    return Node(x.value, (x,), bw, "scale_gradient")


def finite_difference_check(
    f: Callable[[list[Node]], Node],
    params: Sequence[np.ndarray],
    eps: float = 1e-5,
    coords: Sequence[tuple[int, int]] | None = None,
) -> float:
    """Max relative error between autodiff and central differences.

    ``f`` builds a scalar loss from leaf nodes. ``coords`` selects
    (param_index, flat_index) coordinates to probe; default is all of
    them. Relative error uses max(|a|, |b|, 1e-8) as denominator.
    Points where f is non-finite raise; sampling must avoid relu kinks.
    """
    base = [np.asarray(p, dtype=np.float64).copy() for p in params]
    leaves = [Node(p.copy()) for p in base]
    loss = f(leaves)
    if loss.value.shape != ():
        raise ShapeError("finite_difference_check: f must return a scalar")
    backward(loss)
    auto = [leaf.grad.copy() for leaf in leaves]

    if coords is None:
        coords = [(i, j) for i, p in enumerate(base) for j in range(p.size)]

    def eval_at(arrays: list[np.ndarray]) -> float:
        return float(f([Node(a.copy()) for a in arrays]).value)

    worst = 0.0
    for i, j in coords:
        saved = base[i].flat[j]
        base[i].flat[j] = saved + eps
        f_plus = eval_at(base)
        base[i].flat[j] = saved - eps
        f_minus = eval_at(base)
        base[i].flat[j] = saved
        fd = (f_plus - f_minus) / (2.0 * eps)
        ad = auto[i].flat[j]
        rel = abs(ad - fd) / max(abs(ad), abs(fd), 1e-8)
        worst = max(worst, rel)
    return worst
