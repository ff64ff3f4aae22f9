"""Minimal reverse-mode autodiff over numpy arrays.

Only the operations needed to assemble training losses are provided:
elementwise add/sub/mul, scaling, powers, slicing, sum and mean.  Network
evaluations enter the graph as custom nodes carrying their own backward
callbacks (see ``network.net_eval``).  Binary ops support equal shapes or a
scalar on either side; nothing fancier.
"""

from __future__ import annotations

import numpy as np


class Node:
    __slots__ = ("value", "parents", "vjps")

    def __init__(self, value, parents=(), vjps=()):
        self.value = value
        self.parents = parents
        self.vjps = vjps

    @property
    def shape(self):
        return np.shape(self.value)

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return add(self, neg(other))

    def __rsub__(self, other):
        return add(neg(self), other)

    def __neg__(self):
        return neg(self)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __pow__(self, p):
        if p != 2:
            raise NotImplementedError("only squaring is supported")
        return mul(self, self)

    def __getitem__(self, idx):
        val = self.value[idx]
        shape = np.shape(self.value)

        def vjp(g):
            out = np.zeros(shape)
            out[idx] = g
            return out

        return Node(val, (self,), (vjp,))


def value_of(x):
    return x.value if isinstance(x, Node) else x


def _scalar_aware(parent_val, g):
    # Reduce the adjoint when the operand was a broadcast scalar.
    if np.shape(parent_val) == () and np.shape(g) != ():
        return np.sum(g)
    return g


def add(a, b):
    av, bv = value_of(a), value_of(b)
    val = av + bv
    parents, vjps = [], []
    if isinstance(a, Node):
        parents.append(a)
        vjps.append(lambda g, pv=av: _scalar_aware(pv, g))
    if isinstance(b, Node):
        parents.append(b)
        vjps.append(lambda g, pv=bv: _scalar_aware(pv, g))
    return Node(val, tuple(parents), tuple(vjps))


def neg(a):
    if not isinstance(a, Node):
        return -a
    return Node(-a.value, (a,), (lambda g: -g,))


def mul(a, b):
    av, bv = value_of(a), value_of(b)
    val = av * bv
    parents, vjps = [], []
    if isinstance(a, Node):
        parents.append(a)
        vjps.append(lambda g, o=bv, pv=av: _scalar_aware(pv, g * o))
    if isinstance(b, Node):
        parents.append(b)
        vjps.append(lambda g, o=av, pv=bv: _scalar_aware(pv, g * o))
    return Node(val, tuple(parents), tuple(vjps))


def vsum(a):
    if not isinstance(a, Node):
        return np.sum(a)
    shape = np.shape(a.value)
    return Node(float(np.sum(a.value)), (a,), (lambda g: g * np.ones(shape),))


def vmean(a):
    if not isinstance(a, Node):
        return float(np.mean(a))
    n = np.size(a.value)
    shape = np.shape(a.value)
    return Node(float(np.mean(a.value)), (a,), (lambda g: (g / n) * np.ones(shape),))


def _topo_order(root: Node) -> list[Node]:
    order: list[Node] = []
    seen: set[int] = set()
    stack: list[tuple[Node, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node.parents:
            if id(p) not in seen:
                stack.append((p, False))
    return order


def gradient(root: Node, leaves) -> list[np.ndarray]:
    """Gradients of a scalar ``root`` with respect to the given leaf nodes."""
    grads: dict[int, np.ndarray] = {id(root): np.asarray(1.0)}
    for node in reversed(_topo_order(root)):
        g = grads.pop(id(node), None)
        if g is None:
            continue
        for parent, vjp in zip(node.parents, node.vjps):
            contrib = vjp(g)
            key = id(parent)
            if key in grads:
                grads[key] = grads[key] + contrib
            else:
                grads[key] = contrib
        if not node.parents:
            grads[id(node)] = g  # keep leaf grads
    out = []
    for leaf in leaves:
        g = grads.get(id(leaf))
        if g is None:
            g = np.zeros(np.shape(leaf.value))
        out.append(np.asarray(g, dtype=float))
    return out
