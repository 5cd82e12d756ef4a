"""Minimal reverse-mode automatic differentiation over float64 numpy arrays.

Only the handful of ops the model needs. Gradients accumulate on leaf tensors
marked trainable; `finite_diff_check` in the trainer verifies them against
central differences.
"""

from __future__ import annotations

import numpy as np


def _unbroadcast(grad: np.ndarray, shape) -> np.ndarray:
    """Sum grad down to `shape` after numpy broadcasting."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for ax, n in enumerate(shape):
        if n == 1 and grad.shape[ax] != 1:
            grad = grad.sum(axis=ax, keepdims=True)
    return grad.reshape(shape)


class Tensor:
    __slots__ = ("data", "grad", "trainable", "_parents", "_backward")

    def __init__(self, data, trainable=False, parents=(), backward=None):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None
        self.trainable = trainable
        self._parents = parents
        self._backward = backward

    @property
    def shape(self):
        return self.data.shape

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, trainable={self.trainable})"

    # -- graph construction ------------------------------------------------

    def __add__(self, other):
        other = _wrap(other)
        out = Tensor(self.data + other.data, parents=(self, other))

        def bw(g):
            return (_unbroadcast(g, self.data.shape),
                    _unbroadcast(g, other.data.shape))
        out._backward = bw
        return out

    def __sub__(self, other):
        other = _wrap(other)
        out = Tensor(self.data - other.data, parents=(self, other))

        def bw(g):
            return (_unbroadcast(g, self.data.shape),
                    _unbroadcast(-g, other.data.shape))
        out._backward = bw
        return out

    def __mul__(self, other):
        other = _wrap(other)
        out = Tensor(self.data * other.data, parents=(self, other))
        a, b = self, other

        def bw(g):
            return (_unbroadcast(g * b.data, a.data.shape),
                    _unbroadcast(g * a.data, b.data.shape))
        out._backward = bw
        return out

    __radd__ = __add__
    __rmul__ = __mul__

    def __rsub__(self, other):
        return _wrap(other) - self

    def __neg__(self):
        return self * -1.0

    def matmul(self, other):
        other = _wrap(other)
        out = Tensor(self.data @ other.data, parents=(self, other))
        a, b = self, other

        def bw(g):
            ga = g @ b.data.T if b.data.ndim == 2 else np.outer(g, b.data)
            gb = a.data.T @ g
            return ga, gb
        out._backward = bw
        return out

    __matmul__ = matmul

    def relu(self):
        mask = self.data > 0
        out = Tensor(self.data * mask, parents=(self,))
        out._backward = lambda g: (g * mask,)
        return out

    def sigmoid(self):
        s = 1.0 / (1.0 + np.exp(-self.data))
        out = Tensor(s, parents=(self,))
        out._backward = lambda g: (g * s * (1.0 - s),)
        return out

    def log(self):
        out = Tensor(np.log(self.data), parents=(self,))
        out._backward = lambda g: (g / self.data,)
        return out

    def clamp(self, lo: float, hi: float):
        clipped = np.clip(self.data, lo, hi)
        mask = (self.data > lo) & (self.data < hi)
        out = Tensor(clipped, parents=(self,))
        out._backward = lambda g: (g * mask,)
        return out

    def mean(self):
        n = self.data.size
        out = Tensor(self.data.mean(), parents=(self,))
        out._backward = lambda g: (np.full_like(self.data, g / n),)
        return out

    def sum(self):
        out = Tensor(self.data.sum(), parents=(self,))
        out._backward = lambda g: (np.full_like(self.data, g),)
        return out

    def backward(self):
        if self.data.size != 1:
            raise ValueError("backward() requires a scalar output")
        order = []
        seen = set()

        def topo(t):
            if id(t) in seen:
                return
            seen.add(id(t))
            for p in t._parents:
                topo(p)
            order.append(t)
        topo(self)
        grads = {id(self): np.ones_like(self.data)}
        for t in reversed(order):
            g = grads.pop(id(t), None)
            if g is None:
                continue
            if t.trainable:
                t.grad = g if t.grad is None else t.grad + g
            if t._backward is None:
                continue
            for parent, pg in zip(t._parents, t._backward(g)):
                if id(parent) in grads:
                    grads[id(parent)] = grads[id(parent)] + pg
                else:
                    grads[id(parent)] = pg


def _wrap(x):
    return x if isinstance(x, Tensor) else Tensor(x)


def concat(tensors, axis=1):
    datas = [t.data for t in tensors]
    out = Tensor(np.concatenate(datas, axis=axis), parents=tuple(tensors))
    sizes = [d.shape[axis] for d in datas]
    splits = np.cumsum(sizes)[:-1]

    def bw(g):
        return tuple(np.split(g, splits, axis=axis))
    out._backward = bw
    return out


def bilinear(h: Tensor, w: Tensor, f: Tensor) -> Tensor:
    """y[b,k] = h[b,:] @ w[k,:,:] @ f[b,:]."""
    out = Tensor(np.einsum("bi,kij,bj->bk", h.data, w.data, f.data),
                 parents=(h, w, f))

    def bw(g):
        gh = np.einsum("bk,kij,bj->bi", g, w.data, f.data)
        gw = np.einsum("bk,bi,bj->kij", g, h.data, f.data)
        gf = np.einsum("bk,kij,bi->bj", g, w.data, h.data)
        return gh, gw, gf
    out._backward = bw
    return out
