"""Dense float64 tensors with tape-based reverse-mode differentiation.

Every operation returns a fresh :class:`Tensor`.  When at least one input
requires a gradient the result remembers its parents and a closure that
pushes the upstream gradient back to them; :meth:`Tensor.backward` replays
those closures in reverse topological order.

The op vocabulary is deliberately closed: affine maps (``matmul``, ``+``),
element-wise arithmetic and activations, ``softmax``, reductions,
reshapes/transposes, gathers (``take``, indexing) and ``concat``/``stack``.
Complex affine maps and the real FFT pair are layered on top in
:mod:`modcast.numerics.complex` and :mod:`modcast.numerics.fft`.
"""

from __future__ import annotations

from typing import Callable, Iterable, Sequence

import numpy as np

def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum ``grad`` down to ``shape`` after numpy broadcasting."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward", "name")
    __array_priority__ = 100

    def __init__(self, data, requires_grad: bool = False, name: str | None = None):
        if isinstance(data, np.ndarray) and data.dtype == np.float64:
            self.data = data
        else:
            self.data = np.array(data, dtype=np.float64)
        self.grad: np.ndarray | None = None
        self.requires_grad = bool(requires_grad)
        self._parents: tuple[Tensor, ...] = ()
        self._backward: Callable[[np.ndarray], None] | None = None
        self.name = name

    # --- construction helpers -------------------------------------------------
    @classmethod
    def _make(cls, data: np.ndarray, parents: Iterable["Tensor"], backward) -> "Tensor":
        parents = tuple(parents)
        out = cls(data)
        if any(p.requires_grad for p in parents):
            out.requires_grad = True
            out._parents = parents
            out._backward = backward
        return out

    @property
    def shape(self) -> tuple:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def values(self) -> np.ndarray:
        """Flat row-major view of the data."""
        return self.data.reshape(-1)

    def numpy(self) -> np.ndarray:
        return self.data

    def detach(self) -> "Tensor":
        return Tensor(self.data.copy())

    def __repr__(self) -> str:
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}{flag})"

    def __len__(self) -> int:
        return len(self.data)

    def _accumulate(self, g: np.ndarray) -> None:
        if self.grad is None:
            self.grad = np.array(g, dtype=np.float64, copy=True)
        else:
            self.grad = self.grad + g

    # --- reverse pass ---------------------------------------------------------
    def backward(self, grad: np.ndarray | None = None) -> None:
        """Accumulate d(self)/d(leaf) into ``.grad`` of every leaf requiring it."""
        if not self.requires_grad:
            raise RuntimeError("backward() called on a tensor that does not require grad")
        if grad is None:
            if self.size != 1:
                raise RuntimeError("grad must be given for non-scalar outputs")
            grad = np.ones_like(self.data)
        order: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if p.requires_grad and id(p) not in seen:
                    stack.append((p, False))
        grads: dict[int, np.ndarray] = {id(self): np.asarray(grad, dtype=np.float64)}
        owned: set[int] = set()
        for node in reversed(order):
            g = grads.pop(id(node), None)
            if g is None:
                continue
            if node._backward is None:
                node._accumulate(g)
                continue
            for item in node._backward(g):
                parent, pg = item[0], item[1]
                if not parent.requires_grad or pg is None:
                    continue
                key = id(parent)
                if len(item) == 3:
                    # sparse contribution: pg belongs at parent[index]
                    if key not in owned:
                        grads[key] = grads[key].copy() if key in grads else np.zeros(parent.shape)
                        owned.add(key)
                    if _is_basic_index(item[2]):
                        grads[key][item[2]] += pg
                    else:
                        np.add.at(grads[key], item[2], pg)
                elif key in grads:
                    if key in owned:
                        grads[key] += pg
                    else:
                        grads[key] = grads[key] + pg
                        owned.add(key)
                else:
                    grads[key] = pg

    def zero_grad(self) -> None:
        self.grad = None

    # --- arithmetic -----------------------------------------------------------
    def __add__(self, other) -> "Tensor":
        other = as_tensor(other)
        a, b = self, other
        return Tensor._make(
            a.data + b.data, (a, b),
            lambda g: ((a, _unbroadcast(g, a.shape)), (b, _unbroadcast(g, b.shape))),
        )

    __radd__ = __add__

    def __sub__(self, other) -> "Tensor":
        other = as_tensor(other)
        a, b = self, other
        return Tensor._make(
            a.data - b.data, (a, b),
            lambda g: ((a, _unbroadcast(g, a.shape)), (b, _unbroadcast(-g, b.shape))),
        )

    def __rsub__(self, other) -> "Tensor":
        return as_tensor(other) - self

    def __mul__(self, other) -> "Tensor":
        other = as_tensor(other)
        a, b = self, other
        return Tensor._make(
            a.data * b.data, (a, b),
            lambda g: ((a, _unbroadcast(g * b.data, a.shape)), (b, _unbroadcast(g * a.data, b.shape))),
        )

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Tensor":
        other = as_tensor(other)
        a, b = self, other
        out = a.data / b.data
        return Tensor._make(
            out, (a, b),
            lambda g: ((a, _unbroadcast(g / b.data, a.shape)), (b, _unbroadcast(-g * out / b.data, b.shape))),
        )

    def __rtruediv__(self, other) -> "Tensor":
        return as_tensor(other) / self

    def __neg__(self) -> "Tensor":
        a = self
        return Tensor._make(-a.data, (a,), lambda g: ((a, -g),))

    def __pow__(self, exponent: float) -> "Tensor":
        if isinstance(exponent, Tensor):
            raise TypeError("only scalar exponents are supported")
        a, p = self, float(exponent)
        return Tensor._make(a.data**p, (a,), lambda g: ((a, g * p * a.data ** (p - 1.0)),))

    def __matmul__(self, other) -> "Tensor":
        return matmul(self, other)

    def __rmatmul__(self, other) -> "Tensor":
        return matmul(as_tensor(other), self)

    def __getitem__(self, index) -> "Tensor":
        a = self
        return Tensor._make(a.data[index], (a,), lambda g: ((a, g, index),))

    # --- shape ----------------------------------------------------------------
    def reshape(self, *shape) -> "Tensor":
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        a = self
        return Tensor._make(a.data.reshape(shape), (a,), lambda g: ((a, g.reshape(a.shape)),))

    def transpose(self, *axes) -> "Tensor":
        if len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = tuple(axes[0])
        if not axes:
            axes = tuple(reversed(range(self.ndim)))
        a = self
        inverse = tuple(np.argsort(axes))
        return Tensor._make(a.data.transpose(axes), (a,), lambda g: ((a, g.transpose(inverse)),))

    def swapaxes(self, i: int, j: int) -> "Tensor":
        axes = list(range(self.ndim))
        axes[i], axes[j] = axes[j], axes[i]
        return self.transpose(axes)

    @property
    def T(self) -> "Tensor":
        return self.transpose()

    # --- reductions -----------------------------------------------------------
    def sum(self, axis=None, keepdims: bool = False) -> "Tensor":
        a = self

        def back(g):
            if axis is not None and not keepdims:
                g = np.expand_dims(g, axis)
            return ((a, np.broadcast_to(g, a.shape).copy()),)

        return Tensor._make(np.sum(a.data, axis=axis, keepdims=keepdims), (a,), back)

    def mean(self, axis=None, keepdims: bool = False) -> "Tensor":
        if axis is None:
            count = self.size
        else:
            axes = (axis,) if isinstance(axis, int) else tuple(axis)
            count = int(np.prod([self.shape[k] for k in axes]))
        return self.sum(axis=axis, keepdims=keepdims) * (1.0 / count)


def _is_basic_index(index) -> bool:
    items = index if isinstance(index, tuple) else (index,)
    return all(isinstance(i, (slice, int, np.integer)) or i is None or i is Ellipsis for i in items)


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(np.asarray(x, dtype=np.float64))


def parameter(data, name: str | None = None) -> Tensor:
    """A leaf tensor that accumulates gradients."""
    return Tensor(np.array(data, dtype=np.float64), requires_grad=True, name=name)


# --- affine --------------------------------------------------------------------
def matmul(a, b) -> Tensor:
    """Batched matrix product over the last two axes (both operands at least 2-D)."""
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim < 2 or b.ndim < 2:
        raise ValueError("matmul operands must be at least 2-D")

    def back(g):
        ga = g @ np.swapaxes(b.data, -1, -2)
        gb = np.swapaxes(a.data, -1, -2) @ g
        return ((a, _unbroadcast(ga, a.shape)), (b, _unbroadcast(gb, b.shape)))

    return Tensor._make(a.data @ b.data, (a, b), back)


def affine(x, weight, bias=None) -> Tensor:
    """``x @ weight + bias`` over the last axis of ``x``."""
    out = matmul(x, weight)
    return out if bias is None else out + bias


# --- element-wise nonlinearities ----------------------------------------------
def _unary(x, forward, derivative) -> Tensor:
    x = as_tensor(x)
    out = forward(x.data)
    return Tensor._make(out, (x,), lambda g: ((x, g * derivative(x.data, out)),))


def exp(x) -> Tensor:
    return _unary(x, np.exp, lambda _, y: y)


def log(x) -> Tensor:
    return _unary(x, np.log, lambda v, _: 1.0 / v)


def sqrt(x) -> Tensor:
    return _unary(x, np.sqrt, lambda _, y: 0.5 / y)


def tanh(x) -> Tensor:
    return _unary(x, np.tanh, lambda _, y: 1.0 - y * y)


def sigmoid(x) -> Tensor:
    def fwd(v):
        return 0.5 * (1.0 + np.tanh(0.5 * v))

    return _unary(x, fwd, lambda _, y: y * (1.0 - y))


def relu(x) -> Tensor:
    return _unary(x, lambda v: np.maximum(v, 0.0), lambda v, _: (v > 0).astype(np.float64))


_GELU_C = np.sqrt(2.0 / np.pi)


def gelu(x) -> Tensor:
    """Tanh approximation of GELU."""

    def fwd(v):
        return 0.5 * v * (1.0 + np.tanh(_GELU_C * (v + 0.044715 * v**3)))

    def der(v, _):
        t = np.tanh(_GELU_C * (v + 0.044715 * v**3))
        return 0.5 * (1.0 + t) + 0.5 * v * (1.0 - t * t) * _GELU_C * (1.0 + 3 * 0.044715 * v * v)

    return _unary(x, fwd, der)


def identity(x) -> Tensor:
    return as_tensor(x)


ACTIVATIONS: dict[str, Callable[[Tensor], Tensor]] = {
    "relu": relu,
    "gelu": gelu,
    "tanh": tanh,
    "sigmoid": sigmoid,
    "linear": identity,
    "identity": identity,
}


def activation(name: str) -> Callable[[Tensor], Tensor]:
    try:
        return ACTIVATIONS[name]
    except KeyError:
        raise ValueError(f"unknown activation {name!r}; choose from {sorted(ACTIVATIONS)}") from None


def softmax(x, axis: int = -1) -> Tensor:
    x = as_tensor(x)
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    out = e / e.sum(axis=axis, keepdims=True)

    def back(g):
        dot = (g * out).sum(axis=axis, keepdims=True)
        return ((x, out * (g - dot)),)

    return Tensor._make(out, (x,), back)


def layer_norm(x, gain, bias, eps: float = 1e-5) -> Tensor:
    """Normalize over the last axis, then scale and shift."""
    x, gain, bias = as_tensor(x), as_tensor(gain), as_tensor(bias)
    centered = x.data - x.data.mean(axis=-1, keepdims=True)
    scale = np.sqrt((centered * centered).mean(axis=-1, keepdims=True) + eps)
    xhat = centered / scale

    def back(g):
        gh = g * gain.data
        gx = (gh - gh.mean(axis=-1, keepdims=True) - xhat * (gh * xhat).mean(axis=-1, keepdims=True)) / scale
        return ((x, gx), (gain, _unbroadcast(g * xhat, gain.shape)), (bias, _unbroadcast(g, bias.shape)))

    return Tensor._make(xhat * gain.data + bias.data, (x, gain, bias), back)


# --- gathers and joins -----------------------------------------------------------
def take(x, indices, axis: int) -> Tensor:
    """Gather along ``axis`` with an integer index array (any shape)."""
    x = as_tensor(x)
    idx = np.asarray(indices, dtype=np.intp)
    axis = axis % x.ndim

    def back(g):
        moved = np.moveaxis(g, list(range(axis, axis + idx.ndim)), list(range(idx.ndim)))
        acc = np.zeros((x.shape[axis],) + tuple(np.delete(x.shape, axis)), dtype=np.float64)
        np.add.at(acc, idx, moved)
        return ((x, np.moveaxis(acc, 0, axis)),)

    return Tensor._make(np.take(x.data, idx, axis=axis), (x,), back)


def concat(tensors: Sequence, axis: int = 0) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    sizes = [t.shape[axis] for t in tensors]
    splits = np.cumsum(sizes)[:-1]

    def back(g):
        return tuple(zip(tensors, np.split(g, splits, axis=axis)))

    return Tensor._make(np.concatenate([t.data for t in tensors], axis=axis), tensors, back)


def stack(tensors: Sequence, axis: int = 0) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]

    def back(g):
        parts = np.moveaxis(g, axis, 0)
        return tuple((t, parts[i]) for i, t in enumerate(tensors))

    return Tensor._make(np.stack([t.data for t in tensors], axis=axis), tensors, back)


def mse_loss(pred, target) -> Tensor:
    diff = as_tensor(pred) - as_tensor(target)
    return (diff * diff).mean()
