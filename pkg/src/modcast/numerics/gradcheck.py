"""Central-difference gradient verification."""

from __future__ import annotations

from typing import Callable, Mapping

import numpy as np

from ..exceptions import InvalidInputError, NumericalError
from .tensor import Tensor


def _scalar(value: Tensor) -> float:
    v = float(np.asarray(value.data).reshape(-1)[0]) if value.size == 1 else None
    if v is None:
        raise InvalidInputError(f"objective must be scalar, got shape {value.shape}")
    if not np.isfinite(v):
        raise NumericalError("objective is not finite", stage="grad_check")
    return v


def grad_check(f: Callable[[Tensor], Tensor], x: Tensor, step: float = 1e-5) -> float:
    """Max over coordinates of ``|analytic - central| / (|central| + 1e-8)``.

    ``x`` is perturbed in place and restored afterwards.
    """
    if step <= 0:
        raise InvalidInputError("step must be positive")
    saved_flag, saved_grad = x.requires_grad, x.grad
    x.requires_grad, x.grad = True, None
    try:
        out = f(x)
        _scalar(out)
        out.backward()
        analytic = np.zeros_like(x.data) if x.grad is None else x.grad.copy()
        flat = x.data.reshape(-1)
        numeric = np.empty(flat.size)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + step
            up = _scalar(f(x))
            flat[i] = orig - step
            down = _scalar(f(x))
            flat[i] = orig
            numeric[i] = (up - down) / (2.0 * step)
    finally:
        x.requires_grad, x.grad = saved_flag, saved_grad
    err = np.abs(analytic.reshape(-1) - numeric) / (np.abs(numeric) + 1e-8)
    return float(err.max()) if err.size else 0.0


def grad_check_params(loss: Callable[[], Tensor], params: Mapping[str, Tensor], step: float = 1e-5) -> float:
    """Worst :func:`grad_check` discrepancy over a named parameter collection."""
    worst = 0.0
    for p in params.values():
        worst = max(worst, grad_check(lambda _: loss(), p, step))
    return worst
