"""Complex-valued activations represented as (real, imaginary) tensor pairs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tensor import Tensor, as_tensor, matmul


@dataclass(frozen=True)
class ComplexTensor:
    re: Tensor
    im: Tensor

    def __post_init__(self):
        if self.re.shape != self.im.shape:
            raise ValueError(f"real/imag shape mismatch {self.re.shape} vs {self.im.shape}")

    @classmethod
    def from_array(cls, z) -> "ComplexTensor":
        z = np.asarray(z, dtype=np.complex128)
        return cls(Tensor(z.real.copy()), Tensor(z.imag.copy()))

    @property
    def shape(self) -> tuple:
        return self.re.shape

    def numpy(self) -> np.ndarray:
        return self.re.data + 1j * self.im.data

    def transpose(self, *axes) -> "ComplexTensor":
        return ComplexTensor(self.re.transpose(*axes), self.im.transpose(*axes))

    def reshape(self, *shape) -> "ComplexTensor":
        return ComplexTensor(self.re.reshape(*shape), self.im.reshape(*shape))

    def map(self, fn) -> "ComplexTensor":
        """Apply a real function to both parts (split-complex activation)."""
        return ComplexTensor(fn(self.re), fn(self.im))


def complex_affine(x: ComplexTensor, w_re, w_im, b_re=None, b_im=None) -> ComplexTensor:
    """``x @ W + b`` with ``(a+bi)(c+di) = (ac-bd) + (ad+bc)i`` over the last axis."""
    w_re, w_im = as_tensor(w_re), as_tensor(w_im)
    re = matmul(x.re, w_re) - matmul(x.im, w_im)
    im = matmul(x.re, w_im) + matmul(x.im, w_re)
    if b_re is not None:
        re = re + b_re
    if b_im is not None:
        im = im + b_im
    return ComplexTensor(re, im)
