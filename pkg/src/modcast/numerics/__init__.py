"""Tensor arithmetic, reverse-mode differentiation and the real FFT pair."""

from .complex import ComplexTensor, complex_affine
from .fft import ComplexSpectrum, fft, ifft, irfft, irfft_tensor, rfft, rfft_tensor
from .gradcheck import grad_check, grad_check_params
from .tensor import (
    ACTIVATIONS,
    Tensor,
    activation,
    affine,
    as_tensor,
    concat,
    exp,
    gelu,
    layer_norm,
    log,
    matmul,
    mse_loss,
    parameter,
    relu,
    sigmoid,
    softmax,
    sqrt,
    stack,
    take,
    tanh,
)

__all__ = [
    "ACTIVATIONS",
    "ComplexSpectrum",
    "ComplexTensor",
    "Tensor",
    "activation",
    "affine",
    "as_tensor",
    "complex_affine",
    "concat",
    "exp",
    "fft",
    "gelu",
    "grad_check",
    "grad_check_params",
    "ifft",
    "irfft",
    "irfft_tensor",
    "layer_norm",
    "log",
    "matmul",
    "mse_loss",
    "parameter",
    "relu",
    "rfft",
    "rfft_tensor",
    "sigmoid",
    "softmax",
    "sqrt",
    "stack",
    "take",
    "tanh",
]
