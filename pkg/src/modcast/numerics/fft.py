"""Real-input FFT pair.

Lengths whose prime factors are all in {2, 3, 5} go through an iterative
Stockham mixed-radix transform; any other length is routed through
Bluestein's chirp-z identity, which needs one power-of-two transform of
size >= 2n - 1.  All transforms operate on the last axis and broadcast over
leading axes.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..exceptions import InvalidInputError
from .tensor import Tensor

_RADICES = (4, 2, 3, 5)


@dataclass(frozen=True)
class ComplexSpectrum:
    """Non-negative-frequency half of the DFT of a real signal of ``origin_length``."""

    bins: np.ndarray  # complex128, (..., origin_length // 2 + 1)
    origin_length: int

    def __post_init__(self):
        expected = self.origin_length // 2 + 1
        if self.bins.shape[-1] != expected:
            raise InvalidInputError(
                f"{self.bins.shape[-1]} bins cannot describe a length-{self.origin_length} signal (need {expected})"
            )

    @property
    def real(self) -> np.ndarray:
        return self.bins.real

    @property
    def imag(self) -> np.ndarray:
        return self.bins.imag

    @property
    def n_bins(self) -> int:
        return self.bins.shape[-1]


def _factor(n: int) -> list[int] | None:
    factors = []
    for p in _RADICES:
        while n % p == 0:
            factors.append(p)
            n //= p
    return factors if n == 1 else None


@lru_cache(maxsize=256)
def _dft_matrix(p: int) -> np.ndarray:
    k = np.arange(p)
    return np.exp(-2j * np.pi * np.outer(k, k) / p)


@lru_cache(maxsize=1024)
def _twiddles(p: int, span: int) -> np.ndarray:
    j = np.arange(p)[:, None]
    k1 = np.arange(span)[None, :]
    return np.exp(-2j * np.pi * j * k1 / (p * span))


def _stockham(x: np.ndarray, factors: list[int]) -> np.ndarray:
    lead = x.shape[:-1]
    n = x.shape[-1]
    a = x.reshape(lead + (n, 1))
    span, groups = 1, n
    for p in factors:
        groups //= p
        a = a.reshape(lead + (p, groups, span))
        a = a * _twiddles(p, span)[:, None, :]
        # a[k2, r, k1] = sum_j F[k2, j] a[j, r, k1], laid out as (r, k2, k1)
        a = np.einsum("kj,...jrl->...rkl", _dft_matrix(p), a)
        span *= p
        a = a.reshape(lead + (groups, span))
    return a.reshape(lead + (n,))


def _bluestein(x: np.ndarray) -> np.ndarray:
    n = x.shape[-1]
    k = np.arange(n)
    chirp = np.exp(-1j * np.pi * ((k * k) % (2 * n)) / n)
    m = 1 << int(np.ceil(np.log2(2 * n - 1)))
    a = np.zeros(x.shape[:-1] + (m,), dtype=np.complex128)
    a[..., :n] = x * chirp
    b = np.zeros(m, dtype=np.complex128)
    b[:n] = np.conj(chirp)
    b[m - n + 1:] = np.conj(chirp[1:])[::-1]
    conv = _ifft(fft(a) * fft(b))
    return chirp * conv[..., :n]


def fft(x) -> np.ndarray:
    """Complex DFT along the last axis."""
    x = np.asarray(x, dtype=np.complex128)
    n = x.shape[-1]
    if n == 1:
        return x.copy()
    factors = _factor(n)
    if factors is None:
        return _bluestein(x)
    return _stockham(x, factors)


def _ifft(x: np.ndarray) -> np.ndarray:
    return np.conj(fft(np.conj(x))) / x.shape[-1]


def ifft(x) -> np.ndarray:
    """Inverse complex DFT along the last axis."""
    return _ifft(np.asarray(x, dtype=np.complex128))


def rfft(x) -> ComplexSpectrum:
    """DFT of a real signal restricted to the ``L // 2 + 1`` non-negative frequencies."""
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[-1]
    if n < 2:
        raise InvalidInputError(f"rfft needs at least 2 samples, got {n}")
    bins = fft(x)[..., : n // 2 + 1]
    # exact zeros where the transform of a real signal is real
    bins[..., 0] = bins[..., 0].real
    if n % 2 == 0:
        bins[..., -1] = bins[..., -1].real
    return ComplexSpectrum(bins, n)


def irfft(spectrum, out_length: int | None = None) -> np.ndarray:
    """Inverse of :func:`rfft`; imaginary parts of the DC and Nyquist bins are ignored."""
    if isinstance(spectrum, ComplexSpectrum):
        bins = spectrum.bins
        n = spectrum.origin_length if out_length is None else out_length
    else:
        bins = np.asarray(spectrum, dtype=np.complex128)
        if out_length is None:
            raise InvalidInputError("out_length is required for raw bin arrays")
        n = out_length
    if n < 1 or bins.shape[-1] != n // 2 + 1:
        raise InvalidInputError(f"{bins.shape[-1]} bins do not match output length {n}")
    full = np.empty(bins.shape[:-1] + (n,), dtype=np.complex128)
    full[..., : bins.shape[-1]] = bins
    full[..., 0] = bins[..., 0].real
    if n % 2 == 0:
        full[..., n // 2] = bins[..., n // 2].real
    tail = bins[..., 1 : (n + 1) // 2]
    full[..., n // 2 + 1 :] = np.conj(tail[..., ::-1])
    return _ifft(full).real


def _bin_weights(n: int) -> np.ndarray:
    w = np.full(n // 2 + 1, 2.0)
    w[0] = 1.0
    if n % 2 == 0:
        w[-1] = 1.0
    return w


def rfft_tensor(x: Tensor) -> tuple[Tensor, Tensor]:
    """Differentiable :func:`rfft` along the last axis, returned as (real, imag)."""
    n = x.shape[-1]
    spec = rfft(x.data)
    w = _bin_weights(n)

    def back_re(g):
        return ((x, n * irfft(g / w, n)),)

    def back_im(g):
        return ((x, n * irfft(1j * g / w, n)),)

    return (
        Tensor._make(spec.real.copy(), (x,), back_re),
        Tensor._make(spec.imag.copy(), (x,), back_im),
    )


def irfft_tensor(re: Tensor, im: Tensor, out_length: int) -> Tensor:
    """Differentiable :func:`irfft` of ``re + i*im`` along the last axis."""
    n = out_length
    w = _bin_weights(n)
    interior = np.ones_like(w)
    interior[0] = 0.0
    if n % 2 == 0:
        interior[-1] = 0.0
    out = irfft(re.data + 1j * im.data, n)

    def back(g):
        spec = rfft(g).bins if n >= 2 else g.astype(np.complex128)
        return ((re, spec.real * w / n), (im, spec.imag * w * interior / n))

    return Tensor._make(out, (re, im), back)
