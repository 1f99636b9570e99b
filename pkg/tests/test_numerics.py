import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from modcast.exceptions import InvalidInputError
from modcast.feedforward import FFConfig, attention, forward_block, init_block
from modcast.numerics import (
    ComplexSpectrum,
    ComplexTensor,
    Tensor,
    complex_affine,
    fft,
    grad_check,
    grad_check_params,
    irfft,
    irfft_tensor,
    layer_norm,
    mse_loss,
    parameter,
    rfft,
    rfft_tensor,
    softmax,
)


def naive_dft(x):
    n = len(x)
    k = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(k, k) / n) @ x


def naive_idft(bins, n):
    full = np.zeros(n, dtype=complex)
    full[: len(bins)] = bins
    for k in range(1, (n + 1) // 2):
        full[n - k] = np.conj(bins[k])
    k = np.arange(n)
    return (np.exp(2j * np.pi * np.outer(k, k) / n) @ full).real / n


# --- FFT ---------------------------------------------------------------------------
def test_rfft_constant_and_nyquist():
    np.testing.assert_allclose(rfft([1, 1, 1, 1]).bins, [4, 0, 0], atol=1e-14)
    np.testing.assert_allclose(rfft([1, -1, 1, -1]).bins, [0, 0, 4], atol=1e-14)


def test_rfft_matches_naive_dft_length_96():
    x = np.random.default_rng(0).standard_normal(96)
    np.testing.assert_allclose(rfft(x).bins, naive_dft(x)[:49], atol=1e-10)


@pytest.mark.parametrize("n", [2, 3, 5, 7, 11, 13, 17, 60, 97, 127, 128, 210, 256])
def test_fft_matches_naive_dft(n):
    x = np.random.default_rng(n).standard_normal(n) + 1j * np.random.default_rng(n + 1).standard_normal(n)
    np.testing.assert_allclose(fft(x), naive_dft(x), atol=1e-10 * max(1, n))


def test_irfft_dc_case():
    np.testing.assert_allclose(irfft(np.array([4, 0, 0], dtype=complex), 4), [1, 1, 1, 1], atol=1e-15)


def test_round_trip_length_64():
    x = np.random.default_rng(1).standard_normal(64)
    np.testing.assert_allclose(irfft(rfft(x), 64), x, atol=1e-10)


def test_zero_padded_spectrum_interpolates():
    t = np.arange(8)
    x = np.sin(2 * np.pi * t / 8)
    bins = rfft(x).bins
    padded = np.zeros(16 // 2 + 1, dtype=complex)
    padded[: len(bins)] = bins
    np.testing.assert_allclose(irfft(padded, 16), naive_idft(padded, 16), atol=1e-12)


def test_spectrum_carries_origin_length():
    s = rfft(np.arange(7.0))
    assert isinstance(s, ComplexSpectrum)
    assert s.origin_length == 7
    np.testing.assert_allclose(irfft(s), np.arange(7.0), atol=1e-12)


def test_rfft_rejects_short_input():
    with pytest.raises(InvalidInputError):
        rfft([1.0])


def test_irfft_rejects_mismatched_bins():
    with pytest.raises(InvalidInputError):
        irfft(np.zeros(3, dtype=complex), 8)


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 300), st.integers(0, 10_000))
def test_round_trip_and_parseval_property(n, seed):
    x = np.random.default_rng(seed).standard_normal(n)
    np.testing.assert_allclose(irfft(rfft(x), n), x, atol=1e-10)
    full = fft(x)
    assert abs(np.sum(np.abs(full) ** 2) / n - np.sum(x**2)) <= 1e-9 * np.sum(x**2)


# --- tensor autodiff -----------------------------------------------------------------
def test_sum_of_squares_gradient():
    x = Tensor(np.random.default_rng(0).standard_normal((3, 4)))
    assert grad_check(lambda t: (t * t).sum(), x) < 1e-6


def test_broadcast_gradients_unbroadcast():
    a = parameter(np.ones((3, 1)))
    b = parameter(np.arange(4.0))
    ((a * b) + a).sum().backward()
    np.testing.assert_allclose(a.grad, np.full((3, 1), 10.0))
    np.testing.assert_allclose(b.grad, np.full(4, 3.0))


def test_two_layer_mlp_gradient():
    rng = np.random.default_rng(2)
    cfg = FFConfig("mlp", layers=2, width=5, activation="gelu")
    params = init_block(cfg, 6, rng)
    x = Tensor(rng.standard_normal((4, 3, 6)))
    y = rng.standard_normal((4, 3, 6))
    flat = {}
    for layer in params.values():
        flat.update({f"{id(v)}": v for v in layer.values()})
    assert grad_check_params(lambda: mse_loss(forward_block(x, cfg, params), y), flat) < 1e-4


def test_single_head_attention_gradient():
    rng = np.random.default_rng(3)
    p = init_block(FFConfig("transformer", layers=1, width=4, heads=1), 4, rng)["layer0"]
    x = Tensor(rng.standard_normal((2, 5, 4)))
    y = rng.standard_normal((2, 5, 4))
    assert grad_check(lambda t: mse_loss(attention(t, p, 1), y), x) < 1e-4
    flat = {f"{k}.{n}": t for k in ("query", "key", "value", "out") for n, t in p[k].items()}
    assert grad_check_params(lambda: mse_loss(attention(x, p, 1), y), flat) < 1e-4


def test_softmax_layer_norm_gradients():
    rng = np.random.default_rng(4)
    x = Tensor(rng.standard_normal((3, 6)))
    w = rng.standard_normal((3, 6))
    assert grad_check(lambda t: (softmax(t, -1) * w).sum(), x) < 1e-4
    gain, bias = parameter(rng.uniform(0.5, 1.5, 6)), parameter(rng.standard_normal(6))
    assert grad_check(lambda t: (layer_norm(t, gain, bias) * w).sum(), x) < 1e-4


def test_rfft_tensor_gradients():
    rng = np.random.default_rng(5)
    for n in (7, 8):
        x = Tensor(rng.standard_normal((2, n)))
        wr, wi = rng.standard_normal((2, n // 2 + 1)), rng.standard_normal((2, n // 2 + 1))

        def f(t):
            re, im = rfft_tensor(t)
            return (re * wr + im * wi).sum()

        assert grad_check(f, x) < 1e-4


def test_irfft_tensor_gradients():
    rng = np.random.default_rng(6)
    for n in (9, 10):
        re = Tensor(rng.standard_normal((2, n // 2 + 1)))
        im = Tensor(rng.standard_normal((2, n // 2 + 1)))
        w = rng.standard_normal((2, n))
        assert grad_check(lambda t: (irfft_tensor(t, im, n) * w).sum(), re) < 1e-4
        assert grad_check(lambda t: (irfft_tensor(re, t, n) * w).sum(), im) < 1e-4


def test_grad_check_rejects_vector_objective():
    with pytest.raises(InvalidInputError):
        grad_check(lambda t: t * 2.0, Tensor(np.ones(3)))


# --- complex affine ------------------------------------------------------------------
def test_complex_identity_and_rotation():
    rng = np.random.default_rng(7)
    z = rng.standard_normal((2, 5)) + 1j * rng.standard_normal((2, 5))
    zt = ComplexTensor.from_array(z)
    eye, zero = np.eye(5), np.zeros((5, 5))
    np.testing.assert_allclose(complex_affine(zt, eye, zero).numpy(), z, atol=1e-15)
    np.testing.assert_allclose(complex_affine(zt, zero, eye).numpy(), -z.imag + 1j * z.real, atol=1e-15)


def test_complex_affine_real_expansion_oracle():
    rng = np.random.default_rng(8)
    n_in, n_out = 4, 3
    z = rng.standard_normal((5, n_in)) + 1j * rng.standard_normal((5, n_in))
    wr, wi = rng.standard_normal((n_in, n_out)), rng.standard_normal((n_in, n_out))
    out = complex_affine(ComplexTensor.from_array(z), wr, wi).numpy()
    # [re, im] @ [[a, b], [-b, a]] is the real form of z @ (a + ib)
    big = np.block([[wr, wi], [-wi, wr]])
    stacked = np.concatenate([z.real, z.imag], axis=1) @ big
    np.testing.assert_allclose(out.real, stacked[:, :n_out], atol=1e-12)
    np.testing.assert_allclose(out.imag, stacked[:, n_out:], atol=1e-12)


def test_complex_affine_gradient():
    rng = np.random.default_rng(9)
    z = ComplexTensor(Tensor(rng.standard_normal((3, 4))), Tensor(rng.standard_normal((3, 4))))
    params = {k: parameter(rng.standard_normal(s)) for k, s in [("wr", (4, 2)), ("wi", (4, 2)), ("br", (2,)), ("bi", (2,))]}
    target = rng.standard_normal((3, 2))

    def loss():
        out = complex_affine(z, params["wr"], params["wi"], params["br"], params["bi"])
        return mse_loss(out.re, target) + mse_loss(out.im, -target)

    assert grad_check_params(loss, params) < 1e-4
