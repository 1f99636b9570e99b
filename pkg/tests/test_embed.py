import itertools

import numpy as np
import pytest

from modcast.embed import EMBED_KINDS, EmbedConfig, embed, embed_param_count, init_embed, output_layout, patch_count
from modcast.exceptions import InvalidConfigError, InvalidInputError
from modcast.numerics import parameter


def run(kind, b, length, d, **kw):
    cfg = EmbedConfig(kind, **kw)
    rng = np.random.default_rng(0)
    return cfg, embed(rng.standard_normal((b, length, d)), cfg, init_embed(cfg, length, d, rng))


def test_patch_layout_example():
    assert patch_count(96, 16, 8) == 12
    _, e = run("patch", 2, 96, 7, hidden=16, patch_len=16, stride=8)
    assert e.data.shape == (14, 16, 12)
    assert e.folded


def test_freq_layout():
    _, e = run("freq", 3, 96, 7)
    assert e.is_complex
    assert e.data.shape == (3, 49, 7)


def test_invert_layout():
    _, e = run("invert", 4, 36, 1, hidden=8)
    assert e.data.shape == (4, 8, 1)


@pytest.mark.parametrize(
    "kind, count",
    [("freq", 0), ("none", 0), ("invert", 96 * 16 + 16), ("patch", 16 * 16 + 16), ("token", 3 * 7 * 16 + 16)],
)
def test_param_count(kind, count):
    cfg = EmbedConfig(kind, hidden=16)
    assert embed_param_count(cfg, 96, 7) == count
    params = init_embed(cfg, 96, 7, np.random.default_rng(0))
    assert sum(p.size for p in params.values()) == count


def test_layouts_match_shape_rules_on_grid():
    grid = list(itertools.product(EMBED_KINDS, (1, 3), (16, 33), (1, 4), (4, 8), ((16, 8), (5, 3))))
    assert len(grid) >= 100
    for kind, b, length, d, hidden, (p, s) in grid:
        cfg, e = run(kind, b, length, d, hidden=hidden, patch_len=p, stride=s)
        expected = {
            "none": (b, length, d),
            "token": (b, length, hidden),
            "patch": (b * d, hidden, (length - p) // s + 2),
            "invert": (b, hidden, d),
            "freq": (b, length // 2 + 1, d),
        }[kind]
        assert e.data.shape == expected
        lay = output_layout(cfg, b, length, d)
        assert (lay.batch, lay.tokens, lay.channels) == expected


def test_none_is_passthrough():
    x = np.random.default_rng(1).standard_normal((2, 5, 3))
    np.testing.assert_array_equal(embed(x, EmbedConfig("none")).data.data, x)


def test_token_embedding_is_circular():
    cfg = EmbedConfig("token", hidden=2, token_kernel=3)
    params = init_embed(cfg, 6, 1, np.random.default_rng(0))
    x = np.random.default_rng(2).standard_normal((1, 6, 1))
    out = embed(x, cfg, params).data.data
    w, bias = params["weight"].data, params["bias"].data
    for t in range(6):
        window = np.array([x[0, (t - 1) % 6, 0], x[0, t, 0], x[0, (t + 1) % 6, 0]])
        np.testing.assert_allclose(out[0, t], window @ w + bias, atol=1e-14)


def test_patch_end_padding_replicates_last_step():
    cfg = EmbedConfig("patch", hidden=1, patch_len=4, stride=2)
    params = {"weight": parameter(np.eye(4)[:, -1:]), "bias": parameter(np.zeros(1))}
    x = np.arange(8.0).reshape(1, 8, 1)
    out = embed(x, cfg, params).data.data  # last element of each patch
    np.testing.assert_array_equal(out.ravel(), [3, 5, 7, 7])


def test_freq_matches_rfft():
    x = np.random.default_rng(3).standard_normal((2, 10, 3))
    e = embed(x, EmbedConfig("freq"))
    np.testing.assert_allclose(e.data.numpy(), np.fft.rfft(x, axis=1), atol=1e-12)


def test_fitted_to_short_lookback():
    cfg = EmbedConfig("patch", patch_len=16, stride=8).fitted_to(10)
    assert cfg.patch_len == 10 and cfg.stride == 5
    assert EmbedConfig("patch").fitted_to(96) == EmbedConfig("patch")


def test_invalid_configs_and_inputs():
    with pytest.raises(InvalidConfigError):
        EmbedConfig("wavelet")
    with pytest.raises(InvalidConfigError):
        EmbedConfig("token", token_kernel=4)
    with pytest.raises(InvalidInputError):
        embed(np.ones((3, 4)), EmbedConfig("none"))
    cfg = EmbedConfig("patch", patch_len=16)
    with pytest.raises(InvalidInputError):
        embed(np.ones((1, 8, 1)), cfg, init_embed(cfg, 8, 1, np.random.default_rng(0)))
