# Third party imports
import numpy as np
import pytest

# Application imports
from app.error_handling.exceptions.contract_exception import ContractException
from app.error_handling.exceptions.input_exception import SequenceLengthException
from app.error_handling.exceptions.tensor_index_exception import TensorIndexException
from app.service.autodiff import functional as F
from app.service.autodiff.gradient_check import finite_diff_check
from app.service.autodiff.tensor import Tensor
from app.service.transformer.base_transformer import BaseTransformer
from app.service.transformer.forward import base_forward, causal_mask, decoder_block_forward, embed_tokens


def _np_layer_norm(x, gamma, beta, eps=1e-5):
    mean = x.mean(axis=-1, keepdims=True)
    var = ((x - mean) ** 2).mean(axis=-1, keepdims=True)
    return (x - mean) / np.sqrt(var + eps) * gamma + beta


def _np_gelu(x):
    return 0.5 * x * (1.0 + np.tanh(np.sqrt(2.0 / np.pi) * (x + 0.044715 * x ** 3)))


def _brute_force_block(h, w, num_heads):
    """The block computed one query position and one head at a time."""
    n, d = h.shape
    head_dim = d // num_heads
    x = _np_layer_norm(h, w.ln1_gamma.data, w.ln1_beta.data)
    q, k, v = x @ w.w_q.data, x @ w.w_k.data, x @ w.w_v.data
    attended = np.zeros((n, d))
    for i in range(n):
        for head in range(num_heads):
            cols = slice(head * head_dim, (head + 1) * head_dim)
            scores = np.array([q[i, cols] @ k[j, cols] / np.sqrt(head_dim) for j in range(i + 1)])
            weights = np.exp(scores - scores.max())
            weights /= weights.sum()
            attended[i, cols] = sum(weights[j] * v[j, cols] for j in range(i + 1))
    h = h + attended @ w.w_o.data
    x = _np_layer_norm(h, w.ln2_gamma.data, w.ln2_beta.data)
    return h + _np_gelu(x @ w.w_in.data) @ w.w_out.data


def test_embed_empty_sequence(tiny_base):
    assert embed_tokens([], tiny_base).shape == (0, tiny_base.config.d_model)


def test_repeated_token_differs_by_position_delta(tiny_base):
    h = embed_tokens([5, 5], tiny_base).data
    delta = tiny_base.position_embedding.data[1] - tiny_base.position_embedding.data[0]
    assert np.allclose(h[1] - h[0], delta, atol=1e-12)


def test_zero_embedding_gives_zero_row(tiny_config):
    table = {name: np.zeros(shape) for name, shape in BaseTransformer.expected_shapes(tiny_config).items()}
    model = BaseTransformer.from_tensor_table(tiny_config, table)
    assert np.array_equal(embed_tokens([3], model).data, np.zeros((1, tiny_config.d_model)))


def test_embed_rejects_bad_tokens(tiny_base):
    with pytest.raises(TensorIndexException):
        embed_tokens([64], tiny_base)
    with pytest.raises(SequenceLengthException):
        embed_tokens([3] * (tiny_base.config.max_seq_len + 1), tiny_base)


def test_block_matches_brute_force_attention(tiny_base):
    h = embed_tokens([4, 9, 17], tiny_base)
    layer = tiny_base.layers[0]
    out = decoder_block_forward(h, layer, causal_mask(3), tiny_base.config.num_heads)
    expected = _brute_force_block(h.data, layer, tiny_base.config.num_heads)
    assert np.allclose(out.data, expected, atol=1e-12)


def test_single_token_block_uses_value_path(tiny_base):
    """With one position the attention weights are exactly 1, so the query projection does not matter."""
    h = embed_tokens([7], tiny_base)
    layer = tiny_base.layers[0]
    out = decoder_block_forward(h, layer, causal_mask(1), tiny_base.config.num_heads)
    x = _np_layer_norm(h.data, layer.ln1_gamma.data, layer.ln1_beta.data)
    mid = h.data + (x @ layer.w_v.data) @ layer.w_o.data
    y = _np_layer_norm(mid, layer.ln2_gamma.data, layer.ln2_beta.data)
    assert np.allclose(out.data, mid + _np_gelu(y @ layer.w_in.data) @ layer.w_out.data, atol=1e-12)


def test_block_rejects_non_causal_mask(tiny_base):
    h = embed_tokens([4, 9], tiny_base)
    with pytest.raises(ContractException):
        decoder_block_forward(h, tiny_base.layers[0], np.ones((2, 2), dtype=bool), 2)


def test_future_tokens_do_not_change_earlier_positions(tiny_base):
    a = base_forward([3, 20, 21, 22], tiny_base).data
    b = base_forward([3, 40, 30, 50], tiny_base).data
    assert np.array_equal(a[0], b[0])


def test_logits_shape(tiny_base):
    assert base_forward([3, 4, 5, 6, 7], tiny_base).shape == (5, 64)


def test_batched_forward_matches_single(tiny_base):
    batch = np.array([[3, 20, 21], [5, 6, 7]])
    out = base_forward(batch, tiny_base).data
    assert np.array_equal(out[1], base_forward([5, 6, 7], tiny_base).data)


def test_all_zero_weights_give_zero_logits(tiny_config):
    table = {name: np.zeros(shape) for name, shape in BaseTransformer.expected_shapes(tiny_config).items()}
    model = BaseTransformer.from_tensor_table(tiny_config, table)
    assert np.array_equal(base_forward([3, 4, 5], model).data, np.zeros((3, 64)))


def test_full_transformer_gradient_matches_finite_differences(tiny_config):
    model = BaseTransformer.initialize(tiny_config.model_copy(update={"init_std": 0.3}), seed=1)
    tokens = [3, 16, 17, 18]
    targets = [16, 17, 18, 1]
    params = [model.layers[0].w_q, model.layers[1].w_in, model.token_embedding]
    error = finite_diff_check(
        lambda: F.cross_entropy(base_forward(tokens, model), targets),
        params, step=1e-5, floor=1e-4, max_entries_per_tensor=12
    )
    assert error <= 1e-6


def test_parameter_count_matches_config(tiny_config):
    model = BaseTransformer.initialize(tiny_config, seed=0)
    assert model.parameter_count() == BaseTransformer.count_parameters(tiny_config)
    d, hidden, n = 8, 16, 2
    per_layer = 4 * d * d + 2 * d * hidden + 4 * d
    assert model.parameter_count() == 64 * d + 24 * d + n * per_layer + 2 * d


def test_freeze_drops_gradient_slots(tiny_config):
    model = BaseTransformer.initialize(tiny_config, seed=0).freeze()
    assert model.frozen
    assert not any(t.requires_grad for t in model.parameters())
    assert isinstance(model.token_embedding, Tensor)
