# Python standard library imports
from unittest.mock import patch

# Third party imports
import numpy as np
import pytest

# Application imports
from app.error_handling.exceptions.contract_exception import ContractException
from app.error_handling.exceptions.tensor_index_exception import TensorIndexException
from app.models.config.base_config import BaseConfig
from app.models.config.config_enums import Projection, RoutingMode
from app.service.adapters import pmoe_forward as pmoe_module
from app.service.adapters.adapter_set import LoraSeqAdapterSet, PmoeAdapterSet
from app.service.adapters.lora_expert import LoraExpert, lora_delta
from app.service.adapters.pmoe_forward import (
    AdaptedTransformer, deep_mixture_forward, pmoe_forward, routing_aux_loss
)
from app.service.autodiff import functional as F
from app.service.autodiff.gradient_check import finite_diff_check
from app.service.autodiff.tensor import Tensor
from app.service.transformer.base_transformer import BaseTransformer
from app.service.transformer.forward import base_forward

TOKENS = [3, 16, 17, 18, 2]


def _random_experts(count, d=8, rank=2, seed=0):
    rng = np.random.default_rng(seed)
    return [
        LoraExpert(Tensor(rng.normal(size=(rank, d))), Tensor(rng.normal(size=(d, rank))), Projection.QUERY, 1)
        for _ in range(count)
    ]


def _randomize(adapters, seed=0, scale=0.3):
    rng = np.random.default_rng(seed)
    for tensor in adapters.parameters():
        tensor.data[...] = rng.normal(scale=scale, size=tensor.shape)


def test_one_hot_gate_selects_one_expert():
    rng = np.random.default_rng(1)
    experts = _random_experts(3)
    x = Tensor(rng.normal(size=(4, 8)))
    w0 = Tensor(rng.normal(size=(8, 8)))
    gate = np.zeros((4, 3))
    gate[:, 1] = 1.0
    out = deep_mixture_forward(x, w0, experts, Tensor(gate))
    assert np.allclose(out.data, (x @ w0 + lora_delta(x, experts[1])).data, rtol=0, atol=1e-15)


def test_zero_experts_give_base_projection():
    rng = np.random.default_rng(2)
    experts = [LoraExpert(Tensor(rng.normal(size=(2, 8))), Tensor(np.zeros((8, 2))), Projection.VALUE, 1) for _ in range(2)]
    x = Tensor(rng.normal(size=(3, 8)))
    w0 = Tensor(rng.normal(size=(8, 8)))
    gate = Tensor(np.full((3, 2), 0.5))
    assert np.array_equal(deep_mixture_forward(x, w0, experts, gate).data, (x @ w0).data)


def test_mixture_matches_dense_per_token_oracle():
    rng = np.random.default_rng(3)
    experts = _random_experts(3, seed=4)
    x = rng.normal(size=(5, 8))
    w0 = rng.normal(size=(8, 8))
    logits = rng.normal(size=(5, 3))
    gate = np.exp(logits) / np.exp(logits).sum(axis=1, keepdims=True)
    out = deep_mixture_forward(Tensor(x), Tensor(w0), experts, Tensor(gate)).data
    for i in range(5):
        mixed = w0 + sum(gate[i, k] * experts[k].dense_delta().T for k in range(3))
        assert np.allclose(out[i], x[i] @ mixed, atol=1e-10)


def test_expert_count_must_match_gate():
    with pytest.raises(ContractException):
        deep_mixture_forward(Tensor(np.ones((2, 8))), Tensor(np.eye(8)), _random_experts(2), Tensor(np.ones((2, 3))))


def test_zero_init_is_bitwise_base(tiny_base):
    adapters = PmoeAdapterSet.create(2, 8, 2, 1, seed=0).add_expert()
    adapters.router.W_g.data[...] = np.random.default_rng(5).normal(size=(8, 2))
    logits, gate = pmoe_forward(TOKENS, tiny_base, adapters)
    assert np.array_equal(logits.data, base_forward(TOKENS, tiny_base).data)
    assert gate.shape == (len(TOKENS), 2)


def test_zero_init_is_bitwise_base_on_random_sequences(tiny_base):
    adapters = PmoeAdapterSet.create(2, 8, 2, 1, seed=0).add_expert().add_expert()
    rng = np.random.default_rng(11)
    adapters.router.W_g.data[...] = rng.normal(size=(8, 3))
    for _ in range(100):
        tokens = rng.integers(0, 64, size=int(rng.integers(1, 25)))
        logits, _ = pmoe_forward(tokens, tiny_base, adapters)
        assert np.array_equal(logits.data, base_forward(tokens, tiny_base).data), list(tokens)


def test_zero_init_lora_seq_is_bitwise_base(tiny_base):
    adapters = LoraSeqAdapterSet.create(2, 8, 2, seed=0)
    logits, gate = pmoe_forward(TOKENS, tiny_base, adapters)
    assert gate is None
    assert np.array_equal(logits.data, base_forward(TOKENS, tiny_base).data)


def test_every_deep_block_reads_the_same_gate(tiny_config):
    base = BaseTransformer.initialize(tiny_config.model_copy(update={"num_layers": 4}), seed=0).freeze()
    adapters = PmoeAdapterSet.create(4, 8, 2, 1, seed=0).add_expert()
    with patch.object(pmoe_module, "deep_mixture_forward", wraps=deep_mixture_forward) as spy:
        pmoe_forward(TOKENS, base, adapters)
    # 3 deep blocks, query and value each
    assert spy.call_count == 6
    gates = [call.args[3] for call in spy.call_args_list]
    assert all(g is gates[0] for g in gates)


def test_single_expert_equals_plain_lora_stack(tiny_base):
    """T=1: the gate is identically 1, so PMoE is one LoRA per projection in every block."""
    pmoe = PmoeAdapterSet.create(2, 8, 2, 1, seed=0)
    _randomize(pmoe, seed=6)
    lora = LoraSeqAdapterSet.create(2, 8, 2, seed=0)
    for (layer, proj), expert in lora.experts.items():
        source = pmoe.shallow_expert(layer, proj) if layer < 1 else pmoe.deep_experts(layer, proj)[0]
        expert.A.data[...] = source.A.data
        expert.B.data[...] = source.B.data
    pmoe_logits, gate = pmoe_forward(TOKENS, tiny_base, pmoe)
    lora_logits, _ = pmoe_forward(TOKENS, tiny_base, lora)
    assert np.array_equal(gate.data, np.ones((len(TOKENS), 1)))
    assert np.allclose(pmoe_logits.data, lora_logits.data, atol=1e-12)


def test_pmoe_gradients_match_finite_differences(tiny_base):
    adapters = PmoeAdapterSet.create(2, 8, 2, 1, seed=0).add_expert()
    _randomize(adapters, seed=7)
    targets = TOKENS[1:] + [1]
    params = [
        adapters.router.W_g,
        adapters.shallow_expert(0, Projection.QUERY).A,
        adapters.deep_experts(1, Projection.VALUE)[1].B,
    ]

    def loss():
        logits, gate = pmoe_forward(TOKENS, tiny_base, adapters)
        return F.cross_entropy(logits, targets) + routing_aux_loss(gate, 1) * 0.5

    assert finite_diff_check(loss, params, floor=1e-4) <= 1e-5


@pytest.mark.parametrize("config_seed", range(20))
def test_gradients_on_random_small_configs(config_seed):
    rng = np.random.default_rng(100 + config_seed)
    num_layers = int(rng.integers(2, 5))
    d_model = int(rng.choice([8, 16, 32]))
    config = BaseConfig(
        num_layers=num_layers, d_model=d_model, num_heads=int(rng.choice([1, 2])), vocab_size=64,
        max_seq_len=12, mlp_hidden=2 * d_model, init_std=0.2
    )
    base = BaseTransformer.initialize(config, seed=config_seed).freeze()
    adapters = PmoeAdapterSet.create(num_layers, d_model, 2, int(rng.integers(1, num_layers)), seed=config_seed)
    for _ in range(int(rng.integers(0, 3))):
        adapters.add_expert()
    _randomize(adapters, seed=config_seed, scale=0.2)
    tokens = [int(t) for t in rng.integers(3, 64, size=int(rng.integers(2, 8)))]
    targets = tokens[1:] + [1]

    def loss():
        logits, gate = pmoe_forward(tokens, base, adapters)
        return F.cross_entropy(logits, targets) + routing_aux_loss(gate, 0) * 0.1

    assert finite_diff_check(loss, adapters.parameters(), floor=1e-4, max_entries_per_tensor=2) <= 1e-5


def test_sequence_routing_gives_one_row_per_sequence(tiny_base):
    adapters = PmoeAdapterSet.create(2, 8, 2, 1, seed=0, routing=RoutingMode.SEQUENCE).add_expert()
    _randomize(adapters, seed=8)
    _, gate = pmoe_forward(TOKENS, tiny_base, adapters)
    assert gate.shape == (1, 2)
    rows = AdaptedTransformer(tiny_base, adapters).gate(TOKENS)
    assert rows.shape == (len(TOKENS), 2)
    assert np.allclose(rows, rows[0])


def test_padded_batch_gates_ignore_padding(tiny_base):
    adapters = PmoeAdapterSet.create(2, 8, 2, 1, seed=0, routing=RoutingMode.SEQUENCE).add_expert()
    _randomize(adapters, seed=9)
    model = AdaptedTransformer(tiny_base, adapters)
    batched = model.gates([TOKENS, [3, 20, 2]])
    assert np.allclose(batched[1], model.gate([3, 20, 2]), atol=1e-12)
    assert np.allclose(batched[0], model.gate(TOKENS), atol=1e-12)


@pytest.mark.parametrize(
    "rows, task_id, expected",
    [
        ([[0.5, 0.5]], 0, np.log(2.0)),
        ([[0.0, 1.0]], 1, 0.0),
        ([[0.5, 0.5], [0.25, 0.75]], 1, (np.log(2.0) + np.log(4.0 / 3.0)) / 2),
    ]
)
def test_routing_aux_loss_examples(rows, task_id, expected):
    assert routing_aux_loss(Tensor(rows), task_id).item() == pytest.approx(expected, abs=1e-12)


def test_routing_aux_loss_masks_padding():
    gate = Tensor([[[0.5, 0.5], [0.9, 0.1]]])
    loss = routing_aux_loss(gate, 0, mask=np.array([[1.0, 0.0]]))
    assert loss.item() == pytest.approx(np.log(2.0))


def test_routing_aux_loss_rejects_unknown_expert():
    with pytest.raises(TensorIndexException):
        routing_aux_loss(Tensor([[0.5, 0.5]]), 2)
