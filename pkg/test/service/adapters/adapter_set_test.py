# Third party imports
import numpy as np
import pytest

# Application imports
from app.error_handling.exceptions.checkpoint_exception import CheckpointConsistencyException
from app.error_handling.exceptions.contract_exception import ContractException
from app.models.config.config_enums import Projection, RoutingMode, TrainingMode
from app.service.adapters.adapter_factory import adapters_from_table, build_adapter_set
from app.service.adapters.adapter_set import (
    LoraSeqAdapterSet, PmoeAdapterSet, adapter_param_formula, apply_freezing_policy, trainable_param_count
)


def test_hand_parameter_count():
    adapters = PmoeAdapterSet.create(num_layers=4, d_model=8, rank=2, tau=2, seed=0)
    adapters.add_expert().add_expert()
    count, fraction = trainable_param_count(adapters, TrainingMode.PMOE, base_param_total=1072)
    assert count == 536
    assert fraction == pytest.approx(0.5)


@pytest.mark.parametrize("tau", [1, 2, 3])
def test_single_expert_pmoe_is_lora_seq_plus_router(tau):
    pmoe = adapter_param_formula(TrainingMode.PMOE, 4, tau, 2, 8, 1)
    lora = adapter_param_formula(TrainingMode.LORA_SEQ, 4, tau, 2, 8, 1)
    assert pmoe == lora + 8


def test_lora_seq_count_matches_tensors():
    adapters = LoraSeqAdapterSet.create(num_layers=3, d_model=8, rank=2, seed=0)
    count, _ = trainable_param_count(adapters, TrainingMode.LORA_SEQ, 1000)
    assert count == adapters.parameter_count() == 3 * 2 * 2 * 16


def test_add_expert_grows_every_deep_slot():
    adapters = PmoeAdapterSet.create(num_layers=4, d_model=8, rank=2, tau=2, seed=0)
    assert adapters.router.W_g.shape == (8, 1)
    for _ in range(3):
        adapters.add_expert()
    assert adapters.num_experts == 4
    assert adapters.router.W_g.shape == (8, 4)
    for layer in (2, 3):
        for proj in (Projection.QUERY, Projection.VALUE):
            assert len(adapters.deep_experts(layer, proj)) == 4
    assert np.array_equal(adapters.router.W_g.data[:, 1:], np.zeros((8, 3)))


def test_add_expert_leaves_existing_tensors_alone():
    adapters = PmoeAdapterSet.create(num_layers=4, d_model=8, rank=2, tau=2, seed=0)
    adapters.router.W_g.data[:] = np.linspace(-1.0, 1.0, 8).reshape(8, 1)
    before = {name: array.copy() for name, array in adapters.to_tensor_table().items()}
    adapters.add_expert()
    after = adapters.to_tensor_table()
    assert after["router.W_g"].shape == (8, 2)
    assert np.array_equal(after["router.W_g"][:, :1], before.pop("router.W_g"))
    assert np.array_equal(after["router.W_g"][:, 1], np.zeros(8))
    for name, array in before.items():
        assert np.array_equal(after[name], array), name


def test_new_expert_b_is_zero_and_a_is_seeded():
    first = PmoeAdapterSet.create(num_layers=4, d_model=8, rank=2, tau=2, seed=3).add_expert()
    second = PmoeAdapterSet.create(num_layers=4, d_model=8, rank=2, tau=2, seed=3).add_expert()
    new = first.deep_experts(2, Projection.QUERY)[1]
    assert np.array_equal(new.B.data, np.zeros((8, 2)))
    assert np.array_equal(new.A.data, second.deep_experts(2, Projection.QUERY)[1].A.data)


def test_tensor_names():
    adapters = PmoeAdapterSet.create(num_layers=3, d_model=8, rank=2, tau=1, seed=0)
    names = set(adapters.named_tensors())
    assert {"shallow.0.query.A", "deep.2.value.0.B", "router.W_g"} <= names
    assert all(t.name == n for n, t in adapters.named_tensors().items())


@pytest.mark.parametrize("tau", [0, 4, 5])
def test_tau_must_split_the_stack(tau):
    with pytest.raises(ContractException):
        PmoeAdapterSet.create(num_layers=4, d_model=8, rank=2, tau=tau, seed=0)


def test_freezing_policy_freezes_old_experts():
    adapters = PmoeAdapterSet.create(num_layers=4, d_model=8, rank=2, tau=2, seed=0).add_expert().add_expert()
    frozen = apply_freezing_policy(adapters, active_expert=2)
    assert frozen == {0, 1}
    assert not any(t.requires_grad for t in adapters.expert_tensors(0) + adapters.expert_tensors(1))
    assert all(t.requires_grad for t in adapters.expert_tensors(2))
    assert adapters.router.W_g.requires_grad
    assert all(e.A.requires_grad for e in adapters.shallow.values())


def test_freezing_policy_can_keep_everything_trainable():
    adapters = PmoeAdapterSet.create(num_layers=4, d_model=8, rank=2, tau=2, seed=0).add_expert()
    assert apply_freezing_policy(adapters, active_expert=1, freeze_old=False) == set()
    assert len(adapters.trainable_parameters()) == len(adapters.parameters())


def test_freezing_policy_rejects_unknown_expert():
    adapters = PmoeAdapterSet.create(num_layers=4, d_model=8, rank=2, tau=2, seed=0)
    with pytest.raises(ContractException):
        apply_freezing_policy(adapters, active_expert=1)


@pytest.mark.parametrize("mode", [TrainingMode.PMOE, TrainingMode.LORA_SEQ])
def test_tensor_table_rebuilds_the_same_set(mode):
    adapters = build_adapter_set(mode, 4, 8, 2, 2, seed=1, routing=RoutingMode.SEQUENCE)
    if mode == TrainingMode.PMOE:
        adapters.add_expert()
    rebuilt = adapters_from_table(adapters.describe(), dict(adapters.to_tensor_table()))
    assert type(rebuilt) is type(adapters)
    assert rebuilt.describe() == adapters.describe()
    for name, array in adapters.to_tensor_table().items():
        assert np.array_equal(rebuilt.to_tensor_table()[name], array)


def test_router_width_must_match_expert_count():
    adapters = PmoeAdapterSet.create(num_layers=4, d_model=8, rank=2, tau=2, seed=0).add_expert()
    metadata = dict(adapters.describe(), num_experts=3)
    with pytest.raises(CheckpointConsistencyException):
        PmoeAdapterSet.from_tensor_table(metadata, dict(adapters.to_tensor_table()))


def test_expert_beyond_recorded_count_rejected():
    adapters = PmoeAdapterSet.create(num_layers=4, d_model=8, rank=2, tau=2, seed=0).add_expert()
    table = dict(adapters.to_tensor_table())
    table["deep.2.query.2.A"] = np.zeros((2, 8))
    with pytest.raises(CheckpointConsistencyException) as excinfo:
        PmoeAdapterSet.from_tensor_table(adapters.describe(), table)
    assert excinfo.value.key == "deep.2.query.2.A"
