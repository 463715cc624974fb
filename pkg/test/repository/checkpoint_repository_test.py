# Third party imports
import numpy as np
import pytest

# Application imports
from app.error_handling.exceptions.checkpoint_exception import (
    CheckpointConsistencyException, CheckpointCorruptionException
)
from app.error_handling.exceptions.persistence_exception import PersistenceException
from app.repository.checkpoint_repository import CheckpointRepository
from app.service.adapters.adapter_set import LoraSeqAdapterSet, PmoeAdapterSet
from app.service.adapters.pmoe_forward import pmoe_forward


@pytest.fixture
def repository() -> CheckpointRepository:
    return CheckpointRepository()


def _trained_looking_adapters() -> PmoeAdapterSet:
    adapters = PmoeAdapterSet.create(2, 8, 2, 1, seed=0).add_expert()
    rng = np.random.default_rng(1)
    for tensor in adapters.parameters():
        tensor.data = rng.normal(size=tensor.shape)
    return adapters


def test_base_and_adapters_reload_bitwise(repository, tiny_base, tmp_path):
    adapters = _trained_looking_adapters()
    path = str(tmp_path / "stage_2.ckpt")
    repository.save_checkpoint(path, {"stage": 2, "seed": 0}, base=tiny_base, adapters=adapters)

    loaded = repository.load_checkpoint(path)
    assert loaded.metadata["stage"] == 2
    assert loaded.metadata["contents"] == ["base", "adapters"]
    assert loaded.base.frozen
    assert loaded.adapters.num_experts == 2
    for name, array in adapters.to_tensor_table().items():
        assert np.array_equal(array, loaded.adapters.to_tensor_table()[name]), name

    tokens = [3, 26, 27, 2]
    before, _ = pmoe_forward(tokens, tiny_base, adapters)
    after, _ = pmoe_forward(tokens, loaded.base, loaded.adapters)
    assert np.array_equal(before.data, after.data)


def test_lora_seq_adapters_reload(repository, tmp_path):
    adapters = LoraSeqAdapterSet.create(2, 8, 2, seed=3)
    path = str(tmp_path / "lora.ckpt")
    repository.save_checkpoint(path, {}, adapters=adapters)
    loaded = repository.load_checkpoint(path)
    assert loaded.base is None
    assert isinstance(loaded.adapters, LoraSeqAdapterSet)


def test_undeclared_tensor_rejected(repository, tmp_path):
    path = str(tmp_path / "odd.ckpt")
    repository.save_raw(path, {"contents": []}, {"base.embedding": np.zeros((2, 2))})
    with pytest.raises(CheckpointConsistencyException):
        repository.load_checkpoint(path)


def test_missing_section_rejected(repository, tmp_path):
    path = str(tmp_path / "bad.ckpt")
    repository.save_raw(path, {"contents": ["base"]}, {})
    with pytest.raises(CheckpointConsistencyException):
        repository.load_checkpoint(path)


def test_base_required(repository, tmp_path):
    path = str(tmp_path / "adapters_only.ckpt")
    repository.save_checkpoint(path, {}, adapters=_trained_looking_adapters())
    with pytest.raises(CheckpointConsistencyException):
        repository.load_base(path)


def test_missing_file(repository, tmp_path):
    with pytest.raises(PersistenceException):
        repository.load_raw(str(tmp_path / "absent.ckpt"))


def test_corrupt_file(repository, tmp_path):
    path = tmp_path / "garbage.ckpt"
    path.write_bytes(b"not a checkpoint")
    with pytest.raises(CheckpointCorruptionException):
        repository.load_raw(str(path))
