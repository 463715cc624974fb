# Third party imports
import pytest

# Application imports
from app.models.config.base_config import BaseConfig
from app.service.autodiff.tensor import set_checked_mode
from app.service.transformer.base_transformer import BaseTransformer


@pytest.fixture
def tiny_config() -> BaseConfig:
    return BaseConfig(num_layers=2, d_model=8, num_heads=2, vocab_size=64, max_seq_len=24, mlp_hidden=16)


@pytest.fixture
def tiny_base(tiny_config) -> BaseTransformer:
    """A frozen random base; init_std is raised so the logits are not all near zero."""
    config = tiny_config.model_copy(update={"init_std": 0.3})
    return BaseTransformer.initialize(config, seed=0).freeze()


@pytest.fixture(autouse=True)
def _checked_mode():
    set_checked_mode(True)
    yield
    set_checked_mode(True)
