# Python standard library imports
import logging
from collections import OrderedDict
from dataclasses import dataclass
from typing import Dict, List

# Third party imports
import numpy as np

# Application imports
from app.error_handling.exceptions.checkpoint_exception import CheckpointConsistencyException
from app.models.config.base_config import BaseConfig
from app.service.autodiff.tensor import Tensor
from app.utils.constants.stream_constants import StreamConstants
from app.utils.rng_utils import RngUtils

logger = logging.getLogger(__name__)


@dataclass
class LayerWeights:
    """
    Weights of one pre-norm decoder block. Projections act on row vectors:
    y = x @ W, with W stored [d_in x d_out].
    """
    w_q: Tensor
    w_k: Tensor
    w_v: Tensor
    w_o: Tensor
    w_in: Tensor
    w_out: Tensor
    ln1_gamma: Tensor
    ln1_beta: Tensor
    ln2_gamma: Tensor
    ln2_beta: Tensor

    FIELDS = ("w_q", "w_k", "w_v", "w_o", "w_in", "w_out", "ln1_gamma", "ln1_beta", "ln2_gamma", "ln2_beta")

    def named_tensors(self, prefix: str) -> Dict[str, Tensor]:
        return {f"{prefix}.{field}": getattr(self, field) for field in self.FIELDS}


class BaseTransformer:
    """
    The frozen pretrained decoder-only model W₀ that the adapters sit on.

    Attributes:
        config (BaseConfig): Shapes of the model
        token_embedding (Tensor): [V x d_model], also the tied output projection
        position_embedding (Tensor): [max_seq_len x d_model], learned absolute positions
        layers (List[LayerWeights]): The N decoder blocks
        final_gamma, final_beta (Tensor): Final layer norm
        frozen (bool): When True no tensor carries a gradient slot
    """

    def __init__(
        self,
        config: BaseConfig,
        token_embedding: Tensor,
        position_embedding: Tensor,
        layers: List[LayerWeights],
        final_gamma: Tensor,
        final_beta: Tensor
    ):
        self.config = config
        self.token_embedding = token_embedding
        self.position_embedding = position_embedding
        self.layers = layers
        self.final_gamma = final_gamma
        self.final_beta = final_beta
        self.frozen = False

    @classmethod
    def initialize(cls, config: BaseConfig, seed: int) -> "BaseTransformer":
        """Gaussian(0, init_std) matrices, unit/zero layer norms; trainable."""
        rng = RngUtils.stream(seed, StreamConstants.BASE_INIT)
        d, hidden = config.d_model, config.mlp_hidden

        def matrix(rows: int, cols: int) -> Tensor:
            return Tensor(rng.normal(0.0, config.init_std, size=(rows, cols)), requires_grad=True)

        def ones() -> Tensor:
            return Tensor(np.ones(d), requires_grad=True)

        def zeros() -> Tensor:
            return Tensor(np.zeros(d), requires_grad=True)

        token_embedding = matrix(config.vocab_size, d)
        position_embedding = matrix(config.max_seq_len, d)
        layers = [
            LayerWeights(
                w_q=matrix(d, d), w_k=matrix(d, d), w_v=matrix(d, d), w_o=matrix(d, d),
                w_in=matrix(d, hidden), w_out=matrix(hidden, d),
                ln1_gamma=ones(), ln1_beta=zeros(), ln2_gamma=ones(), ln2_beta=zeros()
            )
            for _ in range(config.num_layers)
        ]
        model = cls(config, token_embedding, position_embedding, layers, ones(), zeros())
        model._name_tensors()
        logger.info(
            "Initialized base transformer: %d layers, d_model=%d, %d parameters",
            config.num_layers, d, model.parameter_count()
        )
        return model

    @classmethod
    def from_tensor_table(cls, config: BaseConfig, table: Dict[str, np.ndarray]) -> "BaseTransformer":
        """
        Rebuild a model from named arrays (checkpoint contents). The result is frozen.

        Raises:
            CheckpointConsistencyException: If a tensor is missing or has the wrong shape
        """
        expected = cls.expected_shapes(config)
        missing = [name for name in expected if name not in table]
        if missing:
            raise CheckpointConsistencyException(f"Base tensors missing from checkpoint: {missing[:5]}", "base")
        for name, shape in expected.items():
            if tuple(table[name].shape) != shape:
                raise CheckpointConsistencyException(
                    f"Tensor {name} has shape {tuple(table[name].shape)}, config implies {shape}", "base"
                )

        def get(name: str) -> Tensor:
            return Tensor(np.array(table[name], dtype=np.float64), name=name)

        layers = [
            LayerWeights(**{field: get(f"layers.{i}.{field}") for field in LayerWeights.FIELDS})
            for i in range(config.num_layers)
        ]
        model = cls(
            config, get("token_embedding"), get("position_embedding"),
            layers, get("final_gamma"), get("final_beta")
        )
        model.frozen = True
        return model

    @staticmethod
    def expected_shapes(config: BaseConfig) -> Dict[str, tuple]:
        d, hidden = config.d_model, config.mlp_hidden
        shapes: Dict[str, tuple] = OrderedDict()
        shapes["token_embedding"] = (config.vocab_size, d)
        shapes["position_embedding"] = (config.max_seq_len, d)
        layer_shapes = {
            "w_q": (d, d), "w_k": (d, d), "w_v": (d, d), "w_o": (d, d),
            "w_in": (d, hidden), "w_out": (hidden, d),
            "ln1_gamma": (d,), "ln1_beta": (d,), "ln2_gamma": (d,), "ln2_beta": (d,)
        }
        for i in range(config.num_layers):
            for field in LayerWeights.FIELDS:
                shapes[f"layers.{i}.{field}"] = layer_shapes[field]
        shapes["final_gamma"] = (d,)
        shapes["final_beta"] = (d,)
        return shapes

    @classmethod
    def count_parameters(cls, config: BaseConfig) -> int:
        """Exact parameter total implied by a config, without building the model."""
        return int(sum(np.prod(shape) for shape in cls.expected_shapes(config).values()))

    def _name_tensors(self) -> None:
        for name, tensor in self.named_tensors().items():
            tensor.name = name

    def named_tensors(self) -> Dict[str, Tensor]:
        named: Dict[str, Tensor] = OrderedDict()
        named["token_embedding"] = self.token_embedding
        named["position_embedding"] = self.position_embedding
        for i, layer in enumerate(self.layers):
            named.update(layer.named_tensors(f"layers.{i}"))
        named["final_gamma"] = self.final_gamma
        named["final_beta"] = self.final_beta
        return named

    def parameters(self) -> List[Tensor]:
        return list(self.named_tensors().values())

    def parameter_count(self) -> int:
        return int(sum(t.size for t in self.parameters()))

    def freeze(self) -> "BaseTransformer":
        """Drop every gradient slot; the weights become W₀."""
        for tensor in self.parameters():
            tensor.requires_grad = False
            tensor.grad = None
        self.frozen = True
        return self

    def to_tensor_table(self) -> Dict[str, np.ndarray]:
        return OrderedDict((name, tensor.data) for name, tensor in self.named_tensors().items())

    @property
    def num_layers(self) -> int:
        return self.config.num_layers
