# Python standard library imports
import logging
from dataclasses import dataclass
from typing import Dict

# Third party imports
import numpy as np

# Application imports
from app.error_handling.exceptions.contract_exception import ContractException
from app.error_handling.exceptions.dimension_exception import DimensionException
from app.models.config.config_enums import Projection
from app.service.autodiff.tensor import Tensor

logger = logging.getLogger(__name__)

LORA_INIT_STD = 0.02


@dataclass
class LoraExpert:
    """
    Low-rank update ΔW = B·A of one attention projection.

    Attributes:
        A (Tensor): [r x k], gaussian at creation
        B (Tensor): [d x r], zero at creation so a fresh expert adds nothing
        projection (Projection): The projection it is attached to
        layer_index (int): 0-based block index
    """
    A: Tensor
    B: Tensor
    projection: Projection
    layer_index: int

    def __post_init__(self):
        if self.A.ndim != 2 or self.B.ndim != 2 or self.B.shape[1] != self.A.shape[0]:
            raise DimensionException("LoRA factors do not chain", self.B.shape, self.A.shape, "LoraExpert")

    @classmethod
    def initialize(
        cls,
        d: int,
        k: int,
        rank: int,
        projection: Projection,
        layer_index: int,
        rng: np.random.Generator
    ) -> "LoraExpert":
        """
        Fresh expert: A ~ N(0, 0.02²), B = 0.

        Raises:
            ContractException: If rank is not at most min(d, k) / 4
        """
        if rank < 1 or 4 * rank > min(d, k):
            raise ContractException(f"LoRA rank {rank} must satisfy 1 <= r <= min({d}, {k}) / 4", "LoraExpert.initialize")
        a = Tensor(rng.normal(0.0, LORA_INIT_STD, size=(rank, k)), requires_grad=True)
        b = Tensor(np.zeros((d, rank)), requires_grad=True)
        return cls(a, b, projection, layer_index)

    @property
    def rank(self) -> int:
        return self.A.shape[0]

    @property
    def parameter_count(self) -> int:
        return self.A.size + self.B.size

    def tensors(self) -> Dict[str, Tensor]:
        return {"A": self.A, "B": self.B}

    def set_trainable(self, trainable: bool) -> None:
        for tensor in (self.A, self.B):
            tensor.requires_grad = trainable
            if not trainable:
                tensor.grad = None

    def dense_delta(self) -> np.ndarray:
        """ΔW = B·A as a [d x k] array; for analysis only, never used in the forward pass."""
        return self.B.data @ self.A.data


def lora_delta(x: Tensor, expert: LoraExpert) -> Tensor:
    """
    B·(A·x) for each row x of the input, computed as (x @ Aᵀ) @ Bᵀ so the
    [d x k] product is never formed.

    Args:
        x: [..., k] input rows

    Returns:
        Tensor: [..., d]

    Raises:
        DimensionException: If the input width differs from k
    """
    if x.shape[-1] != expert.A.shape[1]:
        raise DimensionException(
            f"LoRA input width must be k={expert.A.shape[1]}", x.shape, expert.A.shape, "lora_delta"
        )
    return (x @ expert.A.T) @ expert.B.T
