# Python standard library imports
from dataclasses import dataclass

# Third party imports
import numpy as np

# Application imports
from app.error_handling.exceptions.contract_exception import ContractException
from app.service.autodiff import functional as F
from app.service.autodiff.tensor import Tensor


@dataclass
class RouterState:
    """Linear gate W_g [d_model x T] read at the shallow/deep boundary."""
    W_g: Tensor
    num_experts: int

    @classmethod
    def initialize(cls, d_model: int, num_experts: int = 1) -> "RouterState":
        """Zero logits: the first gate is uniform."""
        return cls(Tensor(np.zeros((d_model, num_experts)), requires_grad=True, name="router.W_g"), num_experts)

    def append_column(self) -> None:
        """One more expert. Existing columns are copied unchanged, the new one is zero."""
        widened = np.concatenate([self.W_g.data, np.zeros((self.W_g.shape[0], 1))], axis=1)
        self.W_g = Tensor(widened, requires_grad=self.W_g.requires_grad, name="router.W_g")
        self.num_experts += 1


def route_tokens(h_tau: Tensor, router: RouterState) -> Tensor:
    """
    G = softmax(h_τ · W_g), one probability row per token.

    Raises:
        ContractException: If W_g's column count differs from the expert count
    """
    if router.num_experts < 1 or router.W_g.shape[-1] != router.num_experts:
        raise ContractException(
            f"Router has {router.W_g.shape[-1]} columns but {router.num_experts} experts", "route_tokens"
        )
    return F.softmax(h_tau @ router.W_g, axis=-1)
