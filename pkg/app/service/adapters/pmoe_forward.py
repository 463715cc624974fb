# Python standard library imports
import logging
from typing import List, Optional, Sequence, Tuple, Union

# Third party imports
import numpy as np

# Application imports
from app.error_handling.exceptions.contract_exception import ContractException
from app.error_handling.exceptions.tensor_index_exception import TensorIndexException
from app.models.config.config_enums import Projection, RoutingMode
from app.service.adapters.adapter_set import AdapterSet, LoraSeqAdapterSet, PmoeAdapterSet
from app.service.adapters.lora_expert import LoraExpert, lora_delta
from app.service.adapters.router import route_tokens
from app.service.autodiff.tensor import Tensor, no_grad
from app.service.transformer.base_transformer import BaseTransformer
from app.service.transformer.forward import (
    ProjectionFn, _as_token_array, causal_mask, decoder_block_forward, embed_tokens, output_logits
)
from app.utils.batch_utils import BatchUtils

"""
SUMMARY:

The adapted forward pass. Blocks below τ project with W₀ + (BA)^l; the gate
G = softmax(h_τ · W_g) is computed once from the hidden state entering block τ
(the output of the τ-th block) and the same tensor is handed to every deep
block, which projects with W₀ + Σ_k G_k (BA)^l_k. The mixture is applied as a
sum of low-rank products, so no [d x d] expert matrix is ever formed.
"""

logger = logging.getLogger(__name__)


def deep_mixture_forward(x: Tensor, w0: Tensor, experts: Sequence[LoraExpert], gate: Tensor) -> Tensor:
    """
    x @ W₀ + Σ_k G[..., k] · lora_delta(x, expert_k).

    Args:
        x: [..., n, d_model] normalized block input
        w0: [d_model x d] frozen projection
        experts: The T experts of this slot, expert k paired with gate column k
        gate: [..., n, T] per-token gate, or [..., 1, T] for a per-sequence gate

    Raises:
        ContractException: If the expert count differs from the gate width
    """
    if len(experts) != gate.shape[-1]:
        raise ContractException(
            f"{len(experts)} experts but the gate has {gate.shape[-1]} columns", "deep_mixture_forward"
        )
    out = x @ w0
    for k, expert in enumerate(experts):
        out = out + gate[..., k:k + 1] * lora_delta(x, expert)
    return out


def _single_lora_projection(experts: dict, layer_index: int) -> ProjectionFn:
    def project(name: str, x: Tensor, weight: Tensor) -> Tensor:
        return x @ weight + lora_delta(x, experts[(layer_index, Projection(name))])
    return project


def _mixture_projection(adapters: PmoeAdapterSet, layer_index: int, gate: Tensor) -> ProjectionFn:
    def project(name: str, x: Tensor, weight: Tensor) -> Tensor:
        return deep_mixture_forward(x, weight, adapters.deep_experts(layer_index, Projection(name)), gate)
    return project


def compute_gate(h_tau: Tensor, adapters: PmoeAdapterSet, lengths: Optional[np.ndarray] = None) -> Tensor:
    """
    Token routing gives one gate row per position [B x n x T]. Sequence
    routing mean-pools h_τ over the real (non-pad) positions and returns
    [B x 1 x T], broadcast over positions by the deep blocks.
    """
    if adapters.routing == RoutingMode.TOKEN:
        return route_tokens(h_tau, adapters.router)
    batch, n, _ = h_tau.shape
    lengths = np.full(batch, n) if lengths is None else np.asarray(lengths)
    weights = BatchUtils.length_mask(lengths, n) / np.maximum(lengths, 1)[:, None]
    pooled = (h_tau * weights[:, :, None]).sum(axis=1, keepdims=True)
    return route_tokens(pooled, adapters.router)


def pmoe_forward(
    tokens: Union[Sequence[int], np.ndarray],
    base: BaseTransformer,
    adapters: AdapterSet,
    lengths: Optional[np.ndarray] = None
) -> Tuple[Tensor, Optional[Tensor]]:
    """
    Adapted logits and the router gate.

    Args:
        tokens: One sequence or a right-padded [B x n] batch
        base: The frozen base model
        adapters: PMoE adapters, or the LoRA-seq baseline (which has no gate)
        lengths: Real lengths of a padded batch; only sequence routing reads them

    Returns:
        (logits [n x V] or [B x n x V], G [n x T] / [B x n x T] or None for LoRA-seq)
    """
    if adapters.num_layers != base.num_layers:
        raise ContractException(
            f"Adapters cover {adapters.num_layers} blocks, the base model has {base.num_layers}", "pmoe_forward"
        )
    single = np.asarray(tokens).ndim <= 1
    h = embed_tokens(_as_token_array(tokens), base)
    allowed = causal_mask(h.shape[1])
    gate: Optional[Tensor] = None

    for index, layer in enumerate(base.layers):
        if isinstance(adapters, PmoeAdapterSet) and adapters.is_deep(index):
            if gate is None:
                gate = compute_gate(h, adapters, lengths)
            project = _mixture_projection(adapters, index, gate)
        elif isinstance(adapters, PmoeAdapterSet):
            project = _single_lora_projection(adapters.shallow, index)
        elif isinstance(adapters, LoraSeqAdapterSet):
            project = _single_lora_projection(adapters.experts, index)
        else:
            raise ContractException(f"Unsupported adapter set {type(adapters).__name__}", "pmoe_forward")
        h = decoder_block_forward(h, layer, allowed, base.config.num_heads, project, base.config.ln_eps)

    logits = output_logits(h, base)
    if single:
        return logits[0], gate[0] if gate is not None else None
    return logits, gate


def routing_aux_loss(gate: Tensor, task_id: int, mask: Optional[np.ndarray] = None) -> Tensor:
    """
    Mean of −log G[..., k] over the positions selected by mask (all positions
    when mask is None).

    Raises:
        TensorIndexException: If k is not a valid expert index
    """
    num_experts = gate.shape[-1]
    if not 0 <= task_id < num_experts:
        raise TensorIndexException("Routing target is not an existing expert", task_id, num_experts)
    nll = -(gate[..., task_id].log())
    if mask is None:
        return nll.mean()
    weights = np.broadcast_to(np.asarray(mask, dtype=np.float64), nll.shape)
    return (nll * weights).sum() * (1.0 / max(float(weights.sum()), 1.0))


class AdaptedTransformer:
    """Base model plus adapters, seen as a language model for decoding and evaluation."""

    def __init__(self, base: BaseTransformer, adapters: AdapterSet):
        self.base = base
        self.adapters = adapters

    @property
    def max_seq_len(self) -> int:
        return self.base.config.max_seq_len

    def batch_logits(self, tokens: np.ndarray) -> np.ndarray:
        with no_grad():
            logits, _ = pmoe_forward(np.asarray(tokens), self.base, self.adapters)
        return logits.data

    def gate(self, tokens: Sequence[int]) -> Optional[np.ndarray]:
        """[n x T] gate of one sequence; None for adapters without a router."""
        with no_grad():
            _, gate = pmoe_forward(list(tokens), self.base, self.adapters)
        if gate is None:
            return None
        return np.broadcast_to(gate.data, (len(tokens), gate.shape[-1])).copy()

    def gates(self, sequences: Sequence[Sequence[int]], batch_size: int = 64) -> List[np.ndarray]:
        """Per-sequence [n_i x T] gates, batched by padding; pad rows are dropped."""
        results: List[np.ndarray] = []
        for group in BatchUtils.chunk(list(sequences), batch_size):
            tokens, lengths = BatchUtils.pad_sequences(group)
            with no_grad():
                _, gate = pmoe_forward(tokens, self.base, self.adapters, lengths)
            if gate is None:
                return []
            full = np.broadcast_to(gate.data, (tokens.shape[0], tokens.shape[1], gate.shape[-1]))
            results.extend(full[row, :length].copy() for row, length in enumerate(lengths))
        return results
