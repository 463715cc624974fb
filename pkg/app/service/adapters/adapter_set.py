# Python standard library imports
import logging
from abc import ABC, abstractmethod
from collections import OrderedDict
from typing import Any, Dict, List, Optional, Set, Tuple

# Third party imports
import numpy as np

# Application imports
from app.error_handling.exceptions.checkpoint_exception import CheckpointConsistencyException
from app.error_handling.exceptions.contract_exception import ContractException
from app.models.config.config_enums import Projection, RoutingMode, TrainingMode
from app.service.adapters.lora_expert import LoraExpert
from app.service.adapters.router import RouterState
from app.service.autodiff.tensor import Tensor
from app.utils.constants.stream_constants import StreamConstants
from app.utils.rng_utils import RngUtils

logger = logging.getLogger(__name__)

ADAPTED_PROJECTIONS: Tuple[Projection, ...] = (Projection.QUERY, Projection.VALUE)

SlotKey = Tuple[int, Projection]


def _lora_tensor(a: np.ndarray) -> Tensor:
    return Tensor(np.array(a, dtype=np.float64), requires_grad=True)


class AdapterSet(ABC):
    """
    Trainable low-rank adapters over a frozen base model.

    Layer indices are 0-based; a PMoE threshold τ puts blocks 0..τ-1 in the
    shallow part and τ..N-1 in the deep part.
    """

    mode: TrainingMode

    def __init__(self, num_layers: int, d_model: int, rank: int, seed: int):
        self.num_layers = num_layers
        self.d_model = d_model
        self.rank = rank
        self.seed = seed

    @abstractmethod
    def named_tensors(self) -> Dict[str, Tensor]:
        ...

    @abstractmethod
    def describe(self) -> Dict[str, Any]:
        """Checkpoint metadata from which the set can be rebuilt."""

    def parameters(self) -> List[Tensor]:
        return list(self.named_tensors().values())

    def trainable_parameters(self) -> List[Tensor]:
        return [t for t in self.parameters() if t.requires_grad]

    def parameter_count(self) -> int:
        return int(sum(t.size for t in self.parameters()))

    def to_tensor_table(self) -> Dict[str, np.ndarray]:
        return OrderedDict((name, tensor.data) for name, tensor in self.named_tensors().items())

    def _name_tensors(self) -> None:
        for name, tensor in self.named_tensors().items():
            tensor.name = name

    @property
    def gate_layer(self) -> Optional[int]:
        """Index of the first block that reads the router gate, None when there is no router."""
        return None

    @property
    def num_experts(self) -> int:
        return 1


class LoraSeqAdapterSet(AdapterSet):
    """The sequential-LoRA baseline: one adapter per adapted projection in every block, no router."""

    mode = TrainingMode.LORA_SEQ

    def __init__(self, num_layers: int, d_model: int, rank: int, seed: int, experts: Dict[SlotKey, LoraExpert]):
        super().__init__(num_layers, d_model, rank, seed)
        self.experts = experts

    @classmethod
    def create(cls, num_layers: int, d_model: int, rank: int, seed: int) -> "LoraSeqAdapterSet":
        rng = RngUtils.stream(seed, StreamConstants.ADAPTER_INIT)
        experts = OrderedDict(
            ((layer, proj), LoraExpert.initialize(d_model, d_model, rank, proj, layer, rng))
            for layer in range(num_layers)
            for proj in ADAPTED_PROJECTIONS
        )
        adapters = cls(num_layers, d_model, rank, seed, experts)
        adapters._name_tensors()
        return adapters

    def expert_for(self, layer_index: int, projection: Projection) -> LoraExpert:
        return self.experts[(layer_index, projection)]

    def named_tensors(self) -> Dict[str, Tensor]:
        named: Dict[str, Tensor] = OrderedDict()
        for (layer, proj), expert in self.experts.items():
            for part, tensor in expert.tensors().items():
                named[f"lora.{layer}.{proj.value}.{part}"] = tensor
        return named

    def describe(self) -> Dict[str, Any]:
        return {
            "mode": self.mode.value,
            "num_layers": self.num_layers,
            "d_model": self.d_model,
            "rank": self.rank,
            "seed": self.seed,
            "projections": [p.value for p in ADAPTED_PROJECTIONS],
        }

    @classmethod
    def from_tensor_table(cls, metadata: Dict[str, Any], table: Dict[str, np.ndarray]) -> "LoraSeqAdapterSet":
        num_layers, d_model, rank = metadata["num_layers"], metadata["d_model"], metadata["rank"]
        experts = OrderedDict()
        for layer in range(num_layers):
            for proj in ADAPTED_PROJECTIONS:
                prefix = f"lora.{layer}.{proj.value}"
                experts[(layer, proj)] = LoraExpert(
                    _lora_tensor(_require(table, f"{prefix}.A", (rank, d_model))),
                    _lora_tensor(_require(table, f"{prefix}.B", (d_model, rank))),
                    proj, layer
                )
        adapters = cls(num_layers, d_model, rank, metadata.get("seed", 0), experts)
        adapters._name_tensors()
        _reject_unexpected(table, adapters)
        return adapters


class PmoeAdapterSet(AdapterSet):
    """
    Asymmetric adapters: one persistent LoRA per projection in each shallow
    block, T experts per projection in each deep block, and the boundary
    router W_g that mixes them.

    Attributes:
        tau (int): Number of shallow blocks, 0 < tau < N
        shallow (Dict[SlotKey, LoraExpert]): Single adapters of blocks 0..τ-1
        deep (Dict[SlotKey, List[LoraExpert]]): Expert lists of blocks τ..N-1, index k is expert k
        router (RouterState): W_g [d_model x T]
        frozen_experts (Set[int]): Expert indices whose tensors carry no gradient slot
        routing (RoutingMode): Token-level or sequence-level gate
    """

    mode = TrainingMode.PMOE

    def __init__(
        self,
        num_layers: int,
        d_model: int,
        rank: int,
        seed: int,
        tau: int,
        shallow: Dict[SlotKey, LoraExpert],
        deep: Dict[SlotKey, List[LoraExpert]],
        router: RouterState,
        routing: RoutingMode = RoutingMode.TOKEN,
        frozen_experts: Optional[Set[int]] = None
    ):
        super().__init__(num_layers, d_model, rank, seed)
        if not 0 < tau < num_layers:
            raise ContractException(f"tau must satisfy 0 < tau < {num_layers}, got {tau}", "PmoeAdapterSet")
        self.tau = tau
        self.shallow = shallow
        self.deep = deep
        self.router = router
        self.routing = routing
        self.frozen_experts: Set[int] = set(frozen_experts or ())
        self._check_expert_counts()

    @classmethod
    def create(
        cls,
        num_layers: int,
        d_model: int,
        rank: int,
        tau: int,
        seed: int,
        routing: RoutingMode = RoutingMode.TOKEN
    ) -> "PmoeAdapterSet":
        """Adapters for the first task: shallow LoRAs, one deep expert, a one-column zero router."""
        if not 0 < tau < num_layers:
            raise ContractException(f"tau must satisfy 0 < tau < {num_layers}, got {tau}", "PmoeAdapterSet.create")
        shallow_rng = RngUtils.stream(seed, StreamConstants.ADAPTER_INIT)
        shallow = OrderedDict(
            ((layer, proj), LoraExpert.initialize(d_model, d_model, rank, proj, layer, shallow_rng))
            for layer in range(tau)
            for proj in ADAPTED_PROJECTIONS
        )
        expert_rng = RngUtils.stream(seed, StreamConstants.EXPERT_INIT, 0)
        deep = OrderedDict(
            ((layer, proj), [LoraExpert.initialize(d_model, d_model, rank, proj, layer, expert_rng)])
            for layer in range(tau, num_layers)
            for proj in ADAPTED_PROJECTIONS
        )
        adapters = cls(num_layers, d_model, rank, seed, tau, shallow, deep, RouterState.initialize(d_model), routing)
        adapters._name_tensors()
        logger.info(
            "Created PMoE adapters: tau=%d, %d shallow and %d deep blocks, rank %d",
            tau, tau, num_layers - tau, rank
        )
        return adapters

    def _check_expert_counts(self) -> None:
        for key, experts in self.deep.items():
            if len(experts) != self.router.num_experts:
                raise ContractException(
                    f"Deep slot {key} holds {len(experts)} experts, router expects {self.router.num_experts}",
                    "PmoeAdapterSet"
                )

    @property
    def num_experts(self) -> int:
        return self.router.num_experts

    @property
    def gate_layer(self) -> Optional[int]:
        return self.tau

    def is_deep(self, layer_index: int) -> bool:
        return layer_index >= self.tau

    def shallow_expert(self, layer_index: int, projection: Projection) -> LoraExpert:
        return self.shallow[(layer_index, projection)]

    def deep_experts(self, layer_index: int, projection: Projection) -> List[LoraExpert]:
        return self.deep[(layer_index, projection)]

    def expert_tensors(self, expert_index: int) -> List[Tensor]:
        """Every A and B that belongs to deep expert k, across layers and projections."""
        return [t for experts in self.deep.values() for t in experts[expert_index].tensors().values()]

    def add_expert(self) -> "PmoeAdapterSet":
        """
        Grow T by one: a fresh expert (gaussian A, zero B) in every deep slot and a
        zero column in W_g. Existing tensors are left untouched.
        """
        new_index = self.num_experts
        rng = RngUtils.stream(self.seed, StreamConstants.EXPERT_INIT, new_index)
        for (layer, proj), experts in self.deep.items():
            experts.append(LoraExpert.initialize(self.d_model, self.d_model, self.rank, proj, layer, rng))
        self.router.append_column()
        self._check_expert_counts()
        self._name_tensors()
        logger.info("Added expert %d; the router now mixes %d experts", new_index, self.num_experts)
        return self

    def named_tensors(self) -> Dict[str, Tensor]:
        named: Dict[str, Tensor] = OrderedDict()
        for (layer, proj), expert in self.shallow.items():
            for part, tensor in expert.tensors().items():
                named[f"shallow.{layer}.{proj.value}.{part}"] = tensor
        for (layer, proj), experts in self.deep.items():
            for index, expert in enumerate(experts):
                for part, tensor in expert.tensors().items():
                    named[f"deep.{layer}.{proj.value}.{index}.{part}"] = tensor
        named["router.W_g"] = self.router.W_g
        return named

    def describe(self) -> Dict[str, Any]:
        return {
            "mode": self.mode.value,
            "num_layers": self.num_layers,
            "d_model": self.d_model,
            "rank": self.rank,
            "seed": self.seed,
            "tau": self.tau,
            "num_experts": self.num_experts,
            "routing": self.routing.value,
            "frozen_experts": sorted(self.frozen_experts),
            "projections": [p.value for p in ADAPTED_PROJECTIONS],
        }

    @classmethod
    def from_tensor_table(cls, metadata: Dict[str, Any], table: Dict[str, np.ndarray]) -> "PmoeAdapterSet":
        """
        Raises:
            CheckpointConsistencyException: If a tensor is missing, mis-shaped, or the
                router width disagrees with the recorded expert count
        """
        num_layers, d_model, rank = metadata["num_layers"], metadata["d_model"], metadata["rank"]
        tau, num_experts = metadata["tau"], metadata["num_experts"]
        w_g = table.get("router.W_g")
        if w_g is None or w_g.shape != (d_model, num_experts):
            raise CheckpointConsistencyException(
                f"router.W_g must be [{d_model} x {num_experts}] to match the recorded expert count", "router.W_g"
            )
        shallow = OrderedDict()
        for layer in range(tau):
            for proj in ADAPTED_PROJECTIONS:
                prefix = f"shallow.{layer}.{proj.value}"
                shallow[(layer, proj)] = LoraExpert(
                    _lora_tensor(_require(table, f"{prefix}.A", (rank, d_model))),
                    _lora_tensor(_require(table, f"{prefix}.B", (d_model, rank))),
                    proj, layer
                )
        deep = OrderedDict()
        for layer in range(tau, num_layers):
            for proj in ADAPTED_PROJECTIONS:
                deep[(layer, proj)] = [
                    LoraExpert(
                        _lora_tensor(_require(table, f"deep.{layer}.{proj.value}.{k}.A", (rank, d_model))),
                        _lora_tensor(_require(table, f"deep.{layer}.{proj.value}.{k}.B", (d_model, rank))),
                        proj, layer
                    )
                    for k in range(num_experts)
                ]
        router = RouterState(_lora_tensor(w_g), num_experts)
        adapters = cls(
            num_layers, d_model, rank, metadata.get("seed", 0), tau, shallow, deep, router,
            RoutingMode(metadata.get("routing", RoutingMode.TOKEN.value)),
            set(metadata.get("frozen_experts", ()))
        )
        adapters._name_tensors()
        _reject_unexpected(table, adapters)
        apply_freezing_policy(adapters, num_experts - 1, bool(adapters.frozen_experts))
        return adapters


def _reject_unexpected(table: Dict[str, np.ndarray], adapters: AdapterSet) -> None:
    unexpected = sorted(set(table) - set(adapters.to_tensor_table()))
    if unexpected:
        raise CheckpointConsistencyException(
            f"Adapter tensors not described by the metadata: {', '.join(unexpected)}", unexpected[0]
        )


def _require(table: Dict[str, np.ndarray], name: str, shape: Tuple[int, ...]) -> np.ndarray:
    if name not in table:
        raise CheckpointConsistencyException(f"Adapter tensor {name} missing from checkpoint", name)
    if tuple(table[name].shape) != shape:
        raise CheckpointConsistencyException(f"Adapter tensor {name} has shape {table[name].shape}, expected {shape}", name)
    return table[name]


def apply_freezing_policy(adapters: AdapterSet, active_expert: int, freeze_old: bool = True) -> Set[int]:
    """
    Trainable set while training expert `active_expert`: the shallow LoRAs, that
    expert and the whole router. With freeze_old every other deep expert loses
    its gradient slots; otherwise everything stays trainable. The LoRA-seq
    baseline is always fully trainable.

    Returns:
        Set[int]: The frozen expert indices
    """
    if not isinstance(adapters, PmoeAdapterSet):
        for tensor in adapters.parameters():
            tensor.requires_grad = True
        return set()
    if not 0 <= active_expert < adapters.num_experts:
        raise ContractException(
            f"Active expert {active_expert} outside 0..{adapters.num_experts - 1}", "apply_freezing_policy"
        )
    frozen = {k for k in range(adapters.num_experts) if k != active_expert} if freeze_old else set()
    for expert in adapters.shallow.values():
        expert.set_trainable(True)
    for experts in adapters.deep.values():
        for index, expert in enumerate(experts):
            expert.set_trainable(index not in frozen)
    adapters.router.W_g.requires_grad = True
    adapters.frozen_experts = frozen
    logger.debug("Freezing policy: active expert %d, frozen %s", active_expert, sorted(frozen))
    return frozen


def adapter_param_formula(
    mode: TrainingMode,
    num_layers: int,
    tau: int,
    rank: int,
    d_model: int,
    num_experts: int,
    projections: int = len(ADAPTED_PROJECTIONS)
) -> int:
    """
    Adapter size from shapes alone (d = k = d_model for query and value):
    pmoe τ·P·r·(d+k) + (N−τ)·T·P·r·(d+k) + d_model·T, lora-seq N·P·r·(d+k).
    """
    per_lora = rank * (d_model + d_model)
    if mode == TrainingMode.LORA_SEQ:
        return num_layers * projections * per_lora
    return tau * projections * per_lora + (num_layers - tau) * num_experts * projections * per_lora + d_model * num_experts


def trainable_param_count(adapters: AdapterSet, mode: TrainingMode, base_param_total: int) -> Tuple[int, float]:
    """
    Adapter parameter count in the given layout and its share of the base model.

    The pmoe count of a LoRA-seq set (or the reverse) is evaluated with the
    set's own dimensions, with τ and T taken from the set when it has them.
    """
    tau = getattr(adapters, "tau", 0)
    count = adapter_param_formula(mode, adapters.num_layers, tau, adapters.rank, adapters.d_model, adapters.num_experts)
    if mode == adapters.mode and count != adapters.parameter_count():
        raise ContractException(
            f"Formula gives {count} parameters but the adapter set holds {adapters.parameter_count()}",
            "trainable_param_count"
        )
    return count, count / base_param_total if base_param_total else 0.0
