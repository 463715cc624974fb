# Application imports
from app.models.config.config_enums import RoutingMode, TrainingMode
from app.service.adapters.adapter_set import AdapterSet, LoraSeqAdapterSet, PmoeAdapterSet


def build_adapter_set(
    mode: TrainingMode,
    num_layers: int,
    d_model: int,
    rank: int,
    tau: int,
    seed: int,
    routing: RoutingMode = RoutingMode.TOKEN
) -> AdapterSet:
    """Adapters for the start of a stream in the requested layout."""
    if mode == TrainingMode.LORA_SEQ:
        return LoraSeqAdapterSet.create(num_layers, d_model, rank, seed)
    return PmoeAdapterSet.create(num_layers, d_model, rank, tau, seed, routing)


def adapters_from_table(metadata: dict, table: dict) -> AdapterSet:
    """Rebuild whichever adapter layout a checkpoint's metadata names."""
    if metadata.get("mode") == TrainingMode.LORA_SEQ.value:
        return LoraSeqAdapterSet.from_tensor_table(metadata, table)
    return PmoeAdapterSet.from_tensor_table(metadata, table)
