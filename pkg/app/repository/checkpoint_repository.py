# Python standard library imports
import logging
import os
from dataclasses import dataclass
from typing import Any, Dict, Optional

# Application imports
from app.error_handling.exceptions.checkpoint_exception import CheckpointConsistencyException
from app.error_handling.exceptions.persistence_exception import PersistenceException
from app.models.checkpoint.checkpoint import Checkpoint
from app.models.config.base_config import BaseConfig
from app.persistence.checkpoint_codec import decode_checkpoint, encode_checkpoint
from app.service.adapters.adapter_factory import adapters_from_table
from app.service.adapters.adapter_set import AdapterSet
from app.service.transformer.base_transformer import BaseTransformer

BASE_PREFIX = "base"
ADAPTER_PREFIX = "adapters"


@dataclass
class LoadedCheckpoint:
    metadata: Dict[str, Any]
    base: Optional[BaseTransformer] = None
    adapters: Optional[AdapterSet] = None


class CheckpointRepository:
    """Reads and writes model/adapter checkpoints on the local filesystem."""

    def __init__(self):
        self.logger = logging.getLogger(__name__)

    def save_raw(self, path: str, metadata: Dict[str, Any], tensors: Dict[str, Any]) -> None:
        """
        Raises:
            PersistenceException: If the file cannot be written
        """
        payload = encode_checkpoint(metadata, tensors)
        try:
            directory = os.path.dirname(path)
            if directory:
                os.makedirs(directory, exist_ok=True)
            with open(path, "wb") as f:
                f.write(payload)
        except OSError as e:
            self.logger.error("Failed to write checkpoint %s: %s", path, e)
            raise PersistenceException("Could not write checkpoint", path, e) from e
        self.logger.info("Saved checkpoint %s (%d tensors, %d bytes)", path, len(tensors), len(payload))

    def load_raw(self, path: str) -> Checkpoint:
        """
        Raises:
            PersistenceException: If the file cannot be read
            CheckpointCorruptionException: If the bytes do not decode
        """
        try:
            with open(path, "rb") as f:
                payload = f.read()
        except OSError as e:
            self.logger.error("Failed to read checkpoint %s: %s", path, e)
            raise PersistenceException("Could not read checkpoint", path, e) from e
        return decode_checkpoint(payload, path)

    def save_checkpoint(
        self,
        path: str,
        metadata: Dict[str, Any],
        base: Optional[BaseTransformer] = None,
        adapters: Optional[AdapterSet] = None
    ) -> None:
        """Store a base model and/or adapters plus free-form metadata in one file."""
        full_metadata = dict(metadata)
        tensors: Dict[str, Any] = {}
        contents = []
        if base is not None:
            contents.append(BASE_PREFIX)
            full_metadata["base_config"] = base.config.model_dump()
            tensors.update({f"{BASE_PREFIX}.{name}": array for name, array in base.to_tensor_table().items()})
        if adapters is not None:
            contents.append(ADAPTER_PREFIX)
            full_metadata["adapters"] = adapters.describe()
            tensors.update({f"{ADAPTER_PREFIX}.{name}": array for name, array in adapters.to_tensor_table().items()})
        full_metadata["contents"] = contents
        self.save_raw(path, full_metadata, tensors)

    def load_checkpoint(self, path: str) -> LoadedCheckpoint:
        """
        Rebuild whatever the checkpoint holds. A loaded base model is frozen.

        Raises:
            CheckpointConsistencyException: If the metadata and tensors disagree
        """
        checkpoint = self.load_raw(path)
        metadata = checkpoint.metadata
        contents = metadata.get("contents", [])
        loaded = LoadedCheckpoint(metadata=metadata)
        try:
            if BASE_PREFIX in contents:
                config = BaseConfig(**metadata["base_config"])
                loaded.base = BaseTransformer.from_tensor_table(config, checkpoint.section(BASE_PREFIX))
            if ADAPTER_PREFIX in contents:
                loaded.adapters = adapters_from_table(metadata["adapters"], checkpoint.section(ADAPTER_PREFIX))
        except KeyError as e:
            raise CheckpointConsistencyException(f"Metadata lacks {e}", str(e)) from e
        expected = {name for name in checkpoint.tensors if name.split(".", 1)[0] in contents}
        if expected != set(checkpoint.tensors):
            raise CheckpointConsistencyException("Checkpoint holds tensors outside its declared contents", "contents")
        self.logger.info("Loaded checkpoint %s (contents: %s)", path, ", ".join(contents) or "none")
        return loaded

    def load_base(self, path: str) -> BaseTransformer:
        loaded = self.load_checkpoint(path)
        if loaded.base is None:
            raise CheckpointConsistencyException("Checkpoint holds no base model", "contents")
        return loaded.base
