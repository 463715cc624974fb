# Python standard library imports
from typing import Any, Dict

# Third party imports
import numpy as np
from pydantic import BaseModel, ConfigDict, Field


class Checkpoint(BaseModel):
    """
    Decoded checkpoint contents.

    Attributes:
        version (int): Format version read from the header
        metadata (Dict[str, Any]): JSON metadata block (config echo, stage reached, expert count, seed)
        tensors (Dict[str, np.ndarray]): Named float64 arrays in file order
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)

    version: int
    metadata: Dict[str, Any] = Field(default_factory=dict)
    tensors: Dict[str, np.ndarray] = Field(default_factory=dict)

    def section(self, prefix: str) -> Dict[str, np.ndarray]:
        """Tensors under "prefix.", with the prefix removed."""
        head = prefix + "."
        return {name[len(head):]: array for name, array in self.tensors.items() if name.startswith(head)}
