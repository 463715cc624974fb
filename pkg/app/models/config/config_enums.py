# Standard library imports
from enum import Enum


class TrainingMode(str, Enum):
    """How adapters are laid out across the stack."""
    PMOE = "pmoe"
    LORA_SEQ = "lora-seq"


class RoutingMode(str, Enum):
    """Granularity of the boundary router: one gate row per token, or one per sequence."""
    TOKEN = "token"
    SEQUENCE = "sequence"


class Projection(str, Enum):
    QUERY = "query"
    VALUE = "value"
