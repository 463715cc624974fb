# Python standard library imports
from typing import Tuple

# Third party imports
from pydantic import BaseModel, ConfigDict, Field


class TaskSpec(BaseModel):
    """
    A synthetic task of the stream.

    Attributes:
        task_id (int): 0..7, also the task's position in the fixed stream order
        name (str): Human-readable name
        instruction_token (int): Reserved vocabulary symbol that opens every prompt of this task
        alphabet (Tuple[int, ...]): Payload symbols the task draws from
        min_length, max_length (int): Payload length range (inclusive)
        generator_seed (int): Offset mixed into the dataset seed
    """
    model_config = ConfigDict(frozen=True)

    task_id: int = Field(ge=0, le=7)
    name: str
    instruction_token: int
    alphabet: Tuple[int, ...]
    min_length: int = Field(default=3, ge=1)
    max_length: int = Field(default=8, ge=1)
    generator_seed: int = 0


class ProbeSet(BaseModel):
    """A held-out general-ability probe: exact-match continuation of one grammar family."""
    model_config = ConfigDict(frozen=True)

    family: int
    name: str
    prompts: Tuple[Tuple[int, ...], ...]
    continuations: Tuple[Tuple[int, ...], ...]


class GeneralCorpus(BaseModel):
    """Pretraining sequences plus the M held-out probe sets."""
    model_config = ConfigDict(frozen=True)

    sequences: Tuple[Tuple[int, ...], ...]
    probes: Tuple[ProbeSet, ...]
