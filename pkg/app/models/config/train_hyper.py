# Python standard library imports
from typing import Tuple

# Third party imports
from pydantic import BaseModel, ConfigDict, Field

# Application imports
from app.models.config.config_enums import RoutingMode, TrainingMode


class TrainHyper(BaseModel):
    """
    Hyperparameters of the continual stream.

    NOTE: batch_size is 32 at desk scale; lr and the 1% replay follow the
    reference training regime. replay_frac is the share of each finished task
    kept in memory, replay_mix_frac the share of that memory mixed into every
    epoch of the next tasks.
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    lr: float = Field(default=3e-4, gt=0)
    batch_size: int = Field(default=32, gt=0)
    epochs_per_task: int = Field(default=5, gt=0)
    weight_decay: float = Field(default=0.0, ge=0)
    betas: Tuple[float, float] = (0.9, 0.999)
    adam_eps: float = Field(default=1e-8, gt=0)
    replay_frac: float = Field(default=0.01, ge=0, le=1)
    replay_mix_frac: float = Field(default=1.0, ge=0, le=1)
    aux_loss_weight: float = Field(default=0.0, ge=0)
    mode: TrainingMode = TrainingMode.PMOE
    routing: RoutingMode = RoutingMode.TOKEN
    freeze_old_experts: bool = True
    seed: int = 0


class PretrainHyper(BaseModel):
    """Next-token pretraining of the base model; same AdamW + cosine recipe, more steps."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    steps: int = Field(default=3000, gt=0)
    lr: float = Field(default=1e-3, gt=0)
    batch_size: int = Field(default=32, gt=0)
    weight_decay: float = Field(default=0.01, ge=0)
    betas: Tuple[float, float] = (0.9, 0.999)
    adam_eps: float = Field(default=1e-8, gt=0)
    seed: int = 0
