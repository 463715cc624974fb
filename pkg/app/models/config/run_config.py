# Python standard library imports
from typing import List, Optional

# Third party imports
from pydantic import BaseModel, ConfigDict, Field, model_validator

# Application imports
from app.models.config.base_config import BaseConfig
from app.models.config.config_enums import RoutingMode, TrainingMode
from app.models.config.train_hyper import PretrainHyper, TrainHyper


class RunConfig(BaseModel):
    """
    Flat, fully resolved configuration of one run. Every key can come from the
    JSON config file or a command-line flag; unknown keys are rejected.

    Defaults keep the reference setup's ratios at desk scale: rank 4 and τ at
    3/4 of the depth (6 of 8 layers).
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    # Base transformer
    num_layers: int = Field(default=8, gt=0)
    d_model: int = Field(default=128, gt=0)
    num_heads: int = Field(default=4, gt=0)
    vocab_size: int = Field(default=64, gt=0)
    max_seq_len: int = Field(default=128, ge=2)
    mlp_hidden: int = Field(default=512, gt=0)
    init_std: float = Field(default=0.02, gt=0)

    # Adapters
    tau: int = 6
    rank: int = Field(default=4, ge=1)
    mode: TrainingMode = TrainingMode.PMOE
    routing: RoutingMode = RoutingMode.TOKEN
    freeze_old_experts: bool = True

    # Continual stream
    num_tasks: int = Field(default=8, ge=1, le=8)
    train_size: int = Field(default=1000, ge=1)
    test_size: int = Field(default=200, ge=1)
    lr: float = Field(default=3e-4, gt=0)
    batch_size: int = Field(default=32, gt=0)
    epochs_per_task: int = Field(default=5, gt=0)
    weight_decay: float = Field(default=0.0, ge=0)
    beta1: float = Field(default=0.9, ge=0, lt=1)
    beta2: float = Field(default=0.999, ge=0, lt=1)
    replay_frac: float = Field(default=0.01, ge=0, le=1)
    replay_mix_frac: float = Field(default=1.0, ge=0, le=1)
    aux_loss_weight: float = Field(default=0.0, ge=0)

    # Pretraining and general suite
    pretrain_steps: int = Field(default=3000, gt=0)
    pretrain_lr: float = Field(default=1e-3, gt=0)
    corpus_size: int = Field(default=4000, ge=1)
    probe_size: int = Field(default=100, ge=1)

    # Run plumbing
    seed: int = 0
    output_dir: str = "runs/default"
    base_checkpoint: Optional[str] = None
    taus: Optional[List[int]] = None
    checked_mode: bool = True

    @model_validator(mode="after")
    def _check_invariants(self) -> "RunConfig":
        if self.d_model % self.num_heads != 0:
            raise ValueError("num_heads: must divide d_model")
        if not 0 < self.tau < self.num_layers:
            raise ValueError(f"tau: must satisfy 0 < tau < num_layers ({self.num_layers}), got {self.tau}")
        if 4 * self.rank > self.d_model:
            raise ValueError(f"rank: must be at most d_model/4 ({self.d_model // 4}), got {self.rank}")
        bad_taus = [t for t in self.taus or [] if not 0 < t < self.num_layers]
        if bad_taus:
            raise ValueError(f"taus: every tau must lie in (0, num_layers), got {bad_taus}")
        return self

    def sweep_taus(self) -> List[int]:
        """The τ values of a sweep; unset means every even depth below num_layers (2, 4, 6 for 8 layers)."""
        if self.taus:
            return list(self.taus)
        return list(range(2, self.num_layers, 2)) or [1]

    def base_config(self) -> BaseConfig:
        return BaseConfig(
            num_layers=self.num_layers,
            d_model=self.d_model,
            num_heads=self.num_heads,
            vocab_size=self.vocab_size,
            max_seq_len=self.max_seq_len,
            mlp_hidden=self.mlp_hidden,
            init_std=self.init_std
        )

    def train_hyper(self) -> TrainHyper:
        return TrainHyper(
            lr=self.lr,
            batch_size=self.batch_size,
            epochs_per_task=self.epochs_per_task,
            weight_decay=self.weight_decay,
            betas=(self.beta1, self.beta2),
            replay_frac=self.replay_frac,
            replay_mix_frac=self.replay_mix_frac,
            aux_loss_weight=self.aux_loss_weight,
            mode=self.mode,
            routing=self.routing,
            freeze_old_experts=self.freeze_old_experts,
            seed=self.seed
        )

    def pretrain_hyper(self) -> PretrainHyper:
        return PretrainHyper(
            steps=self.pretrain_steps,
            lr=self.pretrain_lr,
            batch_size=self.batch_size,
            seed=self.seed
        )
