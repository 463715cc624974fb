# Third party imports
from pydantic import BaseModel, ConfigDict, Field, model_validator


class BaseConfig(BaseModel):
    """
    Shape of the frozen decoder-only transformer.

    Attributes:
        num_layers (int): Number of decoder blocks N
        d_model (int): Hidden width
        num_heads (int): Attention heads, must divide d_model
        vocab_size (int): Vocabulary size V
        max_seq_len (int): Context length, at least 2
        mlp_hidden (int): Width of the GELU MLP
        init_std (float): Standard deviation of the gaussian weight init
        ln_eps (float): Epsilon added to the layer-norm variance
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    num_layers: int = Field(default=8, gt=0)
    d_model: int = Field(default=128, gt=0)
    num_heads: int = Field(default=4, gt=0)
    vocab_size: int = Field(default=64, gt=0)
    max_seq_len: int = Field(default=128, ge=2)
    mlp_hidden: int = Field(default=512, gt=0)
    init_std: float = Field(default=0.02, gt=0)
    ln_eps: float = Field(default=1e-5, gt=0)

    @model_validator(mode="after")
    def _heads_divide_width(self) -> "BaseConfig":
        if self.d_model % self.num_heads != 0:
            raise ValueError(f"d_model ({self.d_model}) must be divisible by num_heads ({self.num_heads})")
        return self

    @property
    def head_dim(self) -> int:
        return self.d_model // self.num_heads
