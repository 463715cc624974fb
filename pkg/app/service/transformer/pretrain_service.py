# Python standard library imports
import logging
import math
from typing import List, Optional, Sequence

# Third party imports
import numpy as np

# Application imports
from app.error_handling.exceptions.divergence_exception import DivergenceException
from app.error_handling.exceptions.input_exception import InputException
from app.error_handling.exceptions.non_finite_exception import NonFiniteException
from app.models.config.base_config import BaseConfig
from app.models.config.train_hyper import PretrainHyper
from app.models.metrics.training_metrics import TrainingMetrics
from app.models.training.training_log import TrainingLog
from app.service.autodiff import functional as F
from app.service.autodiff.tensor import Tensor, backward, no_grad
from app.service.training.optimizer import AdamWOptimizer
from app.service.training.schedule import cosine_lr
from app.service.transformer.base_transformer import BaseTransformer
from app.service.transformer.forward import base_forward
from app.utils.batch_utils import BatchUtils
from app.utils.constants.stream_constants import StreamConstants
from app.utils.rng_utils import RngUtils

PRETRAIN_TASK = -1


def next_token_loss(model: BaseTransformer, sequences: Sequence[Sequence[int]]) -> Tensor:
    """Mean cross-entropy of every next token over a padded batch; pads are not counted."""
    tokens, lengths = BatchUtils.pad_sequences(sequences)
    inputs, targets = tokens[:, :-1], tokens[:, 1:]
    mask = BatchUtils.length_mask(lengths - 1, inputs.shape[1])
    return F.cross_entropy(base_forward(inputs, model), targets, mask)


class PretrainService:
    """
    Trains the base model on the general corpus with AdamW and cosine
    annealing, then freezes it. Batches are drawn from one seeded stream, so
    two runs with the same seed give bitwise-identical weights.
    """

    def __init__(self):
        self.logger = logging.getLogger(__name__)
        self.training_log = TrainingLog()
        self.metrics: Optional[TrainingMetrics] = None

    def pretrain_base(
        self,
        corpus: Sequence[Sequence[int]],
        config: BaseConfig,
        hyper: PretrainHyper,
        seed: int
    ) -> BaseTransformer:
        """
        Raises:
            InputException: If the corpus holds no sequence of at least two tokens
            DivergenceException: If the loss becomes non-finite
        """
        usable: List[List[int]] = [list(s)[:config.max_seq_len] for s in corpus if len(s) >= 2]
        if not usable:
            raise InputException("Pretraining corpus is empty", "corpus")
        dropped = len(corpus) - len(usable)
        truncated = sum(1 for s in corpus if len(s) > config.max_seq_len)
        if dropped:
            self.logger.warning("Dropped %d corpus lines shorter than two tokens", dropped)
        if truncated:
            self.logger.warning("Truncated %d corpus lines to max_seq_len %d", truncated, config.max_seq_len)

        model = BaseTransformer.initialize(config, seed)
        optimizer = AdamWOptimizer(model.parameters(), hyper)
        rng = RngUtils.stream(seed, StreamConstants.PRETRAIN_BATCHES)
        batch_size = min(hyper.batch_size, len(usable))

        self.training_log = TrainingLog()
        self.metrics = TrainingMetrics(
            label="Pretraining", total_steps=hyper.steps, trainable_parameters=model.parameter_count()
        )
        self.metrics.set_phase("pretraining")
        self.metrics.start_processing()
        self.logger.info(
            "Pretraining on %d sequences for %d steps (batch %d, lr %.1e)",
            len(usable), hyper.steps, batch_size, hyper.lr
        )

        for step in range(hyper.steps):
            lr_now = cosine_lr(step, hyper.steps, hyper.lr)
            batch = [usable[int(i)] for i in rng.choice(len(usable), size=batch_size, replace=False)]
            try:
                loss = next_token_loss(model, batch)
            except NonFiniteException as e:
                raise DivergenceException("Pretraining produced non-finite values", None, step) from e
            value = loss.item()
            if not math.isfinite(value):
                raise DivergenceException("Pretraining loss is not finite", None, step, value)
            optimizer.zero_grad()
            backward(loss, params=optimizer.params)
            optimizer.step(lr_now)
            self.training_log.append(step, PRETRAIN_TASK, value, 0.0, lr_now)
            self.metrics.record_step(value, 0.0, len(batch))
            self.metrics.log_progress(self.logger)

        self.metrics.end_processing()
        self.metrics.set_phase("completed")
        self.metrics.log_final_metrics(self.logger)
        return model.freeze()


def pretrain_base(
    corpus: Sequence[Sequence[int]],
    config: BaseConfig,
    hyper: PretrainHyper,
    seed: int
) -> BaseTransformer:
    return PretrainService().pretrain_base(corpus, config, hyper, seed)


def corpus_loss(model: BaseTransformer, corpus: Sequence[Sequence[int]], batch_size: int = 64) -> float:
    """Token-weighted next-token loss over a whole corpus, without recording a graph."""
    total, count = 0.0, 0
    with no_grad():
        for group in BatchUtils.chunk([s for s in corpus if len(s) >= 2], batch_size):
            tokens = int(np.sum([len(s) - 1 for s in group]))
            total += next_token_loss(model, group).item() * tokens
            count += tokens
    return total / count if count else float("nan")
