# Python standard library imports
import logging
import math
import time
from typing import Optional

# Third party imports
from pydantic import Field

# Local imports
from .base_metrics import BaseMetrics


class TrainingMetrics(BaseMetrics):
    """
    Counters of one training phase (pretraining, or one task of the stream),
    summarized once at the end via log_final_metrics().
    """

    label: str = Field(default="training")
    task_index: Optional[int] = Field(default=None)
    examples_seen: int = Field(default=0)
    replay_examples: int = Field(default=0)
    trainable_parameters: int = Field(default=0)
    first_loss: float = Field(default=math.nan)
    last_loss: float = Field(default=math.nan)
    last_aux_loss: float = Field(default=0.0)

    def record_step(self, loss: float, aux_loss: float, batch_examples: int):
        if self.steps_completed == 0:
            self.first_loss = loss
        self.last_loss = loss
        self.last_aux_loss = aux_loss
        self.steps_completed += 1
        self.examples_seen += batch_examples

    def log_final_metrics(self, logger: logging.Logger):
        total_time = time.time() - self.start_time
        separator = "-" * 40

        logger.info("\n\n%s", separator)
        logger.info("--- Final %s Metrics ---", self.label)
        if self.task_index is not None:
            logger.info("Task index: %d", self.task_index)
        logger.info("Steps: %d of %d (training took %.2fs)", self.steps_completed, self.total_steps, self.processing_time)
        logger.info("Examples seen: %d (replayed per epoch: %d)", self.examples_seen, self.replay_examples)
        logger.info("Trainable parameters: %d", self.trainable_parameters)
        logger.info("Loss: %.6f -> %.6f (aux %.6f)", self.first_loss, self.last_loss, self.last_aux_loss)
        logger.info("Total time: %.2fs", total_time)
        logger.info("%s\n", separator)
