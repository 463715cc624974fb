# Python standard library imports
import logging
import time
from typing import Any, Dict

# Third party imports
from pydantic import BaseModel, Field


class BaseMetrics(BaseModel):
    """Base metrics class with common functionality."""

    start_time: float = Field(default_factory=time.time)
    processing_time: float = 0
    steps_completed: int = 0
    total_steps: int = 0
    current_phase: str = "initializing"
    processing_start: float = Field(default=0.0, exclude=True)

    def start_processing(self):
        self.processing_start = time.time()

    def end_processing(self):
        self.processing_time = time.time() - self.processing_start

    def set_phase(self, phase: str):
        self.current_phase = phase

    def get_progress_info(self) -> Dict[str, Any]:
        """Progress common to all metric types."""
        progress = 100.0 * self.steps_completed / self.total_steps if self.total_steps else 0.0
        return {
            "phase": self.current_phase,
            "progress": progress,
            "steps_completed": self.steps_completed,
            "total_steps": self.total_steps,
        }

    def log_progress(self, logger: logging.Logger, every: int = 10):
        """Debug line roughly every 1/every of the run, and on the last step."""
        info = self.get_progress_info()
        interval = max(1, self.total_steps // every)
        if self.steps_completed % interval and self.steps_completed != self.total_steps:
            return
        logger.debug(
            "%s: %.0f%% (%d/%d steps, %.2fs)",
            info["phase"], info["progress"], info["steps_completed"], info["total_steps"],
            time.time() - self.processing_start
        )
