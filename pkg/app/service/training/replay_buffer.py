# Python standard library imports
import logging
import math
from collections import Counter
from typing import Dict, List, Sequence

# Application imports
from app.models.tasks.example import Example
from app.utils.constants.stream_constants import StreamConstants
from app.utils.rng_utils import RngUtils

logger = logging.getLogger(__name__)


def replay_count(frac: float, size: int) -> int:
    """ceil(frac·size), guarded against float noise such as 0.01·300 = 3.0000000000000004."""
    return min(size, math.ceil(frac * size - 1e-9)) if size else 0


class ReplayBuffer:
    """
    Stored examples of finished tasks, tagged with their task id. Capacity is
    unlimited; what gets stored is decided by the caller's replay fraction.
    """

    def __init__(self):
        self.examples: List[Example] = []

    def __len__(self) -> int:
        return len(self.examples)

    def store_task_samples(self, dataset: Sequence[Example], frac: float, seed: int, task_index: int) -> List[Example]:
        """Keep ceil(frac·|dataset|) examples of a just-finished task, sampled without replacement."""
        count = replay_count(frac, len(dataset))
        rng = RngUtils.stream(seed, StreamConstants.REPLAY_STORE, task_index)
        chosen = rng.choice(len(dataset), size=count, replace=False) if count else []
        stored = [dataset[int(i)] for i in chosen]
        self.examples.extend(stored)
        logger.info("Stored %d replay examples from task %d (buffer size %d)", len(stored), task_index, len(self))
        return stored

    def task_counts(self) -> Dict[int, int]:
        return dict(sorted(Counter(e.task_id for e in self.examples).items()))

    def task_ids(self) -> List[int]:
        return sorted({e.task_id for e in self.examples})


def build_replay_batch(buffer: ReplayBuffer, frac: float, seed: int, *stream_keys: int) -> List[Example]:
    """
    Sample ceil(frac·|buffer|) stored examples without replacement.

    The draw depends only on (seed, stream_keys), so the same arguments always
    return the same examples in the same order. An empty buffer gives [].
    """
    count = replay_count(frac, len(buffer))
    if count == 0:
        return []
    rng = RngUtils.stream(seed, StreamConstants.REPLAY_SAMPLE, *stream_keys)
    return [buffer.examples[int(i)] for i in rng.choice(len(buffer), size=count, replace=False)]
