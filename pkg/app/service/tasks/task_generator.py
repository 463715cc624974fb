# Python standard library imports
import logging
from typing import Iterable, List, Optional, Set, Tuple

# Third party imports
import numpy as np

# Application imports
from app.error_handling.exceptions.input_exception import InputException
from app.models.tasks.example import Example
from app.models.tasks.task_spec import TaskSpec
from app.models.tasks.task_splits import TaskSplits
from app.service.tasks.task_catalog import TASK_SPECS, task_oracle
from app.utils.constants.stream_constants import StreamConstants
from app.utils.constants.vocab_constants import VocabConstants
from app.utils.rng_utils import RngUtils

logger = logging.getLogger(__name__)

MAX_ATTEMPTS_PER_EXAMPLE = 200


def _draw_payload(spec: TaskSpec, rng: np.random.Generator) -> List[int]:
    if spec.task_id == 7:
        pairs = int(rng.integers(max(1, spec.min_length // 2), spec.max_length // 2 + 1))
        length = 2 * pairs
    else:
        length = int(rng.integers(spec.min_length, spec.max_length + 1))
    return [int(spec.alphabet[i]) for i in rng.integers(0, len(spec.alphabet), size=length)]


def make_example(spec: TaskSpec, payload: List[int]) -> Example:
    prompt = (spec.instruction_token, *payload, VocabConstants.SEP)
    return Example(prompt=prompt, target=tuple(task_oracle(spec.task_id, payload)), task_id=spec.task_id)


def generate_task_dataset(
    spec: TaskSpec,
    n: int,
    seed: int,
    stream_id: int = StreamConstants.TASK_TRAIN,
    exclude_prompts: Optional[Set[Tuple[int, ...]]] = None
) -> List[Example]:
    """
    n examples of one task, a pure function of (spec, n, seed, stream_id).

    Args:
        exclude_prompts: Prompts that must not be produced (the other split's prompts)

    Raises:
        InputException: If n < 1, or the excluded prompts leave too little room to draw from
    """
    if n < 1:
        raise InputException(f"Dataset size must be at least 1, got {n}", spec.name)
    rng = RngUtils.stream(seed, stream_id, spec.task_id, spec.generator_seed)
    excluded = exclude_prompts or set()
    examples: List[Example] = []
    attempts = 0
    while len(examples) < n:
        attempts += 1
        if attempts > n * MAX_ATTEMPTS_PER_EXAMPLE:
            raise InputException(f"Could not draw {n} prompts outside the excluded set", spec.name)
        example = make_example(spec, _draw_payload(spec, rng))
        if example.prompt in excluded:
            continue
        examples.append(example)
    return examples


def build_task_splits(spec: TaskSpec, train_size: int, test_size: int, seed: int) -> TaskSplits:
    """Test split first, then a train split that avoids every test prompt."""
    test = generate_task_dataset(spec, test_size, seed, StreamConstants.TASK_TEST)
    train = generate_task_dataset(
        spec, train_size, seed, StreamConstants.TASK_TRAIN, exclude_prompts={e.prompt for e in test}
    )
    logger.debug("Task %s: %d train / %d test examples", spec.name, len(train), len(test))
    return TaskSplits(spec=spec, train=train, test=test)


def build_task_stream(num_tasks: int, train_size: int, test_size: int, seed: int) -> List[TaskSplits]:
    """The first num_tasks tasks in their fixed order."""
    if not 1 <= num_tasks <= len(TASK_SPECS):
        raise InputException(f"num_tasks must be within 1..{len(TASK_SPECS)}, got {num_tasks}", "num_tasks")
    return [build_task_splits(spec, train_size, test_size, seed) for spec in TASK_SPECS[:num_tasks]]


def prompts_of(examples: Iterable[Example]) -> Set[Tuple[int, ...]]:
    return {e.prompt for e in examples}
