# Python standard library imports
import logging
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple

# Application imports
from app.error_handling.exceptions.input_exception import InputException
from app.models.tasks.task_spec import TaskSpec
from app.utils.constants.stream_constants import StreamConstants
from app.utils.constants.vocab_constants import VocabConstants as V
from app.utils.rng_utils import RngUtils

"""
SUMMARY:

The eight synthetic tasks of the stream, in their fixed order, and their
oracles. Each task owns a distinct instruction token, so the task can always
be read off the first prompt token.
"""

logger = logging.getLogger(__name__)

LETTERS: Tuple[int, ...] = tuple(V.LETTER_BASE + i for i in range(V.NUM_LETTERS))
DIGITS: Tuple[int, ...] = tuple(V.DIGIT_BASE + i for i in range(V.NUM_DIGITS))
EXTRAS: Tuple[int, ...] = tuple(V.EXTRA_BASE + i for i in range(V.NUM_EXTRA))

COUNT_SYMBOL = EXTRAS[6]
UNARY_MARK = EXTRAS[11]


def _spec(task_id: int, name: str, alphabet: Sequence[int], min_length: int = 3, max_length: int = 8) -> TaskSpec:
    return TaskSpec(
        task_id=task_id,
        name=name,
        instruction_token=V.INSTRUCTION_BASE + task_id,
        alphabet=tuple(alphabet),
        min_length=min_length,
        max_length=max_length,
        generator_seed=task_id,
    )


TASK_SPECS: Tuple[TaskSpec, ...] = (
    _spec(0, "copy", LETTERS[0:12]),
    _spec(1, "reverse", LETTERS[0:12]),
    _spec(2, "sort", DIGITS),
    _spec(3, "successor", LETTERS[0:10]),
    _spec(4, "dedup", EXTRAS[0:6]),
    _spec(5, "cipher", LETTERS[12:26]),
    _spec(6, "count", EXTRAS[6:10]),
    _spec(7, "pair_sum", DIGITS, min_length=2, max_length=8),
)


@lru_cache(maxsize=1)
def cipher_table() -> Dict[int, int]:
    """Fixed substitution over the cipher alphabet; independent of any run seed."""
    alphabet = TASK_SPECS[5].alphabet
    permuted = RngUtils.stream(0, StreamConstants.CIPHER).permutation(len(alphabet))
    return {symbol: alphabet[int(j)] for symbol, j in zip(alphabet, permuted)}


def _copy(xs: List[int]) -> List[int]:
    return list(xs)


def _reverse(xs: List[int]) -> List[int]:
    return xs[::-1]


def _sort(xs: List[int]) -> List[int]:
    return sorted(xs)


def _successor(xs: List[int]) -> List[int]:
    alphabet = TASK_SPECS[3].alphabet
    return [alphabet[(alphabet.index(x) + 1) % len(alphabet)] for x in xs]


def _dedup(xs: List[int]) -> List[int]:
    return list(dict.fromkeys(xs))


def _cipher(xs: List[int]) -> List[int]:
    table = cipher_table()
    return [table[x] for x in xs]


def _count(xs: List[int]) -> List[int]:
    return [UNARY_MARK] * xs.count(COUNT_SYMBOL)


def _pair_sum(xs: List[int]) -> List[int]:
    if len(xs) % 2:
        raise InputException("pair_sum needs an even number of digits", "task 7")
    return [V.DIGIT_BASE + ((a - V.DIGIT_BASE) + (b - V.DIGIT_BASE)) % 10 for a, b in zip(xs[0::2], xs[1::2])]


_ORACLES: Dict[int, Callable[[List[int]], List[int]]] = {
    0: _copy, 1: _reverse, 2: _sort, 3: _successor, 4: _dedup, 5: _cipher, 6: _count, 7: _pair_sum,
}


def get_task_spec(task_id: int) -> TaskSpec:
    if not 0 <= task_id < len(TASK_SPECS):
        raise InputException(f"Unknown task id {task_id}", "task_id")
    return TASK_SPECS[task_id]


def task_oracle(task_id: int, symbols: Sequence[int]) -> List[int]:
    """
    Ground-truth output of a task for one payload.

    Raises:
        InputException: If a symbol is outside the task's alphabet (or the payload shape is invalid)
    """
    spec = get_task_spec(task_id)
    allowed = set(spec.alphabet)
    outside = [int(s) for s in symbols if int(s) not in allowed]
    if outside:
        raise InputException(f"Symbols {outside[:5]} are outside the alphabet of task '{spec.name}'", f"task {task_id}")
    return _ORACLES[task_id]([int(s) for s in symbols])


def identify_task(prompt: Sequence[int]) -> Optional[int]:
    """Task whose instruction token opens the prompt; None when no task claims it."""
    if not prompt:
        return None
    offset = int(prompt[0]) - V.INSTRUCTION_BASE
    return offset if 0 <= offset < V.NUM_TASKS else None


def task_names(task_ids: Sequence[int]) -> List[str]:
    return [get_task_spec(t).name for t in task_ids]
