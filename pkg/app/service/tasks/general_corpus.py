# Python standard library imports
import logging
from typing import List, Sequence, Tuple

# Third party imports
import numpy as np

# Application imports
from app.error_handling.exceptions.input_exception import InputException
from app.models.tasks.task_spec import GeneralCorpus, ProbeSet
from app.service.tasks.task_catalog import TASK_SPECS
from app.service.tasks.task_generator import generate_task_dataset
from app.utils.constants.stream_constants import StreamConstants
from app.utils.constants.vocab_constants import VocabConstants as V
from app.utils.rng_utils import RngUtils

"""
SUMMARY:

General-ability data for the base model. Five deterministic filler grammars,
each opened by its own family marker token, make up most of the pretraining
corpus; task examples are mixed in at a low rate. Every family reserves a few
start symbols that never open a corpus sequence, and the held-out probes are
built from exactly those, so no probe prompt is a prefix of any corpus line.
A probe asks for the next PROBE_CONTINUATION symbols.
"""

logger = logging.getLogger(__name__)

FILLER_FAMILIES: Tuple[str, ...] = ("increment", "skip", "alternate", "period3", "countdown")
RING: Tuple[int, ...] = tuple(range(V.SYMBOL_BASE, V.SYMBOL_BASE + V.NUM_DIGITS + V.NUM_LETTERS))
DIGITS: Tuple[int, ...] = tuple(range(V.DIGIT_BASE, V.DIGIT_BASE + V.NUM_DIGITS))
PROBE_CONTINUATION = 3
CORPUS_LENGTHS = (8, 20)
PROBE_PROMPT_LENGTHS = (4, 8)
DEFAULT_TASK_MIX_RATE = 0.05


def _ring_size(family: int) -> int:
    return len(DIGITS) if family == 4 else len(RING)


def is_reserved_start(family: int, start: int) -> bool:
    """Start positions kept out of the corpus for the probes."""
    return start % (5 if family == 4 else 6) == 0


def _draw_start(family: int, rng: np.random.Generator, reserved: bool) -> int:
    candidates = [i for i in range(_ring_size(family)) if is_reserved_start(family, i) == reserved]
    return candidates[int(rng.integers(len(candidates)))]


def filler_symbols(family: int, start: int, length: int, rng: np.random.Generator) -> List[int]:
    """The first `length` symbols of one family's sequence from a given start position."""
    if family == 0:
        return [RING[(start + j) % len(RING)] for j in range(length)]
    if family == 1:
        return [RING[(start + 2 * j) % len(RING)] for j in range(length)]
    if family in (2, 3):
        period = family
        others = rng.choice([i for i in range(len(RING)) if i != start], size=period - 1, replace=False)
        cycle = [RING[start]] + [RING[int(i)] for i in others]
        return [cycle[j % period] for j in range(length)]
    if family == 4:
        return [DIGITS[(start - j) % len(DIGITS)] for j in range(length)]
    raise InputException(f"Unknown filler family {family}", "family")


def _filler_sequence(family: int, rng: np.random.Generator, length: int, reserved: bool) -> List[int]:
    start = _draw_start(family, rng, reserved)
    return [V.FAMILY_BASE + family] + filler_symbols(family, start, length, rng)


def generate_probe_set(family: int, size: int, seed: int) -> ProbeSet:
    rng = RngUtils.stream(seed, StreamConstants.PROBES, family)
    prompts, continuations = [], []
    for _ in range(size):
        prompt_length = int(rng.integers(PROBE_PROMPT_LENGTHS[0], PROBE_PROMPT_LENGTHS[1] + 1))
        sequence = _filler_sequence(family, rng, prompt_length + PROBE_CONTINUATION, reserved=True)
        prompts.append(tuple(sequence[:-PROBE_CONTINUATION]))
        continuations.append(tuple(sequence[-PROBE_CONTINUATION:]))
    return ProbeSet(family=family, name=FILLER_FAMILIES[family], prompts=tuple(prompts), continuations=tuple(continuations))


def generate_general_corpus(
    n: int,
    seed: int,
    probe_size: int = 100,
    task_mix_rate: float = DEFAULT_TASK_MIX_RATE
) -> GeneralCorpus:
    """
    n pretraining sequences plus one probe set per filler family.

    Raises:
        InputException: If n < 1
    """
    if n < 1:
        raise InputException(f"Corpus size must be at least 1, got {n}", "corpus")
    rng = RngUtils.stream(seed, StreamConstants.CORPUS)
    task_draws = int(np.ceil(n * task_mix_rate))
    task_pool = {
        spec.task_id: generate_task_dataset(spec, task_draws, seed, StreamConstants.CORPUS_TASKS)
        for spec in TASK_SPECS
    } if task_draws else {}

    sequences: List[Tuple[int, ...]] = []
    used_tasks = {task_id: 0 for task_id in task_pool}
    for _ in range(n):
        if task_pool and rng.random() < task_mix_rate:
            task_id = int(rng.integers(len(TASK_SPECS)))
            example = task_pool[task_id][used_tasks[task_id] % task_draws]
            used_tasks[task_id] += 1
            sequences.append(example.training_tokens())
            continue
        family = int(rng.integers(len(FILLER_FAMILIES)))
        length = int(rng.integers(CORPUS_LENGTHS[0], CORPUS_LENGTHS[1] + 1))
        sequences.append(tuple(_filler_sequence(family, rng, length, reserved=False)))

    probes = tuple(generate_probe_set(family, probe_size, seed) for family in range(len(FILLER_FAMILIES)))
    logger.info(
        "Generated general corpus: %d sequences (%d task examples), %d probe sets of %d",
        len(sequences), sum(used_tasks.values()), len(probes), probe_size
    )
    return GeneralCorpus(sequences=tuple(sequences), probes=probes)


def probe_overlaps_corpus(corpus: GeneralCorpus) -> List[Tuple[int, ...]]:
    """Probe prompts that open some corpus sequence; empty for a well-formed corpus."""
    overlaps = []
    for probe in corpus.probes:
        for prompt in probe.prompts:
            if any(seq[:len(prompt)] == prompt for seq in corpus.sequences):
                overlaps.append(prompt)
    return overlaps
