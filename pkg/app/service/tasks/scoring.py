# Python standard library imports
import logging
from typing import List, Sequence

# Third party imports
import numpy as np

# Application imports
from app.models.tasks.example import Example
from app.models.tasks.task_spec import ProbeSet
from app.service.transformer.decoding import LanguageModel, batch_greedy_decode
from app.utils.constants.vocab_constants import VocabConstants

logger = logging.getLogger(__name__)


def trim_output(tokens: Sequence[int]) -> List[int]:
    """Cut at the first end-of-sequence token, then drop trailing padding."""
    out = [int(t) for t in tokens]
    if VocabConstants.EOS in out:
        out = out[:out.index(VocabConstants.EOS)]
    while out and out[-1] == VocabConstants.PAD:
        out.pop()
    return out


def exact_match(predicted: Sequence[int], gold: Sequence[int]) -> float:
    """100.0 when the trimmed sequences are identical, else 0.0."""
    return 100.0 if trim_output(predicted) == trim_output(gold) else 0.0


def dataset_score(predictions: Sequence[Sequence[int]], golds: Sequence[Sequence[int]]) -> float:
    """Mean exact match over a dataset, in percent."""
    if not golds:
        return 0.0
    return float(np.mean([exact_match(p, g) for p, g in zip(predictions, golds)]))


def predict_examples(model: LanguageModel, examples: Sequence[Example], batch_size: int = 64) -> List[List[int]]:
    """Greedy continuations of each prompt, up to one token past the longest target."""
    max_new = max(len(e.target) for e in examples) + 1
    return batch_greedy_decode([e.prompt for e in examples], model, max_new, batch_size=batch_size)


def evaluate_examples(model: LanguageModel, examples: Sequence[Example], batch_size: int = 64) -> float:
    if not examples:
        return 0.0
    predictions = predict_examples(model, examples, batch_size)
    return dataset_score(predictions, [e.target for e in examples])


def evaluate_probe_set(model: LanguageModel, probe: ProbeSet, batch_size: int = 64) -> float:
    """Exact match of the first len(continuation) generated symbols."""
    width = len(probe.continuations[0]) if probe.continuations else 0
    predictions = batch_greedy_decode(probe.prompts, model, width, batch_size=batch_size)
    return dataset_score([p[:width] for p in predictions], probe.continuations)


def evaluate_general_suite(model: LanguageModel, probes: Sequence[ProbeSet], batch_size: int = 64) -> List[float]:
    """One score per probe set, in probe order."""
    scores = [evaluate_probe_set(model, probe, batch_size) for probe in probes]
    logger.info("General suite scores: %s", ", ".join(f"{p.name}={s:.1f}" for p, s in zip(probes, scores)))
    return scores
