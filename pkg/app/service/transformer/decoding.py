# Python standard library imports
import logging
from collections import defaultdict
from typing import Dict, List, Protocol, Sequence

# Third party imports
import numpy as np

# Application imports
from app.error_handling.exceptions.input_exception import InputException
from app.utils.constants.vocab_constants import VocabConstants

logger = logging.getLogger(__name__)


class LanguageModel(Protocol):
    """Anything that maps a [B x n] token batch to [B x n x V] logits."""

    max_seq_len: int

    def batch_logits(self, tokens: np.ndarray) -> np.ndarray:
        ...


def greedy_decode(
    prompt: Sequence[int],
    model: LanguageModel,
    max_new: int,
    eos: int = VocabConstants.EOS
) -> List[int]:
    """
    Append the argmax token until max_new tokens were added, the end-of-sequence
    token was emitted or the context is full. np.argmax returns the first
    maximum, so ties go to the lowest token id.

    Returns:
        List[int]: The prompt followed by the generated tokens

    Raises:
        InputException: If the prompt is empty
    """
    if len(prompt) == 0:
        raise InputException("greedy_decode needs a non-empty prompt", "prompt")
    tokens = [int(t) for t in prompt]
    for _ in range(max_new):
        if len(tokens) >= model.max_seq_len:
            break
        logits = model.batch_logits(np.asarray([tokens], dtype=np.int64))
        next_token = int(np.argmax(logits[0, -1]))
        tokens.append(next_token)
        if next_token == eos:
            break
    return tokens


def batch_greedy_decode(
    prompts: Sequence[Sequence[int]],
    model: LanguageModel,
    max_new: int,
    eos: int = VocabConstants.EOS,
    batch_size: int = 64
) -> List[List[int]]:
    """
    Greedy continuations for many prompts at once, without the prompt. Prompts
    of equal length share a batch so no padding is ever needed.
    """
    by_length: Dict[int, List[int]] = defaultdict(list)
    for index, prompt in enumerate(prompts):
        if len(prompt) == 0:
            raise InputException("greedy_decode needs a non-empty prompt", f"prompt {index}")
        by_length[len(prompt)].append(index)

    results: List[List[int]] = [[] for _ in prompts]
    for length in sorted(by_length):
        indices = by_length[length]
        for start in range(0, len(indices), batch_size):
            group = indices[start:start + batch_size]
            tokens = np.asarray([prompts[i] for i in group], dtype=np.int64)
            done = np.zeros(len(group), dtype=bool)
            for _ in range(max_new):
                if tokens.shape[1] >= model.max_seq_len or done.all():
                    break
                next_tokens = np.argmax(model.batch_logits(tokens)[:, -1, :], axis=-1)
                for row, i in enumerate(group):
                    if not done[row]:
                        results[i].append(int(next_tokens[row]))
                        done[row] = next_tokens[row] == eos
                tokens = np.concatenate([tokens, next_tokens[:, None]], axis=1)
    return results
