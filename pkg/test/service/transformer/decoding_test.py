# Third party imports
import numpy as np
import pytest

# Application imports
from app.error_handling.exceptions.input_exception import InputException
from app.service.transformer.decoding import batch_greedy_decode, greedy_decode
from app.service.transformer.forward import BaseLanguageModel


class RiggedModel:
    """Always prefers one token."""

    def __init__(self, token: int, vocab: int = 64, max_seq_len: int = 32):
        self.token = token
        self.vocab = vocab
        self.max_seq_len = max_seq_len

    def batch_logits(self, tokens: np.ndarray) -> np.ndarray:
        logits = np.zeros(tokens.shape + (self.vocab,))
        logits[..., self.token] = 1.0
        return logits


def test_max_new_zero_returns_prompt():
    assert greedy_decode([3, 4], RiggedModel(7), 0) == [3, 4]


def test_rigged_model_repeats_token():
    assert greedy_decode([3], RiggedModel(7), 4) == [3, 7, 7, 7, 7]


def test_decode_stops_at_eos():
    assert greedy_decode([3, 4], RiggedModel(1), 5) == [3, 4, 1]


def test_decode_stops_at_context():
    assert greedy_decode([3, 4], RiggedModel(7, max_seq_len=4), 10) == [3, 4, 7, 7]


def test_empty_prompt_rejected():
    with pytest.raises(InputException):
        greedy_decode([], RiggedModel(7), 3)


def test_batched_decode_matches_per_prompt(tiny_base):
    model = BaseLanguageModel(tiny_base)
    prompts = [[3, 16, 17], [4, 30], [3, 40, 41], [5, 20, 21, 22]]
    batched = batch_greedy_decode(prompts, model, 4)
    for prompt, generated in zip(prompts, batched):
        assert greedy_decode(prompt, model, 4) == prompt + generated
