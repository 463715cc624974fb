# Third party imports
import pytest

# Application imports
from app.error_handling.exceptions.input_exception import InputException
from app.service.tasks.task_catalog import TASK_SPECS, task_oracle
from app.service.tasks.task_generator import (
    build_task_splits, build_task_stream, generate_task_dataset, make_example, prompts_of
)
from app.utils.constants.vocab_constants import VocabConstants as V


@pytest.mark.parametrize("spec", TASK_SPECS, ids=lambda s: s.name)
def test_examples_follow_prompt_layout(spec):
    for example in generate_task_dataset(spec, 20, seed=3):
        assert example.prompt[0] == spec.instruction_token
        assert example.prompt[-1] == V.SEP
        assert spec.min_length <= len(example.payload) <= spec.max_length
        assert list(example.target) == task_oracle(spec.task_id, example.payload)
        assert example.training_tokens()[-1] == V.EOS


def test_pair_sum_payloads_are_even():
    assert all(len(e.payload) % 2 == 0 for e in generate_task_dataset(TASK_SPECS[7], 30, seed=0))


def test_same_seed_same_dataset():
    assert generate_task_dataset(TASK_SPECS[1], 25, 11) == generate_task_dataset(TASK_SPECS[1], 25, 11)


def test_different_seed_different_dataset():
    assert generate_task_dataset(TASK_SPECS[1], 25, 11) != generate_task_dataset(TASK_SPECS[1], 25, 12)


def test_splits_are_prompt_disjoint():
    splits = build_task_splits(TASK_SPECS[2], train_size=200, test_size=50, seed=0)
    assert len(splits.train) == 200 and len(splits.test) == 50
    assert not prompts_of(splits.train) & prompts_of(splits.test)


def test_exclusion_that_leaves_nothing_raises():
    spec = TASK_SPECS[0].model_copy(update={"alphabet": (V.LETTER_BASE,), "min_length": 3, "max_length": 3})
    only = make_example(spec, [V.LETTER_BASE] * 3)
    with pytest.raises(InputException):
        generate_task_dataset(spec, 1, 0, exclude_prompts={only.prompt})


def test_empty_dataset_request_rejected():
    with pytest.raises(InputException):
        generate_task_dataset(TASK_SPECS[0], 0, 0)


def test_stream_order_and_bounds():
    stream = build_task_stream(4, 5, 3, seed=0)
    assert [s.spec.name for s in stream] == ["copy", "reverse", "sort", "successor"]
    with pytest.raises(InputException):
        build_task_stream(9, 5, 3, seed=0)
