# Python standard library imports
from typing import Tuple

# Third party imports
from pydantic import BaseModel, ConfigDict

# Application imports
from app.utils.constants.vocab_constants import VocabConstants


class Example(BaseModel):
    """
    One prompt → target pair.

    The prompt is [instruction token, payload..., SEP]; the target is the
    oracle output without the end-of-sequence token, which is appended only
    when the example is turned into a training sequence.
    """
    model_config = ConfigDict(frozen=True)

    prompt: Tuple[int, ...]
    target: Tuple[int, ...]
    task_id: int

    @property
    def payload(self) -> Tuple[int, ...]:
        return self.prompt[1:-1]

    def training_tokens(self) -> Tuple[int, ...]:
        return self.prompt + self.target + (VocabConstants.EOS,)

    def to_line(self) -> str:
        """Text export: space-separated ids, tab between prompt and target."""
        return " ".join(map(str, self.prompt)) + "\t" + " ".join(map(str, self.target))
