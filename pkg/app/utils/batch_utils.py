# Python standard library imports
from typing import List, Sequence, Tuple

# Third party imports
import numpy as np

# Application imports
from app.utils.constants.vocab_constants import VocabConstants


class BatchUtils:

    @staticmethod
    def pad_sequences(sequences: Sequence[Sequence[int]], pad: int = VocabConstants.PAD) -> Tuple[np.ndarray, np.ndarray]:
        """
        Right-pad token sequences into one rectangular array.

        Under causal attention no real position sees a pad that follows it.

        Returns:
            (tokens [B, L] int64, lengths [B] int64)
        """
        lengths = np.array([len(s) for s in sequences], dtype=np.int64)
        width = int(lengths.max()) if lengths.size else 0
        tokens = np.full((len(sequences), width), pad, dtype=np.int64)
        for row, sequence in enumerate(sequences):
            tokens[row, :len(sequence)] = sequence
        return tokens, lengths

    @staticmethod
    def length_mask(lengths: np.ndarray, width: int) -> np.ndarray:
        """[B, width] float mask, 1.0 on real positions."""
        return (np.arange(width)[None, :] < np.asarray(lengths)[:, None]).astype(np.float64)

    @staticmethod
    def chunk(items: Sequence, size: int) -> List[Sequence]:
        return [items[i:i + size] for i in range(0, len(items), size)]
