# Python standard library imports
import logging

# Third party imports
import numpy as np

logger = logging.getLogger(__name__)


class RngUtils:

    @staticmethod
    def stream(seed: int, stream_id: int, *keys: int) -> np.random.Generator:
        """
        Build an independent generator for one named purpose.

        Args:
            seed: The run seed
            stream_id: One of the StreamConstants identifiers
            keys: Extra non-negative integers (task index, epoch, expert index, ...)

        Returns:
            np.random.Generator: A PCG64 generator whose draws depend only on the arguments
        """
        entropy = [int(seed) & 0xFFFFFFFF, int(stream_id)] + [int(k) for k in keys]
        return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))
