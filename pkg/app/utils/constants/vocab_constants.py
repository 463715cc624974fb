from dataclasses import dataclass


@dataclass(frozen=True)
class VocabConstants:
    """
    Layout of the 64-symbol desk vocabulary.

    0-2 are control tokens, 3-10 are the eight task instruction tokens,
    11-15 mark the five general-probe grammar families and 16-63 are payload
    symbols. Digits 0-9 are symbols 16-25.
    """
    VOCAB_SIZE = 64

    PAD = 0
    EOS = 1
    SEP = 2

    INSTRUCTION_BASE = 3
    NUM_TASKS = 8

    FAMILY_BASE = 11
    NUM_FAMILIES = 5

    SYMBOL_BASE = 16
    DIGIT_BASE = 16
    NUM_DIGITS = 10
    LETTER_BASE = 26
    NUM_LETTERS = 26
    EXTRA_BASE = 52
    NUM_EXTRA = 12
