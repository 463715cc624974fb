from dataclasses import dataclass


@dataclass(frozen=True)
class StreamConstants:
    """
    Fixed identifiers for independent random streams. A stream is derived from
    (seed, stream id, *extra keys) so reordering calls never shifts another
    stream's draws.
    """
    TASK_TRAIN = 11
    TASK_TEST = 12
    CORPUS = 21
    CORPUS_TASKS = 22
    PROBES = 23
    BASE_INIT = 31
    PRETRAIN_BATCHES = 32
    ADAPTER_INIT = 41
    EXPERT_INIT = 42
    TRAIN_SHUFFLE = 51
    REPLAY_SAMPLE = 52
    REPLAY_STORE = 53
    CIPHER = 61
