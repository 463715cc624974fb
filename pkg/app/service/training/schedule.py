# Python standard library imports
import math


def cosine_lr(step: int, total_steps: int, base_lr: float) -> float:
    """Cosine annealing without warmup: base_lr·(1 + cos(π·step/total))/2, floored at 0."""
    if total_steps <= 0:
        return base_lr
    progress = min(max(step, 0), total_steps) / total_steps
    return max(0.0, base_lr * (1.0 + math.cos(math.pi * progress)) / 2.0)
