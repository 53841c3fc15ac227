"""Deterministic random substreams.

Every Monte Carlo trial draws from its own generator keyed by
(master seed, trial index), so results do not depend on execution order.
"""
import numpy as np

from qamp.errors import ValidationError


def trial_rng(seed: int, index: int, stream: int = 0) -> np.random.Generator:
    if seed is None or seed < 0 or index < 0 or stream < 0:
        raise ValidationError("seed, trial index and stream must be non-negative integers")
    return np.random.default_rng([int(seed), int(index), int(stream)])
