import random

import numpy as np


def set_seed(seed: int) -> np.random.Generator:
    """Seed the global generators and return a Generator for explicit use."""
    np.random.seed(seed)
    random.seed(seed)
    return np.random.default_rng(seed)
