"""Counter-based random streams.

Every sampling loop in the toolkit draws from ``stream(master_seed, index)``.
Philox is a counter-based generator, so streams keyed by (seed, index) are
independent, reproducible across platforms, and order-independent: sample i
gets the same bits no matter how many workers compute the loop.
"""

import numpy as np


def stream(seed, index=0):
    key = np.array([np.uint64(seed), np.uint64(index)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
