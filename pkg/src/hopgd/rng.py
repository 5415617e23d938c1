"""Named, seedable RNG streams.

Every stochastic draw in the package derives from one master seed through
a domain-tagged SeedSequence, so runs are bit-reproducible and adding a new
consumer never perturbs existing streams.
"""

from __future__ import annotations

import numpy as np

PARAM_INIT = 1
LAMBDA_INIT = 2
MASK = 3
SAMPLE = 4
POOL = 5
PROBE = 6
SYNTH = 7
BENCH = 8


def stream(master_seed: int, *key: int) -> np.random.Generator:
    """An independent generator for (master_seed, domain key...)."""
    return np.random.default_rng(np.random.SeedSequence([int(master_seed), *key]))
