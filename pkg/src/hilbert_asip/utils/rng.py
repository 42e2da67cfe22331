"""Provide reproducible random streams keyed by seed and replica index."""

import numpy as np


def replica_rng(seed: int, replica: int = 0) -> np.random.Generator:
    """Get the random generator for a single replica.

    Streams come from a counter-based Philox bit generator keyed by
    ``(seed, replica)``, so a replica's draws never depend on which worker
    simulates it or in what order replicas are scheduled.

    :param seed: experiment seed, non-negative
    :param replica: replica index, non-negative
    :return: independent generator for this replica
    """
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, replica])))
