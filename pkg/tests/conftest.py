import numpy as np
import pytest

from mobpredict.ingest import AssociationRecord


def rec(ap, begin, end=None, uuid="00:11:22:00:00:01"):
    """Association record with throwaway IP and AP MAC."""
    return AssociationRecord("10.0.0.1", uuid, ap, "00:1d:e5:00:00:01", begin, begin if end is None else end)


def markov_source(n, stay, rng, n_states=2):
    """Symmetric chain: stay with probability ``stay``, otherwise jump uniformly."""
    out = np.empty(n, dtype=np.int64)
    s = 0
    u = rng.random(n)
    jump = rng.integers(1, n_states, size=n) if n_states > 2 else np.ones(n, dtype=np.int64)
    for i in range(n):
        out[i] = s
        if u[i] >= stay:
            s = (s + jump[i]) % n_states
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)
