import numpy as np
import pytest

from pairsha import LevelSpec, build_model


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)


@pytest.fixture
def random_model(rng):
    """Factory for small random models with symmetric couplings."""

    def make(k=None, max_two_j=6, coupling_scale=0.2):
        k = int(rng.integers(1, 5)) if k is None else k
        levels = [
            LevelSpec(
                j=int(rng.integers(1, max_two_j + 1)) / 2.0,
                epsilon=float(rng.uniform(0.0, 5.0)),
            )
            for _ in range(k)
        ]
        raw = rng.uniform(0.0, coupling_scale, (k, k))
        G = (raw + raw.T) / 2.0
        capacity = sum(lv.two_j_eff for lv in levels)
        N = int(rng.integers(0, capacity + 1))
        return build_model(levels, G, N)

    return make
