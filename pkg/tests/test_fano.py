import math

import numpy as np
import pytest

from mobpredict.fano import binary_entropy, fano_rhs, max_predictability


def test_examples():
    assert max_predictability(0.0, 5) == 1.0
    assert max_predictability(math.log2(4), 4) == 0.25
    assert max_predictability(1.0, 4) == pytest.approx(0.81, abs=0.01)


def test_single_location():
    assert max_predictability(0.7, 1) == 1.0


def test_binary_entropy_values():
    assert binary_entropy(0.5) == 1.0
    assert binary_entropy(0.0) == binary_entropy(1.0) == 0.0
    assert binary_entropy(0.9) == pytest.approx(0.4690, abs=1e-4)


def test_residual_and_range():
    rng = np.random.default_rng(7)
    for _ in range(300):
        n = int(rng.integers(2, 501))
        s = float(rng.uniform(0, math.log2(n)))
        p = max_predictability(s, n)
        assert 1 / n <= p <= 1
        assert abs(fano_rhs(p, n) - s) < 1e-9


def test_monotone_in_entropy():
    for n in (2, 3, 10, 500):
        grid = np.linspace(0, math.log2(n), 200)
        ps = [max_predictability(float(s), n) for s in grid]
        assert all(a >= b for a, b in zip(ps, ps[1:]))


def test_rejects_bad_input():
    with pytest.raises(ValueError):
        max_predictability(-0.1, 3)
    with pytest.raises(ValueError):
        max_predictability(1.0, 0)
