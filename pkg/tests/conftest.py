import numpy as np
import pytest


def assert_support_ok(prob_grid, half_width, n):
    """Occupied sites after n steps must satisfy |i|,|j| <= n and i = j = n (mod 2)."""
    ii, jj = np.nonzero(prob_grid > 0.0)
    i = ii - half_width
    j = jj - half_width
    assert i.size > 0, f"step {n}: empty distribution"
    assert np.all(np.abs(i) <= n), f"step {n}: support escapes |i| <= {n}"
    assert np.all(np.abs(j) <= n), f"step {n}: support escapes |j| <= {n}"
    assert np.all((i - n) % 2 == 0), f"step {n}: x parity violated"
    assert np.all((j - n) % 2 == 0), f"step {n}: y parity violated"


@pytest.fixture
def rng():
    return np.random.default_rng(20210501)
