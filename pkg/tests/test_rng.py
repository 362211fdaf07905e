import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from esfkit._rng import blocks, stream


def test_streams_are_reproducible_and_distinct():
    a = stream(42, 0).random(5)
    assert np.array_equal(a, stream(42, 0).random(5))
    assert not np.array_equal(a, stream(42, 1).random(5))
    assert not np.array_equal(a, stream(43, 0).random(5))
    with pytest.raises(ValueError):
        stream(-1)


@given(st.integers(0, 50_000), st.integers(1, 5000))
def test_blocks_cover_total(total, size):
    parts = list(blocks(total, size))
    assert sum(s for _, s in parts) == total
    assert [i for i, _ in parts] == list(range(len(parts)))
    assert all(0 < s <= size for _, s in parts)
