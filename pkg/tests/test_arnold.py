import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gridmark.arnold import period, scramble, unscramble
from gridmark.errors import BadParameterError, NotSquareError

SIDES = (1, 2, 4, 8, 16, 32)


def bits(n, seed=0):
    return np.random.default_rng(seed).integers(0, 2, size=(n, n), dtype=np.uint8)


def test_forward_map_on_side_two():
    m = np.array([[10, 20], [30, 40]], dtype=np.uint8)
    # (p,q) -> ((p+q)%n, (p+2q)%n): 20 goes to (1,0), 30 to (1,1), 40 to (0,1)
    assert np.array_equal(scramble(m, 1), np.array([[10, 40], [20, 30]]))


def test_inverse_map_on_side_two():
    m = np.zeros((2, 2), dtype=np.uint8)
    m[1, 0] = 1
    out = unscramble(m, 1)
    assert out[0, 1] == 1 and out.sum() == 1


@pytest.mark.parametrize("n", SIDES)
def test_roundtrip_all_small_keys(n):
    m = bits(n, seed=n)
    for key in range(11):
        assert np.array_equal(unscramble(scramble(m, key), key), m)


def test_key_zero_and_side_one_are_copies():
    m = bits(8, seed=3)
    out = scramble(m, 0)
    assert np.array_equal(out, m) and out is not m
    one = np.array([[7]], dtype=np.uint8)
    assert np.array_equal(scramble(one, 9), one)


def test_period_small_values():
    assert period(1) == 1
    assert period(2) == 3


@pytest.mark.parametrize("n", SIDES)
def test_period_is_minimal(n):
    m = np.arange(n * n, dtype=np.int64).reshape(n, n)
    t = period(n)
    assert np.array_equal(scramble(m, t), m)
    for k in range(1, t):
        assert not np.array_equal(scramble(m, k), m)


def test_scramble_composes():
    m = bits(16, seed=1)
    assert np.array_equal(scramble(m, 5), scramble(scramble(m, 2), 3))
    step = m
    for _ in range(4):
        step = scramble(step, 1)
    assert np.array_equal(step, scramble(m, 4))


def test_population_count_preserved():
    m = bits(32, seed=9)
    for key in (1, 7, 13):
        assert scramble(m, key).sum() == m.sum()
        assert unscramble(m, key).sum() == m.sum()


def test_parameter_validation():
    m = bits(4)
    with pytest.raises(BadParameterError):
        scramble(m, -1)
    with pytest.raises(BadParameterError):
        scramble(m, 2.5)
    with pytest.raises(BadParameterError):
        unscramble(m, "3")
    with pytest.raises(NotSquareError):
        scramble(np.zeros((2, 3), dtype=np.uint8), 1)
    with pytest.raises(BadParameterError):
        period(0)
    with pytest.raises(BadParameterError):
        period(-3)


@settings(max_examples=60, deadline=None)
@given(
    n=st.sampled_from(SIDES),
    key=st.integers(0, 12),
    seed=st.integers(0, 2**31),
)
def test_roundtrip_property(n, key, seed):
    m = np.random.default_rng(seed).integers(0, 2, size=(n, n), dtype=np.uint8)
    assert np.array_equal(unscramble(scramble(m, key), key), m)
