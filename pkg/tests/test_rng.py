import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pnn.rng import Rng, _splitmix64, gaussian, shuffle


def test_splitmix64_reference_output():
    # first output of SplitMix64 seeded with 0 (reference C implementation)
    assert _splitmix64(0)[1] == 0xE220A8397B1DCDAF


def test_xoshiro_step_from_known_state():
    r = Rng(0)
    r._s = [1, 2, 3, 4]
    # first two values follow by hand: rotl(2*5, 7)*9 = 11520, then s[1] becomes 0
    assert [r.next_u64() for _ in range(4)] == [11520, 0, 1509978240, 1215971899390074240]


def test_seed_range():
    with pytest.raises(ValueError):
        Rng(-1)
    with pytest.raises(ValueError):
        Rng(1 << 64)


def test_gaussian_degenerate():
    assert gaussian(Rng(5), 0.0, 0.0) == 0.0
    assert Rng(5).gaussian(3.25, 0.0) == 3.25
    with pytest.raises(ValueError):
        Rng(0).gaussian(0.0, -1.0)


def test_gaussian_moments():
    r = Rng(2024)
    draws = r.gaussian_array((1_000_000,))
    assert abs(draws.mean()) < 0.01
    assert abs(draws.std() - 1.0) < 0.01


def test_gaussian_scaling():
    a = Rng(3).gaussian_array((50,))
    b = Rng(3).gaussian_array((50,), mean=2.0, stddev=0.5)
    np.testing.assert_allclose(b, 2.0 + 0.5 * a, rtol=0, atol=1e-15)


def test_box_muller_pair_from_uniforms():
    u = Rng(11)
    u1, u2 = 1.0 - u.uniform(), u.uniform()
    r = math.sqrt(-2.0 * math.log(u1))
    g = Rng(11)
    assert g.gaussian() == r * math.cos(2 * math.pi * u2)
    assert g.gaussian() == r * math.sin(2 * math.pi * u2)


def test_shuffle_edge_cases():
    assert shuffle(Rng(0), []) == []
    assert shuffle(Rng(0), ["x"]) == ["x"]


def test_shuffle_permutation_of_1_to_100():
    items = list(range(1, 101))
    out = shuffle(Rng(7), items)
    assert sorted(out) == items
    assert out != items


@given(st.integers(0, 2**64 - 1), st.lists(st.integers(), max_size=50))
def test_shuffle_is_permutation(seed, items):
    assert sorted(Rng(seed).shuffle(items)) == sorted(items)


@given(st.integers(0, 2**64 - 1))
def test_call_trace_is_deterministic(seed):
    def trace(r):
        return [r.gaussian(), r.shuffle(range(10)), r.gaussian(1.0, 2.0), r.uniform(), r.randbelow(7)]

    assert trace(Rng(seed)) == trace(Rng(seed))


def test_child_streams_differ_and_are_reproducible():
    base = Rng(42)
    assert base.child(1).seed == 42 ^ 1
    a = [base.child(1).next_u64() for _ in range(3)]
    b = [Rng(42 ^ 1).next_u64() for _ in range(3)]
    assert a == b
    assert base.child(1).next_u64() != base.child(2).next_u64()


def test_randbelow_is_roughly_uniform():
    r = Rng(9)
    counts = np.bincount([r.randbelow(6) for _ in range(60000)], minlength=6)
    assert np.all(np.abs(counts - 10000) < 400)
