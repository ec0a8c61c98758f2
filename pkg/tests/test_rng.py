"""Stream derivation and scalar/vector agreement for the splitmix64 RNG."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fuchsianwalk.rng import (
    GOLDEN,
    MASK64,
    SplitMix64,
    advance_uniforms,
    avalanche,
    mix64,
    stream_state,
    stream_states,
)

u64 = st.integers(min_value=0, max_value=MASK64)


def test_mix64_reference_values():
    # reference outputs of the standard finalizer, computed once with the
    # textbook C implementation
    assert mix64(0) == 0
    assert avalanche(0) == mix64(GOLDEN) == 0xE220A8397B1DCDAF
    s = SplitMix64(0)
    assert [s.next_u64() for _ in range(3)] == [
        0xE220A8397B1DCDAF,
        0x6E789E6AA1B965F4,
        0x06C45D188009454F,
    ]


@given(u64)
def test_mix64_stays_in_range(z):
    assert 0 <= mix64(z) <= MASK64


@given(st.integers(min_value=0, max_value=2**32), st.integers(min_value=0, max_value=2**20))
def test_scalar_vector_stream_agreement(seed, index):
    assert stream_states(seed, np.asarray([index]))[0] == stream_state(seed, index)


def test_vector_uniforms_match_scalar():
    seed = 12345
    idx = np.arange(64, dtype=np.uint64)
    states = stream_states(seed, idx)
    for draw in range(5):
        got = advance_uniforms(states)
        for i in range(64):
            want = SplitMix64.for_sample(seed, int(i))
            for _ in range(draw):
                want.uniform()
            assert got[i] == want.uniform()


def test_uniform_grid_and_range():
    s = SplitMix64.for_sample(7, 3)
    for _ in range(2000):
        u = s.uniform()
        assert 0.0 <= u < 1.0
        scaled = u * 2.0**53
        assert scaled == int(scaled)


def test_negative_index_rejected():
    with pytest.raises(ValueError):
        stream_state(1, -1)


def test_randbelow_range_and_balance():
    s = SplitMix64.for_sample(0, 0)
    counts = [0] * 7
    for _ in range(70_000):
        counts[s.randbelow(7)] += 1
    assert min(counts) > 9_000 and max(counts) < 11_000


def test_randbelow_rejects_nonpositive():
    s = SplitMix64.for_sample(0, 0)
    with pytest.raises(ValueError):
        s.randbelow(0)


@settings(max_examples=30)
@given(st.integers(min_value=0, max_value=2**16))
def test_streams_are_distinct(seed):
    states = {stream_state(seed, i) for i in range(256)}
    assert len(states) == 256


def test_streams_differ_across_seeds():
    a = stream_states(1, np.arange(1000))
    b = stream_states(2, np.arange(1000))
    assert not np.any(a == b)
