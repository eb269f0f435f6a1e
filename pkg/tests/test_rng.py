import numpy as np
import pytest

from cadpipe.rng import Prng


def test_same_seed_same_stream():
    a = Prng(42)
    b = Prng(42)
    assert a.uniform(size=10).tolist() == b.uniform(size=10).tolist()
    assert a.permutation(20).tolist() == b.permutation(20).tolist()
    assert a.integer(1000) == b.integer(1000)


def test_known_first_draw_pinned_across_platforms():
    # PCG64 is platform-independent; freezing one draw guards against an
    # accidental swap of the underlying bit generator
    assert Prng(0).uniform() == pytest.approx(0.6369616873214543, abs=1e-15)


def test_derive_xors_tag():
    assert Prng(12).derive(5).seed == 12 ^ 5


def test_subset_is_distinct_prefix():
    got = Prng(3).subset(10, 4)
    assert len(set(got.tolist())) == 4
    assert all(0 <= v < 10 for v in got)


def test_negative_seed_rejected():
    with pytest.raises(ValueError):
        Prng(-1)


def test_uniform_signed_bounds():
    draws = Prng(9).uniform_signed(0.25, size=1000)
    assert np.abs(draws).max() <= 0.25
