from fractions import Fraction

import numpy as np
import pytest

from hypermatch import measures as ms


def test_make_measure_normalises_exactly():
    m = ms.make_measure([1, 2, 3], exact=True)
    assert m.probs == (Fraction(1, 6), Fraction(1, 3), Fraction(1, 2))
    assert sum(m.probs) == 1


def test_float_measure():
    m = ms.make_measure([0.4, 0.2, 0.2, 0.2])
    assert abs(sum(m.probs) - 1) < 1e-12 and m.q == 4


@pytest.mark.parametrize("weights, exc", [([], ms.EmptyVector), ([1, 0, 2], ms.NonPositiveWeight),
                                          ([1, -1], ms.NonPositiveWeight)])
def test_rejects(weights, exc):
    with pytest.raises(exc):
        ms.make_measure(weights)


def test_order_stats_and_set_mass():
    m = ms.make_measure([1, 4, 2, 3], exact=True)
    mn, mx, _ = ms.order_stats(m)
    assert (mn, mx) == (Fraction(1, 10), Fraction(2, 5))
    assert ms.measure_of_set(m, [1, 3]) == Fraction(3, 10)


def test_uniform_roundtrip(tmp_path):
    m = ms.uniform(5)
    path = tmp_path / "mu.json"
    ms.dump_measure(m, path)
    assert ms.load_measure(path, q=5) == m


def test_stream_is_block_size_independent():
    m = ms.make_measure([0.1, 0.2, 0.3, 0.4])
    a = np.concatenate([np.array(b) for b in ms.ArrivalStream(m, 5, block=7).blocks(100)])
    b = ms.ArrivalStream(m, 5, block=1000).draws(100)
    assert np.array_equal(a, b)
    assert a.min() >= 1 and a.max() <= 4


def test_stream_frequencies():
    m = ms.make_measure([0.1, 0.2, 0.3, 0.4])
    x = ms.ArrivalStream(m, 11).draws(200_000)
    freq = np.bincount(x, minlength=5)[1:] / len(x)
    assert np.allclose(freq, m.array(), atol=0.005)


def test_spawned_seeds_differ_and_repeat():
    a = [ms.ArrivalStream(ms.uniform(3, exact=False), s).draws(20) for s in ms.spawn_seeds(1, 3)]
    b = [ms.ArrivalStream(ms.uniform(3, exact=False), s).draws(20) for s in ms.spawn_seeds(1, 3)]
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    assert not np.array_equal(a[0], a[1])


def test_derive_seed_does_not_touch_parent():
    ss = np.random.SeedSequence(3)
    before = ss.n_children_spawned
    ms.derive_seed(ss, 9)
    assert ss.n_children_spawned == before
    assert ms.tie_rng(3).random() == ms.tie_rng(3).random()
