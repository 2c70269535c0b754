import io
import math

import numpy as np
import pytest

from conftest import CORPUS
from hypermatch import sim
from hypermatch.dynamics import POLICIES, Engine, PolicySpec, replay
from hypermatch.hypergraph import generate
from hypermatch.measures import ArrivalStream, make_measure, uniform

K4 = generate("complete", q=4, r=3)


def test_run_is_reproducible():
    a = sim.run(K4, uniform(4, exact=False), PolicySpec("ml"), 5000, seed=3)
    b = sim.run(K4, uniform(4, exact=False), PolicySpec("ml"), 5000, seed=3)
    c = sim.run(K4, uniform(4, exact=False), PolicySpec("ml"), 5000, seed=4)
    assert np.array_equal(a.totals, b.totals) and not np.array_equal(a.totals, c.totals)


@pytest.mark.parametrize("kind", POLICIES)
def test_run_matches_reference_replay(kind):
    h = CORPUS["star(5)"] if kind in ("random", "ml", "ms") else CORPUS["complete-minus(6)"]
    m = make_measure([3, 1, 2, 2, 1, 1][:h.q])
    traj = sim.run(h, m, PolicySpec(kind, seed=11), 3000, seed=11, block=500, record_matches=True)
    arrivals = ArrivalStream(m, 11, block=500).draws(3000).tolist()
    ref = replay(h, PolicySpec(kind, seed=11), arrivals)
    assert traj.match_log == [(n, o.matched) for n, o in enumerate(ref, 1) if o.matched]
    assert traj.totals.tolist() == [o.new_state.size for o in ref]


def test_block_size_does_not_change_the_path():
    a = sim.run(K4, uniform(4, exact=False), PolicySpec("fcfm"), 4000, seed=1, block=1000)
    b = sim.run(K4, uniform(4, exact=False), PolicySpec("fcfm"), 4000, seed=1, block=333)
    assert np.array_equal(a.totals, b.totals)
    assert b.checkpoints[-1] == 4000 and len(b.checkpoints) == 13


def test_conservation_failure_is_caught(monkeypatch):
    class Leaky(Engine):
        def step(self, a):
            e = super().step(a)
            if e >= 0 and self.time % 7 == 0:
                self.counts[a] += 1
                self.total += 1
            return e

    monkeypatch.setattr(sim, "Engine", Leaky)
    with pytest.raises(sim.ConservationError):
        sim.run(K4, uniform(4, exact=False), PolicySpec("ml"), 5000, seed=0)


def test_paranoid_catches_inadmissible_buffer(monkeypatch):
    class Lazy(Engine):
        def step(self, a):
            # never match: the buffer soon holds a complete hyperedge
            self.counts[a] += 1
            self.total += 1
            return -1

    monkeypatch.setattr(sim, "Engine", Lazy)
    with pytest.raises(sim.ConservationError, match="complete hyperedge"):
        sim.run(K4, uniform(4, exact=False), PolicySpec("ml"), 100, seed=0, paranoid=True)


def _traj(totals):
    t = np.asarray(totals, dtype=np.int64)
    return sim.Trajectory(len(t), t, np.zeros(1), np.zeros(1), (), [len(t)])


def test_summarize_verdicts():
    n = 4000
    grow = sim.summarize(_traj(np.arange(n) // 5))
    assert grow.verdict == "transient_like" and grow.slope == pytest.approx(0.2, rel=1e-3)
    flat = sim.summarize(_traj(np.tile([1, 2, 1, 0], n // 4)))
    assert flat.verdict == "stable_like" and flat.empty_returns == n // 4
    assert flat.mean_return_time == pytest.approx(4.0)
    stuck = sim.summarize(_traj(np.full(n, 3)))
    assert stuck.verdict == "inconclusive" and math.isinf(stuck.mean_return_time)


def test_replicate_requires_enough_reps():
    with pytest.raises(ValueError):
        sim.replicate_and_classify(K4, uniform(4, exact=False), PolicySpec("ml"), 100, reps=5)


def test_replicate_and_csv():
    st = sim.replicate_and_classify(K4, uniform(4, exact=False), PolicySpec("ml"), 20_000, reps=8,
                                    base_seed=2, workers=1)
    assert st.verdict == "stable_like" and [r.rep for r in st.per_rep] == list(range(8))
    buf = io.StringIO()
    sim.write_csv(st, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0].split(",") == list(sim.CSV_COLUMNS) and len(lines) == 9
    d = st.to_dict()
    assert d["thresholds"]["agreement"] == 0.9 and len(d["per_rep"]) == 8


def test_parallel_matches_sequential():
    args = (K4, uniform(4, exact=False), PolicySpec("lcfm"), 5000)
    a = sim.replicate_and_classify(*args, reps=8, base_seed=5, workers=1)
    b = sim.replicate_and_classify(*args, reps=8, base_seed=5, workers=2)
    assert a.per_rep == b.per_rep


def test_thread_cap(monkeypatch):
    monkeypatch.setenv("HYPERMATCH_THREADS", "3")
    assert sim.thread_cap() == 3
    monkeypatch.delenv("HYPERMATCH_THREADS")
    assert sim.thread_cap() >= 1


def test_horizon_validation():
    with pytest.raises(ValueError):
        sim.run(K4, uniform(4, exact=False), PolicySpec("ml"), 0)


def test_skewed_measure_grows():
    traj = sim.run(K4, make_measure([0.4, 0.2, 0.2, 0.2]), PolicySpec("ml"), 100_000, seed=9)
    assert sim.summarize(traj).slope > 0.05
