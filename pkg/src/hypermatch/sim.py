"""Monte Carlo trajectories and a heuristic stable/transient classifier.

A trajectory starts from the empty buffer.  The total buffer size is kept
for every step, so window means, the growth slope and the returns to the
empty state are computed afterwards with numpy.  At every checkpoint the
class counts are re-derived from the arrival and match counters over the
full node set and 20 random subsets, and the buffer is checked to hold no
complete hyperedge.

The verdict is a heuristic.  Null-recurrent boundary cases are expected to
come out ``inconclusive``.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .dynamics import Engine, PolicySpec, matchable
from .hypergraph import Hypergraph
from .measures import ArrivalStream, Measure, derive_seed, make_rng, spawn_seeds, tie_rng

__all__ = [
    "ConservationError",
    "Trajectory",
    "RepResult",
    "SimStats",
    "run",
    "summarize",
    "replicate_and_classify",
    "write_csv",
    "CSV_COLUMNS",
    "thread_cap",
]

CSV_COLUMNS = ("rep", "slope", "mid_mean", "final_mean", "empty_returns", "mean_return_time", "verdict")
N_SUBSETS = 20


class ConservationError(AssertionError):
    pass


def thread_cap() -> int:
    """Worker cap from ``HYPERMATCH_THREADS``, defaulting to the CPU count."""
    env = os.environ.get("HYPERMATCH_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass
class Trajectory:
    horizon: int
    totals: np.ndarray  # total buffer size after each step, length horizon
    arrivals: np.ndarray  # A_n(i) per node at the end
    matches: np.ndarray  # M_n(H) per hyperedge at the end
    final_counts: tuple[int, ...]
    checkpoints: list[int]
    match_log: Optional[list[tuple[int, tuple[int, ...]]]] = None

    @property
    def empty_times(self) -> np.ndarray:
        return np.flatnonzero(self.totals == 0) + 1


def _conservation(h: Hypergraph, counts, arrivals, matches, subsets) -> None:
    x = np.asarray(counts, dtype=np.int64)
    inc = h.incidence()
    for B in subsets:
        lhs = int(x[B].sum())
        rhs = int(arrivals[B].sum() - (inc[:, B].sum(axis=1) * matches).sum())
        if lhs != rhs:
            raise ConservationError(f"X(B)={lhs} but A(B) - sum |H&B| M(H) = {rhs} for B={[i + 1 for i in B]}")


def run(h: Hypergraph, m: Measure, policy: PolicySpec, horizon: int, seed=0,
        block: Optional[int] = None, record_matches: bool = False, paranoid: bool = False) -> Trajectory:
    """Simulate ``horizon`` arrivals from the empty state.

    Arrivals come from ``ArrivalStream(m, seed)`` and tie-breaks from
    ``tie_rng(seed)``, so ``dynamics.replay`` with ``PolicySpec(seed=seed)``
    on the same arrivals reproduces the match sequence.  ``paranoid``
    re-checks admissibility against every hyperedge after every step.
    """
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    m = m.as_float()
    q = h.q
    if block is None:
        block = min(65536, max(1000, horizon // 100))
    stream = ArrivalStream(m, seed, block=block)
    engine = Engine(h, policy, tie_rng(seed))
    srng = make_rng(derive_seed(seed, 0x5B))
    subsets = [np.arange(q)]
    for _ in range(N_SUBSETS):
        pick = np.flatnonzero(srng.random(q) < 0.5)
        subsets.append(pick if len(pick) else np.array([int(srng.integers(q))]))
    totals = np.empty(horizon, dtype=np.int64)
    arrivals = np.zeros(q, dtype=np.int64)
    mcount = [0] * h.m
    log = [] if record_matches else None
    edges = engine.edges
    checkpoints = []
    n = 0
    step = engine.step
    for arr in stream.blocks(horizon):
        out = []
        push = out.append
        if paranoid or log is not None:
            for a in arr:
                e = step(a - 1)
                n += 1
                if e >= 0:
                    mcount[e] += 1
                    if log is not None:
                        log.append((n, edges[e]))
                if paranoid and matchable(h, engine.counts):
                    raise ConservationError(f"buffer holds a complete hyperedge at step {n}")
                push(engine.total)
        else:
            for a in arr:
                e = step(a - 1)
                if e >= 0:
                    mcount[e] += 1
                push(engine.total)
            n += len(arr)
        totals[n - len(arr):n] = out
        arrivals += np.bincount(np.asarray(arr) - 1, minlength=q)
        checkpoints.append(n)
        _conservation(h, engine.counts, arrivals, np.asarray(mcount, dtype=np.int64), subsets)
        if matchable(h, engine.counts):
            raise ConservationError(f"buffer holds a complete hyperedge at checkpoint {n}")
        if sum(engine.counts) != engine.total:
            raise ConservationError("total count out of sync with class counts")
    return Trajectory(horizon, totals, arrivals, np.asarray(mcount, dtype=np.int64),
                      tuple(engine.counts), checkpoints, log)


@dataclass(frozen=True)
class RepResult:
    rep: int
    slope: float
    mid_mean: float
    final_mean: float
    empty_returns: int
    mean_return_time: float
    verdict: str
    overall_mean: float


def summarize(traj: Trajectory, rep: int = 0, slope_threshold: float = 0.01,
              growth_ratio: float = 2.0) -> RepResult:
    """Window statistics of one trajectory.

    The mid window is ``(H/4, H/2]`` and the final window ``(H/2, H]``; the
    slope is the least-squares fit of the total size against time over the
    final window.
    """
    H = traj.horizon
    t = np.arange(1, H + 1, dtype=float)
    x = traj.totals.astype(float)
    mid = x[H // 4:H // 2] if H // 2 > H // 4 else x[:max(1, H // 2)]
    fin = x[H // 2:]
    tf = t[H // 2:]
    slope = float(np.polyfit(tf, fin, 1)[0]) if len(fin) >= 2 else 0.0
    times = traj.empty_times
    if len(times):
        gaps = np.diff(np.concatenate(([0], times)))
        mrt = float(gaps.mean())
    else:
        mrt = math.inf
    mid_mean, final_mean = float(mid.mean()), float(fin.mean())
    if slope > slope_threshold:
        verdict = "transient_like"
    elif final_mean <= growth_ratio * mid_mean and len(times) > 0:
        verdict = "stable_like"
    else:
        verdict = "inconclusive"
    return RepResult(rep, slope, mid_mean, final_mean, int(len(times)), mrt, verdict, float(x.mean()))


@dataclass
class SimStats:
    horizon: int
    reps: int
    slope_estimate: float
    mid_window_mean: float
    final_window_mean: float
    empty_returns: int
    mean_return_time: float
    verdict: str
    transient_fraction: float
    stable_fraction: float
    thresholds: dict = field(default_factory=dict)
    per_rep: list = field(default_factory=list)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["per_rep"] = [asdict(r) for r in self.per_rep]
        for r in d["per_rep"]:
            if math.isinf(r["mean_return_time"]):
                r["mean_return_time"] = None
        if math.isinf(d["mean_return_time"]):
            d["mean_return_time"] = None
        return d


def _one(args):
    h, m, policy, horizon, ss, rep, thr, ratio = args
    traj = run(h, m, policy, horizon, ss)
    return summarize(traj, rep, thr, ratio)


def replicate_and_classify(h: Hypergraph, m: Measure, policy: PolicySpec, horizon: int, reps: int = 20,
                           base_seed: int = 0, slope_threshold: float = 0.01, growth_ratio: float = 2.0,
                           agreement: float = 0.9, workers: Optional[int] = None) -> SimStats:
    """Independent replications and a heuristic verdict.

    Replication ``k`` uses child ``k`` of ``SeedSequence(base_seed)``.  The
    verdict is ``transient_like`` when the slope exceeds the threshold in at
    least ``agreement`` of the runs, ``stable_like`` when the final window
    mean stays within ``growth_ratio`` times the mid window mean in at least
    that share and every run returns to the empty state, and
    ``inconclusive`` otherwise.
    """
    if reps < 8:
        raise ValueError("at least 8 replications are required")
    seeds = spawn_seeds(base_seed, reps)
    jobs = [(h, m, policy, horizon, ss, k, slope_threshold, growth_ratio) for k, ss in enumerate(seeds)]
    workers = min(reps, workers or thread_cap())
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_one, jobs))
    else:
        results = [_one(j) for j in jobs]
    results.sort(key=lambda r: r.rep)
    trans = sum(r.slope > slope_threshold for r in results) / reps
    stab = sum(r.final_mean <= growth_ratio * r.mid_mean for r in results) / reps
    every_return = all(r.empty_returns > 0 for r in results)
    if trans >= agreement:
        verdict = "transient_like"
    elif stab >= agreement and every_return:
        verdict = "stable_like"
    else:
        verdict = "inconclusive"
    finite = [r.mean_return_time for r in results if math.isfinite(r.mean_return_time)]
    return SimStats(
        horizon=horizon,
        reps=reps,
        slope_estimate=float(np.mean([r.slope for r in results])),
        mid_window_mean=float(np.mean([r.mid_mean for r in results])),
        final_window_mean=float(np.mean([r.final_mean for r in results])),
        empty_returns=int(sum(r.empty_returns for r in results)),
        mean_return_time=float(np.mean(finite)) if finite else math.inf,
        verdict=verdict,
        transient_fraction=trans,
        stable_fraction=stab,
        thresholds={"slope_threshold": slope_threshold, "growth_ratio": growth_ratio, "agreement": agreement},
        per_rep=results,
    )


def write_csv(stats: SimStats, path_or_fh) -> None:
    own = isinstance(path_or_fh, (str, os.PathLike))
    fh = open(path_or_fh, "w", newline="") if own else path_or_fh
    try:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for r in stats.per_rep:
            w.writerow([r.rep, repr(r.slope), repr(r.mid_mean), repr(r.final_mean), r.empty_returns,
                        "inf" if math.isinf(r.mean_return_time) else repr(r.mean_return_time), r.verdict])
    finally:
        if own:
            fh.close()
