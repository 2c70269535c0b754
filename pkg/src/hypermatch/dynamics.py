"""Matching-model dynamics: buffer word, class counts, policies, one step.

Two implementations of the same transition live here:

* :func:`step` works on immutable :class:`ModelState` values and reports
  which buffer positions were consumed.  It is the reference used by
  :func:`replay` and by the exact enumerators in :mod:`hypermatch.oracle`.
* :class:`Engine` keeps per-class queues of arrival times and is what the
  simulator drives for millions of steps.

Both consume the tie-breaking generator identically, so the same seed gives
the same matches.
"""

from __future__ import annotations

import json
import random
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .hypergraph import Hypergraph
from .measures import tie_rng

__all__ = [
    "POLICIES",
    "CLASS_BASED",
    "NoCandidates",
    "PolicySpec",
    "ModelState",
    "StepOutcome",
    "matchable",
    "candidates",
    "choice_distribution",
    "choose",
    "step",
    "apply_match",
    "replay",
    "trace_records",
    "write_trace",
    "Engine",
]

POLICIES = ("fcfm", "lcfm", "ml", "ms", "priority", "random")
CLASS_BASED = ("ml", "ms", "priority", "random")


class NoCandidates(ValueError):
    pass


@dataclass(frozen=True)
class PolicySpec:
    """Matching policy and its parameters.

    ``priorities`` maps a node ``i`` to a permutation of ``1..d(i)`` over the
    hyperedges containing ``i`` in canonical order; nodes left out use the
    identity.  ``count_basis`` selects whether Match-the-Longest/Shortest
    score candidates on the counts before (``"pre"``) or after (``"post"``)
    the arrival is added.
    """

    kind: str
    seed: int = 0
    priorities: tuple = ()
    count_basis: str = "pre"

    def __post_init__(self):
        if self.kind not in POLICIES:
            raise ValueError(f"unknown policy {self.kind!r}; expected one of {POLICIES}")
        if self.count_basis not in ("pre", "post"):
            raise ValueError("count_basis must be 'pre' or 'post'")
        if isinstance(self.priorities, dict):
            object.__setattr__(self, "priorities", tuple(sorted((int(k), tuple(v)) for k, v in self.priorities.items())))

    @property
    def class_based(self) -> bool:
        return self.kind in CLASS_BASED

    def priority_order(self, h: Hypergraph, i: int) -> list[tuple[int, ...]]:
        """Hyperedges containing ``i`` in the order node ``i`` prefers them."""
        own = [e for e in h.hyperedges if i in e]
        sigma = dict(self.priorities).get(i)
        if sigma is None:
            return own
        if sorted(sigma) != list(range(1, len(own) + 1)):
            raise ValueError(f"priority for node {i} must permute 1..{len(own)}")
        return [own[s - 1] for s in sigma]

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "seed": self.seed,
            "priorities": {str(k): list(v) for k, v in self.priorities},
            "count_basis": self.count_basis,
        }


@dataclass(frozen=True)
class ModelState:
    """Buffer word (classes in arrival order) and its commutative image."""

    buffer_word: tuple[int, ...]
    counts: tuple[int, ...]

    @classmethod
    def empty(cls, q: int) -> "ModelState":
        return cls((), (0,) * q)

    @classmethod
    def from_word(cls, word: Sequence[int], q: int) -> "ModelState":
        counts = [0] * q
        for c in word:
            counts[c - 1] += 1
        return cls(tuple(word), tuple(counts))

    @classmethod
    def from_counts(cls, counts: Sequence[int]) -> "ModelState":
        """State with the given counts; the word lists classes in increasing order."""
        word = tuple(i + 1 for i, c in enumerate(counts) for _ in range(c))
        return cls(word, tuple(counts))

    @property
    def size(self) -> int:
        return len(self.buffer_word)


@dataclass(frozen=True)
class StepOutcome:
    arrival: int
    matched: Optional[tuple[int, ...]]
    removed_positions: tuple[int, ...]
    new_state: ModelState


def matchable(h: Hypergraph, u: Sequence[int]) -> list[tuple[int, ...]]:
    """Hyperedges all of whose classes have a positive count in ``u``.

    This is componentwise domination of the hyperedge trace by ``u``, which
    is what the verbal description of the dynamics requires.
    """
    return [e for e in h.hyperedges if all(u[i - 1] > 0 for i in e)]


def candidates(h: Hypergraph, counts: Sequence[int], arrival: int) -> list[tuple[int, ...]]:
    """Hyperedges the arrival can complete given the buffered ``counts``."""
    u = list(counts)
    u[arrival - 1] += 1
    found = matchable(h, u)
    for e in found:
        if arrival not in e:
            raise AssertionError(f"inadmissible state: {e} was already complete before the arrival")
    return found


def _positions(word: Sequence[int]) -> dict[int, list[int]]:
    pos: dict[int, list[int]] = {}
    for p, c in enumerate(word):
        pos.setdefault(c, []).append(p)
    return pos


def _fcfm_key(e, arrival, pos):
    return tuple(sorted(pos[c][0] for c in e if c != arrival)), e


def _lcfm_key(e, arrival, pos):
    return tuple(sorted((-pos[c][-1] for c in e if c != arrival))), e


def choice_distribution(policy: PolicySpec, h: Hypergraph, state: ModelState, arrival: int,
                        cands: Sequence[tuple[int, ...]]) -> list[tuple[Fraction, tuple[int, ...]]]:
    """Exact law of the hyperedge the policy picks among ``cands``."""
    if not cands:
        raise NoCandidates("no matchable hyperedge")
    kind = policy.kind
    if kind in ("fcfm", "lcfm"):
        pos = _positions(state.buffer_word)
        keyf = _fcfm_key if kind == "fcfm" else _lcfm_key
        return [(Fraction(1), min(cands, key=lambda e: keyf(e, arrival, pos)))]
    if kind in ("ml", "ms"):
        best = _extremal(policy, state.counts, arrival, cands)
        w = Fraction(1, len(best))
        return [(w, e) for e in best]
    if kind == "priority":
        cset = set(cands)
        for e in policy.priority_order(h, arrival):
            if e in cset:
                return [(Fraction(1), e)]
        raise AssertionError("candidate missing from the priority list")
    # random: a fresh uniform priority order picks each candidate w.p. 1/|cands|
    w = Fraction(1, len(cands))
    return [(w, e) for e in cands]


def _extremal(policy, counts, arrival, cands):
    shift = 1 if policy.count_basis == "post" else 0
    scores = [sum(counts[c - 1] for c in e) + shift for e in cands]
    target = max(scores) if policy.kind == "ml" else min(scores)
    return [e for e, s in zip(cands, scores) if s == target]


def choose(policy: PolicySpec, h: Hypergraph, state: ModelState, arrival: int,
           cands: Sequence[tuple[int, ...]], rng: random.Random) -> tuple[int, ...]:
    """Sample the policy's pick; draws from ``rng`` only on a genuine tie."""
    dist = choice_distribution(policy, h, state, arrival, cands)
    if len(dist) == 1:
        return dist[0][1]
    return dist[rng.randrange(len(dist))][1]


def step(h: Hypergraph, state: ModelState, arrival: int, policy: PolicySpec,
         rng: Optional[random.Random] = None) -> StepOutcome:
    """One arrival: either store it or complete exactly one hyperedge."""
    if not 1 <= arrival <= h.q:
        raise ValueError(f"arrival {arrival} outside 1..{h.q}")
    cands = candidates(h, state.counts, arrival)
    if not cands:
        word = state.buffer_word + (arrival,)
        counts = list(state.counts)
        counts[arrival - 1] += 1
        return StepOutcome(arrival, None, (), ModelState(word, tuple(counts)))
    if rng is None:
        rng = tie_rng(policy.seed)
    e = choose(policy, h, state, arrival, cands, rng)
    return apply_match(policy, state, arrival, e)


def apply_match(policy: PolicySpec, state: ModelState, arrival: int, e: tuple[int, ...]) -> StepOutcome:
    """Complete ``e`` with the arrival, taking one buffered item per other class.

    LCFM takes the youngest item of each class; every other policy takes
    the oldest.
    """
    pos = _positions(state.buffer_word)
    youngest = policy.kind == "lcfm"
    removed = sorted(pos[c][-1] if youngest else pos[c][0] for c in e if c != arrival)
    drop = set(removed)
    word = tuple(c for p, c in enumerate(state.buffer_word) if p not in drop)
    counts = list(state.counts)
    for c in e:
        if c != arrival:
            counts[c - 1] -= 1
    return StepOutcome(arrival, e, tuple(p + 1 for p in removed), ModelState(word, tuple(counts)))


def replay(h: Hypergraph, policy: PolicySpec, arrivals: Sequence[int],
           state: Optional[ModelState] = None) -> list[StepOutcome]:
    """Fold :func:`step` over ``arrivals`` starting from the empty buffer."""
    rng = tie_rng(policy.seed)
    state = state or ModelState.empty(h.q)
    out = []
    for a in arrivals:
        o = step(h, state, int(a), policy, rng)
        out.append(o)
        state = o.new_state
    return out


def trace_records(outcomes: Sequence[StepOutcome]) -> list[dict]:
    return [
        {"n": n, "arrival": o.arrival, "matched": None if o.matched is None else list(o.matched),
         "buffer_size": o.new_state.size}
        for n, o in enumerate(outcomes, start=1)
    ]


def write_trace(outcomes: Sequence[StepOutcome], fh) -> None:
    """JSON lines, one record per step."""
    for rec in trace_records(outcomes):
        fh.write(json.dumps(rec) + "\n")


class Engine:
    """Mutable fast-path state machine for long trajectories.

    ``counts`` is a plain list indexed by ``node - 1``.  Under FCFM/LCFM the
    arrival times of buffered items are kept per class; class-based policies
    only need the counts.
    """

    def __init__(self, h: Hypergraph, policy: PolicySpec, rng: random.Random):
        self.h = h
        self.policy = policy
        self.rng = rng
        self.q = h.q
        self.counts = [0] * h.q
        self.total = 0
        self.time = 0
        self.kind = policy.kind
        self.edges = list(h.hyperedges)
        eid = {e: k for k, e in enumerate(self.edges)}
        # per arrival class: (edge id, other classes as 0-based indices)
        self.table = []
        for i in h.nodes:
            if self.kind == "priority":
                own = policy.priority_order(h, i)
            else:
                own = [e for e in self.edges if i in e]
            self.table.append([(eid[e], tuple(c - 1 for c in e if c != i), e) for e in own])
        self.queues = [deque() for _ in range(h.q)] if self.kind in ("fcfm", "lcfm") else None
        self.sign = 1 if self.kind == "ml" else -1
        self.shift = 1 if policy.count_basis == "post" else 0

    def step(self, a: int) -> int:
        """Feed one arrival (0-based class); return matched edge id or -1."""
        counts = self.counts
        self.time += 1
        cands = [t for t in self.table[a] if all(counts[o] for o in t[1])]
        if not cands:
            counts[a] += 1
            self.total += 1
            if self.queues is not None:
                self.queues[a].append(self.time)
            return -1
        kind = self.kind
        if len(cands) == 1:
            pick = cands[0]
        elif kind == "priority":
            pick = cands[0]
        elif kind == "random":
            pick = cands[self.rng.randrange(len(cands))]
        elif kind in ("ml", "ms"):
            sign = self.sign
            scores = [sign * sum(counts[o] for o in t[1]) for t in cands]
            top = max(scores)
            best = [t for t, s in zip(cands, scores) if s == top]
            pick = best[0] if len(best) == 1 else best[self.rng.randrange(len(best))]
        else:
            qs = self.queues
            if kind == "fcfm":
                pick = min(cands, key=lambda t: (sorted(qs[o][0] for o in t[1]), t[2]))
            else:
                pick = min(cands, key=lambda t: (sorted(-qs[o][-1] for o in t[1]), t[2]))
        for o in pick[1]:
            counts[o] -= 1
        self.total -= len(pick[1])
        if self.queues is not None:
            if kind == "lcfm":
                for o in pick[1]:
                    self.queues[o].pop()
            else:
                for o in pick[1]:
                    self.queues[o].popleft()
        return pick[0]

    def buffer_word(self) -> tuple[int, ...]:
        if self.queues is None:
            raise ValueError("class-based engines do not track arrival order")
        items = sorted((t, c + 1) for c, qu in enumerate(self.queues) for t in qu)
        return tuple(c for _, c in items)
