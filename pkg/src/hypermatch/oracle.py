"""Exact reference computations used to check formulas and simulations.

Drift enumeration walks the full tree of arrival words (and tie branches)
with rational weights.  The truncated stationary analysis builds the exact
kernel of the class-count chain on a capped state space and solves for the
invariant law numerically.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence, Union

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .dynamics import (
    ModelState,
    PolicySpec,
    apply_match,
    candidates,
    choice_distribution,
    matchable,
)
from .hypergraph import GuardExceeded, Hypergraph
from .measures import Measure

__all__ = [
    "InadmissibleState",
    "NonLinearRegime",
    "StateSpaceTooLarge",
    "DriftReport",
    "SlopeReport",
    "TruncatedChainResult",
    "quadratic",
    "expected_delta",
    "one_step_drift",
    "drift_slopes",
    "four_step_drift_slope",
    "parse_state_family",
    "truncated_stationary",
    "rational_str",
    "STATE_GUARD",
]

STATE_GUARD = 2_000_000


class InadmissibleState(ValueError):
    pass


class NonLinearRegime(ArithmeticError):
    pass


class StateSpaceTooLarge(GuardExceeded):
    pass


def rational_str(x) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def quadratic(counts: Sequence[int]) -> int:
    return sum(c * c for c in counts)


# --------------------------------------------------------------------------
# drift enumeration


class _Enumerator:
    """Exact law of the chain after ``n`` steps, with memoised branching."""

    def __init__(self, h: Hypergraph, m: Measure, policy: PolicySpec):
        self.h = h
        self.mu = m.as_exact().probs
        self.policy = policy
        self.by_counts = policy.class_based
        self._memo: dict = {}

    def branches(self, state):
        """List of ``(probability, next_state)`` over arrivals and ties."""
        hit = self._memo.get(state)
        if hit is not None:
            return hit
        out = []
        if self.by_counts:
            counts = state
            ms = ModelState((), counts)
            for a in self.h.nodes:
                pa = self.mu[a - 1]
                cands = candidates(self.h, counts, a)
                if not cands:
                    nxt = list(counts)
                    nxt[a - 1] += 1
                    out.append((pa, tuple(nxt)))
                    continue
                for w, e in choice_distribution(self.policy, self.h, ms, a, cands):
                    nxt = list(counts)
                    for c in e:
                        if c != a:
                            nxt[c - 1] -= 1
                    out.append((pa * w, tuple(nxt)))
        else:
            for a in self.h.nodes:
                pa = self.mu[a - 1]
                cands = candidates(self.h, state.counts, a)
                if not cands:
                    out.append((pa, ModelState(state.buffer_word + (a,), _bump(state.counts, a))))
                    continue
                for w, e in choice_distribution(self.policy, self.h, state, a, cands):
                    out.append((pa * w, apply_match(self.policy, state, a, e).new_state))
        self._memo[state] = out
        return out

    def law(self, start, steps: int) -> dict:
        dist = {start: Fraction(1)}
        for _ in range(steps):
            nxt: dict = {}
            for s, p in dist.items():
                for w, t in self.branches(s):
                    nxt[t] = nxt.get(t, 0) + p * w
            dist = nxt
        total = sum(dist.values())
        if total != 1:
            raise AssertionError(f"branch weights sum to {total}, not 1")
        return dist

    def counts_of(self, s):
        return s if self.by_counts else s.counts


def _bump(counts, a):
    c = list(counts)
    c[a - 1] += 1
    return tuple(c)


def _start(policy: PolicySpec, h: Hypergraph, state):
    if isinstance(state, ModelState):
        counts = state.counts
    else:
        counts = tuple(int(c) for c in state)
        state = ModelState.from_counts(counts)
    if len(counts) != h.q:
        raise ValueError(f"state has {len(counts)} coordinates, hypergraph has {h.q} nodes")
    if any(c < 0 for c in counts):
        raise InadmissibleState("negative count")
    if matchable(h, counts):
        raise InadmissibleState(f"state {list(counts)} already holds a complete hyperedge")
    return counts if policy.class_based else state


def expected_delta(h: Hypergraph, m: Measure, policy: PolicySpec, state, steps: int = 1,
                   L: Callable[[Sequence[int]], object] = quadratic, _enum: Optional[_Enumerator] = None) -> Fraction:
    """``E[L(X_steps) - L(X_0) | X_0 = state]`` computed exactly.

    ``state`` is a counts vector or a :class:`ModelState`; for FCFM/LCFM a
    bare counts vector is read as the word listing classes in increasing
    order.
    """
    enum = _enum or _Enumerator(h, m, policy)
    s0 = _start(policy, h, state)
    dist = enum.law(s0, steps)
    l0 = L(enum.counts_of(s0))
    return sum((p * (L(enum.counts_of(s)) - l0) for s, p in dist.items()), Fraction(0))


@dataclass(frozen=True)
class DriftReport:
    base_state: tuple[int, ...]
    policy: str
    horizon_steps: int
    expected_delta_L: Fraction
    slope_estimates: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "base_state": list(self.base_state),
            "policy": self.policy,
            "horizon_steps": self.horizon_steps,
            "expected_delta_L": rational_str(self.expected_delta_L),
            "slope_estimates": {str(k): rational_str(v) for k, v in sorted(self.slope_estimates.items())},
        }


def one_step_drift(h: Hypergraph, m: Measure, policy: PolicySpec, state, L=quadratic,
                   steps: int = 1) -> DriftReport:
    """Expected change of ``L`` plus finite-difference slopes.

    The slope for node ``i`` is ``D(state + e_i) - D(state)``; it is reported
    for the nodes where the incremented state stays admissible.
    """
    enum = _Enumerator(h, m, policy)
    counts = state.counts if isinstance(state, ModelState) else tuple(int(c) for c in state)
    d0 = expected_delta(h, m, policy, state, steps, L, enum)
    slopes = {}
    if policy.class_based:
        for i in h.nodes:
            up = _bump(counts, i)
            if not matchable(h, up):
                slopes[i] = expected_delta(h, m, policy, up, steps, L, enum) - d0
    return DriftReport(tuple(counts), policy.kind, steps, d0, slopes)


@dataclass(frozen=True)
class SlopeReport:
    """Per-coordinate slopes of the expected change over a state family.

    ``values[i]`` holds ``(D(v), D(v+1), D(v+2))`` for coordinate ``i``
    varied from ``v = start[i]`` with the other coordinates at ``base``.
    """

    nodes: tuple[int, ...]
    steps: int
    base: dict
    slopes: dict
    values: dict

    def to_dict(self) -> dict:
        return {
            "nodes": list(self.nodes),
            "steps": self.steps,
            "base": {str(k): v for k, v in self.base.items()},
            "slopes": {str(k): rational_str(v) for k, v in self.slopes.items()},
            "values": {str(k): [rational_str(x) for x in v] for k, v in self.values.items()},
        }


def drift_slopes(h: Hypergraph, m: Measure, nodes: Sequence[int], steps: int = 4,
                 policy: Optional[PolicySpec] = None, base: Optional[dict] = None,
                 start: Union[int, dict] = 8, L=quadratic) -> SlopeReport:
    """Slopes of ``E[L(X_steps) - L(X_0)]`` over ``sum_i x_i e_i``, ``i`` in ``nodes``.

    Coordinate ``i`` is varied through ``v, v+1, v+2`` with ``v = start``
    (an int, or a per-node dict falling back to 8) and the other coordinates
    held at ``base`` (default 20).  Both successive
    differences must agree, otherwise the evaluation points are not in the
    linear regime and :class:`NonLinearRegime` is raised.
    """
    policy = policy or PolicySpec("ml")
    nodes = tuple(nodes)
    base = dict(base or {})
    for i in nodes:
        base.setdefault(i, 20)
    enum = _Enumerator(h, m, policy)
    slopes, values = {}, {}
    for i in nodes:
        v = start.get(i, 8) if isinstance(start, dict) else start
        ds = []
        for x in (v, v + 1, v + 2):
            counts = [0] * h.q
            for j in nodes:
                counts[j - 1] = base[j]
            counts[i - 1] = x
            ds.append(expected_delta(h, m, policy, counts, steps, L, enum))
        a, b = ds[1] - ds[0], ds[2] - ds[1]
        if a != b:
            raise NonLinearRegime(f"slope in x_{i} changes from {a} to {b} around {v}")
        slopes[i] = a
        values[i] = tuple(ds)
    return SlopeReport(nodes, steps, {k: base[k] for k in nodes}, slopes, values)


def four_step_drift_slope(h: Hypergraph, m: Measure, nodes: Sequence[int], **kw) -> SlopeReport:
    """:func:`drift_slopes` over the chain observed every four arrivals."""
    return drift_slopes(h, m, nodes, steps=4, **kw)


_TERM = re.compile(r"^\s*([a-z]\w*)\s*\*\s*e(\d+)\s*$")


def parse_state_family(text: str) -> tuple[int, ...]:
    """``"x*e1+y*e2"`` -> ``(1, 2)``."""
    nodes = []
    for term in text.split("+"):
        mt = _TERM.match(term)
        if not mt:
            raise ValueError(f"cannot parse state family term {term!r}; expected e.g. 'x*e4'")
        nodes.append(int(mt.group(2)))
    if len(set(nodes)) != len(nodes):
        raise ValueError("state family repeats a node")
    return tuple(nodes)


# --------------------------------------------------------------------------
# truncated chain


@dataclass
class TruncatedChainResult:
    cap: int
    state_count: int
    stationary: dict
    mean_total_count: float
    empty_state_mass: float
    dropped_rate: float
    residual: float

    def to_dict(self, top: int = 20) -> dict:
        heaviest = sorted(self.stationary.items(), key=lambda kv: -kv[1])[:top]
        return {
            "cap": self.cap,
            "state_count": self.state_count,
            "mean_total_count": self.mean_total_count,
            "empty_state_mass": self.empty_state_mass,
            "dropped_rate": self.dropped_rate,
            "residual": self.residual,
            "heaviest_states": [[list(s), p] for s, p in heaviest],
        }


def truncated_stationary(h: Hypergraph, m: Measure, policy: PolicySpec, K: int,
                         tol: float = 1e-12, max_iter: int = 200_000) -> TruncatedChainResult:
    """Invariant law of the class-count chain with every count capped at ``K``.

    An arrival that finds no match while its class already holds ``K``
    items is discarded.  ``dropped_rate`` is the stationary probability per
    step of such a discard, which bounds how far the truncated chain can be
    from the real one.  Only class-based policies have a count-valued
    Markov chain, so FCFM/LCFM are rejected.
    """
    if not policy.class_based:
        raise ValueError("truncated_stationary needs a class-based policy (ml, ms, priority, random)")
    if K < 1:
        raise ValueError("cap must be positive")
    mu = [float(p) for p in m.probs]
    ms_cache = {}
    index = {}
    states = []
    rows, cols, vals = [], [], []
    drop = []
    zero = (0,) * h.q
    index[zero] = 0
    states.append(zero)
    queue = deque([zero])
    while queue:
        s = queue.popleft()
        si = index[s]
        dropped = 0.0
        for a in h.nodes:
            pa = mu[a - 1]
            cands = candidates(h, s, a)
            if not cands:
                if s[a - 1] >= K:
                    dropped += pa
                    rows.append(si)
                    cols.append(si)
                    vals.append(pa)
                    continue
                branches = [(1.0, _bump(s, a))]
            else:
                ms = ms_cache.setdefault(s, ModelState((), s))
                branches = []
                for w, e in choice_distribution(policy, h, ms, a, cands):
                    nxt = list(s)
                    for c in e:
                        if c != a:
                            nxt[c - 1] -= 1
                    branches.append((float(w), tuple(nxt)))
            for w, t in branches:
                ti = index.get(t)
                if ti is None:
                    ti = len(states)
                    if ti >= STATE_GUARD:
                        raise StateSpaceTooLarge(f"more than {STATE_GUARD} reachable states at cap {K}")
                    index[t] = ti
                    states.append(t)
                    queue.append(t)
                rows.append(si)
                cols.append(ti)
                vals.append(pa * w)
        drop.append(dropped)
        ms_cache.pop(s, None)
    n = len(states)
    P = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    PT = P.T.tocsr()
    # direct solve of pi (P - I) = 0 with one equation replaced by normalisation
    A = (PT - sp.identity(n, format="csr")).tolil()
    A[0, :] = np.ones(n)
    rhs = np.zeros(n)
    rhs[0] = 1.0
    pi = spla.spsolve(A.tocsr(), rhs)
    pi = np.clip(pi, 0.0, None)
    pi /= pi.sum()
    # polish with the lazy chain (P + I)/2, which removes periodicity
    residual = np.abs(PT @ pi - pi).max()
    it = 0
    while residual >= tol and it < max_iter:
        pi = 0.5 * (pi + PT @ pi)
        pi /= pi.sum()
        residual = np.abs(PT @ pi - pi).max()
        it += 1
    totals = np.array([sum(s) for s in states], dtype=float)
    stationary = {s: float(p) for s, p in zip(states, pi)}
    return TruncatedChainResult(
        cap=K,
        state_count=n,
        stationary=stationary,
        mean_total_count=float(pi @ totals),
        empty_state_mass=float(pi[0]),
        dropped_rate=float(pi @ np.array(drop)),
        residual=float(residual),
    )
