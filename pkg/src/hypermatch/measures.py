"""Arrival measures on the node set, with exact and floating backends.

Stability predicates are decided on exact rationals (``fractions.Fraction``)
because several conditions differ only by strict versus weak inequality.
Simulation uses floats and a counter-based generator (Philox) so that every
replication owns an independent, reproducible stream.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Optional, Sequence, Union

import numpy as np

__all__ = [
    "MeasureError",
    "NonPositiveWeight",
    "EmptyVector",
    "Measure",
    "make_measure",
    "uniform",
    "order_stats",
    "measure_of_set",
    "sample",
    "make_rng",
    "spawn_seeds",
    "tie_rng",
    "derive_seed",
    "ArrivalStream",
    "load_measure",
    "dump_measure",
    "parse_measure",
]

Number = Union[int, float, Fraction]


class MeasureError(ValueError):
    pass


class NonPositiveWeight(MeasureError):
    pass


class EmptyVector(MeasureError):
    pass


@dataclass(frozen=True)
class Measure:
    """Probability vector over nodes ``1..q`` with full support."""

    probs: tuple
    exact: bool

    @property
    def q(self) -> int:
        return len(self.probs)

    def __getitem__(self, i: int):
        """Mass of node ``i`` (1-based)."""
        return self.probs[i - 1]

    def of(self, nodes: Iterable[int]):
        return measure_of_set(self, nodes)

    @property
    def mu_min(self):
        return min(self.probs)

    @property
    def mu_max(self):
        return max(self.probs)

    def as_float(self) -> "Measure":
        if not self.exact:
            return self
        return Measure(tuple(float(p) for p in self.probs), False)

    def as_exact(self) -> "Measure":
        if self.exact:
            return self
        return make_measure(self.probs, exact=True)

    def array(self) -> np.ndarray:
        return np.array([float(p) for p in self.probs])

    def to_dict(self) -> dict:
        if self.exact:
            return {"mu_rational": [[str(p.numerator), str(p.denominator)] for p in self.probs]}
        return {"mu": list(self.probs)}


def _to_fraction(w) -> Fraction:
    if isinstance(w, Fraction):
        return w
    if isinstance(w, (int, np.integer, Rational)):
        return Fraction(int(w)) if isinstance(w, (int, np.integer)) else Fraction(w)
    if isinstance(w, str):
        return Fraction(w)
    # decimal reading of a float: 0.7 -> 7/10, not the binary expansion
    return Fraction(repr(float(w)))


def make_measure(weights: Sequence[Number], exact: Optional[bool] = None) -> Measure:
    """Normalise positive weights into a :class:`Measure`.

    With ``exact=None`` the backend is exact when every weight is an int,
    a ``Fraction`` or a rational string, and floating otherwise.
    """
    weights = list(weights)
    if not weights:
        raise EmptyVector("empty weight vector")
    if exact is None:
        exact = all(isinstance(w, (int, np.integer, Fraction, str)) for w in weights)
    if exact:
        ws = [_to_fraction(w) for w in weights]
        bad = [i + 1 for i, w in enumerate(ws) if w <= 0]
        if bad:
            raise NonPositiveWeight(f"non-positive weight at nodes {bad}")
        total = sum(ws)
        return Measure(tuple(w / total for w in ws), True)
    ws = [float(w) for w in weights]
    bad = [i + 1 for i, w in enumerate(ws) if not w > 0]
    if bad:
        raise NonPositiveWeight(f"non-positive weight at nodes {bad}")
    total = sum(ws)
    return Measure(tuple(w / total for w in ws), False)


def uniform(q: int, exact: bool = True) -> Measure:
    return make_measure([1] * q, exact=exact)


def measure_of_set(m: Measure, nodes: Iterable[int]):
    return sum((m.probs[i - 1] for i in set(nodes)), Fraction(0) if m.exact else 0.0)


def order_stats(m: Measure):
    """``(mu_min, mu_max, alpha)`` with alpha listing nodes by increasing mass.

    Ties are broken by the smaller node id.
    """
    alpha = tuple(sorted(range(1, m.q + 1), key=lambda i: (m.probs[i - 1], i)))
    return m.probs[alpha[0] - 1], m.probs[alpha[-1] - 1], alpha


# --------------------------------------------------------------------------
# random streams


def make_rng(seed) -> np.random.Generator:
    """Philox-backed generator; ``seed`` is an int or a ``SeedSequence``."""
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return np.random.Generator(np.random.Philox(ss))


def spawn_seeds(base_seed: int, n: int) -> list[np.random.SeedSequence]:
    """Independent child seed sequences: replication ``k`` gets child ``k``."""
    return np.random.SeedSequence(base_seed).spawn(n)


def derive_seed(seed, tag: int) -> np.random.SeedSequence:
    """Side stream of ``seed`` labelled by ``tag``, without mutating ``seed``."""
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return np.random.SeedSequence(ss.entropy, spawn_key=tuple(ss.spawn_key) + (tag,))


def tie_rng(seed) -> random.Random:
    """Small generator for tie-breaking draws, derived from ``seed``."""
    child = derive_seed(seed, 0x7165)
    return random.Random(int(child.generate_state(2, np.uint64)[0]))


def _cdf(m: Measure) -> np.ndarray:
    cdf = np.cumsum(m.array())
    cdf[-1] = 1.0
    return cdf


def sample(m: Measure, rng: np.random.Generator) -> int:
    """One node drawn from ``m`` by inverse CDF."""
    u = rng.random()
    return int(np.searchsorted(_cdf(m), u, side="right")) + 1


class ArrivalStream:
    """Reproducible i.i.d. arrivals from ``m``, drawn in blocks.

    Draw ``n`` of the stream is the same whatever the block size, because
    block draws consume the generator exactly like single draws.
    """

    def __init__(self, m: Measure, seed, block: int = 1 << 16):
        self.m = m
        self.rng = make_rng(seed)
        self.cdf = _cdf(m)
        self.block = block

    def draws(self, n: int) -> np.ndarray:
        u = self.rng.random(n)
        return np.minimum(np.searchsorted(self.cdf, u, side="right"), self.m.q - 1) + 1

    def draw(self) -> int:
        return int(self.draws(1)[0])

    def blocks(self, total: int):
        """Yield python lists of 1-based node ids, ``total`` draws overall."""
        done = 0
        while done < total:
            n = min(self.block, total - done)
            yield self.draws(n).tolist()
            done += n


# --------------------------------------------------------------------------
# files


def parse_measure(data: dict, q: Optional[int] = None, exact: Optional[bool] = None) -> Measure:
    if "mu_rational" in data:
        m = make_measure([Fraction(int(n), int(d)) for n, d in data["mu_rational"]], exact=True)
    elif "mu" in data:
        m = make_measure(data["mu"], exact=exact)
    else:
        raise MeasureError("measure file needs a 'mu' or 'mu_rational' key")
    if exact is False and m.exact:
        m = m.as_float()
    if q is not None and m.q != q:
        raise MeasureError(f"measure has {m.q} entries, hypergraph has {q} nodes")
    return m


def load_measure(path, q: Optional[int] = None, exact: Optional[bool] = None) -> Measure:
    with open(path) as f:
        return parse_measure(json.load(f), q=q, exact=exact)


def dump_measure(m: Measure, path) -> None:
    with open(path, "w") as f:
        json.dump(m.to_dict(), f)
        f.write("\n")
